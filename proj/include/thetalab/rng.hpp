#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string_view>

namespace thetalab {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijection on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives a child seed from a master seed and a label (FNV-1a over
/// master||label, then a SplitMix64 finalizer). Stable across versions.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

/// Convenience overload for numeric stream keys such as (M, trial).
std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::uint64_t a, std::uint64_t b = 0);

/// Worker count: LAB_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, count). Each index is processed exactly once;
/// callers write results into index-addressed slots so that the outcome does
/// not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace thetalab
