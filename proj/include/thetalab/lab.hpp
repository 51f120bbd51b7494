#pragma once

#include "thetalab/frames.hpp"
#include "thetalab/graph_matrix.hpp"
#include "thetalab/phase.hpp"
#include "thetalab/tensor.hpp"
#include "thetalab/theta.hpp"

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace thetalab {

using json = nlohmann::json;

inline constexpr const char* kResultVersion = "thetalab.result.v1";

enum class ExitCode : int {
  ok = 0,
  failure = 1,
  unknown_experiment = 2,
  schema_violation = 3,
  unwritable_output = 4,
  corrupt_result = 5,
};

class LabError : public std::runtime_error {
 public:
  LabError(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

struct ExperimentConfig {
  std::string experiment;
  /// Validated params with defaults filled in.
  json params = json::object();
  std::uint64_t seed = 0;
  std::string output;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::string started_at;
  double wallclock_ms = 0.0;
  /// One flat object per instance; keys as in csv_columns(experiment).
  json samples = json::array();
  json summary = json::object();
  std::string version = kResultVersion;
};

const std::vector<std::string>& experiment_names();
const std::vector<std::string>& csv_columns(const std::string& experiment);

/// Throws LabError: unknown_experiment for a bad name, schema_violation for
/// anything else that does not validate.
ExperimentConfig parse_config(const json& j);
ExperimentConfig load_config(const std::string& path);
json to_json(const ExperimentConfig& config);

/// Runs the experiment in memory; nothing is written.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Aggregates recomputed from the samples alone. Each summary carries
/// "groups" (per size or parameter), "checks" (name, value, lo, hi, pass)
/// against the built-in acceptance thresholds, and an overall "pass".
json summarize(const ExperimentConfig& config, const json& samples);

json to_json(const ExperimentResult& result);
/// Validates the schema and recomputes the summary; throws LabError
/// corrupt_result naming the first offending field.
ExperimentResult result_from_json(const json& j);
ExperimentResult load_result(const std::string& path);

/// Write to a temporary sibling, then rename. Throws LabError unwritable_output.
void write_atomic(const std::string& path, const std::string& text);

/// load_config, run_experiment, write_atomic; returns the output path.
std::string run(const std::string& config_path);

std::string report_csv(const ExperimentResult& result);
std::string report_summary(const ExperimentResult& result);

std::vector<std::uint64_t> derive_seeds(std::uint64_t master, const std::vector<std::string>& labels);

// Domain types.
json to_json(const ThetaResult& r);
json to_json(const SweepResult& r);
json to_json(const VerificationReport& r);
json to_json(const FrameMatrix& frame);
FrameMatrix frame_from_json(const json& j);
json to_json(const ExponentFit& fit);
json to_json(const SymTensor& t);
SymTensor tensor_from_json(const json& j);
json to_json(const RatioSweep& sweep);

}  // namespace thetalab
