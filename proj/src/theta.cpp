#include "thetalab/theta.hpp"

#include "thetalab/invariants.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace thetalab {

std::string to_string(ThetaMethod method) {
  switch (method) {
    case ThetaMethod::lp_time_primal:
      return "lp-time-primal";
    case ThetaMethod::lp_freq_primal:
      return "lp-freq-primal";
    case ThetaMethod::lp_freq_dual:
      return "lp-freq-dual";
    case ThetaMethod::lp_time_dual:
      return "lp-time-dual";
    case ThetaMethod::sdp:
      return "sdp";
  }
  return "unknown";
}

ThetaMethod method_from_string(const std::string& name) {
  for (auto m : {ThetaMethod::lp_time_primal, ThetaMethod::lp_freq_primal,
                 ThetaMethod::lp_freq_dual, ThetaMethod::lp_time_dual, ThetaMethod::sdp}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown theta method '" + name + "'");
}

ThetaMethod method_of(CirculantFormulation formulation) {
  switch (formulation) {
    case CirculantFormulation::time_primal:
      return ThetaMethod::lp_time_primal;
    case CirculantFormulation::time_dual:
      return ThetaMethod::lp_time_dual;
    case CirculantFormulation::freq_primal:
      return ThetaMethod::lp_freq_primal;
    case CirculantFormulation::freq_dual:
      return ThetaMethod::lp_freq_dual;
  }
  throw std::invalid_argument("bad formulation");
}

namespace {

bool is_minimization(CirculantFormulation f) {
  return f == CirculantFormulation::time_dual || f == CirculantFormulation::freq_dual;
}

// Multiplicity of folded index j among 0..n-1.
double fold_weight(int j, int n) { return (j == 0 || 2 * j == n) ? 1.0 : 2.0; }

// Row k of the real DFT acting on folded symmetric vectors.
Eigen::RowVectorXd cosine_row(int k, int n) {
  const int h = n / 2;
  Eigen::RowVectorXd row(h + 1);
  for (int j = 0; j <= h; ++j) {
    const long long phase = (static_cast<long long>(j) * k) % n;
    row(j) = fold_weight(j, n) * std::cos(2.0 * std::numbers::pi * static_cast<double>(phase) / n);
  }
  return row;
}

Eigen::RowVectorXd unit_row(int j, int size) {
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(size);
  row(j) = 1.0;
  return row;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

LpProblem circulant_lp(const CirculantSpec& spec, CirculantFormulation formulation) {
  const int n = spec.n();
  if (n > kCirculantLpCap) {
    throw std::length_error("circulant LP needs n <= " + std::to_string(kCirculantLpCap));
  }
  const int h = n / 2;
  const int vars = h + 1;
  LpProblem lp(vars);
  Eigen::RowVectorXd weights(vars);
  for (int j = 0; j <= h; ++j) weights(j) = fold_weight(j, n);

  switch (formulation) {
    case CirculantFormulation::freq_primal: {
      // max n y_0 : sum y = 1, y >= 0, <y, f_k> = 0 on edges (0, k)
      lp.objective(0) = n;
      lp.add_eq(weights, 1.0);
      for (int k : spec.conn()) lp.add_eq(cosine_row(k, n), 0.0);
      break;
    }
    case CirculantFormulation::time_primal: {
      // max sum x : x_0 = 1, Fx >= 0, x_k = 0 on edges (0, k); x free
      lp.objective = weights.transpose();
      for (int j = 0; j <= h; ++j) lp.set_free(j);
      lp.add_eq(unit_row(0, vars), 1.0);
      for (int k : spec.conn()) lp.add_eq(unit_row(k, vars), 0.0);
      for (int k = 0; k <= h; ++k) lp.add_ineq(-cosine_row(k, n), 0.0);
      break;
    }
    case CirculantFormulation::time_dual: {
      // min 1 + sum z : z >= 0, <z, f_k> = -1 on non-edges (0, k), k != 0
      lp.objective = -weights.transpose();
      for (int k = 1; k <= h; ++k) {
        if (!spec.contains(k)) lp.add_eq(cosine_row(k, n), -1.0);
      }
      break;
    }
    case CirculantFormulation::freq_dual: {
      // min 1 + n t_0 : Ft >= 0, t_k = -1/n on non-edges (0, k), k != 0; t free
      lp.objective(0) = -static_cast<double>(n);
      for (int j = 0; j <= h; ++j) lp.set_free(j);
      for (int k = 1; k <= h; ++k) {
        if (!spec.contains(k)) lp.add_eq(unit_row(k, vars), -1.0 / n);
      }
      for (int k = 0; k <= h; ++k) lp.add_ineq(-cosine_row(k, n), 0.0);
      break;
    }
  }
  return lp;
}

Eigen::VectorXd unfold_symmetric(const Eigen::VectorXd& folded, int n) {
  if (folded.size() != n / 2 + 1) throw std::invalid_argument("folded length must be n/2 + 1");
  Eigen::VectorXd full(n);
  for (int j = 0; j < n; ++j) full(j) = folded(std::min(j, n - j));
  return full;
}

ThetaResult theta_circulant(const CirculantSpec& spec, CirculantFormulation formulation) {
  const auto start = std::chrono::steady_clock::now();
  const LpProblem lp = circulant_lp(spec, formulation);
  const LpSolution sol = lp_solve(lp, 1e-9);
  if (sol.status != LpStatus::optimal) {
    // Every program here is feasible and bounded; anything else is a bug.
    throw std::logic_error("circulant theta LP returned " + to_string(sol.status));
  }
  ThetaResult out;
  out.method = method_of(formulation);
  out.n = spec.n();
  out.conn = spec.conn();
  out.value = is_minimization(formulation) ? 1.0 - sol.value : sol.value;
  out.gap = std::abs(sol.value - sol.dual_value);
  out.primal_witness = unfold_symmetric(sol.primal, spec.n());
  Eigen::VectorXd duals(sol.dual_eq.size() + sol.dual_ineq.size());
  duals << sol.dual_eq, sol.dual_ineq;
  out.dual_certificate = duals;
  out.iterations = sol.pivots;
  out.wallclock_ms = elapsed_ms(start);
  return out;
}

ThetaResult theta_circulant_bracket(const CirculantSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  const ThetaResult primal = theta_circulant(spec, CirculantFormulation::freq_primal);
  const ThetaResult dual = theta_circulant(spec, CirculantFormulation::freq_dual);
  const double lo = primal.lower();
  const double hi = dual.upper();
  ThetaResult out = primal;
  out.value = 0.5 * (lo + hi);
  out.gap = 0.5 * std::abs(hi - lo);
  out.dual_certificate = dual.primal_witness;
  out.iterations = primal.iterations + dual.iterations;
  out.wallclock_ms = elapsed_ms(start);
  return out;
}

SandwichReport sandwich_report(const Graph& g, double slack) {
  if (g.size() > kExactInvariantCap) {
    throw std::length_error("sandwich report needs n <= 32");
  }
  SandwichReport r;
  r.clique = clique_number(g);
  r.chromatic = chromatic_number(g);
  r.theta_complement = theta_sdp(complement(g)).value;
  r.holds = r.clique <= r.theta_complement + slack && r.theta_complement <= r.chromatic + slack;
  return r;
}

ProductIdentity product_identity_check(const CirculantSpec& spec) {
  if (spec.n() > kProductIdentityCap) {
    throw std::length_error("product identity check needs n <= " +
                            std::to_string(kProductIdentityCap));
  }
  ProductIdentity out;
  out.theta_g = theta_circulant(spec).value;
  out.theta_complement = theta_circulant(complement(spec)).value;
  out.product = out.theta_g * out.theta_complement;
  return out;
}

ShannonBounds shannon_bounds(const Graph& g, int k) {
  ShannonBounds out;
  const Graph power = strong_power(g, k);
  out.alpha = independence_number(g);
  out.alpha_power = independence_number(power);
  out.lower = std::pow(static_cast<double>(out.alpha_power), 1.0 / k);
  out.theta = theta_sdp(g).value;
  return out;
}

std::uint64_t edges_hash(const Graph& g) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 4; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<std::uint64_t>(g.size()));
  for (const auto& [i, j] : g.edges()) {
    mix(static_cast<std::uint64_t>(i));
    mix(static_cast<std::uint64_t>(j));
  }
  return h;
}

}  // namespace thetalab
