#include "thetalab/lab.hpp"

#include "thetalab/graph.hpp"
#include "thetalab/invariants.hpp"
#include "thetalab/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <unistd.h>

namespace thetalab {

namespace {

enum class Kind { integer, int_list, number, string };

struct ParamSpec {
  std::string name;
  Kind kind;
  json fallback;  // null: required
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

using Schema = std::vector<ParamSpec>;

const std::map<std::string, Schema>& schemas() {
  static const std::map<std::string, Schema> table = {
      {"theta-er-sweep",
       {{"n", Kind::int_list, json(), 2, kSdpCap},
        {"trials", Kind::integer, 10, 1, 1000},
        {"p", Kind::number, 0.5, 0, 1}}},
      {"theta-circulant-sweep",
       {{"n", Kind::int_list, json(), 3, kCirculantLpCap}, {"trials", Kind::integer, 20, 1, 1000}}},
      {"paley-localization", {{"p", Kind::int_list, json::array({101, 229, 401}), 5, kCirculantLpCap}}},
      {"phase-omega-sweep",
       {{"m_lo", Kind::integer, 3, 2, 12},
        {"m_hi", Kind::integer, 10, 2, 12},
        {"trials", Kind::integer, 200, 50, 100000}}},
      {"frames-verify",
       {{"mub_d", Kind::int_list, json::array({2, 3, 5, 7, 11}), 2, 1000},
        {"etf_p", Kind::int_list, json::array({13, 17, 29}), 5, 2000},
        {"tol", Kind::number, 1e-10, 0, 1},
        {"etf_tol", Kind::number, 1e-9, 0, 1},
        {"rip_p", Kind::integer, 53, 5, 2000},
        {"rip_m", Kind::integer, 8, 0, 2000},
        {"rip_trials", Kind::integer, 500, 1, 1000000}}},
      {"sic-search",
       {{"d", Kind::int_list, json::array({2, 3}), 2, 8},
        {"restarts", Kind::integer, 64, 1, 10000},
        {"iters", Kind::integer, 2000, 1, 1000000}}},
      {"gmatrix-sweep",
       {{"shape", Kind::string, "shape U: a | V: b | E: (a,b)"},
        {"n", Kind::int_list, json::array({50, 100, 200, 400, 800}), 1, 100000},
        {"trials", Kind::integer, 5, 1, 10000}}},
      {"tensor-ratio-sweep",
       {{"family", Kind::string, "random-rank-one"},
        {"d", Kind::int_list, json(), 1, 1000},
        {"r", Kind::integer, 2, 2, 3},
        {"p", Kind::number, 2.0, 2, 4},
        {"trials", Kind::integer, 50, 10, 100000},
        {"restarts", Kind::integer, 8, 1, 10000}}},
      {"sandwich-audit",
       {{"count", Kind::integer, 200, 1, 100000},
        {"n_min", Kind::integer, 3, 1, kExactInvariantCap},
        {"n_max", Kind::integer, 10, 1, kExactInvariantCap},
        {"edge_p", Kind::number, 0.5, 0, 1}}},
  };
  return table;
}

[[noreturn]] void schema_error(const std::string& what) {
  throw LabError(ExitCode::schema_violation, "schema violation: " + what);
}

void check_range(const ParamSpec& spec, double v, const std::string& where) {
  if (!(v >= spec.lo && v <= spec.hi)) {
    std::ostringstream msg;
    msg << where << " = " << v << " outside [" << spec.lo << ", " << spec.hi << "]";
    schema_error(msg.str());
  }
}

json validate_param(const ParamSpec& spec, const json& v) {
  const std::string where = "params." + spec.name;
  switch (spec.kind) {
    case Kind::integer:
      if (!v.is_number_integer()) schema_error(where + " must be an integer");
      check_range(spec, v.get<double>(), where);
      return v;
    case Kind::int_list:
      if (!v.is_array() || v.empty()) schema_error(where + " must be a non-empty integer list");
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number_integer()) schema_error(where + "[" + std::to_string(i) + "] must be an integer");
        check_range(spec, v[i].get<double>(), where + "[" + std::to_string(i) + "]");
      }
      return v;
    case Kind::number:
      if (!v.is_number()) schema_error(where + " must be a number");
      check_range(spec, v.get<double>(), where);
      return json(v.get<double>());
    case Kind::string:
      if (!v.is_string()) schema_error(where + " must be a string");
      return v;
  }
  return v;
}

// Cross-field rules that the per-parameter table cannot express.
void validate_extra(const std::string& experiment, const json& p) {
  if (experiment == "paley-localization") {
    for (int q : p["p"].get<std::vector<int>>()) {
      if (!is_prime(q) || q % 4 != 1) schema_error("params.p: " + std::to_string(q) + " is not a prime = 1 mod 4");
    }
  } else if (experiment == "phase-omega-sweep") {
    if (p["m_lo"].get<int>() > p["m_hi"].get<int>()) schema_error("params.m_lo exceeds params.m_hi");
  } else if (experiment == "frames-verify") {
    for (int d : p["mub_d"].get<std::vector<int>>()) {
      if (!is_prime(d)) schema_error("params.mub_d: " + std::to_string(d) + " is not prime");
    }
    for (int q : p["etf_p"].get<std::vector<int>>()) {
      if (!is_prime(q) || q % 4 != 1) schema_error("params.etf_p: " + std::to_string(q) + " is not a prime = 1 mod 4");
    }
    const int rip_p = p["rip_p"].get<int>();
    if (p["rip_m"].get<int>() > 0 && (!is_prime(rip_p) || rip_p % 4 != 1)) {
      schema_error("params.rip_p is not a prime = 1 mod 4");
    }
    if (p["rip_m"].get<int>() > rip_p + 1) schema_error("params.rip_m exceeds the frame size");
  } else if (experiment == "gmatrix-sweep") {
    try {
      shape_from_text(p["shape"].get<std::string>());
    } catch (const std::exception& e) {
      schema_error(std::string("params.shape: ") + e.what());
    }
    std::vector<int> n = p["n"].get<std::vector<int>>();
    std::sort(n.begin(), n.end());
    if (std::unique(n.begin(), n.end()) - n.begin() < 4) schema_error("params.n needs 4 distinct sizes");
  } else if (experiment == "tensor-ratio-sweep") {
    const std::string family = p["family"].get<std::string>();
    if (family != "random-rank-one" && family != "coordinate" && family != "random-symmetric-entries" &&
        family != "single-term") {
      schema_error("params.family: unknown family '" + family + "'");
    }
    const double q = p["p"].get<double>();
    if (q != 2.0 && q != 4.0) schema_error("params.p must be 2 or 4");
  } else if (experiment == "sandwich-audit") {
    if (p["n_min"].get<int>() > p["n_max"].get<int>()) schema_error("params.n_min exceeds params.n_max");
  }
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, schema] : schemas()) out.push_back(name);
    return out;
  }();
  return names;
}

const std::vector<std::string>& csv_columns(const std::string& experiment) {
  static const std::map<std::string, std::vector<std::string>> columns = {
      {"theta-er-sweep", {"n", "trial", "theta", "gap", "converged"}},
      {"theta-circulant-sweep", {"n", "trial", "theta", "gap"}},
      {"paley-localization", {"p", "m", "theta", "gap", "ratio"}},
      {"phase-omega-sweep", {"M", "trial", "omega", "max_row_norm"}},
      {"frames-verify",
       {"kind", "param", "draw", "norm_dev", "orthogonality_dev", "unbiasedness_dev", "equiangularity_dev",
        "tightness_dev", "coherence", "welch_bound", "condition"}},
      {"sic-search", {"d", "coherence", "target", "best_restart"}},
      {"gmatrix-sweep", {"n", "trial", "norm"}},
      {"tensor-ratio-sweep", {"d", "trial", "lhs", "rhs", "aw_rhs"}},
      {"sandwich-audit", {"index", "n", "edges", "clique", "theta_complement", "chromatic"}},
  };
  const auto it = columns.find(experiment);
  if (it == columns.end()) throw LabError(ExitCode::unknown_experiment, "unknown experiment '" + experiment + "'");
  return it->second;
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) schema_error("config must be a JSON object");
  if (!j.contains("experiment") || !j["experiment"].is_string()) schema_error("experiment must be a string");
  ExperimentConfig config;
  config.experiment = j["experiment"].get<std::string>();
  const auto it = schemas().find(config.experiment);
  if (it == schemas().end()) {
    throw LabError(ExitCode::unknown_experiment, "unknown experiment '" + config.experiment + "'");
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "experiment" && key != "params" && key != "seed" && key != "output") {
      schema_error("unknown field '" + key + "'");
    }
  }
  if (!j.contains("seed") || !j["seed"].is_number_integer() ||
      (!j["seed"].is_number_unsigned() && j["seed"].get<std::int64_t>() < 0)) {
    schema_error("seed must be a non-negative integer");
  }
  config.seed = j["seed"].get<std::uint64_t>();
  if (!j.contains("output") || !j["output"].is_string() || j["output"].get<std::string>().empty()) {
    schema_error("output must be a file path");
  }
  config.output = j["output"].get<std::string>();

  const json params = j.value("params", json::object());
  if (!params.is_object()) schema_error("params must be an object");
  const Schema& schema = it->second;
  for (const auto& [key, value] : params.items()) {
    if (std::none_of(schema.begin(), schema.end(), [&](const ParamSpec& s) { return s.name == key; })) {
      schema_error("unknown parameter params." + key + " for " + config.experiment);
    }
  }
  for (const auto& spec : schema) {
    if (params.contains(spec.name)) {
      config.params[spec.name] = validate_param(spec, params[spec.name]);
    } else if (spec.fallback.is_null()) {
      schema_error("params." + spec.name + " is required");
    } else {
      config.params[spec.name] = spec.fallback;
    }
  }
  validate_extra(config.experiment, config.params);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) schema_error("cannot read config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    schema_error(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& config) {
  return {{"experiment", config.experiment},
          {"params", config.params},
          {"seed", config.seed},
          {"output", config.output}};
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

double number_or_inf(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
}

json check(const std::string& name, double value, double lo, double hi) {
  const bool pass = std::isfinite(value) && value >= lo && value <= hi;
  return {{"name", name}, {"value", finite_or_null(value)}, {"lo", lo}, {"hi", hi}, {"pass", pass}};
}

json check_open(const std::string& name, double value, double lo, double hi) {
  json c = check(name, value, lo, hi);
  c["pass"] = std::isfinite(value) && value > lo && value < hi;
  c["open"] = true;
  return c;
}

std::string label(const std::string& key, double v) {
  std::ostringstream s;
  s << key << "=" << v;
  return s.str();
}

// Sample indices grouped by a key, in order of first appearance.
std::vector<std::pair<double, std::vector<std::size_t>>> group_by(const json& samples, const std::string& key) {
  std::vector<std::pair<double, std::vector<std::size_t>>> groups;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double k = samples[i][key].get<double>();
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == k; });
    if (it == groups.end()) {
      groups.push_back({k, {}});
      it = groups.end() - 1;
    }
    it->second.push_back(i);
  }
  return groups;
}

double mean_of(const json& samples, const std::vector<std::size_t>& idx, const std::string& key) {
  double sum = 0.0;
  for (std::size_t i : idx) sum += samples[i][key].get<double>();
  return sum / static_cast<double>(idx.size());
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::infinity();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

json theta_sweep_summary(const json& samples, double lo, double hi) {
  json groups = json::array();
  json checks = json::array();
  for (const auto& [n, idx] : group_by(samples, "n")) {
    const double mean = mean_of(samples, idx, "theta");
    const double ratio = mean / std::sqrt(n);
    groups.push_back({{"n", n}, {"trials", idx.size()}, {"mean_theta", mean}, {"mean_over_sqrt_n", ratio}});
    checks.push_back(check(label("mean theta / sqrt(n), n", n), ratio, lo, hi));
  }
  return {{"groups", groups}, {"checks", checks}};
}

json summary_paley(const json& samples) {
  json groups = json::array();
  json checks = json::array();
  for (const auto& s : samples) {
    const double p = s["p"].get<double>();
    const double ratio = s["theta"].get<double>() / std::sqrt(p / 2.0);
    groups.push_back({{"p", p}, {"m", s["m"]}, {"theta", s["theta"]}, {"ratio", ratio}});
    checks.push_back(check(label("theta(complement G_p1) / sqrt(p/2), p", p), ratio, 0.90, 1.10));
  }
  return {{"groups", groups}, {"checks", checks}};
}

json summary_phase(const json& samples) {
  json groups = json::array();
  std::vector<int> m_values;
  std::vector<double> means;
  for (const auto& [m, idx] : group_by(samples, "M")) {
    std::vector<double> omegas;
    for (std::size_t i : idx) omegas.push_back(samples[i]["omega"].get<double>());
    const double mean = std::accumulate(omegas.begin(), omegas.end(), 0.0) / static_cast<double>(omegas.size());
    groups.push_back({{"M", m}, {"trials", idx.size()}, {"mean_omega", mean}, {"median_omega", quantile(omegas, 0.5)}});
    m_values.push_back(static_cast<int>(m));
    means.push_back(mean);
  }
  json checks = json::array();
  json fit = json::object();
  if (m_values.size() >= 2) {
    const DecayFit f = fit_decay(m_values, means);
    fit = {{"beta_hat", f.beta_hat}, {"intercept", f.intercept}, {"fit_residual", f.fit_residual}};
    checks.push_back(check_open("beta_hat", f.beta_hat, 0.0, 1.0));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < means.size(); ++i) monotone = monotone && means[i] < means[i - 1];
  checks.push_back(check("mean omega strictly decreasing in M", monotone ? 1.0 : 0.0, 1.0, 1.0));
  return {{"groups", groups}, {"fit", fit}, {"checks", checks}};
}

json summary_frames(const ExperimentConfig& config, const json& samples) {
  const double tol = config.params["tol"].get<double>();
  const double etf_tol = config.params["etf_tol"].get<double>();
  json groups = json::array();
  json checks = json::array();
  std::vector<double> conds;
  int deficient = 0;
  int draws = 0;
  for (const auto& s : samples) {
    const std::string kind = s["kind"].get<std::string>();
    const double param = s["param"].get<double>();
    if (kind == "mub") {
      const double dev = std::max({s["norm_dev"].get<double>(), s["orthogonality_dev"].get<double>(),
                                   s["unbiasedness_dev"].get<double>()});
      groups.push_back({{"kind", kind}, {"d", param}, {"max_deviation", dev}});
      checks.push_back(check(label("MUB max deviation, d", param), dev, 0.0, tol));
    } else if (kind == "etf") {
      const double gap = std::abs(s["coherence"].get<double>() - s["welch_bound"].get<double>());
      groups.push_back({{"kind", kind},
                        {"p", param},
                        {"tightness_dev", s["tightness_dev"]},
                        {"equiangularity_dev", s["equiangularity_dev"]},
                        {"coherence_minus_welch", gap}});
      checks.push_back(check(label("ETF norm deviation, p", param), s["norm_dev"].get<double>(), 0.0, etf_tol));
      checks.push_back(check(label("ETF tightness deviation, p", param), s["tightness_dev"].get<double>(), 0.0, etf_tol));
      checks.push_back(check(label("ETF equiangularity spread, p", param),
                             s["equiangularity_dev"].get<double>(), 0.0, etf_tol));
      checks.push_back(check(label("ETF |coherence - Welch|, p", param), gap, 0.0, etf_tol));
    } else {
      ++draws;
      const double c = number_or_inf(s["condition"]);
      if (std::isfinite(c)) {
        conds.push_back(c);
      } else {
        ++deficient;
      }
    }
  }
  if (draws > 0) {
    groups.push_back({{"kind", "rip"},
                      {"p", config.params["rip_p"]},
                      {"m", config.params["rip_m"]},
                      {"draws", draws},
                      {"rank_deficient", deficient},
                      {"q10", finite_or_null(quantile(conds, 0.10))},
                      {"q50", finite_or_null(quantile(conds, 0.50))},
                      {"q90", finite_or_null(quantile(conds, 0.90))},
                      {"q99", finite_or_null(quantile(conds, 0.99))},
                      {"max", finite_or_null(quantile(conds, 1.0))}});
    checks.push_back(check("RIP rank-deficient draws", deficient, 0.0, 0.0));
  }
  return {{"groups", groups}, {"checks", checks}};
}

json summary_sic(const json& samples) {
  json groups = json::array();
  json checks = json::array();
  for (const auto& s : samples) {
    const double gap = std::abs(s["coherence"].get<double>() - s["target"].get<double>());
    groups.push_back({{"d", s["d"]}, {"coherence", s["coherence"]}, {"target", s["target"]}});
    checks.push_back(check(label("SIC |coherence - 1/sqrt(d+1)|, d", s["d"].get<double>()), gap, 0.0, 1e-6));
  }
  return {{"groups", groups}, {"checks", checks}};
}

json summary_gmatrix(const ExperimentConfig& config, const json& samples) {
  const CheckedShape shape = shape_from_text(config.params["shape"].get<std::string>());
  json groups = json::array();
  std::vector<double> logn;
  std::vector<double> logm;
  for (const auto& [n, idx] : group_by(samples, "n")) {
    const double mean = mean_of(samples, idx, "norm");
    groups.push_back({{"n", n}, {"trials", idx.size()}, {"mean_norm", mean}});
    logn.push_back(std::log(n));
    logm.push_back(std::log(mean));
  }
  const auto count = static_cast<Eigen::Index>(logn.size());
  Eigen::MatrixXd design(count, 2);
  design.col(0).setOnes();
  design.col(1) = Eigen::Map<Eigen::VectorXd>(logn.data(), count);
  const Eigen::Map<Eigen::VectorXd> target(logm.data(), count);
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(target);
  const Eigen::VectorXd residual = target - design * coef;
  json fit = {{"shape_hash", std::to_string(shape_hash(shape))},
              {"f_hat", coef(1)},
              {"intercept", coef(0)},
              {"fit_residuals", std::vector<double>(residual.data(), residual.data() + count)}};
  json checks = json::array();
  const bool edge_shape = shape.left_size == 1 && shape.right_size == 1 && shape.edges.size() == 1;
  if (edge_shape) checks.push_back(check("edge shape f_hat", coef(1), 0.45, 0.55));
  return {{"groups", groups}, {"fit", fit}, {"checks", checks}};
}

json summary_tensor(const ExperimentConfig& config, const json& samples) {
  const int r = config.params["r"].get<int>();
  const double p = config.params["p"].get<double>();
  const std::string family = config.params["family"].get<std::string>();
  json groups = json::array();
  json checks = json::array();
  for (const auto& [d, idx] : group_by(samples, "d")) {
    const double mean = mean_of(samples, idx, "lhs");
    double var = 0.0;
    for (std::size_t i : idx) var += std::pow(samples[i]["lhs"].get<double>() - mean, 2);
    const double stderr_ = std::sqrt(var / static_cast<double>(idx.size() - 1) / static_cast<double>(idx.size()));
    const double rhs = samples[idx[0]]["rhs"].get<double>();
    json g = {{"d", d}, {"trials", idx.size()}, {"lhs_mean", mean}, {"lhs_stderr", stderr_}, {"rhs", rhs},
              {"ratio", mean / rhs}};
    if (r == 2 && p == 2.0) {
      const double aw = samples[idx[0]]["aw_rhs"].get<double>();
      g["aw_rhs"] = aw;
      g["aw_ratio"] = mean / aw;
      if (family == "coordinate" || family == "random-rank-one") {
        checks.push_back(check(label("LHS / (sqrt(log(d+1)) sqrt(sum |M_i|^2)), d", d), mean / aw, 0.0, 3.0));
      }
    }
    if (r == 2 && p == 4.0 && family == "random-rank-one") {
      checks.push_back(check(label("LHS / nck_rhs, d", d), mean / rhs, 0.0, 5.0 * std::log(d + 1.0)));
    }
    groups.push_back(g);
  }
  return {{"groups", groups}, {"checks", checks}};
}

json summary_sandwich(const json& samples) {
  int violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    const double clique = s["clique"].get<double>();
    const double theta = s["theta_complement"].get<double>();
    const double chi = s["chromatic"].get<double>();
    worst = std::max({worst, clique - theta, theta - chi});
    if (!(clique <= theta + 1e-4 && theta <= chi + 1e-4)) ++violations;
  }
  json groups = json::array({{{"instances", samples.size()}, {"worst_slack_used", finite_or_null(worst)}}});
  json checks = json::array({check("sandwich violations", violations, 0.0, 0.0)});
  return {{"groups", groups}, {"checks", checks}};
}

}  // namespace

json summarize(const ExperimentConfig& config, const json& samples) {
  json s;
  const std::string& e = config.experiment;
  if (e == "theta-er-sweep") {
    s = theta_sweep_summary(samples, 0.9, 1.5);
  } else if (e == "theta-circulant-sweep") {
    s = theta_sweep_summary(samples, 0.95, 1.35);
  } else if (e == "paley-localization") {
    s = summary_paley(samples);
  } else if (e == "phase-omega-sweep") {
    s = summary_phase(samples);
  } else if (e == "frames-verify") {
    s = summary_frames(config, samples);
  } else if (e == "sic-search") {
    s = summary_sic(samples);
  } else if (e == "gmatrix-sweep") {
    s = summary_gmatrix(config, samples);
  } else if (e == "tensor-ratio-sweep") {
    s = summary_tensor(config, samples);
  } else if (e == "sandwich-audit") {
    s = summary_sandwich(samples);
  } else {
    throw LabError(ExitCode::unknown_experiment, "unknown experiment '" + e + "'");
  }
  bool pass = true;
  for (const auto& c : s["checks"]) pass = pass && c["pass"].get<bool>();
  s["pass"] = pass;
  // Same text form as the file, so the load-time comparison is exact.
  return json::parse(s.dump());
}

namespace {

json run_theta_er(const ExperimentConfig& c) {
  const auto ns = c.params["n"].get<std::vector<int>>();
  const int trials = c.params["trials"].get<int>();
  const double p = c.params["p"].get<double>();
  std::vector<ThetaResult> out(ns.size() * trials);
  parallel_for(out.size(), [&](std::size_t job) {
    const int n = ns[job / trials];
    const auto t = static_cast<std::uint64_t>(job % trials);
    out[job] = theta_sdp(sample_er(n, p, derive_seed(c.seed, "er", n, t)));
  });
  json samples = json::array();
  for (std::size_t job = 0; job < out.size(); ++job) {
    samples.push_back({{"n", ns[job / trials]},
                       {"trial", job % trials},
                       {"theta", out[job].value},
                       {"gap", out[job].gap},
                       {"converged", out[job].converged ? 1 : 0}});
  }
  return samples;
}

json run_theta_circulant(const ExperimentConfig& c) {
  const auto ns = c.params["n"].get<std::vector<int>>();
  const int trials = c.params["trials"].get<int>();
  std::vector<ThetaResult> out(ns.size() * trials);
  parallel_for(out.size(), [&](std::size_t job) {
    const int n = ns[job / trials];
    const auto t = static_cast<std::uint64_t>(job % trials);
    out[job] = theta_circulant(sample_random_circulant(n, derive_seed(c.seed, "circulant", n, t)));
  });
  json samples = json::array();
  for (std::size_t job = 0; job < out.size(); ++job) {
    samples.push_back({{"n", ns[job / trials]}, {"trial", job % trials}, {"theta", out[job].value}, {"gap", out[job].gap}});
  }
  return samples;
}

json run_paley(const ExperimentConfig& c) {
  json samples = json::array();
  for (int p : c.params["p"].get<std::vector<int>>()) {
    const PaleyLocalization loc = paley_localization(p);
    const ThetaResult r = theta_circulant(complement(loc.spec));
    samples.push_back({{"p", p},
                       {"m", loc.spec.n()},
                       {"theta", r.value},
                       {"gap", r.gap},
                       {"ratio", r.value / std::sqrt(p / 2.0)}});
  }
  return samples;
}

json run_phase(const ExperimentConfig& c) {
  const SweepResult r = omega_gaussian_sweep(c.params["m_lo"].get<int>(), c.params["m_hi"].get<int>(),
                                             c.params["trials"].get<int>(), c.seed);
  json samples = json::array();
  for (std::size_t i = 0; i < r.m_values.size(); ++i) {
    for (int t = 0; t < r.trials; ++t) {
      samples.push_back({{"M", r.m_values[i]},
                         {"trial", t},
                         {"omega", r.omegas[i][t]},
                         {"max_row_norm", r.max_row_norms[i][t]}});
    }
  }
  return samples;
}

json frame_row(const std::string& kind, int param, int draw) {
  json row;
  for (const auto& col : csv_columns("frames-verify")) row[col] = nullptr;
  row["kind"] = kind;
  row["param"] = param;
  row["draw"] = draw;
  return row;
}

json run_frames(const ExperimentConfig& c) {
  json samples = json::array();
  const double tol = c.params["tol"].get<double>();
  for (int d : c.params["mub_d"].get<std::vector<int>>()) {
    const VerificationReport r = verify_mub(mub_prime(d), tol);
    json row = frame_row("mub", d, 0);
    row["norm_dev"] = r.max_norm_dev;
    row["orthogonality_dev"] = r.max_orthogonality_dev;
    row["unbiasedness_dev"] = r.max_unbiasedness_dev;
    samples.push_back(row);
  }
  for (int p : c.params["etf_p"].get<std::vector<int>>()) {
    const VerificationReport r = verify_etf(paley_etf(p), c.params["etf_tol"].get<double>());
    json row = frame_row("etf", p, 0);
    row["norm_dev"] = r.max_norm_dev;
    row["equiangularity_dev"] = r.max_equiangularity_dev;
    row["tightness_dev"] = r.tightness_dev;
    row["coherence"] = r.coherence;
    row["welch_bound"] = r.welch_bound;
    samples.push_back(row);
  }
  const int m = c.params["rip_m"].get<int>();
  if (m > 0) {
    const int p = c.params["rip_p"].get<int>();
    const ConditionStats stats =
        rip_condition_sample(paley_etf(p), m, c.params["rip_trials"].get<int>(), derive_seed(c.seed, "rip"));
    for (std::size_t t = 0; t < stats.condition_numbers.size(); ++t) {
      json row = frame_row("rip", p, static_cast<int>(t));
      row["condition"] = finite_or_null(stats.condition_numbers[t]);
      samples.push_back(row);
    }
  }
  return samples;
}

json run_sic(const ExperimentConfig& c) {
  json samples = json::array();
  for (int d : c.params["d"].get<std::vector<int>>()) {
    const SicResult r = sic_search(d, c.params["restarts"].get<int>(), c.params["iters"].get<int>(),
                                   derive_seed(c.seed, "sic-search", d));
    samples.push_back({{"d", d},
                       {"coherence", r.coherence},
                       {"target", 1.0 / std::sqrt(d + 1.0)},
                       {"best_restart", r.best_restart}});
  }
  return samples;
}

json run_gmatrix(const ExperimentConfig& c) {
  const CheckedShape shape = shape_from_text(c.params["shape"].get<std::string>());
  const ExponentFit fit =
      exponent_sweep(shape, c.params["n"].get<std::vector<int>>(), c.params["trials"].get<int>(), c.seed);
  json samples = json::array();
  for (std::size_t i = 0; i < fit.n_values.size(); ++i) {
    for (int t = 0; t < fit.trials; ++t) {
      samples.push_back({{"n", fit.n_values[i]}, {"trial", t}, {"norm", fit.norms[i][t]}});
    }
  }
  return samples;
}

json run_tensor(const ExperimentConfig& c) {
  const RatioSweep sweep = conjecture_ratio_sweep(
      c.params["family"].get<std::string>(), c.params["d"].get<std::vector<int>>(), c.params["r"].get<int>(),
      c.params["p"].get<double>(), c.params["trials"].get<int>(), c.params["restarts"].get<int>(), c.seed);
  json samples = json::array();
  for (std::size_t i = 0; i < sweep.d_values.size(); ++i) {
    for (std::size_t t = 0; t < sweep.lhs_samples[i].size(); ++t) {
      samples.push_back({{"d", sweep.d_values[i]},
                         {"trial", t},
                         {"lhs", sweep.lhs_samples[i][t]},
                         {"rhs", sweep.rhs[i]},
                         {"aw_rhs", sweep.aw_rhs.empty() ? json() : json(sweep.aw_rhs[i])}});
    }
  }
  return samples;
}

json run_sandwich(const ExperimentConfig& c) {
  const int count = c.params["count"].get<int>();
  const int n_min = c.params["n_min"].get<int>();
  const int span = c.params["n_max"].get<int>() - n_min + 1;
  const double p = c.params["edge_p"].get<double>();
  std::vector<int> sizes(count);
  std::vector<std::size_t> edges(count);
  std::vector<SandwichReport> out(count);
  parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
    sizes[i] = n_min + static_cast<int>(i % span);
    const Graph g = sample_er(sizes[i], p, derive_seed(c.seed, "sandwich", i));
    edges[i] = g.edge_count();
    out[i] = sandwich_report(g);
  });
  json samples = json::array();
  for (int i = 0; i < count; ++i) {
    samples.push_back({{"index", i},
                       {"n", sizes[i]},
                       {"edges", edges[i]},
                       {"clique", out[i].clique},
                       {"theta_complement", out[i].theta_complement},
                       {"chromatic", out[i].chromatic}});
  }
  return samples;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  static const std::map<std::string, std::function<json(const ExperimentConfig&)>> runners = {
      {"theta-er-sweep", run_theta_er},     {"theta-circulant-sweep", run_theta_circulant},
      {"paley-localization", run_paley},    {"phase-omega-sweep", run_phase},
      {"frames-verify", run_frames},        {"sic-search", run_sic},
      {"gmatrix-sweep", run_gmatrix},       {"tensor-ratio-sweep", run_tensor},
      {"sandwich-audit", run_sandwich},
  };
  const auto it = runners.find(config.experiment);
  if (it == runners.end()) {
    throw LabError(ExitCode::unknown_experiment, "unknown experiment '" + config.experiment + "'");
  }
  ExperimentResult result;
  result.config = config;
  result.started_at = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  result.samples = json::parse(it->second(config).dump());
  result.wallclock_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  result.summary = summarize(config, result.samples);
  return result;
}

json to_json(const ExperimentResult& result) {
  return {{"version", result.version},
          {"config", to_json(result.config)},
          {"started_at", result.started_at},
          {"wallclock_ms", result.wallclock_ms},
          {"samples", result.samples},
          {"summary", result.summary}};
}

namespace {

[[noreturn]] void corrupt(const std::string& path, const std::string& what) {
  throw LabError(ExitCode::corrupt_result, "corrupt result at " + path + ": " + what);
}

const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) corrupt(path + key, "missing");
  return j[key];
}

// First path where a and b differ, or empty.
std::string first_difference(const json& a, const json& b, const std::string& path) {
  if (a.type() != b.type() && !(a.is_number() && b.is_number())) return path;
  if (a.is_object()) {
    for (const auto& [k, v] : a.items()) {
      if (!b.contains(k)) return path + "." + k;
      const std::string d = first_difference(v, b[k], path + "." + k);
      if (!d.empty()) return d;
    }
    for (const auto& [k, v] : b.items()) {
      if (!a.contains(k)) return path + "." + k;
    }
    return "";
  }
  if (a.is_array()) {
    if (a.size() != b.size()) return path;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string d = first_difference(a[i], b[i], path + "[" + std::to_string(i) + "]");
      if (!d.empty()) return d;
    }
    return "";
  }
  if (a.is_number()) return a.get<double>() == b.get<double>() ? "" : path;
  return a == b ? "" : path;
}

}  // namespace

ExperimentResult result_from_json(const json& j) {
  if (!j.is_object()) corrupt("$", "not an object");
  const json& version = field(j, "version", "");
  if (!version.is_string() || version.get<std::string>() != kResultVersion) {
    corrupt("version", std::string("expected ") + kResultVersion);
  }
  ExperimentResult r;
  try {
    r.config = parse_config(field(j, "config", ""));
  } catch (const LabError& e) {
    corrupt("config", e.what());
  }
  const json& started = field(j, "started_at", "");
  if (!started.is_string()) corrupt("started_at", "not a string");
  r.started_at = started.get<std::string>();
  const json& wall = field(j, "wallclock_ms", "");
  if (!wall.is_number()) corrupt("wallclock_ms", "not a number");
  r.wallclock_ms = wall.get<double>();

  const json& samples = field(j, "samples", "");
  if (!samples.is_array()) corrupt("samples", "not an array");
  const auto& columns = csv_columns(r.config.experiment);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string at = "samples[" + std::to_string(i) + "]";
    if (!samples[i].is_object()) corrupt(at, "not an object");
    for (const auto& col : columns) {
      const json& v = field(samples[i], col, at + ".");
      if (!(v.is_number() || v.is_null() || (col == "kind" && v.is_string()))) corrupt(at + "." + col, "bad type");
    }
  }
  r.samples = samples;

  const json& summary = field(j, "summary", "");
  if (!summary.is_object()) corrupt("summary", "not an object");
  json expected;
  try {
    expected = summarize(r.config, r.samples);
  } catch (const LabError&) {
    throw;
  } catch (const std::exception& e) {
    corrupt("samples", std::string("summary cannot be recomputed: ") + e.what());
  }
  const std::string diff = first_difference(summary, expected, "summary");
  if (!diff.empty()) corrupt(diff, "does not match the aggregate recomputed from samples");
  r.summary = summary;
  return r;
}

ExperimentResult load_result(const std::string& path) {
  std::ifstream in(path);
  if (!in) corrupt(path, "cannot read file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    corrupt(path, std::string("not valid JSON: ") + e.what());
  }
  return result_from_json(j);
}

void write_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw LabError(ExitCode::unwritable_output, "cannot write " + path);
    out << text;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw LabError(ExitCode::unwritable_output, "cannot write " + path);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw LabError(ExitCode::unwritable_output, "cannot rename into " + path + ": " + ec.message());
  }
}

std::string run(const std::string& config_path) {
  const ExperimentConfig config = load_config(config_path);
  // Probe before spending the compute.
  const std::string probe = config.output + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(probe);
    if (!out) throw LabError(ExitCode::unwritable_output, "cannot write " + config.output);
  }
  std::remove(probe.c_str());
  const ExperimentResult result = run_experiment(config);
  write_atomic(config.output, to_json(result).dump(1) + "\n");
  return config.output;
}

std::string report_csv(const ExperimentResult& result) {
  const auto& columns = csv_columns(result.config.experiment);
  std::ostringstream out;
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << "\n";
  for (const auto& s : result.samples) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const json& v = s[columns[c]];
      if (c) out << ",";
      if (v.is_string()) {
        out << v.get<std::string>();
      } else if (!v.is_null()) {
        out << v.dump();
      }
    }
    out << "\n";
  }
  return out.str();
}

std::string report_summary(const ExperimentResult& result) {
  std::ostringstream out;
  out << result.config.experiment << " seed=" << result.config.seed << " samples=" << result.samples.size()
      << " wallclock_ms=" << std::fixed << std::setprecision(0) << result.wallclock_ms << "\n";
  out << std::defaultfloat << std::setprecision(6);
  for (const auto& g : result.summary["groups"]) {
    out << " ";
    for (const auto& [k, v] : g.items()) {
      out << " " << k << "=";
      if (v.is_string()) {
        out << v.get<std::string>();
      } else if (v.is_number_float()) {
        out << v.get<double>();
      } else {
        out << v.dump();
      }
    }
    out << "\n";
  }
  if (result.summary.contains("fit") && !result.summary["fit"].empty()) {
    out << "  fit " << result.summary["fit"].dump() << "\n";
  }
  for (const auto& c : result.summary["checks"]) {
    const bool open = c.value("open", false);
    out << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << ": "
        << (c["value"].is_null() ? std::string("n/a") : std::to_string(c["value"].get<double>()))
        << (open ? " in (" : " in [") << c["lo"].get<double>() << ", " << c["hi"].get<double>()
        << (open ? ")" : "]") << "\n";
  }
  out << (result.summary["pass"].get<bool>() ? "overall PASS" : "overall FAIL") << "\n";
  return out.str();
}

std::vector<std::uint64_t> derive_seeds(std::uint64_t master, const std::vector<std::string>& labels) {
  std::vector<std::uint64_t> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(derive_seed(master, l));
  return out;
}

json to_json(const ThetaResult& r) {
  json j = {{"value", r.value},
            {"gap", r.gap},
            {"method", to_string(r.method)},
            {"n", r.n},
            {"converged", r.converged},
            {"iterations", r.iterations},
            {"wallclock_ms", r.wallclock_ms}};
  if (r.conn) j["conn"] = *r.conn;
  if (r.edges_hash) j["edges_hash"] = std::to_string(*r.edges_hash);
  return j;
}

json to_json(const SweepResult& r) {
  return {{"M", r.m_values},
          {"mean_omega", r.mean_omega},
          {"median_omega", r.median_omega},
          {"beta_hat", r.fit.beta_hat},
          {"fit_residual", r.fit.fit_residual},
          {"trials", r.trials},
          {"seed", r.seed},
          {"omegas", r.omegas}};
}

json to_json(const VerificationReport& r) {
  return {{"max_norm_dev", r.max_norm_dev},
          {"max_orthogonality_dev", r.max_orthogonality_dev},
          {"max_unbiasedness_dev", r.max_unbiasedness_dev},
          {"max_equiangularity_dev", r.max_equiangularity_dev},
          {"tightness_dev", r.tightness_dev},
          {"coherence", r.coherence},
          {"welch_bound", r.welch_bound},
          {"tol", r.tol},
          {"pass", r.pass}};
}

json to_json(const FrameMatrix& frame) {
  // column-major: re[k] is the real part of column k
  json re = json::array();
  json im = json::array();
  for (int k = 0; k < frame.n(); ++k) {
    const Eigen::VectorXcd col = frame.columns().col(k);
    const Eigen::VectorXd r = col.real();
    const Eigen::VectorXd i = col.imag();
    re.push_back(std::vector<double>(r.data(), r.data() + r.size()));
    im.push_back(std::vector<double>(i.data(), i.data() + i.size()));
  }
  return {{"d", frame.d()}, {"n", frame.n()}, {"re", re}, {"im", im}};
}

FrameMatrix frame_from_json(const json& j) {
  const int d = j.at("d").get<int>();
  const int n = j.at("n").get<int>();
  const json& re = j.at("re");
  const json& im = j.at("im");
  if (d < 1 || n < 1 || re.size() != static_cast<std::size_t>(n) || im.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("frame JSON: re and im need n columns");
  }
  Eigen::MatrixXcd phi(d, n);
  for (int k = 0; k < n; ++k) {
    const auto r = re[k].get<std::vector<double>>();
    const auto i = im[k].get<std::vector<double>>();
    if (r.size() != static_cast<std::size_t>(d) || i.size() != static_cast<std::size_t>(d)) {
      throw std::invalid_argument("frame JSON: column " + std::to_string(k) + " needs d entries");
    }
    for (int t = 0; t < d; ++t) phi(t, k) = {r[t], i[t]};
  }
  return FrameMatrix(phi);
}

json to_json(const ExponentFit& fit) {
  return {{"shape_hash", std::to_string(fit.shape_hash)},
          {"n", fit.n_values},
          {"trials", fit.trials},
          {"norms", fit.norms},
          {"f_hat", fit.f_hat},
          {"fit_residuals", fit.fit_residuals}};
}

json to_json(const SymTensor& t) {
  json entries = json::array();
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    if (t.coeffs()(k) != 0.0) entries.push_back({{"idx", t.multiset(k)}, {"val", t.coeffs()(k)}});
  }
  return {{"d", t.dim()}, {"r", t.order()}, {"entries", entries}};
}

SymTensor tensor_from_json(const json& j) {
  SymTensor t(j.at("d").get<int>(), j.at("r").get<int>());
  for (const auto& e : j.at("entries")) {
    auto idx = e.at("idx").get<std::vector<int>>();
    if (!std::is_sorted(idx.begin(), idx.end())) throw std::invalid_argument("tensor JSON: idx must be sorted");
    const double v = e.at("val").get<double>();
    if (!std::isfinite(v)) throw std::invalid_argument("tensor JSON: non-finite entry");
    t(idx) = v;
  }
  return t;
}

json to_json(const RatioSweep& s) {
  json j = {{"family", s.family}, {"r", s.r},           {"p", s.p},
            {"trials", s.trials}, {"restarts", s.restarts}, {"seed", s.seed},
            {"d", s.d_values},    {"lhs_mean", s.lhs_mean}, {"lhs_stderr", s.lhs_stderr},
            {"rhs", s.rhs},       {"ratio", s.ratio},       {"lhs_samples", s.lhs_samples}};
  if (!s.aw_rhs.empty()) {
    j["aw_rhs"] = s.aw_rhs;
    j["aw_ratio"] = s.aw_ratio;
  }
  return j;
}

}  // namespace thetalab
