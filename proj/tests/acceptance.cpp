// One line per acceptance criterion. Exit status is 0 once every criterion
// has been evaluated; pass --strict to also fail on a FAIL line.

#include "oracles.hpp"

#include "thetalab/lab.hpp"
#include "thetalab/rng.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

using namespace thetalab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

json lab_config(const std::string& experiment, json params, std::uint64_t seed = 20240601) {
  return {{"experiment", experiment}, {"params", std::move(params)}, {"seed", seed}, {"output", "unused.json"}};
}

// Runs an experiment, round-trips the result through its file form, and
// collects the checks whose names start with one of the prefixes.
Outcome lab_checks(const json& config, const std::vector<std::string>& prefixes = {""}) {
  const ExperimentResult r = result_from_json(json::parse(to_json(run_experiment(parse_config(config))).dump()));
  Outcome out{true, ""};
  std::ostringstream s;
  int count = 0;
  for (const auto& c : r.summary["checks"]) {
    const std::string name = c["name"].get<std::string>();
    bool wanted = false;
    for (const auto& p : prefixes) wanted = wanted || name.rfind(p, 0) == 0;
    if (!wanted) continue;
    ++count;
    out.pass = out.pass && c["pass"].get<bool>();
    s << (count > 1 ? "; " : "") << name << " = " << (c["value"].is_null() ? std::string("n/a") : c["value"].dump());
  }
  if (count == 0) out.pass = false;
  if (r.summary.contains("fit") && r.summary["fit"].contains("beta_hat")) {
    s << "; fit_residual = " << r.summary["fit"]["fit_residual"].dump();
  }
  out.detail = s.str();
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Outcome sandwich() { return lab_checks(lab_config("sandwich-audit", {{"count", 200}, {"n_max", 10}})); }

Outcome cross_validation() {
  double lp_sdp = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const CirculantSpec spec = sample_random_circulant(5 + static_cast<int>(s * 7 % 36), derive_seed(1, "xval", s));
    const double lp = theta_circulant(spec, CirculantFormulation::freq_primal).value;
    lp_sdp = std::max(lp_sdp, std::abs(lp - theta_sdp(build_circulant(spec)).value));
  }
  double spread = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const CirculantSpec spec = sample_random_circulant(8 + static_cast<int>(s * 11 % 90), derive_seed(2, "four", s));
    double lo = 1e300;
    double hi = -1e300;
    for (auto f : {CirculantFormulation::time_primal, CirculantFormulation::time_dual, CirculantFormulation::freq_primal,
                   CirculantFormulation::freq_dual}) {
      const double v = theta_circulant(spec, f).value;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    spread = std::max(spread, hi - lo);
  }
  return {lp_sdp <= 1e-3 && spread <= 1e-5, "max |LP - SDP| = " + fmt(lp_sdp) + ", max formulation spread = " + fmt(spread)};
}

Outcome cycle() {
  const CirculantSpec c5(5, {1});
  const double lp = theta_circulant(c5).value;
  const double sdp = theta_sdp(build_circulant(c5)).value;
  const double exact = oracle::cycle_theta(5);
  return {std::abs(lp - 2.23607) <= 1e-4 && std::abs(sdp - 2.23607) <= 1e-4 && std::abs(exact - 2.23607) <= 1e-5,
          "LP " + fmt(lp) + ", SDP " + fmt(sdp) + ", closed form " + fmt(exact)};
}

Outcome product_identity() {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const int n = s % 2 ? 64 : 32;
    const ProductIdentity p = product_identity_check(sample_random_circulant(n, derive_seed(4, "product", s)));
    worst = std::max(worst, std::abs(p.product - n) / n);
  }
  return {worst <= 1e-3, "max |theta(G) theta(complement) - n| / n = " + fmt(worst)};
}

Outcome paley_theta() {
  double worst = 0.0;
  for (int p : {13, 17, 29, 37, 53}) {
    worst = std::max(worst, std::abs(theta_circulant(complement(build_paley(p))).value - std::sqrt(p)));
  }
  return {worst <= 1e-3, "max |theta - sqrt(p)| = " + fmt(worst)};
}

Outcome localization() { return lab_checks(lab_config("paley-localization", {{"p", {101, 229, 401}}})); }

Outcome random_circulant() {
  return lab_checks(lab_config("theta-circulant-sweep", {{"n", {64, 128, 256}}, {"trials", 20}}));
}

Outcome erdos_renyi() { return lab_checks(lab_config("theta-er-sweep", {{"n", {50, 100, 150}}, {"trials", 10}})); }

Outcome shannon() {
  const Graph c5 = build_circulant(CirculantSpec(5, {1}));
  const ShannonBounds b = shannon_bounds(c5, 2);
  const int brute = oracle::independence(strong_product(c5, c5));
  return {b.alpha_power == 5 && brute == 5 && std::abs(b.lower - std::sqrt(5.0)) <= 1e-12 &&
              std::abs(b.theta - std::sqrt(5.0)) <= 1e-4,
          "alpha(C5 x C5) = " + std::to_string(brute) + ", sqrt(alpha) = " + fmt(b.lower) + ", theta = " + fmt(b.theta)};
}

Outcome phase_equivalence() {
  int disagreements = 0;
  int holds = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    Rng rng(derive_seed(10, "phase-eq", s));
    std::normal_distribution<double> normal;
    const int m = 1 + static_cast<int>(rng() % 4);
    const int n = m + static_cast<int>(rng() % (10 - m));
    Eigen::MatrixXd a(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) a(i, j) = normal(rng);
    }
    // a quarter of the instances get a repeated row
    if (rng() % 4 == 0 && n > 1) a.row(n - 1) = a.row(0);
    const MeasurementMatrix mm(a);
    const bool cp = complement_property(mm).holds;
    const bool pos = omega(mm).value > 0.0;
    const bool brute_cp = oracle::complement_property(a, mm.rank_tolerance());
    const bool brute_pos = oracle::omega(a, mm.rank_tolerance()) > 0.0;
    disagreements += (cp != pos) + (cp != brute_cp) + (pos != brute_pos);
    holds += cp;
  }
  return {disagreements == 0, "disagreements = " + std::to_string(disagreements) + " (complement property holds on " +
                                  std::to_string(holds) + " of 500)"};
}

Outcome omega_decay() { return lab_checks(lab_config("phase-omega-sweep", {{"m_lo", 3}, {"m_hi", 10}, {"trials", 200}})); }

const json& frames_config() {
  static const json c = lab_config("frames-verify", json::object());
  return c;
}

Outcome mub() { return lab_checks(frames_config(), {"MUB"}); }
Outcome etf() { return lab_checks(frames_config(), {"ETF"}); }

Outcome sic() { return lab_checks(lab_config("sic-search", {{"d", {2, 3}}, {"restarts", 64}})); }

Outcome rip() {
  const ExperimentResult r = run_experiment(parse_config(frames_config()));
  Outcome out = lab_checks(frames_config(), {"RIP"});
  for (const auto& g : r.summary["groups"]) {
    if (g["kind"] == "rip") {
      out.detail += "; q10 " + g["q10"].dump() + ", q50 " + g["q50"].dump() + ", q90 " + g["q90"].dump() + ", q99 " +
                    g["q99"].dump() + ", max " + g["max"].dump();
    }
  }
  return out;
}

Outcome graph_matrix() {
  Outcome out = lab_checks(lab_config("gmatrix-sweep", {{"n", {50, 100, 200, 400, 800}}, {"trials", 5}}));
  const double norm = norm_estimate(realize(shape_from_text("shape U: a | V: b | E: (a,b)"), 500, 16).matrix).value;
  const double ratio = norm / (2.0 * std::sqrt(500.0));
  out.pass = out.pass && ratio >= 0.9 && ratio <= 1.05;
  out.detail += "; n=500 norm / (2 sqrt n) = " + fmt(ratio);
  return out;
}

Outcome trace_moments() {
  int violations = 0;
  Rng rng(derive_seed(17, "moments"));
  std::normal_distribution<double> normal;
  for (int t = 0; t < 100; ++t) {
    const int d = 2 + static_cast<int>(rng() % 99);
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) a(i, j) = normal(rng);
    }
    const SymTensor m = SymTensor::from_matrix(0.5 * (a + a.transpose()));
    for (int k : {1, 2, 3}) violations += !trace_moment_sandwich(m, k, 1e-9).holds;
  }
  return {violations == 0, "violations = " + std::to_string(violations) + " of 300"};
}

Outcome aw() {
  Outcome out{true, ""};
  for (const std::string family : {"coordinate", "random-rank-one"}) {
    const Outcome o = lab_checks(
        lab_config("tensor-ratio-sweep", {{"family", family}, {"d", {4, 8, 16, 32}}, {"r", 2}, {"p", 2}}));
    out.pass = out.pass && o.pass;
    out.detail += (out.detail.empty() ? "" : " | ") + family + ": " + o.detail;
  }
  return out;
}

Outcome type2() {
  return lab_checks(
      lab_config("tensor-ratio-sweep", {{"family", "random-rank-one"}, {"d", {4, 8, 16}}, {"r", 2}, {"p", 4}}));
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"sandwich audit", sandwich},
      {"theta cross-validation", cross_validation},
      {"cycle exactness", cycle},
      {"product identity", product_identity},
      {"Paley theta", paley_theta},
      {"localization reproduction", localization},
      {"random circulant probe", random_circulant},
      {"ER probe", erdos_renyi},
      {"Shannon bounds", shannon},
      {"phase equivalences", phase_equivalence},
      {"gaussian omega decay", omega_decay},
      {"MUB construction", mub},
      {"Paley ETF", etf},
      {"SIC search", sic},
      {"RIP sampling", rip},
      {"graph matrix scaling", graph_matrix},
      {"trace-moment sandwich", trace_moments},
      {"AW inequality", aw},
      {"type-2 ratio probe", type2},
  };
  int failures = 0;
  int errors = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
      ++errors;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria pass\n", criteria.size() - failures, criteria.size());
  if (errors > 0) return 2;
  return strict && failures > 0 ? 1 : 0;
}
