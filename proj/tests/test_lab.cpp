#include "thetalab/lab.hpp"
#include "thetalab/rng.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace thetalab;
namespace fs = std::filesystem;

namespace {

json config_json(const std::string& experiment, json params, const std::string& output = "out.json") {
  return {{"experiment", experiment}, {"params", std::move(params)}, {"seed", 7}, {"output", output}};
}

ExitCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const LabError& e) {
    return e.code();
  }
  return ExitCode::ok;
}

ExperimentConfig small_phase() {
  return parse_config(config_json("phase-omega-sweep", {{"m_lo", 2}, {"m_hi", 4}, {"trials", 50}}));
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / ("thetalab-test-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "-" +
                                                    ::testing::UnitTest::GetInstance()->current_test_info()->name());
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Config, Defaults) {
  const ExperimentConfig c = parse_config(config_json("frames-verify", json::object()));
  EXPECT_EQ(c.params["rip_p"], 53);
  EXPECT_EQ(c.params["mub_d"], json::array({2, 3, 5, 7, 11}));
  EXPECT_EQ(c.seed, 7u);
}

TEST(Config, SchemaViolations) {
  EXPECT_EQ(code_of([] { parse_config(config_json("no-such-thing", json::object())); }), ExitCode::unknown_experiment);
  EXPECT_EQ(code_of([] { parse_config(config_json("theta-er-sweep", json::object())); }), ExitCode::schema_violation);
  EXPECT_EQ(code_of([] { parse_config(config_json("theta-er-sweep", {{"n", json::array({10})}, {"bogus", 1}})); }),
            ExitCode::schema_violation);
  EXPECT_EQ(code_of([] { parse_config(config_json("theta-er-sweep", {{"n", "ten"}})); }), ExitCode::schema_violation);
  EXPECT_EQ(code_of([] { parse_config(config_json("paley-localization", {{"p", json::array({7})}})); }),
            ExitCode::schema_violation);
  EXPECT_EQ(code_of([] { parse_config(config_json("phase-omega-sweep", {{"m_lo", 5}, {"m_hi", 3}})); }),
            ExitCode::schema_violation);
  EXPECT_EQ(code_of([] { parse_config(config_json("gmatrix-sweep", {{"shape", "shape U: a | V: a | E: "}})); }),
            ExitCode::schema_violation);
  EXPECT_EQ(code_of([] { parse_config(config_json("tensor-ratio-sweep", {{"d", json::array({4})}, {"p", 3}})); }),
            ExitCode::schema_violation);
  json no_seed = config_json("sic-search", json::object());
  no_seed.erase("seed");
  EXPECT_EQ(code_of([&] { parse_config(no_seed); }), ExitCode::schema_violation);
  json negative = config_json("sic-search", json::object());
  negative["seed"] = -1;
  EXPECT_EQ(code_of([&] { parse_config(negative); }), ExitCode::schema_violation);
  json extra = config_json("sic-search", json::object());
  extra["note"] = "x";
  EXPECT_EQ(code_of([&] { parse_config(extra); }), ExitCode::schema_violation);
}

TEST(Run, DeterministicSamples) {
  const ExperimentResult a = run_experiment(small_phase());
  const ExperimentResult b = run_experiment(small_phase());
  EXPECT_EQ(a.samples.dump(), b.samples.dump());
  EXPECT_EQ(a.summary.dump(), b.summary.dump());
  EXPECT_EQ(a.samples.size(), 150u);
  ExperimentConfig other = small_phase();
  other.seed = 8;
  EXPECT_NE(run_experiment(other).samples.dump(), a.samples.dump());
}

TEST(Run, SummaryRecomputes) {
  const ExperimentResult a = run_experiment(small_phase());
  EXPECT_EQ(summarize(a.config, a.samples), a.summary);
  const ExperimentResult back = result_from_json(json::parse(to_json(a).dump()));
  EXPECT_EQ(back.samples, a.samples);
}

TEST(Integrity, TamperedSummaryOrSample) {
  const json good = json::parse(to_json(run_experiment(small_phase())).dump());
  json bad = good;
  bad["summary"]["checks"][0]["value"] = 0.123;
  try {
    result_from_json(bad);
    FAIL() << "tampered summary accepted";
  } catch (const LabError& e) {
    EXPECT_EQ(e.code(), ExitCode::corrupt_result);
    EXPECT_NE(std::string(e.what()).find("summary"), std::string::npos);
  }
  bad = good;
  bad["samples"][3]["omega"] = bad["samples"][3]["omega"].get<double>() * 2.0;
  EXPECT_EQ(code_of([&] { result_from_json(bad); }), ExitCode::corrupt_result);
  bad = good;
  bad["samples"][0].erase("omega");
  EXPECT_EQ(code_of([&] { result_from_json(bad); }), ExitCode::corrupt_result);
  bad = good;
  bad["version"] = "thetalab.result.v0";
  EXPECT_EQ(code_of([&] { result_from_json(bad); }), ExitCode::corrupt_result);
}

TEST(Report, CsvColumns) {
  const ExperimentResult r = run_experiment(small_phase());
  const std::string csv = report_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "M,trial,omega,max_row_norm");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 151);
  EXPECT_NE(report_summary(r).find("overall"), std::string::npos);
  for (const auto& name : experiment_names()) EXPECT_FALSE(csv_columns(name).empty());
}

TEST(Report, InfinityBecomesEmptyCell) {
  ExperimentConfig c = parse_config(config_json(
      "frames-verify",
      {{"mub_d", json::array({2})}, {"etf_p", json::array({5})}, {"rip_p", 5}, {"rip_m", 4}, {"rip_trials", 10}}));
  const ExperimentResult r = run_experiment(c);
  const ExperimentResult back = result_from_json(json::parse(to_json(r).dump()));
  const std::string csv = report_csv(back);
  EXPECT_NE(csv.find("rip,5,0,"), std::string::npos);
  EXPECT_EQ(csv.find("inf"), std::string::npos);
}

TEST(Seeds, DistinctAndStable) {
  std::vector<std::string> labels;
  for (int i = 0; i < 100000; ++i) labels.push_back("label-" + std::to_string(i));
  const std::vector<std::uint64_t> seeds = derive_seeds(42, labels);
  EXPECT_EQ(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size(), labels.size());
  EXPECT_EQ(derive_seeds(42, {"label-17"})[0], seeds[17]);
  EXPECT_NE(derive_seeds(43, {"label-17"})[0], seeds[17]);
  EXPECT_EQ(derive_seed(42, "label-17"), seeds[17]);
}

TEST(Files, RunWritesLoadableResult) {
  const fs::path dir = scratch_dir();
  const fs::path cfg = dir / "config.json";
  const fs::path out = dir / "result.json";
  json j = config_json("sic-search", {{"d", json::array({2})}, {"restarts", 4}, {"iters", 500}}, out.string());
  std::ofstream(cfg) << j.dump();
  EXPECT_EQ(run(cfg.string()), out.string());
  const ExperimentResult r = load_result(out.string());
  EXPECT_EQ(r.config.experiment, "sic-search");
  EXPECT_EQ(r.samples.size(), 1u);
  for (const auto& entry : fs::directory_iterator(dir)) {
    EXPECT_EQ(entry.path().string().find(".tmp."), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(Files, UnwritableAndCorrupt) {
  const fs::path dir = scratch_dir();
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << config_json("sic-search", json::object(), (dir / "missing" / "r.json").string()).dump();
  EXPECT_EQ(code_of([&] { run(cfg.string()); }), ExitCode::unwritable_output);
  const fs::path junk = dir / "junk.json";
  std::ofstream(junk) << "{\"version\": ";
  EXPECT_EQ(code_of([&] { load_result(junk.string()); }), ExitCode::corrupt_result);
  EXPECT_EQ(code_of([&] { load_result((dir / "absent.json").string()); }), ExitCode::corrupt_result);
  std::ofstream(cfg) << "not json";
  EXPECT_EQ(code_of([&] { load_config(cfg.string()); }), ExitCode::schema_violation);
  fs::remove_all(dir);
}

TEST(Json, DomainTypes) {
  const json fit = to_json(exponent_sweep(shape_from_text("shape U: a | V: b | E: (a,b)"), {8, 12, 16, 20}, 1, 3));
  EXPECT_TRUE(fit.contains("f_hat"));
  const json sweep = to_json(conjecture_ratio_sweep("coordinate", {3}, 2, 2, 10, 2, 1));
  EXPECT_TRUE(sweep.contains("ratio"));
  EXPECT_EQ(to_json(verify_mub(mub_prime(3), 1e-10))["pass"], true);
}
