#include "thetalab/lab.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace thetalab;

int main(int argc, char** argv) {
  CLI::App app{"thetalab experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run an experiment config, write its result JSON");
  run_cmd->add_option("config", config_path, "experiment config (JSON)")->required();

  std::string result_path;
  std::string format = "summary";
  auto* report_cmd = app.add_subcommand("report", "render a result file");
  report_cmd->add_option("result", result_path, "result JSON")->required();
  report_cmd->add_option("--format", format, "csv or summary")->check(CLI::IsMember({"csv", "summary"}));

  std::uint64_t master = 0;
  std::vector<std::string> labels;
  auto* seeds_cmd = app.add_subcommand("seeds", "derive child seeds from a master seed");
  seeds_cmd->add_option("master", master, "master seed")->required();
  seeds_cmd->add_option("labels", labels, "labels")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      std::cout << run(config_path) << "\n";
    } else if (*report_cmd) {
      const ExperimentResult result = load_result(result_path);
      std::cout << (format == "csv" ? report_csv(result) : report_summary(result));
    } else if (*seeds_cmd) {
      const auto seeds = derive_seeds(master, labels);
      for (std::size_t i = 0; i < labels.size(); ++i) std::cout << labels[i] << " " << seeds[i] << "\n";
    }
  } catch (const LabError& e) {
    std::cerr << "lab: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "lab: " << e.what() << "\n";
    return static_cast<int>(ExitCode::failure);
  }
  return 0;
}
