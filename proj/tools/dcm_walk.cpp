// Scenario runner: plans footsteps, simulates the closed loop and writes
// trajectory.csv, footprints.csv and summary.json.
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dcm/scenario.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv)
{
  CLI::App app{"DCM walking with online step adaptation, simulated on a linear inverted pendulum"};

  std::vector<std::string> configs;
  std::string out_dir = "./out";
  std::optional<double> dt;
  bool no_adapter = false;
  bool quiet = false;

  app.add_option("--config", configs, "Scenario JSON file; repeat to run a batch in parallel")->required();
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--dt", dt, "Override the control period [s]");
  app.add_flag("--no-adapter", no_adapter, "Disable the step adapter (ablation)");
  app.add_flag("--quiet", quiet, "Only report errors");
  CLI11_PARSE(app, argc, argv);

  dcm::RunOverrides overrides;
  overrides.dt = dt;
  overrides.no_adapter = no_adapter;
  overrides.quiet = quiet;

  // a batch writes each scenario into its own subdirectory named after the file
  const bool batch = configs.size() > 1;
  std::vector<std::future<dcm::RunOutcome>> jobs;
  for (const auto& c : configs) {
    const fs::path dir = batch ? fs::path(out_dir) / fs::path(c).stem() : fs::path(out_dir);
    jobs.push_back(std::async(std::launch::async, [=] { return dcm::run_scenario(c, dir, overrides); }));
  }

  int code = dcm::kExitOk;
  for (auto& job : jobs) {
    const dcm::RunOutcome r = job.get();
    if (r.exit_code == dcm::kExitConfigError) {
      std::cerr << "error: " << r.message << '\n';
      code = dcm::kExitConfigError;
    } else {
      if (!quiet)
        std::cout << r.message << '\n';
      if (r.exit_code == dcm::kExitFall && code == dcm::kExitOk)
        code = dcm::kExitFall;
    }
  }
  return code;
}
