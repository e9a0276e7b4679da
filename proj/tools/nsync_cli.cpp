// Command-line front end. Talks to the library only through the C API.

#include <cstdint>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nsync/nsync.h"

namespace {

struct ScenarioDeleter {
  void operator()(nsync_scenario* s) const { nsync_scenario_destroy(s); }
};
struct ReportDeleter {
  void operator()(nsync_report* r) const { nsync_report_destroy(r); }
};

int fail(nsync_status status) {
  std::cerr << "error: " << nsync_last_error() << '\n';
  return nsync_exit_code(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synchronization of neutrally stable linear agents"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  unsigned workers = 0;
  std::optional<std::uint64_t> seed;
  std::string sweep_param;
  std::vector<double> sweep_values;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "scenario file (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory (default: the scenario's \"outputs\")");
    sub->add_option("--seed", seed, "override the generator and initial-state seeds");
  };

  auto* synth = app.add_subcommand("synth", "compute the coupling gain and its certificates");
  auto* simulate = app.add_subcommand("simulate", "simulate the network and write trajectories");
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  auto* check = app.add_subcommand("check", "check the standing assumptions");
  for (auto* sub : {synth, simulate, sweep, check}) add_common(sub);
  for (auto* sub : {synth, simulate, sweep, check}) {
    sub->add_option("--workers", workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
  }
  sweep->add_option("--param", sweep_param, "swept parameter: p, seed or density");
  sweep->add_option("--values", sweep_values, "values of the swept parameter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  nsync_scenario* raw = nullptr;
  nsync_status status = nsync_scenario_load(config_path.c_str(), &raw);
  if (status != NSYNC_OK) return fail(status);
  std::unique_ptr<nsync_scenario, ScenarioDeleter> scenario(raw);

  if (seed) {
    status = nsync_scenario_override_seed(scenario.get(), *seed);
    if (status != NSYNC_OK) return fail(status);
  }
  const char* out = out_dir.empty() ? nullptr : out_dir.c_str();
  if (workers == 0) workers = nsync_scenario_workers(scenario.get());

  nsync_report* report_raw = nullptr;
  if (synth->parsed()) {
    status = nsync_cmd_synth(scenario.get(), out, &report_raw);
  } else if (simulate->parsed()) {
    status = nsync_cmd_simulate(scenario.get(), out, &report_raw);
  } else if (sweep->parsed()) {
    status = nsync_cmd_sweep(scenario.get(), sweep_param.empty() ? nullptr : sweep_param.c_str(),
                             sweep_values.empty() ? nullptr : sweep_values.data(),
                             sweep_values.size(), out, workers, &report_raw);
  } else {
    status = nsync_cmd_check(scenario.get(), out, &report_raw);
  }
  if (status != NSYNC_OK) return fail(status);
  std::unique_ptr<nsync_report, ReportDeleter> report(report_raw);

  std::cout << nsync_report_text(report.get());
  if (nsync_report_passed(report.get())) return 0;
  return check->parsed() ? 2 : 3;
}
