#pragma once

// Scenario files and the four front-end commands (synth, simulate, sweep,
// check). Scenario files are JSON with comments allowed; matrices are
// row-major nested arrays.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nsync/simulator.hpp"

namespace nsync {

enum class Problem { kOutputCoupling, kStateCoupling };

struct TopologyGenerator {
  Index p = 1;
  double density = 0.5;
  std::uint64_t seed = 0;
};

struct RandomInitialState {
  std::uint64_t seed = 0;
  double scale = 1.0;
};

struct SweepSpec {
  std::string param;  // "p", "seed" or "density"
  std::vector<double> values;
};

struct ScenarioConfig {
  Problem problem = Problem::kOutputCoupling;
  Matrix A;
  std::optional<Matrix> C;
  std::optional<Matrix> B;
  std::variant<Matrix, TopologyGenerator> topology;
  std::variant<Vector, RandomInitialState> x0;
  double horizon = 0.0;
  double step = 0.0;
  Method method = Method::kExactExpm;
  std::string outputs = "out";
  std::optional<SweepSpec> sweep;
  std::optional<unsigned> workers;
};

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);
/// Serializes with shortest round-trip number formatting.
std::string dump_config(const ScenarioConfig& config);

/// Replaces the generator seed and the random initial-state seed, when present.
void override_seed(ScenarioConfig& config, std::uint64_t seed);

LinearAgent make_agent(const ScenarioConfig& config);
/// Validated topology; generator specs are expanded deterministically.
NetworkTopology resolve_topology(const ScenarioConfig& config);
Vector resolve_initial_state(const ScenarioConfig& config, Index p, Index n);
/// Copy of `config` with topology and x0 written inline.
ScenarioConfig materialize(const ScenarioConfig& config);

struct Report {
  bool passed = false;
  std::string json;  // machine-readable report, also written to the output directory
  std::string text;  // short human-readable summary
};

/// Header of the long-format trajectory CSV.
inline constexpr const char* kTrajectoryHeader =
    "t, agent, state_index, value, ref_value, sync_error, disagreement";
inline constexpr const char* kSweepHeader =
    "value, delta, final_sync_error, runtime_s, pass, exit_code, error";

/// Exit code contract: 0 success, 1 config error, 2 assumption violation,
/// 3 runtime or numerical failure.
int exit_code_for(const std::exception& e);

Report cmd_synth(const ScenarioConfig& config, const std::filesystem::path& out_dir);
Report cmd_simulate(const ScenarioConfig& config, const std::filesystem::path& out_dir);
Report cmd_sweep(const ScenarioConfig& config, const SweepSpec& sweep,
                 const std::filesystem::path& out_dir, unsigned workers);
Report cmd_check(const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// Writes the long-format trajectory CSV.
void write_trajectory_csv(const SimulationRun& run, const std::filesystem::path& path);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

}  // namespace nsync
