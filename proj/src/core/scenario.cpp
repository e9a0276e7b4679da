#include "nsync/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "nsync/error.hpp"

namespace nsync {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// JSON <-> matrices

Matrix matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) throw ConfigError(name + " must be a non-empty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (const json& row : j) {
    if (!row.is_array() || row.empty()) throw ConfigError(name + " rows must be non-empty arrays");
    if (cols == 0) cols = row.size();
    if (row.size() != cols) throw ConfigError(name + " has ragged rows");
  }
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k) {
      const json& v = j[i][k];
      if (!v.is_number()) throw ConfigError(name + " entries must be numbers");
      m(static_cast<Index>(i), static_cast<Index>(k)) = v.get<double>();
    }
  }
  if (!m.allFinite()) throw ConfigError(name + " contains non-finite entries");
  return m;
}

Vector vector_from_json(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) throw ConfigError(name + " must be a non-empty array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(name + " entries must be numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ConfigError(std::string("missing numeric field '") + key + "'");
  }
  return j[key].get<double>();
}

std::uint64_t seed_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer() ||
      (j[key].is_number_integer() && !j[key].is_number_unsigned() && j[key].get<long long>() < 0)) {
    throw ConfigError(std::string("field '") + key + "' must be a nonnegative integer");
  }
  return j[key].get<std::uint64_t>();
}

const char* problem_name(Problem p) {
  return p == Problem::kOutputCoupling ? "output-coupling" : "state-coupling";
}

const char* method_name(Method m) { return m == Method::kExactExpm ? "exact-expm" : "rk4"; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << text;
  if (!out) throw RuntimeFailure("write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw RuntimeFailure("cannot create output directory " + dir.string());
}

std::string join(const Vector& v) {
  std::string s = "[";
  for (Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_double(v(i));
  }
  return s + "]";
}

// ---------------------------------------------------------------------------
// Simulation core shared by `simulate` and `sweep`

struct SimulationOutcome {
  json summary;
  bool pass = false;
  double delta = std::numeric_limits<double>::quiet_NaN();
  double final_sync_error = 0.0;
};

double sync_error_of(const Vector& x, const Vector& xbar, Index p, Index n) {
  double worst = 0.0;
  for (Index i = 0; i < p; ++i) worst = std::max(worst, (x.segment(i * n, n) - xbar).norm());
  return worst;
}

SimulationOutcome simulate_and_write(const ScenarioConfig& config, const fs::path& out_dir) {
  const LinearAgent agent = make_agent(config);
  const GainSynthesis gain = synthesize_gain(agent);
  const NetworkTopology topology = resolve_topology(config);
  if (!topology.connected()) throw AssumptionViolation("connectivity", "topology not connected");
  const Index p = topology.p();
  const Index n = agent.n();
  const Vector x0 = resolve_initial_state(config, p, n);
  const CoupledSystem system = CoupledSystem::assemble(agent, gain, topology);
  const SimulationRun run = simulate(system, x0, config.horizon, config.step, config.method);

  SimulationOutcome out;
  const double sync0 = run.sync_error.front();
  const double threshold = 1e-4 * (1.0 + sync0);
  out.final_sync_error = run.sync_error.back();
  json criterion;
  if (p == 1) {
    // The lone agent is its own reference.
    out.pass = out.final_sync_error <= threshold;
    criterion = {{"kind", "single-agent"}, {"t_star", 0.0}};
  } else if (system.has_dense()) {
    const SpectralCheck spectral = spectral_check(system);
    out.delta = spectral.delta;
    criterion = {{"kind", "t-star"},
                 {"decaying", spectral.decaying},
                 {"reference_mode_match_error", spectral.match_error}};
    if (spectral.decaying) {
      const double t_star = assertion_horizon(spectral.delta);
      const Vector x_star = expm(system.stacked(), t_star) * x0;
      const Vector ref_star = reference_trajectory(agent.A, topology, x0, t_star);
      const double err_star = sync_error_of(x_star, ref_star, p, n);
      out.pass = err_star <= threshold;
      criterion["t_star"] = t_star;
      criterion["sync_error_at_t_star"] = err_star;
    } else {
      out.pass = false;
      criterion["t_star"] = nullptr;
    }
  } else {
    out.pass = out.final_sync_error <= threshold;
    criterion = {{"kind", "final-time"}};
  }
  criterion["threshold"] = threshold;

  json seeds = json::object();
  if (const auto* gen = std::get_if<TopologyGenerator>(&config.topology)) seeds["topology"] = gen->seed;
  if (const auto* rnd = std::get_if<RandomInitialState>(&config.x0)) seeds["x0"] = rnd->seed;

  out.summary = {
      {"problem", problem_name(config.problem)},
      {"method", method_name(config.method)},
      {"p", p},
      {"n", n},
      {"n1", gain.decomposition.n1},
      {"n2", gain.decomposition.n2},
      {"gain", to_json(gain.gain)},
      {"steps", static_cast<Index>(run.times.size()) - 1},
      {"horizon", config.horizon},
      {"dt_used", run.times.size() > 1 ? run.times[1] - run.times[0] : config.horizon},
      {"initial_sync_error", sync0},
      {"final_sync_error", out.final_sync_error},
      {"final_disagreement", run.disagreement.back()},
      {"spectral_gap", finite_or_null(out.delta)},
      {"average_invariant_deviation", average_invariant_deviation(system, run)},
      {"criterion", criterion},
      {"seeds", seeds},
      {"pass", out.pass},
  };

  ensure_dir(out_dir);
  write_trajectory_csv(run, out_dir / "trajectory.csv");
  write_text(out_dir / "summary.json", out.summary.dump(2) + "\n");
  write_text(out_dir / "resolved_config.json", dump_config(materialize(config)));
  return out;
}

std::string csv_escape(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else if (c == '\n') out += ' ';
    else out += c;
  }
  return out + "\"";
}

Index integral_value(double v, const std::string& param) {
  if (!(v >= 0.0) || std::floor(v) != v || v > 9.0e15) {
    throw ConfigError("sweep values for '" + param + "' must be nonnegative integers");
  }
  return static_cast<Index>(v);
}

ScenarioConfig sweep_member(const ScenarioConfig& base, const std::string& param, double value) {
  ScenarioConfig cfg = base;
  if (param == "p" || param == "density") {
    auto* gen = std::get_if<TopologyGenerator>(&cfg.topology);
    if (!gen) throw ConfigError("sweeping '" + param + "' needs a topology generator");
    if (param == "p") {
      gen->p = integral_value(value, param);
      if (gen->p < 1) throw ConfigError("sweep value p must be at least 1");
    } else {
      gen->density = value;
    }
  } else if (param == "seed") {
    override_seed(cfg, static_cast<std::uint64_t>(integral_value(value, param)));
  } else {
    throw ConfigError("sweep parameter must be one of p, seed, density");
  }
  return cfg;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config I/O

ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  static const std::set<std::string> known{"problem", "agent",   "topology", "x0",
                                           "horizon", "step",    "method",   "outputs",
                                           "sweep",   "workers"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown scenario key '" + key + "'");
  }

  ScenarioConfig cfg;
  try {
    if (!j.contains("problem") || !j["problem"].is_string()) {
      throw ConfigError("missing 'problem' (output-coupling or state-coupling)");
    }
    const std::string problem = j["problem"];
    if (problem == "output-coupling") {
      cfg.problem = Problem::kOutputCoupling;
    } else if (problem == "state-coupling") {
      cfg.problem = Problem::kStateCoupling;
    } else {
      throw ConfigError("unknown problem '" + problem + "'");
    }

    if (!j.contains("agent") || !j["agent"].is_object()) throw ConfigError("missing 'agent' object");
    const json& agent = j["agent"];
    if (!agent.contains("A")) throw ConfigError("agent.A is required");
    cfg.A = matrix_from_json(agent["A"], "agent.A");
    const bool has_c = agent.contains("C");
    const bool has_b = agent.contains("B");
    if (has_c == has_b) throw ConfigError("agent needs exactly one of C and B");
    if (has_c && cfg.problem != Problem::kOutputCoupling) {
      throw ConfigError("agent.C given for a state-coupling problem");
    }
    if (has_b && cfg.problem != Problem::kStateCoupling) {
      throw ConfigError("agent.B given for an output-coupling problem");
    }
    if (has_c) cfg.C = matrix_from_json(agent["C"], "agent.C");
    if (has_b) cfg.B = matrix_from_json(agent["B"], "agent.B");

    if (!j.contains("topology") || !j["topology"].is_object()) {
      throw ConfigError("missing 'topology' object");
    }
    const json& topo = j["topology"];
    const bool inline_gamma = topo.contains("gamma");
    const bool generator = topo.contains("generator");
    if (inline_gamma == generator) throw ConfigError("topology needs exactly one of gamma and generator");
    if (inline_gamma) {
      cfg.topology = matrix_from_json(topo["gamma"], "topology.gamma");
    } else {
      const json& g = topo["generator"];
      TopologyGenerator gen;
      const double p = number(g, "p");
      if (p < 1 || std::floor(p) != p) throw ConfigError("generator.p must be a positive integer");
      gen.p = static_cast<Index>(p);
      gen.density = number(g, "density");
      gen.seed = seed_field(g, "seed");
      cfg.topology = gen;
    }

    if (!j.contains("x0")) throw ConfigError("missing 'x0'");
    const json& x0 = j["x0"];
    if (x0.is_array()) {
      cfg.x0 = vector_from_json(x0, "x0");
    } else if (x0.is_object() && x0.contains("random") && x0.size() == 1) {
      RandomInitialState rnd;
      rnd.seed = seed_field(x0["random"], "seed");
      rnd.scale = x0["random"].contains("scale") ? number(x0["random"], "scale") : 1.0;
      if (!(rnd.scale > 0.0)) throw ConfigError("x0.random.scale must be positive");
      cfg.x0 = rnd;
    } else {
      throw ConfigError("x0 must be an inline array or {\"random\": {...}}");
    }

    cfg.horizon = number(j, "horizon");
    cfg.step = number(j, "step");
    if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) throw ConfigError("horizon must be > 0");
    if (!(cfg.step > 0.0)) throw ConfigError("step must be > 0");
    if (cfg.step > cfg.horizon) throw ConfigError("step must not exceed horizon");

    const std::string method = j.value("method", std::string("exact-expm"));
    if (method == "exact-expm") {
      cfg.method = Method::kExactExpm;
    } else if (method == "rk4") {
      cfg.method = Method::kRk4;
    } else {
      throw ConfigError("unknown method '" + method + "'");
    }
    cfg.outputs = j.value("outputs", std::string("out"));

    if (j.contains("sweep")) {
      const json& s = j["sweep"];
      if (!s.is_object() || !s.contains("param") || !s["param"].is_string()) {
        throw ConfigError("sweep needs a 'param' string");
      }
      SweepSpec spec;
      spec.param = s["param"];
      if (s.contains("values")) {
        if (!s["values"].is_array()) throw ConfigError("sweep.values must be an array");
        for (const json& v : s["values"]) {
          if (!v.is_number()) throw ConfigError("sweep.values must be numbers");
          spec.values.push_back(v.get<double>());
        }
      }
      cfg.sweep = spec;
    }
    if (j.contains("workers")) {
      if (!j["workers"].is_number_unsigned()) throw ConfigError("workers must be a positive integer");
      cfg.workers = j["workers"].get<unsigned>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
  return cfg;
}

ScenarioConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string dump_config(const ScenarioConfig& config) {
  json j;
  j["problem"] = problem_name(config.problem);
  j["agent"]["A"] = to_json(config.A);
  if (config.C) j["agent"]["C"] = to_json(*config.C);
  if (config.B) j["agent"]["B"] = to_json(*config.B);
  if (const auto* gamma = std::get_if<Matrix>(&config.topology)) {
    j["topology"]["gamma"] = to_json(*gamma);
  } else {
    const auto& gen = std::get<TopologyGenerator>(config.topology);
    j["topology"]["generator"] = {{"p", gen.p}, {"density", gen.density}, {"seed", gen.seed}};
  }
  if (const auto* x0 = std::get_if<Vector>(&config.x0)) {
    j["x0"] = to_json(*x0);
  } else {
    const auto& rnd = std::get<RandomInitialState>(config.x0);
    j["x0"]["random"] = {{"seed", rnd.seed}, {"scale", rnd.scale}};
  }
  j["horizon"] = config.horizon;
  j["step"] = config.step;
  j["method"] = method_name(config.method);
  j["outputs"] = config.outputs;
  if (config.sweep) j["sweep"] = {{"param", config.sweep->param}, {"values", config.sweep->values}};
  if (config.workers) j["workers"] = *config.workers;
  return j.dump(2) + "\n";
}

void override_seed(ScenarioConfig& config, std::uint64_t seed) {
  if (auto* gen = std::get_if<TopologyGenerator>(&config.topology)) gen->seed = seed;
  if (auto* rnd = std::get_if<RandomInitialState>(&config.x0)) rnd->seed = seed;
}

LinearAgent make_agent(const ScenarioConfig& config) {
  if (config.problem == Problem::kOutputCoupling) {
    if (!config.C) throw ConfigError("output-coupling scenario without C");
    return LinearAgent::output_coupled(config.A, *config.C);
  }
  if (!config.B) throw ConfigError("state-coupling scenario without B");
  return LinearAgent::state_coupled(config.A, *config.B);
}

NetworkTopology resolve_topology(const ScenarioConfig& config) {
  if (const auto* gamma = std::get_if<Matrix>(&config.topology)) return validate_topology(*gamma);
  const auto& gen = std::get<TopologyGenerator>(config.topology);
  return random_connected_topology(gen.p, gen.density, gen.seed);
}

Vector resolve_initial_state(const ScenarioConfig& config, Index p, Index n) {
  if (const auto* x0 = std::get_if<Vector>(&config.x0)) {
    if (x0->size() != p * n) {
      throw ConfigError("x0 has length " + std::to_string(x0->size()) + ", expected p*n = " +
                        std::to_string(p * n));
    }
    return *x0;
  }
  const auto& rnd = std::get<RandomInitialState>(config.x0);
  std::mt19937_64 rng(rnd.seed);
  std::uniform_real_distribution<double> dist(-rnd.scale, rnd.scale);
  Vector x(p * n);
  for (Index i = 0; i < x.size(); ++i) x(i) = dist(rng);
  return x;
}

ScenarioConfig materialize(const ScenarioConfig& config) {
  ScenarioConfig out = config;
  const NetworkTopology topology = resolve_topology(config);
  out.topology = topology.gamma();
  out.x0 = resolve_initial_state(config, topology.p(), config.A.rows());
  return out;
}

// ---------------------------------------------------------------------------
// Output helpers

std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

void write_trajectory_csv(const SimulationRun& run, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << kTrajectoryHeader << '\n';
  std::string line;
  for (std::size_t k = 0; k < run.times.size(); ++k) {
    const std::string t = format_double(run.times[k]);
    const std::string sync = format_double(run.sync_error[k]);
    const std::string dis = format_double(run.disagreement[k]);
    for (Index i = 0; i < run.p; ++i) {
      for (Index s = 0; s < run.n; ++s) {
        line = t;
        line += ", " + std::to_string(i) + ", " + std::to_string(s) + ", ";
        line += format_double(run.states(i * run.n + s, static_cast<Index>(k)));
        line += ", " + format_double(run.reference(s, static_cast<Index>(k)));
        line += ", " + sync + ", " + dis + '\n';
        out << line;
      }
    }
  }
  if (!out) throw RuntimeFailure("write failed for " + path.string());
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->kind()) {
      case ErrorKind::kInvalidArgument:
      case ErrorKind::kConfig:
        return 1;
      case ErrorKind::kAssumption:
        return 2;
      case ErrorKind::kNumerical:
      case ErrorKind::kRuntime:
        return 3;
    }
  }
  return 3;
}

// ---------------------------------------------------------------------------
// Commands

Report cmd_synth(const ScenarioConfig& config, const fs::path& out_dir) {
  const LinearAgent agent = make_agent(config);
  const GainSynthesis g = synthesize_gain(agent);
  const bool output = g.kind == FeedbackKind::kOutput;
  const ModalDecomposition& d = g.decomposition;

  const double p_norm = std::max(1.0, g.P.norm());
  const double commutation_tol = 1e-8 * p_norm * std::max(1.0, d.F.norm());
  const double skew_tol = 1e-8 * std::max(1.0, g.S.norm());
  const double recon_tol = 1e-8 * std::max(1.0, agent.A.norm());
  const bool ok = g.residuals.commutation <= commutation_tol && g.residuals.skew <= skew_tol &&
                  g.residuals.reconstruction <= recon_tol && g.residuals.coupling_observable;

  json report = {
      {"problem", problem_name(config.problem)},
      {"kind", output ? "output-feedback" : "state-feedback"},
      {"gain_name", output ? "L" : "K"},
      {"n", agent.n()},
      {"m", agent.m()},
      {"n1", d.n1},
      {"n2", d.n2},
      {"hurwitz_shortcut", d.n1 == 0},
      {"gain", to_json(g.gain)},
      {"P", to_json(g.P)},
      {"P_sqrt", to_json(g.P_sqrt)},
      {"S", to_json(g.S)},
      {"H", to_json(g.H)},
      {"U", to_json(d.U)},
      {"W", to_json(d.W)},
      {"F", to_json(d.F)},
      {"G", to_json(d.G)},
      {"residuals",
       {{"commutation", g.residuals.commutation},
        {"skew", g.residuals.skew},
        {"reconstruction", g.residuals.reconstruction},
        {"sqrt", g.residuals.sqrt_residual},
        {"coupling_observable", g.residuals.coupling_observable}}},
      {"tolerances",
       {{"commutation", commutation_tol}, {"skew", skew_tol}, {"reconstruction", recon_tol}}},
      {"all_within_tolerance", ok},
  };

  ensure_dir(out_dir);
  Report r;
  r.passed = ok;
  r.json = report.dump(2) + "\n";
  write_text(out_dir / "synth_report.json", r.json);
  std::ostringstream text;
  text << (output ? "L" : "K") << " (" << g.gain.rows() << "x" << g.gain.cols() << ")";
  for (Index i = 0; i < g.gain.rows(); ++i) {
    text << (i ? "; " : " = [");
    for (Index k = 0; k < g.gain.cols(); ++k) text << (k ? " " : "") << format_double(g.gain(i, k));
  }
  text << "]\nn1 = " << d.n1 << ", n2 = " << d.n2 << "\nresiduals: commutation "
       << format_double(g.residuals.commutation) << ", skew " << format_double(g.residuals.skew)
       << ", reconstruction " << format_double(g.residuals.reconstruction) << "\n"
       << (ok ? "all residuals within tolerance" : "residuals OUT OF TOLERANCE") << "\n";
  r.text = text.str();
  return r;
}

Report cmd_simulate(const ScenarioConfig& config, const fs::path& out_dir) {
  const SimulationOutcome outcome = simulate_and_write(config, out_dir);
  Report r;
  r.passed = outcome.pass;
  r.json = outcome.summary.dump(2) + "\n";
  std::ostringstream text;
  text << "final sync_error = " << format_double(outcome.final_sync_error)
       << "\nspectral gap delta = "
       << (std::isfinite(outcome.delta) ? format_double(outcome.delta) : std::string("n/a"))
       << "\npass = " << (outcome.pass ? "true" : "false") << "\n";
  r.text = text.str();
  return r;
}

Report cmd_sweep(const ScenarioConfig& config, const SweepSpec& sweep, const fs::path& out_dir,
                 unsigned workers) {
  if (sweep.values.empty()) throw ConfigError("sweep needs at least one value");
  if (sweep.param != "p" && sweep.param != "seed" && sweep.param != "density") {
    throw ConfigError("sweep parameter must be one of p, seed, density");
  }
  // Surface config-level problems before spawning members.
  for (double v : sweep.values) (void)sweep_member(config, sweep.param, v);
  ensure_dir(out_dir);

  struct Row {
    double delta = std::numeric_limits<double>::quiet_NaN();
    double final_sync_error = std::numeric_limits<double>::quiet_NaN();
    double runtime = 0.0;
    bool pass = false;
    int exit_code = 0;
    std::string error;
  };
  std::vector<Row> rows(sweep.values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < rows.size(); k = next++) {
      Row& row = rows[k];
      const auto start = std::chrono::steady_clock::now();
      try {
        const ScenarioConfig member = sweep_member(config, sweep.param, sweep.values[k]);
        const SimulationOutcome o =
            simulate_and_write(member, out_dir / ("member_" + std::to_string(k)));
        row.delta = o.delta;
        row.final_sync_error = o.final_sync_error;
        row.pass = o.pass;
        row.exit_code = o.pass ? 0 : 3;
      } catch (const std::exception& e) {
        row.exit_code = exit_code_for(e);
        row.error = e.what();
      }
      row.runtime =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };
  const unsigned count =
      std::max(1u, std::min<unsigned>(workers == 0 ? 1u : workers,
                                      static_cast<unsigned>(rows.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < count; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << kSweepHeader << '\n';
  json members = json::array();
  bool all_pass = true;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Row& row = rows[k];
    all_pass = all_pass && row.pass;
    csv << format_double(sweep.values[k]) << ", "
        << (std::isfinite(row.delta) ? format_double(row.delta) : std::string("nan")) << ", "
        << (std::isfinite(row.final_sync_error) ? format_double(row.final_sync_error)
                                                : std::string("nan"))
        << ", " << format_double(row.runtime) << ", " << (row.pass ? "true" : "false") << ", "
        << row.exit_code << ", " << csv_escape(row.error) << '\n';
    members.push_back({{"value", sweep.values[k]},
                       {"delta", finite_or_null(row.delta)},
                       {"final_sync_error", finite_or_null(row.final_sync_error)},
                       {"pass", row.pass},
                       {"exit_code", row.exit_code},
                       {"error", row.error}});
  }
  write_text(out_dir / "sweep.csv", csv.str());
  const json report = {{"param", sweep.param}, {"members", members}, {"all_pass", all_pass}};
  Report r;
  r.passed = all_pass;
  r.json = report.dump(2) + "\n";
  write_text(out_dir / "sweep_report.json", r.json);
  r.text = csv.str();
  return r;
}

Report cmd_check(const ScenarioConfig& config, const fs::path& out_dir) {
  const LinearAgent agent = make_agent(config);
  const bool output = agent.kind() == FeedbackKind::kOutput;
  const NetworkTopology topology = resolve_topology(config);

  json checks = json::array();
  std::ostringstream text;
  bool all = true;
  auto record = [&](const std::string& tag, const std::string& name, bool ok) {
    checks.push_back({{"assumption", tag}, {"name", name}, {"pass", ok}});
    text << (ok ? "PASS " : "FAIL ") << tag << " " << name << "\n";
    all = all && ok;
  };
  record(output ? "A1" : "B1", "neutral stability", is_neutrally_stable(agent.A));
  if (output) {
    record("A2", "detectability", is_detectable(*agent.C, agent.A));
  } else {
    record("B2", "stabilizability", is_stabilizable(agent.A, *agent.B));
  }
  record("connectivity", "topology connected", topology.connected());

  json report = {{"checks", checks}, {"p", topology.p()}, {"gamma", to_json(topology.gamma())}};
  if (topology.connected()) {
    const LyapunovCertificate cert = lyapunov_certificate(topology);
    const double gap = spectral_gap(topology);
    const double t = std::isfinite(gap) ? 60.0 / gap : 0.0;
    const double ergodic = ergodic_limit_check(topology, t);
    const double min_eig =
        Eigen::SelfAdjointEigenSolver<Matrix>(cert.P_cert).eigenvalues().minCoeff();
    report["r"] = to_json(topology.r());
    report["certificate"] = {{"P_cert", to_json(cert.P_cert)},
                             {"residual", cert.residual},
                             {"hat_residual", cert.hat_residual},
                             {"min_eigenvalue", min_eig}};
    report["gamma_spectral_gap"] = finite_or_null(gap);
    report["ergodic_time"] = t;
    report["ergodic_error"] = ergodic;
    text << "r = " << join(topology.r()) << "\n"
         << "certificate residual = " << format_double(cert.residual)
         << ", hat residual = " << format_double(cert.hat_residual) << "\n"
         << "|e^{Gamma t} - 1 r^T| at t = " << format_double(t) << ": " << format_double(ergodic)
         << "\n";
  } else {
    report["r"] = nullptr;
  }
  report["all_pass"] = all;

  ensure_dir(out_dir);
  Report r;
  r.passed = all;
  r.json = report.dump(2) + "\n";
  r.text = text.str();
  write_text(out_dir / "check_report.json", r.json);
  return r;
}

}  // namespace nsync
