#include "nsync/nsync.h"

#include <exception>
#include <new>
#include <string>

#include "nsync/error.hpp"
#include "nsync/scenario.hpp"

struct nsync_matrix {
  nsync::Matrix value;
};
struct nsync_topology {
  nsync::NetworkTopology value;
};
struct nsync_agent {
  nsync::LinearAgent value;
};
struct nsync_gain {
  nsync::GainSynthesis value;
};
struct nsync_run {
  nsync::SimulationRun value;
};
struct nsync_scenario {
  nsync::ScenarioConfig value;
};
struct nsync_report {
  nsync::Report value;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_assumption;

nsync_status status_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const nsync::Error*>(&e)) {
    switch (err->kind()) {
      case nsync::ErrorKind::kInvalidArgument:
        return NSYNC_ERR_INVALID_ARGUMENT;
      case nsync::ErrorKind::kAssumption:
        return NSYNC_ERR_ASSUMPTION;
      case nsync::ErrorKind::kNumerical:
        return NSYNC_ERR_NUMERICAL;
      case nsync::ErrorKind::kConfig:
        return NSYNC_ERR_CONFIG;
      case nsync::ErrorKind::kRuntime:
        return NSYNC_ERR_RUNTIME;
    }
  }
  return NSYNC_ERR_INTERNAL;
}

template <typename Fn>
nsync_status guarded(Fn&& fn) {
  g_last_error.clear();
  g_last_assumption.clear();
  try {
    fn();
    return NSYNC_OK;
  } catch (const nsync::AssumptionViolation& e) {
    g_last_error = e.what();
    g_last_assumption = e.assumption();
    return NSYNC_ERR_ASSUMPTION;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return NSYNC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return status_for(e);
  }
}

nsync_status null_argument(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  g_last_assumption.clear();
  return NSYNC_ERR_INVALID_ARGUMENT;
}

nsync_status copy_out(const nsync::Matrix& m, nsync_matrix** out) {
  return guarded([&] { *out = new nsync_matrix{m}; });
}

template <typename Range>
nsync_status copy_array(const Range& values, double* out, size_t len) {
  if (!out) return null_argument("out");
  if (len < static_cast<size_t>(values.size())) {
    g_last_error = "output buffer too small";
    return NSYNC_ERR_INVALID_ARGUMENT;
  }
  for (size_t i = 0; i < static_cast<size_t>(values.size()); ++i) out[i] = values[i];
  return NSYNC_OK;
}

}  // namespace

extern "C" {

const char* nsync_version(void) { return "1.0.0"; }

const char* nsync_status_string(nsync_status status) {
  switch (status) {
    case NSYNC_OK:
      return "ok";
    case NSYNC_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case NSYNC_ERR_CONFIG:
      return "configuration error";
    case NSYNC_ERR_ASSUMPTION:
      return "assumption violated";
    case NSYNC_ERR_NUMERICAL:
      return "numerical failure";
    case NSYNC_ERR_RUNTIME:
      return "runtime failure";
    case NSYNC_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* nsync_last_error(void) { return g_last_error.c_str(); }
const char* nsync_last_assumption(void) { return g_last_assumption.c_str(); }

int nsync_exit_code(nsync_status status) {
  switch (status) {
    case NSYNC_OK:
      return 0;
    case NSYNC_ERR_INVALID_ARGUMENT:
    case NSYNC_ERR_CONFIG:
      return 1;
    case NSYNC_ERR_ASSUMPTION:
      return 2;
    default:
      return 3;
  }
}

nsync_status nsync_matrix_create(size_t rows, size_t cols, const double* row_major,
                                 nsync_matrix** out) {
  if (!out) return null_argument("out");
  if (!row_major && rows * cols > 0) return null_argument("row_major");
  return guarded([&] {
    nsync::Matrix m(static_cast<nsync::Index>(rows), static_cast<nsync::Index>(cols));
    for (size_t i = 0; i < rows; ++i) {
      for (size_t k = 0; k < cols; ++k) {
        m(static_cast<nsync::Index>(i), static_cast<nsync::Index>(k)) = row_major[i * cols + k];
      }
    }
    nsync::require_finite(m, "matrix");
    *out = new nsync_matrix{std::move(m)};
  });
}

void nsync_matrix_destroy(nsync_matrix* m) { delete m; }
size_t nsync_matrix_rows(const nsync_matrix* m) { return m ? static_cast<size_t>(m->value.rows()) : 0; }
size_t nsync_matrix_cols(const nsync_matrix* m) { return m ? static_cast<size_t>(m->value.cols()) : 0; }

nsync_status nsync_matrix_read(const nsync_matrix* m, double* out, size_t len) {
  if (!m) return null_argument("m");
  if (!out) return null_argument("out");
  const auto rows = m->value.rows();
  const auto cols = m->value.cols();
  if (len < static_cast<size_t>(rows * cols)) {
    g_last_error = "output buffer too small";
    return NSYNC_ERR_INVALID_ARGUMENT;
  }
  for (nsync::Index i = 0; i < rows; ++i) {
    for (nsync::Index k = 0; k < cols; ++k) out[i * cols + k] = m->value(i, k);
  }
  return NSYNC_OK;
}

nsync_status nsync_expm(const nsync_matrix* m, double t, nsync_matrix** out) {
  if (!m || !out) return null_argument("m/out");
  return guarded([&] { *out = new nsync_matrix{nsync::expm(m->value, t)}; });
}

nsync_status nsync_is_neutrally_stable(const nsync_matrix* a, int* out) {
  if (!a || !out) return null_argument("a/out");
  return guarded([&] { *out = nsync::is_neutrally_stable(a->value) ? 1 : 0; });
}

nsync_status nsync_is_detectable(const nsync_matrix* c, const nsync_matrix* a, int* out) {
  if (!c || !a || !out) return null_argument("c/a/out");
  return guarded([&] { *out = nsync::is_detectable(c->value, a->value) ? 1 : 0; });
}

nsync_status nsync_is_stabilizable(const nsync_matrix* a, const nsync_matrix* b, int* out) {
  if (!a || !b || !out) return null_argument("a/b/out");
  return guarded([&] { *out = nsync::is_stabilizable(a->value, b->value) ? 1 : 0; });
}

nsync_status nsync_topology_validate(const nsync_matrix* gamma, nsync_topology** out) {
  if (!gamma || !out) return null_argument("gamma/out");
  return guarded([&] { *out = new nsync_topology{nsync::validate_topology(gamma->value)}; });
}

nsync_status nsync_topology_random(size_t p, double density, uint64_t seed, nsync_topology** out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new nsync_topology{
        nsync::random_connected_topology(static_cast<nsync::Index>(p), density, seed)};
  });
}

void nsync_topology_destroy(nsync_topology* t) { delete t; }
size_t nsync_topology_size(const nsync_topology* t) { return t ? static_cast<size_t>(t->value.p()) : 0; }
int nsync_topology_connected(const nsync_topology* t) { return t && t->value.connected() ? 1 : 0; }

nsync_status nsync_topology_gamma(const nsync_topology* t, nsync_matrix** out) {
  if (!t || !out) return null_argument("t/out");
  return copy_out(t->value.gamma(), out);
}

nsync_status nsync_topology_stationary(const nsync_topology* t, nsync_matrix** out) {
  if (!t || !out) return null_argument("t/out");
  return guarded([&] { *out = new nsync_matrix{nsync::stationary_vector(t->value)}; });
}

nsync_status nsync_topology_ergodic_error(const nsync_topology* t, double time, double* out) {
  if (!t || !out) return null_argument("t/out");
  return guarded([&] { *out = nsync::ergodic_limit_check(t->value, time); });
}

nsync_status nsync_agent_output_coupled(const nsync_matrix* a, const nsync_matrix* c,
                                        nsync_agent** out) {
  if (!a || !c || !out) return null_argument("a/c/out");
  return guarded(
      [&] { *out = new nsync_agent{nsync::LinearAgent::output_coupled(a->value, c->value)}; });
}

nsync_status nsync_agent_state_coupled(const nsync_matrix* a, const nsync_matrix* b,
                                       nsync_agent** out) {
  if (!a || !b || !out) return null_argument("a/b/out");
  return guarded(
      [&] { *out = new nsync_agent{nsync::LinearAgent::state_coupled(a->value, b->value)}; });
}

void nsync_agent_destroy(nsync_agent* agent) { delete agent; }

nsync_status nsync_gain_synthesize(const nsync_agent* agent, nsync_gain** out) {
  if (!agent || !out) return null_argument("agent/out");
  return guarded([&] { *out = new nsync_gain{nsync::synthesize_gain(agent->value)}; });
}

void nsync_gain_destroy(nsync_gain* gain) { delete gain; }

nsync_status nsync_gain_matrix(const nsync_gain* gain, nsync_matrix** out) {
  if (!gain || !out) return null_argument("gain/out");
  return copy_out(gain->value.gain, out);
}

nsync_status nsync_gain_cesaro(const nsync_gain* gain, nsync_matrix** out) {
  if (!gain || !out) return null_argument("gain/out");
  return copy_out(gain->value.P, out);
}

size_t nsync_gain_marginal_dim(const nsync_gain* gain) {
  return gain ? static_cast<size_t>(gain->value.decomposition.n1) : 0;
}

nsync_status nsync_simulate(const nsync_agent* agent, const nsync_gain* gain,
                            const nsync_topology* topology, const double* x0, size_t x0_len,
                            double horizon, double dt, nsync_method method, nsync_run** out) {
  if (!agent || !gain || !topology || !x0 || !out) return null_argument("simulate arguments");
  return guarded([&] {
    const auto system = nsync::CoupledSystem::assemble(agent->value, gain->value, topology->value);
    const nsync::Vector init =
        Eigen::Map<const nsync::Vector>(x0, static_cast<nsync::Index>(x0_len));
    const nsync::Method m =
        method == NSYNC_METHOD_RK4 ? nsync::Method::kRk4 : nsync::Method::kExactExpm;
    *out = new nsync_run{nsync::simulate(system, init, horizon, dt, m)};
  });
}

void nsync_run_destroy(nsync_run* run) { delete run; }
size_t nsync_run_samples(const nsync_run* run) { return run ? run->value.times.size() : 0; }

nsync_status nsync_run_times(const nsync_run* run, double* out, size_t len) {
  if (!run) return null_argument("run");
  return copy_array(run->value.times, out, len);
}

nsync_status nsync_run_sync_error(const nsync_run* run, double* out, size_t len) {
  if (!run) return null_argument("run");
  return copy_array(run->value.sync_error, out, len);
}

nsync_status nsync_run_disagreement(const nsync_run* run, double* out, size_t len) {
  if (!run) return null_argument("run");
  return copy_array(run->value.disagreement, out, len);
}

nsync_status nsync_run_state(const nsync_run* run, size_t k, double* out, size_t len) {
  if (!run) return null_argument("run");
  if (k >= run->value.times.size()) {
    g_last_error = "sample index out of range";
    return NSYNC_ERR_INVALID_ARGUMENT;
  }
  const nsync::Vector col = run->value.states.col(static_cast<nsync::Index>(k));
  return copy_array(col, out, len);
}

nsync_status nsync_scenario_load(const char* path, nsync_scenario** out) {
  if (!path || !out) return null_argument("path/out");
  return guarded([&] { *out = new nsync_scenario{nsync::load_config(path)}; });
}

nsync_status nsync_scenario_parse(const char* text, nsync_scenario** out) {
  if (!text || !out) return null_argument("text/out");
  return guarded([&] { *out = new nsync_scenario{nsync::parse_config(text)}; });
}

void nsync_scenario_destroy(nsync_scenario* s) { delete s; }

nsync_status nsync_scenario_override_seed(nsync_scenario* s, uint64_t seed) {
  if (!s) return null_argument("s");
  return guarded([&] { nsync::override_seed(s->value, seed); });
}

const char* nsync_scenario_outputs(const nsync_scenario* s) {
  return s ? s->value.outputs.c_str() : "";
}

unsigned nsync_scenario_workers(const nsync_scenario* s) {
  return s && s->value.workers ? *s->value.workers : 0u;
}

nsync_status nsync_cmd_synth(const nsync_scenario* s, const char* out_dir, nsync_report** out) {
  if (!s || !out) return null_argument("s/out");
  return guarded([&] {
    const std::string dir = out_dir ? out_dir : s->value.outputs;
    *out = new nsync_report{nsync::cmd_synth(s->value, dir)};
  });
}

nsync_status nsync_cmd_simulate(const nsync_scenario* s, const char* out_dir, nsync_report** out) {
  if (!s || !out) return null_argument("s/out");
  return guarded([&] {
    const std::string dir = out_dir ? out_dir : s->value.outputs;
    *out = new nsync_report{nsync::cmd_simulate(s->value, dir)};
  });
}

nsync_status nsync_cmd_sweep(const nsync_scenario* s, const char* param, const double* values,
                             size_t n_values, const char* out_dir, unsigned workers,
                             nsync_report** out) {
  if (!s || !out) return null_argument("s/out");
  return guarded([&] {
    nsync::SweepSpec spec = s->value.sweep.value_or(nsync::SweepSpec{});
    if (param) spec.param = param;
    if (values && n_values > 0) spec.values.assign(values, values + n_values);
    if (spec.param.empty()) throw nsync::ConfigError("sweep parameter not specified");
    const std::string dir = out_dir ? out_dir : s->value.outputs;
    *out = new nsync_report{nsync::cmd_sweep(s->value, spec, dir, workers)};
  });
}

nsync_status nsync_cmd_check(const nsync_scenario* s, const char* out_dir, nsync_report** out) {
  if (!s || !out) return null_argument("s/out");
  return guarded([&] {
    const std::string dir = out_dir ? out_dir : s->value.outputs;
    *out = new nsync_report{nsync::cmd_check(s->value, dir)};
  });
}

void nsync_report_destroy(nsync_report* r) { delete r; }
int nsync_report_passed(const nsync_report* r) { return r && r->value.passed ? 1 : 0; }
const char* nsync_report_json(const nsync_report* r) { return r ? r->value.json.c_str() : ""; }
const char* nsync_report_text(const nsync_report* r) { return r ? r->value.text.c_str() : ""; }

}  // extern "C"
