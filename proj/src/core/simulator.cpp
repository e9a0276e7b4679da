#include "nsync/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "nsync/error.hpp"

namespace nsync {

namespace {

double inf_norm_of(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

void fill_metrics(const Vector& x, const Vector& xbar, Index p, Index n, double& sync,
                  double& disagreement) {
  sync = 0.0;
  disagreement = 0.0;
  for (Index i = 0; i < p; ++i) {
    const auto xi = x.segment(i * n, n);
    sync = std::max(sync, (xi - xbar).norm());
    for (Index j = i + 1; j < p; ++j) {
      disagreement = std::max(disagreement, (xi - x.segment(j * n, n)).norm());
    }
  }
}

Vector weighted_average(const Vector& x, const Vector& r, Index n) {
  Vector avg = Vector::Zero(n);
  for (Index i = 0; i < r.size(); ++i) avg += r(i) * x.segment(i * n, n);
  return avg;
}

}  // namespace

CoupledSystem::CoupledSystem(Matrix a, Matrix coupling, NetworkTopology topology,
                             std::optional<Matrix> gain)
    : a_(std::move(a)),
      coupling_(std::move(coupling)),
      topology_(std::move(topology)),
      gain_(std::move(gain)) {
  if (dim() <= kDenseLimit) {
    const Index p = topology_.p();
    dense_ = kron(Matrix::Identity(p, p), a_) + kron(topology_.gamma(), coupling_);
  }
}

CoupledSystem CoupledSystem::assemble(const LinearAgent& agent, const GainSynthesis& gain,
                                      const NetworkTopology& topology) {
  const Index n = agent.n();
  Matrix coupling;
  if (gain.kind != agent.kind()) {
    throw InvalidArgument("gain kind does not match the agent's coupling matrix");
  }
  if (agent.kind() == FeedbackKind::kOutput) {
    if (gain.gain.rows() != n || gain.gain.cols() != agent.C->rows()) {
      throw InvalidArgument("output gain L must be n x m");
    }
    coupling = gain.gain * *agent.C;
  } else {
    if (gain.gain.rows() != agent.B->cols() || gain.gain.cols() != n) {
      throw InvalidArgument("state gain K must be m x n");
    }
    coupling = *agent.B * gain.gain;
  }
  return CoupledSystem(agent.A, std::move(coupling), topology, gain.gain);
}

CoupledSystem CoupledSystem::from_factors(Matrix a, Matrix coupling,
                                          const NetworkTopology& topology) {
  require_square(a, "A");
  require_finite(a, "A");
  require_finite(coupling, "coupling");
  if (coupling.rows() != a.rows() || coupling.cols() != a.cols()) {
    throw InvalidArgument("coupling block must match A");
  }
  return CoupledSystem(std::move(a), std::move(coupling), topology, std::nullopt);
}

const Matrix& CoupledSystem::stacked() const {
  if (!has_dense()) {
    throw InvalidArgument("stacked dimension " + std::to_string(dim()) +
                          " exceeds the dense assembly limit");
  }
  return dense_;
}

Vector CoupledSystem::apply(const Vector& x) const {
  const Index n = this->n();
  const Index p = this->p();
  const Eigen::Map<const Matrix> states(x.data(), n, p);
  Matrix out = a_ * states + coupling_ * states * topology_.gamma().transpose();
  return Eigen::Map<const Vector>(out.data(), n * p);
}

double CoupledSystem::inf_norm() const {
  if (has_dense()) return inf_norm_of(dense_);
  return inf_norm_of(a_) + inf_norm_of(topology_.gamma()) * inf_norm_of(coupling_);
}

Vector reference_trajectory(const Matrix& a, const NetworkTopology& topology, const Vector& x0,
                            double t) {
  if (!topology.connected()) throw AssumptionViolation("connectivity", "topology not connected");
  const Index n = a.rows();
  if (x0.size() != topology.p() * n) {
    throw InvalidArgument("initial condition must have length p*n = " +
                          std::to_string(topology.p() * n));
  }
  if (!(t >= 0.0)) throw InvalidArgument("reference time must be nonnegative");
  return expm(a, t) * weighted_average(x0, topology.r(), n);
}

Vector reference_trajectory(const LinearAgent& agent, const NetworkTopology& topology,
                            const Vector& x0, double t) {
  return reference_trajectory(agent.A, topology, x0, t);
}

SimulationRun simulate(const CoupledSystem& system, const Vector& x0, double horizon, double dt,
                       Method method) {
  const Index p = system.p();
  const Index n = system.n();
  const Index dim = system.dim();
  if (!system.topology().connected()) {
    throw AssumptionViolation("connectivity", "topology not connected");
  }
  if (x0.size() != dim) {
    throw InvalidArgument("initial condition must have length " + std::to_string(dim));
  }
  if (!x0.allFinite()) throw InvalidArgument("initial condition contains non-finite entries");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("horizon must be > 0");
  if (!(dt > 0.0) || dt > horizon) throw InvalidArgument("step must satisfy 0 < dt <= T");

  const auto steps = static_cast<Index>(std::ceil(horizon / dt - 1e-9));
  const double h = horizon / static_cast<double>(steps);
  if (method == Method::kRk4 && h * system.inf_norm() > 0.5) {
    throw RuntimeFailure("rk4 step-size guard violated: dt * ||M|| = " +
                         std::to_string(h * system.inf_norm()) + " > 0.5");
  }

  SimulationRun run;
  run.method = method;
  run.p = p;
  run.n = n;
  run.times.resize(steps + 1);
  run.states.resize(dim, steps + 1);
  run.reference.resize(n, steps + 1);
  run.sync_error.resize(steps + 1);
  run.disagreement.resize(steps + 1);

  Matrix step_map;
  if (method == Method::kExactExpm) step_map = expm(system.stacked(), h);
  const Matrix ref_step = expm(system.A(), h);

  Vector x = x0;
  Vector xbar = weighted_average(x0, system.topology().r(), n);
  for (Index k = 0; k <= steps; ++k) {
    if (k > 0) {
      if (method == Method::kExactExpm) {
        x = step_map * x;
      } else {
        const Vector k1 = system.apply(x);
        const Vector k2 = system.apply(x + 0.5 * h * k1);
        const Vector k3 = system.apply(x + 0.5 * h * k2);
        const Vector k4 = system.apply(x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      xbar = ref_step * xbar;
      if (!x.allFinite()) {
        throw RuntimeFailure("non-finite state encountered at step " + std::to_string(k));
      }
    }
    run.times[k] = k == steps ? horizon : static_cast<double>(k) * h;
    run.states.col(k) = x;
    run.reference.col(k) = xbar;
    fill_metrics(x, xbar, p, n, run.sync_error[k], run.disagreement[k]);
  }
  return run;
}

Vector to_modal(const GainSynthesis& gain, const Vector& x_agent) {
  const ModalDecomposition& d = gain.decomposition;
  Vector out(d.n1 + d.n2);
  if (d.n1 > 0) out.head(d.n1) = gain.P_sqrt * (d.U_dag * x_agent);
  if (d.n2 > 0) out.tail(d.n2) = d.W_dag * x_agent;
  return out;
}

Vector from_modal(const GainSynthesis& gain, const Vector& xi_eta) {
  const ModalDecomposition& d = gain.decomposition;
  Vector x = Vector::Zero(d.n1 + d.n2);
  if (d.n1 > 0) x += d.U * gain.P_sqrt.llt().solve(Vector(xi_eta.head(d.n1)));
  if (d.n2 > 0) x += d.W * xi_eta.tail(d.n2);
  return x;
}

ModalErrorSeries modal_error(const CoupledSystem& system, const GainSynthesis& gain,
                             const SimulationRun& run) {
  if (!system.gain() || system.gain()->rows() != gain.gain.rows() ||
      system.gain()->cols() != gain.gain.cols() || *system.gain() != gain.gain) {
    throw InvalidArgument("mismatched provenance: the system was not assembled from this gain");
  }
  const ModalDecomposition& d = gain.decomposition;
  const Index p = run.p;
  ModalErrorSeries out;
  std::vector<Vector> modal(p);
  for (Index k = 0; k < run.states.cols(); ++k) {
    for (Index i = 0; i < p; ++i) modal[i] = to_modal(gain, run.agent_state(k, i));
    double xi_dis = 0.0;
    double eta = 0.0;
    for (Index i = 0; i < p; ++i) {
      if (d.n2 > 0) eta = std::max(eta, modal[i].tail(d.n2).norm());
      for (Index j = i + 1; j < p; ++j) {
        xi_dis = std::max(xi_dis, (modal[i].head(d.n1) - modal[j].head(d.n1)).norm());
      }
    }
    out.xi_disagreement.push_back(xi_dis);
    out.eta_norm.push_back(eta);
  }
  return out;
}

SpectralCheck spectral_check(const CoupledSystem& system) {
  SpectralCheck out;
  const Matrix& m = system.stacked();
  Eigen::EigenSolver<Matrix> solver(m, false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  const Eigen::VectorXcd ev = solver.eigenvalues();
  out.eigenvalues.assign(ev.data(), ev.data() + ev.size());

  const SpectrumReport agent = spectrum(system.A());
  std::vector<char> used(ev.size(), 0);
  for (const Complex& lambda : agent.eigenvalues) {
    Index best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < ev.size(); ++i) {
      if (used[i]) continue;
      const double dist = std::abs(ev(i) - lambda);
      if (dist < best_dist) {
        best_dist = dist;
        best = i;
      }
    }
    used[best] = 1;
    out.reference_modes.push_back(ev(best));
    out.match_error = std::max(out.match_error, best_dist);
  }
  double top = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < ev.size(); ++i) {
    if (!used[i]) {
      out.remaining.push_back(ev(i));
      top = std::max(top, ev(i).real());
    }
  }
  out.delta = -top;
  const double margin = axis_tolerance(m);
  out.decaying = out.match_error <= 1e-6 * std::max(1.0, system.A().norm()) && top < -margin;
  return out;
}

double assertion_horizon(double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("assertion horizon needs a positive spectral gap");
  return 60.0 / delta;
}

double average_invariant_deviation(const CoupledSystem& system, const SimulationRun& run) {
  const Index n = run.n;
  const Vector& r = system.topology().r();
  const Vector x0 = run.states.col(0);
  double worst = 0.0;
  for (Index k = 0; k < run.states.cols(); ++k) {
    const Vector lhs = weighted_average(run.states.col(k), r, n);
    const Vector rhs = reference_trajectory(system.A(), system.topology(), x0, run.times[k]);
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return worst;
}

}  // namespace nsync
