#include "nsync/gain_synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "nsync/error.hpp"

namespace nsync {

namespace {

constexpr int kPeriodNodes = 8;

std::string dims(Index r, Index c) { return std::to_string(r) + "x" + std::to_string(c); }

// Average of e^{T^T s} Z e^{T s} over one period of a block whose
// eigenvalues are +-i*omega.
Matrix periodic_average(const Matrix& t, const Matrix& z, double omega) {
  if (omega == 0.0) return z;
  const double step = 2.0 * std::numbers::pi / (kPeriodNodes * omega);
  const Matrix e_step = expm(t, step);
  Matrix e = Matrix::Identity(t.rows(), t.cols());
  Matrix sum = Matrix::Zero(z.rows(), z.cols());
  for (int k = 0; k < kPeriodNodes; ++k) {
    sum += e.transpose() * z * e;
    e = e * e_step;
  }
  return sum / kPeriodNodes;
}

void validate_split(const Matrix& a, const ModalDecomposition& split) {
  const Index n = a.rows();
  if (split.n1 + split.n2 != n || split.U.rows() != n || split.W.rows() != n ||
      split.U.cols() != split.n1 || split.W.cols() != split.n2 || split.U_dag.rows() != split.n1 ||
      split.W_dag.rows() != split.n2 || split.F.rows() != split.n1 ||
      split.G.rows() != split.n2) {
    throw InvalidArgument("modal split has inconsistent block sizes for a " + dims(n, n) + " A");
  }
  if (reconstruction_residual(a, split) > 1e-8 * std::max(1.0, a.norm())) {
    throw InvalidArgument("modal split does not reconstruct A");
  }
}

double commutation_tolerance(const Matrix& p, const Matrix& f) {
  return 1e-8 * std::max(1.0, p.norm()) * std::max(1.0, f.norm());
}

// Steps shared by both gains: P, its square root, S and the residual checks.
GainSynthesis common_intermediates(const Matrix& a, const ModalDecomposition& split,
                                   FeedbackKind kind) {
  validate_split(a, split);
  GainSynthesis g;
  g.kind = kind;
  g.decomposition = split;
  g.residuals.reconstruction = reconstruction_residual(a, split);
  if (split.n1 == 0) return g;
  g.P = cesaro_gram(split.F);
  g.P_sqrt = spd_sqrt(g.P);
  const Matrix p_sqrt_inv = g.P_sqrt.inverse();
  g.S = g.P_sqrt * split.F * p_sqrt_inv;
  g.residuals.commutation = (g.P * split.F + split.F.transpose() * g.P).norm();
  g.residuals.skew = (g.S + g.S.transpose()).norm();
  g.residuals.sqrt_residual = (g.P_sqrt * g.P_sqrt - g.P).norm();
  if (g.residuals.commutation > commutation_tolerance(g.P, split.F)) {
    throw NumericalError("P F + F^T P residual out of tolerance");
  }
  if (g.residuals.skew > 1e-8 * std::max(1.0, g.S.norm())) {
    throw NumericalError("S is not skew-symmetric within tolerance");
  }
  return g;
}

}  // namespace

LinearAgent LinearAgent::output_coupled(Matrix a, Matrix c) {
  require_square(a, "A");
  require_finite(a, "A");
  require_finite(c, "C");
  if (c.cols() != a.rows() || c.rows() < 1) {
    throw InvalidArgument("C must be m x " + std::to_string(a.rows()) + ", got " +
                          dims(c.rows(), c.cols()));
  }
  LinearAgent agent;
  agent.A = std::move(a);
  agent.C = std::move(c);
  return agent;
}

LinearAgent LinearAgent::state_coupled(Matrix a, Matrix b) {
  require_square(a, "A");
  require_finite(a, "A");
  require_finite(b, "B");
  if (b.rows() != a.rows() || b.cols() < 1) {
    throw InvalidArgument("B must be " + std::to_string(a.rows()) + " x m, got " +
                          dims(b.rows(), b.cols()));
  }
  LinearAgent agent;
  agent.A = std::move(a);
  agent.B = std::move(b);
  return agent;
}

Index LinearAgent::m() const { return C ? C->rows() : B->cols(); }

void check_assumptions(const LinearAgent& agent) {
  const bool output = agent.kind() == FeedbackKind::kOutput;
  if (!is_neutrally_stable(agent.A)) {
    throw AssumptionViolation(output ? "A1" : "B1", "A is not neutrally stable");
  }
  if (output && !is_detectable(*agent.C, agent.A)) {
    throw AssumptionViolation("A2", "(C, A) is not detectable");
  }
  if (!output && !is_stabilizable(agent.A, *agent.B)) {
    throw AssumptionViolation("B2", "(A, B) is not stabilizable");
  }
}

Matrix cesaro_gram(const Matrix& f) {
  require_square(f, "F");
  require_finite(f, "F");
  const Index n = f.rows();
  if (n == 0) return f;
  const SpectrumReport report = spectrum(f);
  if (report.count(AxisTag::kOnAxis) != static_cast<std::size_t>(n)) {
    throw InvalidArgument("F has eigenvalues off the imaginary axis");
  }
  if (!report.on_axis_semisimple) throw InvalidArgument("F is not semisimple on the axis");

  // Distinct frequencies |Im lambda|, merged within eps_freq.
  std::vector<double> freq;
  for (const Complex& lambda : report.eigenvalues) freq.push_back(std::abs(lambda.imag()));
  std::sort(freq.begin(), freq.end());
  const double eps_freq = 1e-8 * f.norm();
  std::vector<double> clusters;
  for (double w : freq) {
    if (clusters.empty() || w - clusters.back() > eps_freq) {
      clusters.push_back(w);
    } else {
      // keep a running representative; exact conjugates make this a no-op
      clusters.back() = 0.5 * (clusters.back() + w);
    }
  }

  // Peel one frequency at a time off the remaining block. X/Y track the
  // remaining block's basis and its left inverse in the original coordinates.
  Matrix x = Matrix::Identity(n, n);
  Matrix y = Matrix::Identity(n, n);
  Matrix rest = f;
  Matrix p = Matrix::Zero(n, n);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const double omega = clusters[c];
    Matrix xc;
    Matrix yc;
    Matrix tc;
    if (c + 1 == clusters.size()) {
      xc = x;
      yc = y;
      tc = rest;
    } else {
      const double upper = 0.5 * (omega + clusters[c + 1]);
      const ModalDecomposition s = split_spectrum(
          rest, [upper](Complex lambda) { return std::abs(lambda.imag()) < upper; });
      xc = x * s.U;
      yc = s.U_dag * y;
      tc = s.F;
      x = x * s.W;
      y = s.W_dag * y;
      rest = s.G;
    }
    if (omega == 0.0 && tc.norm() > 1e-8 * std::max(1.0, f.norm())) {
      throw InvalidArgument("F is not semisimple at the zero eigenvalue");
    }
    p += yc.transpose() * periodic_average(tc, xc.transpose() * xc, omega) * yc;
  }
  p = 0.5 * (p + p.transpose());

  if ((p * f + f.transpose() * p).norm() > 1e-9 * p.norm() * std::max(1.0, f.norm())) {
    throw NumericalError("Cesaro Gram matrix fails P F + F^T P = 0");
  }
  return p;
}

GainSynthesis synthesize_output_gain(const LinearAgent& agent) {
  if (!agent.C) throw InvalidArgument("output-feedback synthesis needs C");
  check_assumptions(agent);
  return synthesize_output_gain(agent, modal_split(agent.A));
}

GainSynthesis synthesize_output_gain(const LinearAgent& agent, const ModalDecomposition& split) {
  if (!agent.C) throw InvalidArgument("output-feedback synthesis needs C");
  const Matrix& c = *agent.C;
  GainSynthesis g = common_intermediates(agent.A, split, FeedbackKind::kOutput);
  if (split.n1 == 0) {
    g.gain = Matrix::Zero(agent.n(), agent.m());
    g.H = Matrix(agent.m(), 0);
    return g;
  }
  const Matrix cu = c * split.U;
  g.H = cu * g.P_sqrt.inverse();
  g.gain = split.U * g.P.llt().solve(cu.transpose());
  g.residuals.coupling_observable = is_observable(g.H, g.S);
  if (!g.residuals.coupling_observable) {
    throw NumericalError("(H, S) is not observable although (C, A) passed detectability");
  }
  return g;
}

GainSynthesis synthesize_state_gain(const LinearAgent& agent) {
  if (!agent.B) throw InvalidArgument("state-feedback synthesis needs B");
  check_assumptions(agent);
  return synthesize_state_gain(agent, modal_split(agent.A));
}

GainSynthesis synthesize_state_gain(const LinearAgent& agent, const ModalDecomposition& split) {
  if (!agent.B) throw InvalidArgument("state-feedback synthesis needs B");
  const Matrix& b = *agent.B;
  GainSynthesis g = common_intermediates(agent.A, split, FeedbackKind::kState);
  if (split.n1 == 0) {
    g.gain = Matrix::Zero(agent.m(), agent.n());
    g.H = Matrix(agent.m(), 0);
    return g;
  }
  const Matrix ub = split.U_dag * b;
  g.H = (g.P_sqrt * ub).transpose();
  g.gain = ub.transpose() * g.P * split.U_dag;
  g.residuals.coupling_observable = is_controllable(g.S, g.H.transpose());
  if (!g.residuals.coupling_observable) {
    throw NumericalError("(S, H^T) is not controllable although (A, B) passed stabilizability");
  }
  return g;
}

GainSynthesis synthesize_gain(const LinearAgent& agent) {
  return agent.kind() == FeedbackKind::kOutput ? synthesize_output_gain(agent)
                                               : synthesize_state_gain(agent);
}

double basis_invariance_check(const LinearAgent& agent, const ModalDecomposition& split_a,
                              const ModalDecomposition& split_b) {
  validate_split(agent.A, split_a);
  validate_split(agent.A, split_b);
  const bool output = agent.kind() == FeedbackKind::kOutput;
  const GainSynthesis ga =
      output ? synthesize_output_gain(agent, split_a) : synthesize_state_gain(agent, split_a);
  const GainSynthesis gb =
      output ? synthesize_output_gain(agent, split_b) : synthesize_state_gain(agent, split_b);
  return (ga.gain - gb.gain).norm();
}

}  // namespace nsync
