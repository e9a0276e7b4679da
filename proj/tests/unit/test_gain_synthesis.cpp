#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nsync/error.hpp"
#include "nsync/gain_synthesis.hpp"
#include "support/oracles.hpp"
#include "support/random_systems.hpp"

namespace nsync {
namespace {

Matrix rot() {
  Matrix m(2, 2);
  m << 0, 1, -1, 0;
  return m;
}

Matrix row(std::initializer_list<double> v) {
  Matrix m(1, static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) m(0, i++) = x;
  return m;
}

TEST(CesaroGram, SkewGivesIdentity) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix s = testing::random_skew(1 + trial % 5, rng);
    EXPECT_LE((cesaro_gram(s) - Matrix::Identity(s.rows(), s.rows())).norm(), 1e-9);
  }
}

TEST(CesaroGram, ScaledRotation) {
  Matrix f(2, 2);
  f << 0, 2, -0.5, 0;
  const Matrix p = cesaro_gram(f);
  EXPECT_LE((p - Vector{{0.625, 2.5}}.asDiagonal().toDenseMatrix()).norm(), 1e-8);
  EXPECT_LE((p * f + f.transpose() * p).norm(), 1e-12);
}

TEST(CesaroGram, ScaledRotationQuadrature) {
  Matrix f(2, 2);
  f << 0, 2, -0.5, 0;
  const Matrix q = testing::cesaro_quadrature(f, 1e4, 200000);
  EXPECT_LE((q - cesaro_gram(f)).norm(), 5e-4);
}

TEST(CesaroGram, ZeroScalar) {
  EXPECT_NEAR(cesaro_gram(Matrix::Zero(1, 1))(0, 0), 1.0, 1e-15);
}

TEST(CesaroGram, MixedFrequenciesMatchQuadrature) {
  // Marginal part with frequencies 1 and sqrt(2) plus a zero mode, non-orthogonally conjugated.
  Matrix f0 = Matrix::Zero(5, 5);
  f0.topLeftCorner(2, 2) = rot();
  f0.block(2, 2, 2, 2) = std::sqrt(2.0) * rot();
  std::mt19937_64 rng(67);
  const Matrix t = testing::well_conditioned(5, rng);
  const Matrix f = t * f0 * t.inverse();
  const Matrix p = cesaro_gram(f);
  EXPECT_LE((p * f + f.transpose() * p).norm(), 1e-9 * p.norm() * std::max(1.0, f.norm()));
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(p).eigenvalues().minCoeff(), 0.0);
  const Matrix q = testing::cesaro_quadrature(f, 2e3, 100000);
  EXPECT_LE((q - p).norm(), 5e-2 * p.norm());
}

TEST(CesaroGram, WithinSampledBounds) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix f0 = Matrix::Zero(4, 4);
    f0.topLeftCorner(2, 2) = (0.5 + trial * 0.1) * rot();
    f0.bottomRightCorner(2, 2) = (1.3 + trial * 0.05) * rot();
    const Matrix t = testing::well_conditioned(4, rng);
    const Matrix f = t * f0 * t.inverse();
    double a = std::numeric_limits<double>::infinity();
    double b = 0.0;
    for (int k = 0; k < 400; ++k) {
      const Matrix e = expm(f, 0.1 * k);
      const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(e.transpose() * e).eigenvalues();
      a = std::min(a, ev.minCoeff());
      b = std::max(b, ev.maxCoeff());
    }
    const Vector pe = Eigen::SelfAdjointEigenSolver<Matrix>(cesaro_gram(f)).eigenvalues();
    EXPECT_GE(pe.minCoeff(), a * (1 - 1e-9));
    EXPECT_LE(pe.maxCoeff(), b * (1 + 1e-9));
  }
}

TEST(CesaroGram, RejectsOffAxis) {
  EXPECT_THROW(cesaro_gram(-Matrix::Identity(2, 2)), InvalidArgument);
  Matrix j(2, 2);
  j << 0, 1, 0, 0;
  EXPECT_THROW(cesaro_gram(j), InvalidArgument);
}

TEST(OutputGain, HarmonicOscillator) {
  const GainSynthesis g = synthesize_output_gain(LinearAgent::output_coupled(rot(), row({0, 1})));
  EXPECT_LE((g.gain - Vector{{0.0, 1.0}}).norm(), 1e-10);
  EXPECT_EQ(g.decomposition.n1, 2);
  EXPECT_LE(g.residuals.commutation, 1e-12);
  EXPECT_LE(g.residuals.skew, 1e-12);
  EXPECT_TRUE(g.residuals.coupling_observable);
}

TEST(OutputGain, HurwitzGivesExactZero) {
  const GainSynthesis g =
      synthesize_output_gain(LinearAgent::output_coupled(-Matrix::Identity(2, 2), row({1, 0})));
  EXPECT_EQ(g.gain.rows(), 2);
  EXPECT_EQ(g.gain.cols(), 1);
  EXPECT_TRUE((g.gain.array() == 0.0).all());
  EXPECT_EQ(g.P.size(), 0);
  EXPECT_EQ(g.S.size(), 0);
  EXPECT_EQ(g.H.size(), 0);
}

TEST(OutputGain, SingleIntegrator) {
  const GainSynthesis g = synthesize_output_gain(LinearAgent::output_coupled(Matrix::Zero(1, 1), row({1})));
  EXPECT_NEAR(g.gain(0, 0), 1.0, 1e-14);
}

TEST(OutputGain, RejectsViolatedAssumptions) {
  Matrix j(2, 2);
  j << 0, 1, 0, 0;
  try {
    synthesize_output_gain(LinearAgent::output_coupled(j, row({1, 0})));
    FAIL();
  } catch (const AssumptionViolation& e) {
    EXPECT_EQ(e.assumption(), "A1");
  }
  try {
    synthesize_output_gain(LinearAgent::output_coupled(rot(), row({0, 0})));
    FAIL();
  } catch (const AssumptionViolation& e) {
    EXPECT_EQ(e.assumption(), "A2");
  }
}

TEST(StateGain, HarmonicOscillator) {
  const GainSynthesis g = synthesize_state_gain(LinearAgent::state_coupled(rot(), Vector{{0.0, 1.0}}));
  EXPECT_LE((g.gain - row({0, 1})).norm(), 1e-10);
}

TEST(StateGain, HurwitzGivesExactZero) {
  const GainSynthesis g =
      synthesize_state_gain(LinearAgent::state_coupled(-Matrix::Identity(2, 2), Vector{{0.0, 1.0}}));
  EXPECT_EQ(g.gain.rows(), 1);
  EXPECT_EQ(g.gain.cols(), 2);
  EXPECT_TRUE((g.gain.array() == 0.0).all());
}

TEST(StateGain, SingleIntegrator) {
  const GainSynthesis g = synthesize_state_gain(LinearAgent::state_coupled(Matrix::Zero(1, 1), row({1})));
  EXPECT_NEAR(g.gain(0, 0), 1.0, 1e-14);
}

TEST(StateGain, RejectsViolatedAssumptions) {
  try {
    synthesize_state_gain(LinearAgent::state_coupled(rot(), Matrix::Zero(2, 1)));
    FAIL();
  } catch (const AssumptionViolation& e) {
    EXPECT_EQ(e.assumption(), "B2");
  }
  try {
    synthesize_state_gain(LinearAgent::state_coupled(Matrix::Identity(2, 2), Matrix::Identity(2, 2)));
    FAIL();
  } catch (const AssumptionViolation& e) {
    EXPECT_EQ(e.assumption(), "B1");
  }
}

TEST(LinearAgent, RejectsShapeMismatch) {
  EXPECT_THROW(LinearAgent::output_coupled(rot(), row({1, 0, 0})), InvalidArgument);
  EXPECT_THROW(LinearAgent::state_coupled(rot(), Matrix::Zero(3, 1)), InvalidArgument);
}

void expect_invariants(const GainSynthesis& g, const LinearAgent& agent, int trial) {
  const Index n1 = g.decomposition.n1;
  if (n1 == 0) {
    EXPECT_TRUE((g.gain.array() == 0.0).all()) << trial;
    return;
  }
  const Matrix& f = g.decomposition.F;
  EXPECT_LE((g.P * f + f.transpose() * g.P).norm(), 1e-8 * g.P.norm()) << trial;
  EXPECT_LE((g.S + g.S.transpose()).norm(), 1e-8 * std::max(1.0, g.S.norm())) << trial;
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(g.P).eigenvalues().minCoeff(), 0.0) << trial;
  const Matrix p_inv_sqrt = g.P_sqrt.inverse();
  if (g.kind == FeedbackKind::kOutput) {
    EXPECT_LE((g.H - *agent.C * g.decomposition.U * p_inv_sqrt).norm(), 1e-8 * std::max(1.0, g.H.norm()));
    EXPECT_TRUE(is_observable(g.H, g.S)) << trial;
  } else {
    EXPECT_LE((g.H - (g.P_sqrt * g.decomposition.U_dag * *agent.B).transpose()).norm(),
              1e-8 * std::max(1.0, g.H.norm()));
    EXPECT_TRUE(is_controllable(g.S, g.H.transpose())) << trial;
  }
}

TEST(Synthesis, RandomAgentsSatisfyInvariants) {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 200; ++trial) {
    const LinearAgent out = testing::random_output_agent(rng);
    expect_invariants(synthesize_output_gain(out), out, trial);
    const LinearAgent st = testing::random_state_agent(rng);
    expect_invariants(synthesize_state_gain(st), st, trial);
  }
}

TEST(BasisInvariance, IdenticalSplits) {
  const LinearAgent agent = LinearAgent::output_coupled(rot(), row({0.3, 1}));
  const ModalDecomposition d = modal_split(rot());
  EXPECT_EQ(basis_invariance_check(agent, d, d), 0.0);
}

TEST(BasisInvariance, OrthogonalRebasingOnSkewA) {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = testing::random_skew(4, rng);
    const LinearAgent agent = LinearAgent::output_coupled(a, testing::random_matrix(2, 4, rng));
    const ModalDecomposition d = modal_split(a);
    const Matrix r = testing::random_orthogonal(d.n1, rng);
    ModalDecomposition e = d;
    e.U = d.U * r;
    e.U_dag = r.transpose() * d.U_dag;
    e.F = r.transpose() * d.F * r;
    EXPECT_LE(basis_invariance_check(agent, d, e), 1e-9);
  }
}

TEST(BasisInvariance, DiagonalRebasingIsMeasured) {
  Matrix f(2, 2);
  f << 0, 2, -0.5, 0;
  const LinearAgent agent = LinearAgent::output_coupled(f, row({1, 1}));
  const ModalDecomposition d = modal_split(f);
  ModalDecomposition e = d;
  const Matrix s = Vector{{3.0, 0.5}}.asDiagonal();
  e.U = d.U * s;
  e.U_dag = s.inverse() * d.U_dag;
  e.F = s.inverse() * d.F * s;
  const double diff = basis_invariance_check(agent, d, e);
  EXPECT_TRUE(std::isfinite(diff));
  RecordProperty("diagonal_rebasing_difference", std::to_string(diff));
}

TEST(BasisInvariance, RejectsSplitsOfDifferentMatrices) {
  const LinearAgent agent = LinearAgent::output_coupled(rot(), row({0, 1}));
  const ModalDecomposition d = modal_split(rot());
  const ModalDecomposition e = modal_split(2.0 * rot());
  EXPECT_THROW(basis_invariance_check(agent, d, e), InvalidArgument);
}

TEST(Duality, NormalAgents) {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 20; ++trial) {
    // normal A: orthogonal conjugate of rotation and decay blocks
    Matrix a0 = Matrix::Zero(4, 4);
    a0.topLeftCorner(2, 2) = (0.5 + 0.1 * trial) * rot();
    a0(2, 2) = -1.0;
    a0(3, 3) = -0.5;
    const Matrix q = testing::random_orthogonal(4, rng);
    const Matrix a = q * a0 * q.transpose();
    const Matrix b = testing::random_matrix(4, 2, rng);
    const ModalDecomposition d = modal_split(a);
    ModalDecomposition dt;
    dt.n1 = d.n1;
    dt.n2 = d.n2;
    dt.U = d.U_dag.transpose();
    dt.U_dag = d.U.transpose();
    dt.W = d.W_dag.transpose();
    dt.W_dag = d.W.transpose();
    dt.F = d.F.transpose();
    dt.G = d.G.transpose();
    const Matrix k = synthesize_state_gain(LinearAgent::state_coupled(a, b), d).gain;
    const Matrix l =
        synthesize_output_gain(LinearAgent::output_coupled(a.transpose(), b.transpose()), dt).gain;
    EXPECT_LE((k - l.transpose()).norm(), 1e-9 * std::max(1.0, k.norm())) << trial;
  }
}

}  // namespace
}  // namespace nsync
