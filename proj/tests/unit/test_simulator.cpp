#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nsync/error.hpp"
#include "nsync/simulator.hpp"
#include "support/random_systems.hpp"

namespace nsync {
namespace {

Matrix rot() {
  Matrix m(2, 2);
  m << 0, 1, -1, 0;
  return m;
}

Matrix pair_gamma() {
  Matrix g(2, 2);
  g << -1, 1, 1, -1;
  return g;
}

LinearAgent oscillator() {
  Matrix c(1, 2);
  c << 0, 1;
  return LinearAgent::output_coupled(rot(), c);
}

TEST(Assemble, SingleAgentIsA) {
  const LinearAgent agent = oscillator();
  const CoupledSystem sys =
      CoupledSystem::assemble(agent, synthesize_gain(agent), validate_topology(Matrix::Zero(1, 1)));
  EXPECT_EQ(sys.stacked(), rot());
}

TEST(Assemble, HarmonicPairByHand) {
  const LinearAgent agent = oscillator();
  const CoupledSystem sys =
      CoupledSystem::assemble(agent, synthesize_gain(agent), validate_topology(pair_gamma()));
  Matrix expected(4, 4);
  expected << 0, 1, 0, 0,   //
      -1, -1, 0, 1,         //
      0, 0, 0, 1,           //
      0, 1, -1, -1;
  EXPECT_LE((sys.stacked() - expected).norm(), 1e-10);
}

TEST(Assemble, ZeroCoupling) {
  const NetworkTopology t = random_connected_topology(3, 0.5, 1);
  const CoupledSystem sys = CoupledSystem::from_factors(rot(), Matrix::Zero(2, 2), t);
  EXPECT_EQ(sys.stacked(), kron(Matrix::Identity(3, 3), rot()));
}

TEST(Assemble, WeightedAverageDecoupled) {
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 20; ++trial) {
    const LinearAgent agent = testing::random_output_agent(rng);
    const NetworkTopology t = testing::random_topology(6, rng);
    const CoupledSystem sys = CoupledSystem::assemble(agent, synthesize_gain(agent), t);
    const Index n = agent.n();
    const Matrix rt = kron(t.r().transpose(), Matrix::Identity(n, n));
    const Matrix lhs = rt * sys.stacked();
    const Matrix rhs = rt * kron(Matrix::Identity(t.p(), t.p()), agent.A);
    EXPECT_LE((lhs - rhs).norm(), 1e-9 * std::max(1.0, sys.stacked().norm()));
  }
}

TEST(Assemble, KindMismatch) {
  const LinearAgent out = oscillator();
  const LinearAgent st = LinearAgent::state_coupled(rot(), Vector{{0.0, 1.0}});
  EXPECT_THROW(CoupledSystem::assemble(out, synthesize_gain(st), validate_topology(pair_gamma())),
               InvalidArgument);
}

TEST(Assemble, ApplyMatchesDense) {
  std::mt19937_64 rng(97);
  const LinearAgent agent = testing::random_state_agent(rng);
  const NetworkTopology t = testing::random_topology(5, rng);
  const CoupledSystem sys = CoupledSystem::assemble(agent, synthesize_gain(agent), t);
  const Vector x = testing::random_state(sys.dim(), rng);
  EXPECT_LE((sys.apply(x) - sys.stacked() * x).norm(), 1e-12 * std::max(1.0, x.norm()));
}

TEST(Reference, ScalarAverage) {
  const NetworkTopology t = validate_topology(pair_gamma());
  for (double s : {0.0, 1.0, 10.0}) {
    EXPECT_NEAR(reference_trajectory(Matrix::Zero(1, 1), t, Vector{{1.0, 3.0}}, s)(0), 2.0, 1e-15);
  }
}

TEST(Reference, RotatesLeaderState) {
  Matrix g(2, 2);
  g << 0, 0, 1, -1;
  const NetworkTopology t = validate_topology(g);
  const Vector x0{{1.0, 0.0, 5.0, 5.0}};
  for (double s : {0.3, 2.0, 7.5}) {
    const Vector xbar = reference_trajectory(rot(), t, x0, s);
    EXPECT_NEAR(xbar(0), std::cos(s), 1e-14);
    EXPECT_NEAR(xbar(1), -std::sin(s), 1e-14);
  }
}

TEST(Simulate, ZeroGainIntegratorsStayPut) {
  const CoupledSystem sys =
      CoupledSystem::from_factors(Matrix::Zero(1, 1), Matrix::Zero(1, 1), validate_topology(pair_gamma()));
  const Vector x0{{1.0, -2.0}};
  for (Method m : {Method::kExactExpm, Method::kRk4}) {
    const SimulationRun run = simulate(sys, x0, 5.0, 0.1, m);
    for (Index k = 0; k < run.states.cols(); ++k) {
      EXPECT_EQ(run.states.col(k), x0);
      EXPECT_EQ(run.disagreement[k], 3.0);
    }
  }
}

TEST(Simulate, GridAndInitialState) {
  const LinearAgent agent = oscillator();
  const CoupledSystem sys =
      CoupledSystem::assemble(agent, synthesize_gain(agent), validate_topology(pair_gamma()));
  const Vector x0{{0.1, 0.2, 0.3, 0.4}};
  const SimulationRun run = simulate(sys, x0, 1.0, 0.3, Method::kExactExpm);
  ASSERT_EQ(run.times.size(), 5u);
  EXPECT_EQ(run.times.front(), 0.0);
  EXPECT_EQ(run.times.back(), 1.0);
  for (size_t k = 1; k < run.times.size(); ++k) EXPECT_GT(run.times[k], run.times[k - 1]);
  EXPECT_EQ(Vector(run.states.col(0)), x0);
  for (size_t k = 0; k < run.times.size(); ++k) {
    EXPECT_GE(run.sync_error[k], 0.0);
    EXPECT_LE(run.disagreement[k], 2.0 * run.sync_error[k] + 1e-15);
  }
}

TEST(Simulate, Rk4StepGuard) {
  const LinearAgent agent = oscillator();
  const CoupledSystem sys =
      CoupledSystem::assemble(agent, synthesize_gain(agent), validate_topology(pair_gamma()));
  EXPECT_THROW(simulate(sys, Vector::Zero(4), 10.0, 1.0, Method::kRk4), RuntimeFailure);
}

TEST(Simulate, RejectsBadArguments) {
  const LinearAgent agent = oscillator();
  const CoupledSystem sys =
      CoupledSystem::assemble(agent, synthesize_gain(agent), validate_topology(pair_gamma()));
  EXPECT_THROW(simulate(sys, Vector::Zero(3), 1.0, 0.1, Method::kExactExpm), InvalidArgument);
  EXPECT_THROW(simulate(sys, Vector::Zero(4), 1.0, 2.0, Method::kExactExpm), InvalidArgument);
  EXPECT_THROW(simulate(sys, Vector::Zero(4), -1.0, 0.1, Method::kExactExpm), InvalidArgument);
}

TEST(Simulate, DisconnectedTopologyRejected) {
  Matrix g = Matrix::Zero(4, 4);
  g.topLeftCorner(2, 2) = pair_gamma();
  g.bottomRightCorner(2, 2) = pair_gamma();
  const CoupledSystem sys =
      CoupledSystem::from_factors(Matrix::Zero(1, 1), Matrix::Identity(1, 1), validate_topology(g));
  EXPECT_THROW(simulate(sys, Vector::Zero(4), 1.0, 0.1, Method::kExactExpm), AssumptionViolation);
}

TEST(Simulate, HarmonicRingDecays) {
  Matrix g(3, 3);
  g << -1, 1, 0, 0, -1, 1, 1, 0, -1;
  const LinearAgent agent = oscillator();
  const CoupledSystem sys =
      CoupledSystem::assemble(agent, synthesize_gain(agent), validate_topology(g));
  const SpectralCheck sc = spectral_check(sys);
  ASSERT_TRUE(sc.decaying);
  std::mt19937_64 rng(101);
  const Vector x0 = testing::random_state(6, rng);
  const SimulationRun run = simulate(sys, x0, 20.0, 0.01, Method::kExactExpm);
  // bound from the spectral abscissa: decay e^{-delta t} with delta from the closed loop
  EXPECT_GT(sc.delta * 20.0, std::log(1e3));
  EXPECT_LE(run.sync_error.back(), 1e-3 * run.sync_error.front());
}

TEST(Simulate, MethodsAgree) {
  const LinearAgent agent = oscillator();
  const CoupledSystem sys =
      CoupledSystem::assemble(agent, synthesize_gain(agent), validate_topology(pair_gamma()));
  const Vector x0{{1.0, -0.5, 0.2, 0.7}};
  const SimulationRun a = simulate(sys, x0, 10.0, 1e-3, Method::kExactExpm);
  const SimulationRun b = simulate(sys, x0, 10.0, 1e-3, Method::kRk4);
  EXPECT_LE((a.states - b.states).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ModalError, NoHurwitzPart) {
  const LinearAgent agent = oscillator();
  const GainSynthesis gain = synthesize_gain(agent);
  const CoupledSystem sys = CoupledSystem::assemble(agent, gain, validate_topology(pair_gamma()));
  const SimulationRun run = simulate(sys, Vector{{1.0, 0.0, 0.0, 1.0}}, 2.0, 0.1, Method::kExactExpm);
  const ModalErrorSeries m = modal_error(sys, gain, run);
  ASSERT_EQ(m.eta_norm.size(), run.times.size());
  for (double e : m.eta_norm) EXPECT_EQ(e, 0.0);
}

TEST(ModalError, HurwitzPartDecaysAtItsRate) {
  Matrix a = Matrix::Zero(3, 3);
  a.topLeftCorner(2, 2) = rot();
  a(2, 2) = -2.0;
  Matrix c(1, 3);
  c << 0, 1, 1;
  const LinearAgent agent = LinearAgent::output_coupled(a, c);
  const GainSynthesis gain = synthesize_gain(agent);
  const CoupledSystem sys = CoupledSystem::assemble(agent, gain, validate_topology(pair_gamma()));
  const Vector x0{{0.5, -1.0, 2.0, 1.0, 0.3, -1.5}};
  const SimulationRun run = simulate(sys, x0, 5.0, 0.05, Method::kExactExpm);
  const ModalErrorSeries m = modal_error(sys, gain, run);
  Matrix t(3, 3);
  t << gain.decomposition.U, gain.decomposition.W;
  const double kappa = t.norm() * t.inverse().norm();
  for (size_t k = 0; k < run.times.size(); ++k) {
    EXPECT_LE(m.eta_norm[k], m.eta_norm[0] * std::exp(-2.0 * run.times[k]) * kappa + 1e-12);
  }
}

TEST(ModalError, ReconstructsStates) {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 20; ++trial) {
    const LinearAgent agent = testing::random_output_agent(rng);
    const GainSynthesis gain = synthesize_gain(agent);
    const Vector x = testing::random_state(agent.n(), rng);
    EXPECT_LE((from_modal(gain, to_modal(gain, x)) - x).norm(), 1e-10);
  }
}

TEST(ModalError, MismatchedProvenance) {
  const LinearAgent agent = oscillator();
  const GainSynthesis gain = synthesize_gain(agent);
  const NetworkTopology t = validate_topology(pair_gamma());
  const CoupledSystem sys = CoupledSystem::from_factors(rot(), Matrix::Zero(2, 2), t);
  const SimulationRun run = simulate(sys, Vector::Ones(4), 1.0, 0.5, Method::kExactExpm);
  EXPECT_THROW(modal_error(sys, gain, run), InvalidArgument);
}

TEST(SpectralCheck, HarmonicPair) {
  const LinearAgent agent = oscillator();
  const CoupledSystem sys =
      CoupledSystem::assemble(agent, synthesize_gain(agent), validate_topology(pair_gamma()));
  const SpectralCheck sc = spectral_check(sys);
  EXPECT_TRUE(sc.decaying);
  EXPECT_LE(sc.match_error, 1e-10);
  ASSERT_EQ(sc.remaining.size(), 2u);
  for (const Complex& l : sc.remaining) EXPECT_LT(l.real(), 0.0);
  EXPECT_GT(sc.delta, 0.0);
}

TEST(SpectralCheck, SingleAgentVacuous) {
  const LinearAgent agent = oscillator();
  const CoupledSystem sys =
      CoupledSystem::assemble(agent, synthesize_gain(agent), validate_topology(Matrix::Zero(1, 1)));
  const SpectralCheck sc = spectral_check(sys);
  EXPECT_TRUE(sc.decaying);
  EXPECT_TRUE(sc.remaining.empty());
  EXPECT_TRUE(std::isinf(sc.delta));
}

TEST(SpectralCheck, ZeroGainDoesNotDecay) {
  const CoupledSystem sys =
      CoupledSystem::from_factors(rot(), Matrix::Zero(2, 2), validate_topology(pair_gamma()));
  EXPECT_FALSE(spectral_check(sys).decaying);
}

TEST(Horizon, SixtyOverDelta) {
  EXPECT_EQ(assertion_horizon(0.5), 120.0);
  EXPECT_THROW(assertion_horizon(0.0), InvalidArgument);
}

TEST(LyapunovMonotonicity, SkewCoupledSystem) {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix s = testing::random_skew(3, rng);
    const Matrix h = testing::random_matrix(1, 3, rng);
    if (!is_observable(h, s)) continue;
    const NetworkTopology t = testing::random_topology(5, rng);
    const CoupledSystem sys = CoupledSystem::from_factors(s, h.transpose() * h, t);
    const LyapunovCertificate cert = lyapunov_certificate(t);
    const Matrix v = kron(cert.P_hat, Matrix::Identity(3, 3));
    const Matrix vdot = -kron(cert.Q_hat, h.transpose() * h);
    const Vector x0 = testing::random_state(sys.dim(), rng);
    const SimulationRun run = simulate(sys, x0, 3.0, 1e-3, Method::kExactExpm);
    double prev = x0.dot(v * x0);
    for (Index k = 1; k < run.states.cols(); ++k) {
      const Vector x = run.states.col(k);
      const double cur = x.dot(v * x);
      EXPECT_LE(cur, prev + 1e-9);
      // centred difference against the analytic derivative
      if (k + 1 < run.states.cols()) {
        const Vector xm = run.states.col(k - 1);
        const Vector xp = run.states.col(k + 1);
        const double fd = (xp.dot(v * xp) - xm.dot(v * xm)) / (run.times[k + 1] - run.times[k - 1]);
        EXPECT_NEAR(fd, x.dot(vdot * x), 1e-3 * std::max(1.0, std::abs(x.dot(vdot * x))));
      }
      prev = cur;
    }
  }
}

}  // namespace
}  // namespace nsync
