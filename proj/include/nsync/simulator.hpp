#pragma once

#include <optional>
#include <vector>

#include "nsync/gain_synthesis.hpp"
#include "nsync/network.hpp"

namespace nsync {

enum class Method { kExactExpm, kRk4 };

/// Above this stacked dimension the pn x pn matrix is not formed and only the
/// factored product (A, Gamma, M) is available.
inline constexpr Index kDenseLimit = 2000;

/// Stacked closed loop x' = (I_p (x) A + Gamma (x) M) x with M = L C or B K.
class CoupledSystem {
 public:
  static CoupledSystem assemble(const LinearAgent& agent, const GainSynthesis& gain,
                                const NetworkTopology& topology);
  /// Direct construction from the agent matrix and the coupling block M.
  static CoupledSystem from_factors(Matrix a, Matrix coupling, const NetworkTopology& topology);

  Index p() const { return topology_.p(); }
  Index n() const { return a_.rows(); }
  Index dim() const { return p() * n(); }
  const Matrix& A() const { return a_; }
  const Matrix& coupling() const { return coupling_; }
  const NetworkTopology& topology() const { return topology_; }
  /// The gain the coupling was built from, when assembled from a synthesis.
  const std::optional<Matrix>& gain() const { return gain_; }

  bool has_dense() const { return dense_.size() > 0 || dim() == 0; }
  /// Throws when dim() > kDenseLimit.
  const Matrix& stacked() const;

  /// stacked * x evaluated through the factors.
  Vector apply(const Vector& x) const;

  /// Infinity norm of the stacked matrix (exact when dense, else an upper bound).
  double inf_norm() const;

 private:
  CoupledSystem(Matrix a, Matrix coupling, NetworkTopology topology, std::optional<Matrix> gain);

  Matrix a_;
  Matrix coupling_;
  NetworkTopology topology_;
  std::optional<Matrix> gain_;
  Matrix dense_;
};

struct SimulationRun {
  Method method = Method::kExactExpm;
  Index p = 0;
  Index n = 0;
  std::vector<double> times;
  Matrix states;     // pn x (N+1), column k is the stacked state at times[k]
  Matrix reference;  // n x (N+1)
  std::vector<double> sync_error;    // max_i |x_i - xbar|
  std::vector<double> disagreement;  // max_{i,j} |x_i - x_j|

  Vector agent_state(Index step, Index agent) const {
    return states.col(step).segment(agent * n, n);
  }
};

/// (r^T (x) e^{A t}) x0.
Vector reference_trajectory(const Matrix& a, const NetworkTopology& topology, const Vector& x0,
                            double t);
Vector reference_trajectory(const LinearAgent& agent, const NetworkTopology& topology,
                            const Vector& x0, double t);

/// Fixed-step integration on a uniform grid from 0 to T. The step actually
/// used is T / ceil(T / dt), never larger than dt.
SimulationRun simulate(const CoupledSystem& system, const Vector& x0, double horizon, double dt,
                       Method method);

struct ModalErrorSeries {
  std::vector<double> xi_disagreement;  // max_{i,j} |xi_i - xi_j|
  std::vector<double> eta_norm;         // max_i |eta_i|, 0 when n2 = 0
};

/// [xi; eta] = blkdiag(P^{1/2}, I) [U_dag; W_dag] x_i.
Vector to_modal(const GainSynthesis& gain, const Vector& x_agent);
/// Inverse of `to_modal`.
Vector from_modal(const GainSynthesis& gain, const Vector& xi_eta);

ModalErrorSeries modal_error(const CoupledSystem& system, const GainSynthesis& gain,
                             const SimulationRun& run);

struct SpectralCheck {
  std::vector<Complex> eigenvalues;      // full stacked spectrum
  std::vector<Complex> reference_modes;  // n modes matched against spec(A)
  std::vector<Complex> remaining;        // the other pn - n
  double match_error = 0.0;              // worst |matched - lambda(A)|
  double delta = 0.0;                    // -max Re(remaining); +inf if none
  bool decaying = false;
};

SpectralCheck spectral_check(const CoupledSystem& system);

/// Horizon 60 / delta used for synchronization assertions.
double assertion_horizon(double delta);

/// max over the grid of |(r^T (x) I) x(t) - (r^T (x) e^{A t}) x(0)|, with the
/// right-hand side evaluated by a fresh exponential at every grid time.
double average_invariant_deviation(const CoupledSystem& system, const SimulationRun& run);

}  // namespace nsync
