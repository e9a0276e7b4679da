#pragma once

#include <optional>

#include "nsync/matrix_core.hpp"

namespace nsync {

enum class FeedbackKind { kOutput, kState };

/// One of the identical agents: x' = A x + u, y = C x (output coupling) or
/// x' = A x + B u (state coupling). Exactly one of C and B is set.
struct LinearAgent {
  Matrix A;
  std::optional<Matrix> C;
  std::optional<Matrix> B;

  static LinearAgent output_coupled(Matrix a, Matrix c);
  static LinearAgent state_coupled(Matrix a, Matrix b);

  Index n() const { return A.rows(); }
  Index m() const;
  FeedbackKind kind() const { return C ? FeedbackKind::kOutput : FeedbackKind::kState; }
};

struct GainResiduals {
  double commutation = 0.0;     // ||P F + F^T P||_F
  double skew = 0.0;            // ||S + S^T||_F
  double reconstruction = 0.0;  // modal split reconstruction error
  double sqrt_residual = 0.0;   // ||P_sqrt P_sqrt - P||_F
  bool coupling_observable = true;  // (H, S) observable / (S, H^T) controllable
};

/// Gain plus every intermediate the convergence argument relies on.
struct GainSynthesis {
  FeedbackKind kind = FeedbackKind::kOutput;
  ModalDecomposition decomposition;
  Matrix P;
  Matrix P_sqrt;
  Matrix S;
  Matrix H;
  Matrix gain;  // L (n x m) or K (m x n)
  GainResiduals residuals;
};

/// Time average lim (1/t) int_0^t e^{F^T s} e^{F s} ds for a semisimple F with
/// purely imaginary spectrum.
///
/// Evaluated exactly: F is block-diagonalized by frequency |Im lambda|, cross
/// terms between distinct frequencies average to zero, and within one block
/// the integrand only carries harmonics 0 and +-2w, so an 8-point periodic
/// trapezoid rule over one period is exact.
Matrix cesaro_gram(const Matrix& f);

GainSynthesis synthesize_output_gain(const LinearAgent& agent);
GainSynthesis synthesize_output_gain(const LinearAgent& agent, const ModalDecomposition& split);

GainSynthesis synthesize_state_gain(const LinearAgent& agent);
GainSynthesis synthesize_state_gain(const LinearAgent& agent, const ModalDecomposition& split);

/// Dispatches on `agent.kind()`.
GainSynthesis synthesize_gain(const LinearAgent& agent);

/// ||gain(split_a) - gain(split_b)||_F for two admissible splits of agent.A.
double basis_invariance_check(const LinearAgent& agent, const ModalDecomposition& split_a,
                              const ModalDecomposition& split_b);

/// Throws AssumptionViolation naming A1/A2 (output) or B1/B2 (state).
void check_assumptions(const LinearAgent& agent);

}  // namespace nsync
