#pragma once

// Dense real linear-algebra kernels and the structural tests the rest of the
// library is built on: matrix exponential, spectrum classification, PBH rank
// checks, the on-axis/Hurwitz block splitting and Sylvester/Lyapunov solves.

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace nsync {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;
using Index = Eigen::Index;

enum class AxisTag { kNegative, kOnAxis, kPositive };

struct SpectrumReport {
  std::vector<Complex> eigenvalues;
  std::vector<AxisTag> tags;  // parallel to eigenvalues
  bool on_axis_semisimple = true;
  double axis_tolerance = 0.0;

  std::size_t count(AxisTag tag) const;
};

/// Block splitting [U W]^{-1} A [U W] = blkdiag(F, G).
///
/// For `modal_split` the leading block holds the imaginary-axis eigenvalues and
/// the trailing block the Hurwitz part. Rows of `U_dag`/`W_dag` stack to
/// [U W]^{-1}. Either block may be empty (zero rows or columns).
struct ModalDecomposition {
  Index n1 = 0;
  Index n2 = 0;
  Matrix U;
  Matrix W;
  Matrix U_dag;
  Matrix W_dag;
  Matrix F;
  Matrix G;
};

// Shape and finiteness guards shared by every public entry point.
void require_finite(const Matrix& m, const char* name);
void require_square(const Matrix& m, const char* name);

/// Relative tolerance used for deciding Re(lambda) ~ 0: 1e-9 * max(1, ||M||_F).
double axis_tolerance(const Matrix& m);

/// Rank cutoff for PBH-style tests: singular values below 1e-10 * sigma_max are zero.
inline constexpr double kRankRelTol = 1e-10;

/// e^{M t} by scaling and squaring with a diagonal Pade approximant.
Matrix expm(const Matrix& m, double t);

SpectrumReport spectrum(const Matrix& m);
bool is_neutrally_stable(const Matrix& m);

/// PBH: rank [A - lambda I; C] = n for every eigenvalue with Re(lambda) >= -eps_axis.
bool is_detectable(const Matrix& c, const Matrix& a);
/// Dual of `is_detectable`, evaluated as is_detectable(B^T, A^T).
bool is_stabilizable(const Matrix& a, const Matrix& b);

/// PBH observability/controllability over the whole spectrum (no stable-mode exemption).
bool is_observable(const Matrix& c, const Matrix& a);
bool is_controllable(const Matrix& a, const Matrix& b);

/// Splits the spectrum of a neutrally stable A into its imaginary-axis part
/// (F, leading) and its Hurwitz part (G, trailing).
ModalDecomposition modal_split(const Matrix& a);

/// Generic ordered split: eigenvalues for which `leading` is true go to F.
/// Real Schur form, reordering, then one Sylvester solve to annihilate the
/// off-diagonal block. Throws NumericalError when the two clusters cannot be
/// separated reliably.
ModalDecomposition split_spectrum(const Matrix& a, const std::function<bool(Complex)>& leading);

/// ||[U W] blkdiag(F, G) [U_dag; W_dag] - A||_F.
double reconstruction_residual(const Matrix& a, const ModalDecomposition& d);

/// ||M + M^T||_F <= tol * max(1, ||M||_F).
bool is_skew_symmetric(const Matrix& m, double tol = 1e-10);

/// Symmetric positive definite square root.
Matrix spd_sqrt(const Matrix& p);

/// Solves A X + X B = C by Bartels-Stewart.
Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c);

/// Solves A^T X + X A = -Q for symmetric Q; A must be Hurwitz.
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

/// Kronecker product.
Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace nsync
