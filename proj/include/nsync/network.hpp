#pragma once

#include <cstdint>

#include "nsync/matrix_core.hpp"

namespace nsync {

/// A validated coupling matrix. Off-diagonal entries are nonnegative, every
/// row sums to zero, and when `connected()` holds the left stationary vector
/// r (r^T Gamma = 0, r^T 1 = 1) is available.
///
/// Instances only come out of `validate_topology` or
/// `random_connected_topology` and are immutable afterwards.
class NetworkTopology {
 public:
  Index p() const { return gamma_.rows(); }
  const Matrix& gamma() const { return gamma_; }
  bool connected() const { return connected_; }
  /// Empty when the graph is not connected.
  const Vector& r() const { return r_; }

 private:
  friend NetworkTopology validate_topology(const Matrix& gamma_raw);
  NetworkTopology(Matrix gamma, Vector r, bool connected)
      : gamma_(std::move(gamma)), r_(std::move(r)), connected_(connected) {}

  Matrix gamma_;
  Vector r_;
  bool connected_ = false;
};

struct LyapunovCertificate {
  Matrix P_cert;
  Matrix Q_cert;
  Matrix P_hat;
  Matrix Q_hat;
  double residual = 0.0;      // ||(G - 1r^T)^T P + P (G - 1r^T) + Q||_F
  double hat_residual = 0.0;  // ||G^T P_hat + P_hat G + Q_hat||_F
};

/// Row-sum tolerance used when normalizing raw input: 1e-8 * max(1, ||Gamma||_F).
double row_sum_tolerance(const Matrix& gamma);

/// True iff some node can be reached from every other node along arcs
/// (i, j) with gamma_ij > 0.
bool has_global_root(const Matrix& gamma);

NetworkTopology validate_topology(const Matrix& gamma_raw);

/// Left null vector of Gamma normalized to r^T 1 = 1. Throws
/// AssumptionViolation("connectivity") on a disconnected topology.
Vector stationary_vector(const NetworkTopology& topology);

/// ||e^{Gamma t} - 1 r^T||_F.
double ergodic_limit_check(const NetworkTopology& topology, double t);

/// -max Re(lambda) over the nonzero eigenvalues of Gamma; +inf for p = 1.
double spectral_gap(const NetworkTopology& topology);

LyapunovCertificate lyapunov_certificate(const NetworkTopology& topology);

/// Seeded random connected topology: a random spanning in-tree toward a
/// random root plus extra arcs with probability `density`, weights in (0, 2].
NetworkTopology random_connected_topology(Index p, double density, std::uint64_t seed);

}  // namespace nsync
