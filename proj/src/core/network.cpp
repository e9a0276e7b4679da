#include "nsync/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "nsync/error.hpp"

namespace nsync {

namespace {

Vector compute_stationary(const Matrix& gamma) {
  const Index p = gamma.rows();
  if (p == 1) return Vector::Ones(1);
  Eigen::BDCSVD<Matrix> svd(gamma.transpose(), Eigen::ComputeFullV);
  Vector v = svd.matrixV().col(p - 1);
  const double total = v.sum();
  if (std::abs(total) < 1e-12) {
    throw NumericalError("left null vector of Gamma sums to zero; 0 is not a simple eigenvalue");
  }
  Vector r = v / total;
  const double residual = (r.transpose() * gamma).norm();
  if (residual > 1e-10 * std::max(1.0, gamma.norm())) {
    throw NumericalError("stationary vector residual " + std::to_string(residual) +
                         " out of tolerance");
  }
  return r;
}

}  // namespace

double row_sum_tolerance(const Matrix& gamma) { return 1e-8 * std::max(1.0, gamma.norm()); }

bool has_global_root(const Matrix& gamma) {
  const Index p = gamma.rows();
  // incoming[v] lists the nodes i with an arc (i, v), i.e. gamma(i, v) > 0.
  std::vector<std::vector<Index>> incoming(p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      if (i != j && gamma(i, j) > 0.0) incoming[j].push_back(i);
    }
  }
  std::vector<char> seen(p);
  std::vector<Index> queue;
  queue.reserve(p);
  for (Index root = 0; root < p; ++root) {
    std::fill(seen.begin(), seen.end(), 0);
    queue.clear();
    queue.push_back(root);
    seen[root] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (Index from : incoming[queue[head]]) {
        if (!seen[from]) {
          seen[from] = 1;
          queue.push_back(from);
        }
      }
    }
    if (static_cast<Index>(queue.size()) == p) return true;
  }
  return false;
}

NetworkTopology validate_topology(const Matrix& gamma_raw) {
  require_square(gamma_raw, "Gamma");
  require_finite(gamma_raw, "Gamma");
  const Index p = gamma_raw.rows();
  if (p < 1) throw InvalidArgument("Gamma must have at least one row");
  const double eps = row_sum_tolerance(gamma_raw);

  Matrix g = gamma_raw;
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      if (i == j) continue;
      if (g(i, j) < -eps) {
        throw InvalidArgument("Gamma(" + std::to_string(i) + "," + std::to_string(j) +
                              ") is negative");
      }
      if (g(i, j) < 0.0) g(i, j) = 0.0;
    }
    const double raw_sum = gamma_raw.row(i).sum();
    if (std::abs(raw_sum) > eps) {
      throw InvalidArgument("row " + std::to_string(i) + " of Gamma sums to " +
                            std::to_string(raw_sum));
    }
    // Off-diagonals snapped to a grid 2^q with the row sum below 2^(q+53): all partial sums exact.
    double off = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (j != i) off += g(i, j);
    }
    if (off > 0.0) {
      const int q = std::ilogb(off) - 50;
      off = 0.0;
      for (Index j = 0; j < p; ++j) {
        if (j == i) continue;
        g(i, j) = std::ldexp(std::nearbyint(std::ldexp(g(i, j), -q)), q);
        off += g(i, j);
      }
    }
    g(i, i) = -off;
  }

  const bool connected = has_global_root(g);
  Vector r = connected ? compute_stationary(g) : Vector();
  return NetworkTopology(std::move(g), std::move(r), connected);
}

Vector stationary_vector(const NetworkTopology& topology) {
  if (!topology.connected()) {
    throw AssumptionViolation("connectivity", "topology not connected");
  }
  return compute_stationary(topology.gamma());
}

double ergodic_limit_check(const NetworkTopology& topology, double t) {
  if (!topology.connected()) {
    throw AssumptionViolation("connectivity", "topology not connected");
  }
  if (!(t >= 0.0)) throw InvalidArgument("ergodic check time must be nonnegative");
  const Index p = topology.p();
  const Matrix limit = Vector::Ones(p) * topology.r().transpose();
  return (expm(topology.gamma(), t) - limit).norm();
}

double spectral_gap(const NetworkTopology& topology) {
  const Index p = topology.p();
  if (p == 1) return std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Matrix> solver(topology.gamma(), false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  const Eigen::VectorXcd ev = solver.eigenvalues();
  Index zero = 0;
  for (Index i = 1; i < p; ++i) {
    if (std::abs(ev(i)) < std::abs(ev(zero))) zero = i;
  }
  double top = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < p; ++i) {
    if (i != zero) top = std::max(top, ev(i).real());
  }
  return -top;
}

LyapunovCertificate lyapunov_certificate(const NetworkTopology& topology) {
  if (!topology.connected()) {
    throw AssumptionViolation("connectivity", "topology not connected");
  }
  const Index p = topology.p();
  const Matrix id = Matrix::Identity(p, p);
  const Matrix one_r = Vector::Ones(p) * topology.r().transpose();
  const Matrix shifted = topology.gamma() - one_r;
  const Matrix proj = id - one_r;

  LyapunovCertificate cert;
  cert.Q_cert = id;
  try {
    cert.P_cert = solve_lyapunov(shifted, cert.Q_cert);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("certificate Lyapunov solve failed (Gamma - 1r^T not Hurwitz?): ") +
                         e.what());
  }
  cert.P_hat = proj.transpose() * cert.P_cert * proj;
  cert.Q_hat = proj.transpose() * cert.Q_cert * proj;
  cert.residual =
      (shifted.transpose() * cert.P_cert + cert.P_cert * shifted + cert.Q_cert).norm();
  cert.hat_residual = (topology.gamma().transpose() * cert.P_hat +
                       cert.P_hat * topology.gamma() + cert.Q_hat)
                          .norm();

  const double scale = std::max(1.0, cert.P_cert.norm());
  if (cert.residual > 1e-8 * scale || cert.hat_residual > 1e-8 * scale) {
    throw NumericalError("Lyapunov certificate residual out of tolerance");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cert.P_cert);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw NumericalError("Lyapunov certificate is not positive definite");
  }
  return cert;
}

NetworkTopology random_connected_topology(Index p, double density, std::uint64_t seed) {
  if (p < 1) throw InvalidArgument("agent count must be at least 1");
  if (!(density > 0.0 && density <= 1.0)) throw InvalidArgument("density must lie in (0, 1]");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto weight = [&] { return 2.0 * (1.0 - unit(rng)); };  // (0, 2]

  std::vector<Index> order(p);
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);

  Matrix g = Matrix::Zero(p, p);
  // order[0] is the root; every later node points at some earlier one.
  for (Index k = 1; k < p; ++k) {
    std::uniform_int_distribution<Index> pick(0, k - 1);
    g(order[k], order[pick(rng)]) = weight();
  }
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      if (i != j && g(i, j) == 0.0 && unit(rng) < density) g(i, j) = weight();
    }
  }
  for (Index i = 0; i < p; ++i) g(i, i) = -(g.row(i).sum() - g(i, i));
  NetworkTopology topology = validate_topology(g);
  if (!topology.connected()) throw NumericalError("generator produced a disconnected graph");
  return topology;
}

}  // namespace nsync
