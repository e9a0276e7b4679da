#include "nsync/matrix_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "lapack.hpp"
#include "nsync/error.hpp"

namespace nsync {

namespace {

using ComplexMatrix = Eigen::MatrixXcd;

std::string shape_of(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

double one_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

// Eigenvalues closer than this are treated as one cluster when measuring
// algebraic against geometric multiplicity. Perturbed Jordan blocks of size
// two split by about sqrt(machine eps), well inside this radius.
double cluster_tolerance(const Matrix& m) { return 1e-6 * std::max(1.0, m.norm()); }

int numerical_rank(const ComplexMatrix& m, double floor_abs = 0.0) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cutoff = std::max(kRankRelTol * sv(0), floor_abs);
  int rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return rank;
}

struct SchurForm {
  Matrix t;
  Matrix q;
  std::vector<double> wr;
  std::vector<double> wi;
};

SchurForm real_schur(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  SchurForm s{a, Matrix::Zero(n, n), std::vector<double>(n), std::vector<double>(n)};
  if (n == 0) return s;
  int sdim = 0;
  int info = 0;
  int lwork = -1;
  double query = 0.0;
  std::vector<int> bwork(n);
  dgees_("V", "N", nullptr, &n, s.t.data(), &n, &sdim, s.wr.data(), s.wi.data(), s.q.data(), &n,
         &query, &lwork, bwork.data(), &info, 1, 1);
  lwork = std::max(1, static_cast<int>(query));
  std::vector<double> work(lwork);
  dgees_("V", "N", nullptr, &n, s.t.data(), &n, &sdim, s.wr.data(), s.wi.data(), s.q.data(), &n,
         work.data(), &lwork, bwork.data(), &info, 1, 1);
  if (info != 0) {
    throw NumericalError("real Schur decomposition failed (dgees info=" + std::to_string(info) +
                         ")");
  }
  return s;
}

// Moves the selected eigenvalues to the leading block. Returns their count.
int reorder_schur(SchurForm& s, std::vector<int> select) {
  const int n = static_cast<int>(s.t.rows());
  if (n == 0) return 0;
  int m = 0;
  int info = 0;
  double cond_s = 0.0;
  double sep = 0.0;
  int lwork = std::max(1, n);
  int liwork = 1;
  std::vector<double> work(lwork);
  std::vector<int> iwork(liwork);
  dtrsen_("N", "V", select.data(), &n, s.t.data(), &n, s.q.data(), &n, s.wr.data(), s.wi.data(),
          &m, &cond_s, &sep, work.data(), &lwork, iwork.data(), &liwork, &info, 1, 1);
  if (info == 1) {
    throw NumericalError("ill-conditioned split: Schur reordering failed, eigenvalue clusters too close");
  }
  if (info != 0) throw NumericalError("dtrsen failed with info=" + std::to_string(info));
  return m;
}

// Solves T11 X + sign * X T22 = C for quasi-triangular T11, T22 in Schur
// canonical form.
Matrix solve_quasi_triangular_sylvester(const Matrix& t11, const Matrix& t22, Matrix c, int sign) {
  const int m = static_cast<int>(t11.rows());
  const int n = static_cast<int>(t22.rows());
  if (m == 0 || n == 0) return c;
  double scale = 1.0;
  int info = 0;
  dtrsyl_("N", "N", &sign, &m, &n, t11.data(), &m, t22.data(), &n, c.data(), &m, &scale, &info, 1,
          1);
  if (info < 0) throw NumericalError("dtrsyl rejected argument " + std::to_string(-info));
  if (info == 1) {
    throw NumericalError("ill-conditioned split: Sylvester operator is nearly singular");
  }
  return c / scale;
}

Matrix pade_exponential(const Matrix& a) {
  static constexpr std::array<double, 4> b3{120., 60., 12., 1.};
  static constexpr std::array<double, 6> b5{30240., 15120., 3360., 420., 30., 1.};
  static constexpr std::array<double, 8> b7{17297280., 8648640., 1995840., 277200.,
                                            25200.,    1512.,    56.,      1.};
  static constexpr std::array<double, 10> b9{17643225600., 8821612800., 2075673600., 302702400.,
                                             30270240.,    2162160.,    110880.,     3960.,
                                             90.,          1.};
  static constexpr std::array<double, 14> b13{
      64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800.,
      129060195264000.,   10559470521600.,    670442572800.,     33522128640.,
      1323241920.,        40840800.,          960960.,           16380.,
      182.,               1.};
  static constexpr std::array<double, 4> theta{1.495585217958292e-2, 2.539398330063230e-1,
                                               9.504178996162932e-1, 2.097847961257068e0};
  static constexpr double theta13 = 5.371920351148152e0;

  const Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  const double norm = one_norm(a);

  auto solve = [&](const Matrix& u, const Matrix& v) -> Matrix {
    Eigen::PartialPivLU<Matrix> lu(v - u);
    return lu.solve(v + u);
  };

  auto low_order = [&](const auto& b) -> Matrix {
    const Matrix a2 = a * a;
    Matrix power = id;
    Matrix u_inner = b[1] * id;
    Matrix v = b[0] * id;
    for (std::size_t k = 2; k < b.size(); k += 2) {
      power = power * a2;
      v += b[k] * power;
      if (k + 1 < b.size()) u_inner += b[k + 1] * power;
    }
    return solve(a * u_inner, v);
  };

  if (norm <= theta[0]) return low_order(b3);
  if (norm <= theta[1]) return low_order(b5);
  if (norm <= theta[2]) return low_order(b7);
  if (norm <= theta[3]) return low_order(b9);

  int squarings = 0;
  if (norm > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
  const Matrix as = a / std::ldexp(1.0, squarings);
  const Matrix a2 = as * as;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix u = as * (a6 * (b13[13] * a6 + b13[11] * a4 + b13[9] * a2) + b13[7] * a6 +
                         b13[5] * a4 + b13[3] * a2 + b13[1] * id);
  const Matrix v = a6 * (b13[12] * a6 + b13[10] * a4 + b13[8] * a2) + b13[6] * a6 + b13[4] * a4 +
                   b13[2] * a2 + b13[0] * id;
  Matrix r = solve(u, v);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

}  // namespace

std::size_t SpectrumReport::count(AxisTag tag) const {
  return static_cast<std::size_t>(std::count(tags.begin(), tags.end(), tag));
}

void require_finite(const Matrix& m, const char* name) {
  if (!m.allFinite()) throw InvalidArgument(std::string(name) + " contains non-finite entries");
}

void require_square(const Matrix& m, const char* name) {
  if (m.rows() != m.cols()) {
    throw InvalidArgument(std::string(name) + " must be square, got " + shape_of(m));
  }
}

double axis_tolerance(const Matrix& m) { return 1e-9 * std::max(1.0, m.norm()); }

Matrix expm(const Matrix& m, double t) {
  require_square(m, "expm argument");
  require_finite(m, "expm argument");
  if (!std::isfinite(t)) throw InvalidArgument("expm time must be finite");
  if (m.rows() == 0) return m;
  Matrix r = pade_exponential(m * t);
  if (!r.allFinite()) throw NumericalError("matrix exponential overflowed");
  return r;
}

SpectrumReport spectrum(const Matrix& m) {
  require_square(m, "spectrum argument");
  require_finite(m, "spectrum argument");
  SpectrumReport report;
  report.axis_tolerance = axis_tolerance(m);
  const Index n = m.rows();
  if (n == 0) return report;

  Eigen::EigenSolver<Matrix> solver(m, false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  const Eigen::VectorXcd ev = solver.eigenvalues();

  std::vector<Index> on_axis;
  for (Index i = 0; i < n; ++i) {
    const Complex lambda = ev(i);
    report.eigenvalues.push_back(lambda);
    if (std::abs(lambda.real()) <= report.axis_tolerance) {
      report.tags.push_back(AxisTag::kOnAxis);
      on_axis.push_back(i);
    } else {
      report.tags.push_back(lambda.real() < 0 ? AxisTag::kNegative : AxisTag::kPositive);
    }
  }

  // Single-link clustering of the on-axis eigenvalues, then compare cluster
  // size (algebraic multiplicity) with the null space of M - lambda I.
  const double link = cluster_tolerance(m);
  std::vector<int> cluster(on_axis.size(), -1);
  int clusters = 0;
  for (std::size_t i = 0; i < on_axis.size(); ++i) {
    if (cluster[i] >= 0) continue;
    cluster[i] = clusters;
    std::vector<std::size_t> stack{i};
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < on_axis.size(); ++j) {
        if (cluster[j] < 0 && std::abs(ev(on_axis[k]) - ev(on_axis[j])) <= link) {
          cluster[j] = clusters;
          stack.push_back(j);
        }
      }
    }
    ++clusters;
  }

  const ComplexMatrix mc = m.cast<Complex>();
  for (int c = 0; c < clusters; ++c) {
    Complex centre{0.0, 0.0};
    int size = 0;
    for (std::size_t i = 0; i < on_axis.size(); ++i) {
      if (cluster[i] == c) {
        centre += ev(on_axis[i]);
        ++size;
      }
    }
    centre /= static_cast<double>(size);
    double spread = 0.0;
    for (std::size_t i = 0; i < on_axis.size(); ++i) {
      if (cluster[i] == c) spread = std::max(spread, std::abs(ev(on_axis[i]) - centre));
    }
    const ComplexMatrix shifted = mc - centre * ComplexMatrix::Identity(n, n);
    const int geometric = static_cast<int>(n) - numerical_rank(shifted, 10.0 * spread);
    if (geometric < size) report.on_axis_semisimple = false;
  }
  return report;
}

bool is_neutrally_stable(const Matrix& m) {
  const SpectrumReport r = spectrum(m);
  return r.count(AxisTag::kPositive) == 0 && r.on_axis_semisimple;
}

namespace {

bool pbh_holds(const Matrix& c, const Matrix& a, bool marginal_and_unstable_only) {
  require_square(a, "A");
  require_finite(a, "A");
  require_finite(c, "C");
  if (c.cols() != a.rows()) {
    throw InvalidArgument("C has " + std::to_string(c.cols()) + " columns but A is " +
                          shape_of(a));
  }
  const Index n = a.rows();
  if (n == 0) return true;
  const SpectrumReport r = spectrum(a);
  const ComplexMatrix ac = a.cast<Complex>();
  const ComplexMatrix cc = c.cast<Complex>();
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
    const Complex lambda = r.eigenvalues[i];
    if (marginal_and_unstable_only && r.tags[i] == AxisTag::kNegative) continue;
    ComplexMatrix stacked(n + c.rows(), n);
    stacked.topRows(n) = ac - lambda * ComplexMatrix::Identity(n, n);
    stacked.bottomRows(c.rows()) = cc;
    if (numerical_rank(stacked) < n) return false;
  }
  return true;
}

}  // namespace

bool is_detectable(const Matrix& c, const Matrix& a) { return pbh_holds(c, a, true); }

bool is_stabilizable(const Matrix& a, const Matrix& b) {
  if (b.rows() != a.rows()) {
    throw InvalidArgument("B has " + std::to_string(b.rows()) + " rows but A is " + shape_of(a));
  }
  return is_detectable(b.transpose(), a.transpose());
}

bool is_observable(const Matrix& c, const Matrix& a) { return pbh_holds(c, a, false); }

bool is_controllable(const Matrix& a, const Matrix& b) {
  if (b.rows() != a.rows()) {
    throw InvalidArgument("B has " + std::to_string(b.rows()) + " rows but A is " + shape_of(a));
  }
  return is_observable(b.transpose(), a.transpose());
}

ModalDecomposition split_spectrum(const Matrix& a, const std::function<bool(Complex)>& leading) {
  require_square(a, "split argument");
  require_finite(a, "split argument");
  const Index n = a.rows();
  SchurForm s = real_schur(a);
  std::vector<int> select(n);
  for (Index i = 0; i < n; ++i) select[i] = leading(Complex(s.wr[i], s.wi[i])) ? 1 : 0;
  const int n1 = reorder_schur(s, select);
  const Index n2 = n - n1;

  ModalDecomposition d;
  d.n1 = n1;
  d.n2 = n2;
  const Matrix q1 = s.q.leftCols(n1);
  const Matrix q2 = s.q.rightCols(n2);
  const Matrix t11 = s.t.topLeftCorner(n1, n1);
  const Matrix t22 = s.t.bottomRightCorner(n2, n2);
  const Matrix t12 = s.t.topRightCorner(n1, n2);

  // T11 X - X T22 = -T12 removes the coupling block.
  const Matrix x = solve_quasi_triangular_sylvester(t11, t22, -t12, -1);
  if (!x.allFinite() || x.norm() > 1e8 * std::max(1.0, a.norm())) {
    throw NumericalError("ill-conditioned split: decoupling transform has norm " +
                         std::to_string(x.norm()));
  }
  d.U = q1;
  d.W = q1 * x + q2;
  d.U_dag = q1.transpose() - x * q2.transpose();
  d.W_dag = q2.transpose();
  d.F = t11;
  d.G = t22;
  return d;
}

ModalDecomposition modal_split(const Matrix& a) {
  require_square(a, "A");
  require_finite(a, "A");
  const SpectrumReport r = spectrum(a);
  if (r.count(AxisTag::kPositive) > 0 || !r.on_axis_semisimple) {
    throw AssumptionViolation("neutral stability", "matrix is not neutrally stable");
  }
  const double eps = r.axis_tolerance;
  for (const Complex& lambda : r.eigenvalues) {
    const double re = std::abs(lambda.real());
    if (re > eps && re <= 2.0 * eps) {
      throw NumericalError("ill-conditioned split: eigenvalue with real part " +
                           std::to_string(lambda.real()) + " sits at the axis tolerance");
    }
  }
  const Index n = a.rows();
  const auto n1 = static_cast<Index>(r.count(AxisTag::kOnAxis));

  ModalDecomposition d;
  if (n1 == 0 || n1 == n) {
    d.n1 = n1;
    d.n2 = n - n1;
    const Matrix id = Matrix::Identity(n, n);
    d.U = id.leftCols(n1);
    d.U_dag = id.topRows(n1);
    d.W = id.rightCols(n - n1);
    d.W_dag = id.bottomRows(n - n1);
    d.F = n1 == n ? a : Matrix(0, 0);
    d.G = n1 == 0 ? a : Matrix(0, 0);
    return d;
  }

  d = split_spectrum(a, [eps](Complex lambda) { return std::abs(lambda.real()) <= eps; });
  if (d.n1 != n1) {
    throw NumericalError("ill-conditioned split: Schur form and eigensolver disagree on n1");
  }
  const double scale = std::max(1.0, a.norm());
  if (reconstruction_residual(a, d) > 1e-8 * scale) {
    throw NumericalError("modal split reconstruction residual out of tolerance");
  }
  return d;
}

double reconstruction_residual(const Matrix& a, const ModalDecomposition& d) {
  const Index n = a.rows();
  Matrix basis(n, n);
  basis << d.U, d.W;
  Matrix inverse(n, n);
  inverse << d.U_dag, d.W_dag;
  Matrix blocks = Matrix::Zero(n, n);
  blocks.topLeftCorner(d.n1, d.n1) = d.F;
  blocks.bottomRightCorner(d.n2, d.n2) = d.G;
  return (basis * blocks * inverse - a).norm();
}

bool is_skew_symmetric(const Matrix& m, double tol) {
  require_square(m, "skew-symmetry argument");
  return (m + m.transpose()).norm() <= tol * std::max(1.0, m.norm());
}

Matrix spd_sqrt(const Matrix& p) {
  require_square(p, "P");
  require_finite(p, "P");
  if (p.rows() == 0) return p;
  if ((p - p.transpose()).norm() > 1e-10 * std::max(1.0, p.norm())) {
    throw InvalidArgument("P is not symmetric");
  }
  const Matrix sym = 0.5 * (p + p.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
  const Vector& lambda = eig.eigenvalues();
  const double top = lambda.maxCoeff();
  if (top <= 0.0 || lambda.minCoeff() <= 1e-12 * top) {
    throw InvalidArgument("P is not positive definite");
  }
  const Matrix& v = eig.eigenvectors();
  Matrix r = v * lambda.cwiseSqrt().asDiagonal() * v.transpose();
  return 0.5 * (r + r.transpose());
}

Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c) {
  require_square(a, "A");
  require_square(b, "B");
  require_finite(a, "A");
  require_finite(b, "B");
  require_finite(c, "C");
  if (c.rows() != a.rows() || c.cols() != b.rows()) {
    throw InvalidArgument("Sylvester right-hand side has shape " + shape_of(c));
  }
  const SchurForm sa = real_schur(a);
  const SchurForm sb = real_schur(b);
  const Matrix rhs = sa.q.transpose() * c * sb.q;
  const Matrix y = solve_quasi_triangular_sylvester(sa.t, sb.t, rhs, 1);
  return sa.q * y * sb.q.transpose();
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  const Matrix x = solve_sylvester(a.transpose(), a, -q);
  return 0.5 * (x + x.transpose());
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace nsync
