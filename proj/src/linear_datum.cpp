#include "freebound/linear_datum.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "freebound/error.hpp"

namespace freebound {

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  require(!rows.empty() && !rows.front().empty(), "matrix must have at least one row and one column");
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int i = 0; i < m.rows; ++i) {
    require(static_cast<int>(rows[static_cast<std::size_t>(i)].size()) == m.cols, "matrix rows must have equal length");
    for (int j = 0; j < m.cols; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols, rows);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::operator*(const Matrix& o) const {
  require(cols == o.rows, "matrix product shape mismatch");
  Matrix p(rows, o.cols);
  for (int i = 0; i < rows; ++i)
    for (int l = 0; l < cols; ++l) {
      const double a = (*this)(i, l);
      for (int j = 0; j < o.cols; ++j) p(i, j) += a * o(l, j);
    }
  return p;
}

Matrix Matrix::operator*(double s) const {
  Matrix p = *this;
  for (double& v : p.data) v *= s;
  return p;
}

Matrix Matrix::operator-(const Matrix& o) const {
  require(rows == o.rows && cols == o.cols, "matrix difference shape mismatch");
  Matrix p = *this;
  for (std::size_t i = 0; i < data.size(); ++i) p.data[i] -= o.data[i];
  return p;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data) m = std::max(m, std::abs(v));
  return m;
}

double Matrix::frobenius_sq() const {
  double s = 0.0;
  for (double v : data) s += v * v;
  return s;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(rows), std::vector<double>(static_cast<std::size_t>(cols)));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = (*this)(i, j);
  return out;
}

std::vector<double> symmetric_eigenvalues(const Matrix& S, double tol) {
  require(S.rows == S.cols, "eigenvalues need a square matrix");
  const int n = S.rows;
  Matrix a = S;
  double scale = std::max(a.max_abs(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol * scale) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int r = 0; r < n; ++r) {
          const double arp = a(r, p), arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (int r = 0; r < n; ++r) {
          const double apr = a(p, r), aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
      }
    }
  }
  std::vector<double> eig(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return eig;
}

namespace {

// Orthonormalise the projections P e_1, P e_2, ... in order, keeping `count`
// of them. Reproduces coordinate axes whenever the subspace contains them.
std::vector<Eigen::VectorXd> projected_basis(const Eigen::MatrixXd& P, int count) {
  const auto d = P.rows();
  std::vector<Eigen::VectorXd> basis;
  for (Eigen::Index i = 0; i < d && static_cast<int>(basis.size()) < count; ++i) {
    Eigen::VectorXd v = P.col(i);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) v -= b.dot(v) * b;
    if (v.norm() > 1e-6) basis.push_back(v.normalized());
  }
  require(static_cast<int>(basis.size()) == count, "failed to build an orthonormal basis");
  return basis;
}

}  // namespace

LinearDatum reduce(const Matrix& A, double tol) {
  require(A.rows >= 1 && A.cols >= 1, "matrix must be non-empty");
  require(A.cols <= 4, "ambient dimension above 4 is not supported");
  require(A.max_abs() > 0.0, "zero matrix: the blow-up datum must be nontrivial");
  require(tol > 0.0 && tol < 1.0, "rank tolerance must be in (0, 1)");

  Eigen::MatrixXd M(A.rows, A.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) M(i, j) = A(i, j);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();

  LinearDatum out;
  out.A = A;
  out.frob_sq = A.frobenius_sq();
  for (Eigen::Index i = 0; i < sv.size(); ++i) out.singular_values.push_back(sv(i));
  int n = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * sv(0)) ++n;
  out.rank = n;

  const int d = A.cols;
  const Eigen::MatrixXd V = svd.matrixV();
  const Eigen::MatrixXd P_row = V.leftCols(n) * V.leftCols(n).transpose();
  const Eigen::MatrixXd P_ker = Eigen::MatrixXd::Identity(d, d) - P_row;
  auto row_basis = projected_basis(P_row, n);
  auto ker_basis = projected_basis(P_ker, d - n);

  out.Q = Matrix(d, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) out.Q(i, j) = row_basis[static_cast<std::size_t>(i)](j);
  for (int i = 0; i < d - n; ++i)
    for (int j = 0; j < d; ++j) out.Q(n + i, j) = ker_basis[static_cast<std::size_t>(i)](j);

  // A1 = A Q^T restricted to the first n columns.
  out.A1 = Matrix(A.rows, n);
  for (int r = 0; r < A.rows; ++r)
    for (int c = 0; c < n; ++c) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += A(r, j) * out.Q(c, j);
      out.A1(r, c) = s;
    }

  out.gram_eigs = symmetric_eigenvalues(out.A1.transpose() * out.A1);
  return out;
}

std::vector<double> diagonal_form(const LinearDatum& datum) { return datum.gram_eigs; }

double factorization_error(const LinearDatum& datum) {
  const int d = datum.d();
  Matrix padded(datum.k(), d);
  for (int r = 0; r < datum.k(); ++r)
    for (int c = 0; c < datum.rank; ++c) padded(r, c) = datum.A1(r, c);
  return std::sqrt((datum.A - padded * datum.Q).frobenius_sq());
}

}  // namespace freebound
