#pragma once

// The blow-up datum A (k x d) and its reductions: A = [A1, 0] Q with Q
// orthogonal and A1 of full column rank n, plus the positive eigenvalues of
// A^T A, which are all the energy problem depends on.

#include <string>
#include <vector>

namespace freebound {

/// Small dense row-major matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<std::size_t>(r * c), fill) {}
  static Matrix identity(int n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i * cols + j)]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i * cols + j)]; }

  Matrix transpose() const;
  Matrix operator*(const Matrix& other) const;
  Matrix operator*(double s) const;
  Matrix operator-(const Matrix& other) const;
  double max_abs() const;
  double frobenius_sq() const;
  std::vector<std::vector<double>> to_rows() const;
};

struct LinearDatum {
  Matrix A;                        // k x d
  int rank = 0;                    // n
  Matrix Q;                        // d x d orthogonal
  Matrix A1;                       // k x n, A = [A1, 0] Q
  std::vector<double> gram_eigs;   // n positive eigenvalues of A^T A, decreasing
  std::vector<double> singular_values;  // all min(k, d), decreasing
  double frob_sq = 0.0;            // Tr(A^T A)

  int k() const noexcept { return A.rows; }
  int d() const noexcept { return A.cols; }
};

/// Rank factorization with numerical rank taken as the count of singular
/// values above tol * sigma_max. Rejects the zero matrix.
LinearDatum reduce(const Matrix& A, double tol = 1e-8);

/// The weights b of the equivalent diagonal problem inf int B grad W . grad W
/// with contact datum Id_n (the Gram eigenvalues).
std::vector<double> diagonal_form(const LinearDatum& datum);

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations,
/// returned in decreasing order.
std::vector<double> symmetric_eigenvalues(const Matrix& S, double tol = 1e-15);

/// Norm of the residual A - [A1, 0] Q.
double factorization_error(const LinearDatum& datum);

}  // namespace freebound
