#pragma once

#include <complex>
#include <span>
#include <vector>

namespace chaosnet {

// Dense row-major real matrix. Sizes in this project are small (state
// dimension 3, Lyapunov systems up to ~15, extended Jacobians up to ~200),
// so everything is kept simple and value-typed.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {}

  static Matrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  Matrix transpose() const;
  double trace() const;
  double frobenius_norm() const;
  double max_abs() const;

  // y = A x
  void apply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> apply(std::span<const double> x) const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);

// (A + A^T) / 2
Matrix symmetric_part(const Matrix& a);

// LU factorization with partial pivoting.
struct LuFactors {
  Matrix lu;
  std::vector<int> perm;
  int perm_sign = 1;
  bool singular = false;
};

LuFactors lu_factor(Matrix a);
std::vector<double> lu_solve(const LuFactors& f, std::span<const double> b);
double determinant(const Matrix& a);

// Cholesky test for symmetric positive definiteness. Returns false (without
// throwing) when the matrix is not PD.
bool is_positive_definite(const Matrix& a);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(Matrix a);
double symmetric_lambda_max(const Matrix& a);
double symmetric_lambda_min(const Matrix& a);

// Full spectrum of a general real square matrix: balancing, Householder
// reduction to upper Hessenberg form, then Francis double-shift QR iteration.
// Throws NumericalError if the QR iteration fails to deflate an eigenvalue
// within the sweep budget.
std::vector<std::complex<double>> eigenvalues(const Matrix& a);

}  // namespace chaosnet
