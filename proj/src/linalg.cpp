#include "chaosnet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "chaosnet/errors.hpp"

namespace chaosnet {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

double sign_with(double magnitude, double sign_of) {
  return sign_of >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude);
}

}  // namespace

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::trace() const {
  double s = 0.0;
  for (int i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
  return s;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

void Matrix::apply(std::span<const double> x, std::span<double> y) const {
  require(static_cast<int>(x.size()) == cols_ && static_cast<int>(y.size()) == rows_,
          "matrix apply: dimension mismatch");
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    const double* row = data_.data() + static_cast<size_t>(i) * cols_;
    for (int j = 0; j < cols_; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

std::vector<double> Matrix::apply(std::span<const double> x) const {
  std::vector<double> y(rows_);
  apply(x, y);
  return y;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, "matrix add: shape mismatch");
  for (size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, "matrix sub: shape mismatch");
  for (size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matrix mul: shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix symmetric_part(const Matrix& a) {
  require(a.square(), "symmetric_part: matrix must be square");
  Matrix s(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

LuFactors lu_factor(Matrix a) {
  require(a.square(), "lu_factor: matrix must be square");
  const int n = a.rows();
  LuFactors f;
  f.perm.resize(n);
  for (int i = 0; i < n; ++i) f.perm[i] = i;

  for (int k = 0; k < n; ++k) {
    int pivot = k;
    double best = std::abs(a(k, k));
    for (int i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        pivot = i;
      }
    }
    if (best == 0.0) {
      f.singular = true;
      f.lu = std::move(a);
      return f;
    }
    if (pivot != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(pivot, j));
      std::swap(f.perm[k], f.perm[pivot]);
      f.perm_sign = -f.perm_sign;
    }
    for (int i = k + 1; i < n; ++i) {
      a(i, k) /= a(k, k);
      double lik = a(i, k);
      if (lik == 0.0) continue;
      for (int j = k + 1; j < n; ++j) a(i, j) -= lik * a(k, j);
    }
  }
  f.lu = std::move(a);
  return f;
}

std::vector<double> lu_solve(const LuFactors& f, std::span<const double> b) {
  if (f.singular) throw NumericalError("lu_solve: singular matrix");
  const int n = f.lu.rows();
  require(static_cast<int>(b.size()) == n, "lu_solve: rhs size mismatch");
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = b[f.perm[i]];
  for (int i = 1; i < n; ++i) {
    double s = x[i];
    for (int j = 0; j < i; ++j) s -= f.lu(i, j) * x[j];
    x[i] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int j = i + 1; j < n; ++j) s -= f.lu(i, j) * x[j];
    x[i] = s / f.lu(i, i);
  }
  return x;
}

double determinant(const Matrix& a) {
  LuFactors f = lu_factor(a);
  if (f.singular) return 0.0;
  double d = f.perm_sign;
  for (int i = 0; i < f.lu.rows(); ++i) d *= f.lu(i, i);
  return d;
}

bool is_positive_definite(const Matrix& a) {
  if (!a.square()) return false;
  const int n = a.rows();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-9 * (1.0 + a.max_abs())) return false;

  Matrix l(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= 0.0) return false;
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return true;
}

std::vector<double> symmetric_eigenvalues(Matrix a) {
  require(a.square(), "symmetric_eigenvalues: matrix must be square");
  const int n = a.rows();
  // cyclic Jacobi sweeps
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off <= 1e-30 * (1.0 + a.frobenius_norm())) break;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = sign_with(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

double symmetric_lambda_max(const Matrix& a) { return symmetric_eigenvalues(a).back(); }
double symmetric_lambda_min(const Matrix& a) { return symmetric_eigenvalues(a).front(); }

namespace {

// Diagonal similarity scaling so row and column norms are comparable
// (EISPACK balanc, radix-2 variant). Eigenvalues are unchanged.
void balance_in_place(Matrix& a) {
  const int n = a.rows();
  constexpr double radix = 2.0;
  constexpr double radix_sq = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (int i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix_sq;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix_sq;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        double ginv = 1.0 / f;
        for (int j = 0; j < n; ++j) a(i, j) *= ginv;
        for (int j = 0; j < n; ++j) a(j, i) *= f;
      }
    }
  }
}

// Householder similarity reduction to upper Hessenberg form.
void hessenberg_in_place(Matrix& a) {
  const int n = a.rows();
  std::vector<double> v(n);
  for (int k = 0; k < n - 2; ++k) {
    double scale = 0.0;
    for (int i = k + 1; i < n; ++i) scale += std::abs(a(i, k));
    if (scale == 0.0) continue;

    double h = 0.0;
    for (int i = k + 1; i < n; ++i) {
      v[i] = a(i, k) / scale;
      h += v[i] * v[i];
    }
    double g = -sign_with(std::sqrt(h), v[k + 1]);
    h -= v[k + 1] * g;
    v[k + 1] -= g;
    if (h == 0.0) continue;

    // apply P = I - v v^T / h from the left, then from the right
    for (int j = k; j < n; ++j) {
      double f = 0.0;
      for (int i = k + 1; i < n; ++i) f += v[i] * a(i, j);
      f /= h;
      for (int i = k + 1; i < n; ++i) a(i, j) -= f * v[i];
    }
    for (int i = 0; i < n; ++i) {
      double f = 0.0;
      for (int j = k + 1; j < n; ++j) f += v[j] * a(i, j);
      f /= h;
      for (int j = k + 1; j < n; ++j) a(i, j) -= f * v[j];
    }
    a(k + 1, k) = scale * g;
    for (int i = k + 2; i < n; ++i) a(i, k) = 0.0;
  }
}

// Francis double-shift QR iteration on an upper Hessenberg matrix.
std::vector<std::complex<double>> hessenberg_qr_eigenvalues(Matrix& a) {
  const int n = a.rows();
  std::vector<std::complex<double>> eig;
  eig.reserve(n);

  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));
  if (anorm == 0.0) {
    eig.assign(n, {0.0, 0.0});
    return eig;
  }

  const double eps = std::numeric_limits<double>::epsilon();
  int nn = n - 1;
  double shift_total = 0.0;
  while (nn >= 0) {
    int its = 0;
    int l;
    do {
      for (l = nn; l >= 1; --l) {
        double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= eps * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      double x = a(nn, nn);
      if (l == nn) {  // one real eigenvalue deflated
        eig.emplace_back(x + shift_total, 0.0);
        --nn;
      } else {
        double y = a(nn - 1, nn - 1);
        double w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {  // 2x2 block deflated
          double p = 0.5 * (y - x);
          double q = p * p + w;
          double z = std::sqrt(std::abs(q));
          x += shift_total;
          if (q >= 0.0) {
            z = p + sign_with(z, p);
            eig.emplace_back(x + z, 0.0);
            eig.emplace_back(z != 0.0 ? x - w / z : x + z, 0.0);
          } else {
            eig.emplace_back(x + p, z);
            eig.emplace_back(x + p, -z);
          }
          nn -= 2;
        } else {
          // repeated eigenvalues (identical diagonal blocks are routine for
          // synchronized network states) converge only linearly, so the
          // budget is generous; exceptional shifts break cycling every 10
          if (its == 300)
            throw NumericalError("eigenvalues: QR iteration did not converge after 300 sweeps (size " +
                                 std::to_string(n) + ", active block " + std::to_string(nn + 1) + ")");
          if (its > 0 && its % 10 == 0) {  // exceptional shift
            shift_total += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            double s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = 0.75 * s;
            x = y;
            w = -0.4375 * s * s;
          }
          ++its;

          int m;
          double p = 0.0, q = 0.0, r = 0.0;
          for (m = nn - 2; m >= l; --m) {
            double z = a(m, m);
            double rr = x - z;
            double ss = y - z;
            p = (rr * ss - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - rr - ss;
            r = a(m + 2, m + 1);
            double s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }

          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = (k != nn - 1) ? a(k + 2, k - 1) : 0.0;
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            double s = sign_with(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (k == m) {
              if (l != m) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            double y2 = q / s;
            double z2 = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= nn; ++j) {  // row modification
              double pp = a(k, j) + q * a(k + 1, j);
              if (k != nn - 1) pp += r * a(k + 2, j);
              a(k, j) -= pp * x;
              a(k + 1, j) -= pp * y2;
              if (k != nn - 1) a(k + 2, j) -= pp * z2;
            }
            int top = std::min(nn, k + 3);
            for (int i = l; i <= top; ++i) {  // column modification
              double pp = x * a(i, k) + y2 * a(i, k + 1);
              if (k != nn - 1) pp += z2 * a(i, k + 2);
              a(i, k) -= pp;
              a(i, k + 1) -= pp * q;
              if (k != nn - 1) a(i, k + 2) -= pp * r;
            }
          }
        }
      }
    } while (l < nn - 1);
  }
  return eig;
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(const Matrix& a) {
  require(a.square(), "eigenvalues: matrix must be square");
  const int n = a.rows();
  if (n == 0) return {};
  if (n == 1) return {{a(0, 0), 0.0}};

  Matrix work = a;
  balance_in_place(work);
  hessenberg_in_place(work);
  return hessenberg_qr_eigenvalues(work);
}

}  // namespace chaosnet
