#ifndef GP_TESTS_TEST_UTIL_HPP
#define GP_TESTS_TEST_UTIL_HPP

#include <cmath>
#include <functional>
#include <random>

#include "gp/numerics.hpp"

// Test-only oracles, deliberately independent of the library's
// factorization and quadrature paths.

namespace testutil {

using gp::Matrix;
using gp::Vector;

/// Determinant by cofactor expansion along the first row. O(n!) but exact
/// in structure; intended for n <= 8.
inline double det_dense(const Matrix& a) {
  const Eigen::Index n = a.rows();
  if (n == 1) return a(0, 0);
  if (n == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  double sum = 0.0;
  double sign = 1.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    Matrix minor(n - 1, n - 1);
    for (Eigen::Index r = 1; r < n; ++r) {
      Eigen::Index cc = 0;
      for (Eigen::Index c = 0; c < n; ++c) {
        if (c == j) continue;
        minor(r - 1, cc++) = a(r, c);
      }
    }
    sum += sign * a(0, j) * det_dense(minor);
    sign = -sign;
  }
  return sum;
}

/// Adaptive Simpson quadrature.
inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol,
                               int depth = 24) {
  auto simpson = [&](double lo, double hi, double flo, double fmid,
                     double fhi) {
    return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
  };
  std::function<double(double, double, double, double, double, double, int)>
      rec = [&](double lo, double hi, double flo, double fmid, double fhi,
                double whole, int d) -> double {
    const double mid = 0.5 * (lo + hi);
    const double lmid = 0.5 * (lo + mid), rmid = 0.5 * (mid + hi);
    const double flmid = f(lmid), frmid = f(rmid);
    const double left = simpson(lo, mid, flo, flmid, fmid);
    const double right = simpson(mid, hi, fmid, frmid, fhi);
    if (d <= 0 || std::abs(left + right - whole) < 15.0 * tol)
      return left + right + (left + right - whole) / 15.0;
    return rec(lo, mid, flo, flmid, fmid, left, d - 1) +
           rec(mid, hi, fmid, frmid, fhi, right, d - 1);
  };
  const double mid = 0.5 * (a + b);
  const double fa = f(a), fm = f(mid), fb = f(b);
  return rec(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), depth);
}

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
  }
  double gauss() { return std::normal_distribution<double>(0.0, 1.0)(gen); }
  int integer(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(gen);
  }
};

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                            double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

inline Vector random_vector(Rng& rng, Eigen::Index n, double lo = -1.0,
                            double hi = 1.0) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

inline Matrix random_spd(Rng& rng, Eigen::Index n) {
  const Matrix m = random_matrix(rng, n, n);
  return m.transpose() * m + Matrix::Identity(n, n);
}

/// Draws y ~ N(0, K) using the library factorization of K.
inline Vector sample_gaussian(Rng& rng, const Matrix& k) {
  const gp::CholFactor f = gp::cholesky(k);
  Vector z(k.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.gauss();
  return f.lower() * z;
}

}  // namespace testutil

#endif  // GP_TESTS_TEST_UTIL_HPP
