#ifndef GP_NUMERICS_HPP
#define GP_NUMERICS_HPP

#include <Eigen/Dense>
#include <functional>

#include "gp/errors.hpp"

namespace gp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Retry schedule for factorizing near-singular symmetric matrices.
/// The first attempt adds no jitter; each retry adds eps * mean(diag(a))
/// to the diagonal with eps escalating by `factor` per step.
struct JitterPolicy {
  double eps0 = 1e-10;
  double factor = 10.0;
  int max_retries = 5;
};

/// Lower-triangular Cholesky factor L with L * L^T = A + jitter * I.
class CholFactor {
 public:
  const Matrix& lower() const noexcept { return lower_; }
  double jitter_applied() const noexcept { return jitter_; }
  Eigen::Index size() const noexcept { return lower_.rows(); }

  /// Solves (L L^T) x = b by two triangular solves.
  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;

  /// Forward substitution only: solves L x = b.
  Vector solve_lower(const Vector& b) const;
  Matrix solve_lower(const Matrix& b) const;

  /// log |L L^T| = 2 * sum(log diag(L)).
  double log_det() const;

  friend CholFactor cholesky(const Matrix&, const JitterPolicy&);

 private:
  CholFactor(Matrix lower, double jitter)
      : lower_(std::move(lower)), jitter_(jitter) {}
  Matrix lower_;
  double jitter_ = 0.0;
};

/// Factorizes a symmetric positive (semi)definite matrix, escalating
/// diagonal jitter per `policy` when the plain factorization fails.
CholFactor cholesky(const Matrix& a, const JitterPolicy& policy = {});

Vector chol_solve(const CholFactor& f, const Vector& b);
Matrix chol_solve(const CholFactor& f, const Matrix& b);
double log_det(const CholFactor& f);

/// Central-difference gradient of a scalar function. Step for coordinate i
/// is step_scale * max(1, |x_i|); step_scale defaults to 1e-5.
Vector fd_gradient(const std::function<double(const Vector&)>& f,
                   const Vector& x, double step_scale = 1e-5);

}  // namespace gp

#endif  // GP_NUMERICS_HPP
