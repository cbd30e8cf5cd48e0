#ifndef GP_GPR_HPP
#define GP_GPR_HPP

#include <optional>
#include <utility>

#include "gp/kernels.hpp"
#include "gp/numerics.hpp"
#include "gp/optimize.hpp"

namespace gp {

struct Prediction {
  Vector mean;
  Vector variance;
  std::optional<Matrix> covariance;  // full joint covariance on request
};

/// Exact GP regressor. Immutable once fitted: the Gram matrix is
/// factorized a single time and K^-1 y is cached.
class GprModel {
 public:
  /// Rows of `xs` are the training inputs.
  static GprModel fit(Matrix xs, Vector y, KernelExpr kernel);

  /// Predictive mean and pointwise variance of y* at the given test
  /// inputs; the full covariance is filled only when `full_cov` is set.
  /// Test points are processed in parallel; results are bitwise-identical
  /// to the serial reference.
  Prediction predict(const Matrix& xs_test, bool full_cov = false) const;

  /// -1/2 y' K^-1 y - 1/2 log|K| - n/2 log(2 pi)
  double log_marginal_likelihood() const;

  const Matrix& xs() const noexcept { return xs_; }
  const Vector& y() const noexcept { return y_; }
  const KernelExpr& kernel() const noexcept { return kernel_; }
  const CholFactor& chol() const noexcept { return chol_; }
  const Vector& alpha() const noexcept { return alpha_; }

 private:
  GprModel(Matrix xs, Vector y, KernelExpr kernel, CholFactor chol,
           Vector alpha)
      : xs_(std::move(xs)),
        y_(std::move(y)),
        kernel_(std::move(kernel)),
        chol_(std::move(chol)),
        alpha_(std::move(alpha)) {}

  Matrix xs_;
  Vector y_;
  KernelExpr kernel_;
  CholFactor chol_;
  Vector alpha_;
};

struct HyperFitResult {
  KernelExpr kernel;
  double log_ml = 0.0;
  int evals = 0;
};

/// Maximizes the log marginal likelihood over the free (non-fixed) kernel
/// parameters in log-space with Nelder-Mead, starting from the template's
/// values. Returns the best kernel encountered.
HyperFitResult optimize_hyperparams(const Matrix& xs, const Vector& y,
                                    const KernelExpr& templ,
                                    const OptOptions& opts = {});

/// Conditions a zero-mean joint Gaussian [a; b] with covariance blocks
/// [[A, C^T], [C, B]] on an observation of a. Returns the conditional
/// mean C A^-1 a and covariance B - C A^-1 C^T (the Schur complement).
std::pair<Vector, Matrix> condition_gaussian(const Vector& a_obs,
                                             const Matrix& a, const Matrix& b,
                                             const Matrix& c);

namespace reference {
/// Serial twin of GprModel::predict, kept for equivalence tests.
Prediction predict(const GprModel& model, const Matrix& xs_test,
                   bool full_cov = false);
}  // namespace reference

}  // namespace gp

#endif  // GP_GPR_HPP
