#include "gp/gpr.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace gp {

namespace {

// One test point: mean via k*.alpha, variance via a single forward solve
// v = L^-1 k*, var = k** - v'v. Shared by the parallel and serial paths.
void predict_point(const CholFactor& chol, const Vector& alpha,
                   const Matrix& kstar, const Vector& kss, Eigen::Index i,
                   double& mean_out, double& var_out) {
  const Vector krow = kstar.row(i).transpose();
  mean_out = krow.dot(alpha);
  const Vector v = chol.solve_lower(krow);
  var_out = std::max(0.0, kss[i] - v.squaredNorm());
}

}  // namespace

GprModel GprModel::fit(Matrix xs, Vector y, KernelExpr kernel) {
  if (xs.rows() < 1) throw EmptyData("gpr fit: no training data");
  if (xs.rows() != y.size())
    throw DimensionMismatch("gpr fit: inputs and targets differ in length");
  if (!xs.allFinite() || !y.allFinite())
    throw NonFinite("gpr fit: non-finite training data");

  CholFactor chol = cholesky(gram(kernel, xs));
  Vector alpha = chol.solve(y);
  return GprModel(std::move(xs), std::move(y), std::move(kernel),
                  std::move(chol), std::move(alpha));
}

Prediction GprModel::predict(const Matrix& xs_test, bool full_cov) const {
  const Matrix kstar = cross(kernel_, xs_, xs_test);
  const Vector kss = self_variance(kernel_, xs_test);
  const Eigen::Index m = xs_test.rows();

  Prediction pred;
  pred.mean.resize(m);
  pred.variance.resize(m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < m; ++i)
    predict_point(chol_, alpha_, kstar, kss, i, pred.mean[i],
                  pred.variance[i]);

  if (full_cov) {
    const Matrix v = chol_.solve_lower(kstar.transpose());
    pred.covariance = gram(kernel_, xs_test) - v.transpose() * v;
  }
  return pred;
}

double GprModel::log_marginal_likelihood() const {
  const double n = static_cast<double>(y_.size());
  return -0.5 * y_.dot(alpha_) - 0.5 * chol_.log_det() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

HyperFitResult optimize_hyperparams(const Matrix& xs, const Vector& y,
                                    const KernelExpr& templ,
                                    const OptOptions& opts) {
  if (templ.free_param_count() < 1)
    throw InvalidInput(
        "optimize_hyperparams: template has no free parameters");

  const auto objective = [&](const Vector& h) -> double {
    try {
      HyperVector hv = pack(templ);
      hv.values = h;
      const GprModel model = GprModel::fit(xs, y, unpack(hv, templ));
      return model.log_marginal_likelihood();
    } catch (const NumericFailure&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  const HyperVector h0 = pack(templ);
  const NmResult nm = nelder_mead(objective, h0.values, opts);
  if (!std::isfinite(nm.f_best))
    throw OptimizerDiverged(
        "optimize_hyperparams: log marginal likelihood never finite");

  HyperVector best = h0;
  best.values = nm.x_best;
  return {unpack(best, templ), nm.f_best, nm.evals};
}

std::pair<Vector, Matrix> condition_gaussian(const Vector& a_obs,
                                             const Matrix& a, const Matrix& b,
                                             const Matrix& c) {
  if (a.rows() != a.cols())
    throw DimensionMismatch("condition_gaussian: A must be square");
  if (b.rows() != b.cols())
    throw DimensionMismatch("condition_gaussian: B must be square");
  if (a_obs.size() != a.rows())
    throw DimensionMismatch("condition_gaussian: observation length");
  if (c.rows() != b.rows() || c.cols() != a.rows())
    throw DimensionMismatch("condition_gaussian: C block shape");

  const CholFactor f = cholesky(a, JitterPolicy{.max_retries = 0});
  Vector mean = c * f.solve(a_obs);
  Matrix cov = b - c * f.solve(Matrix(c.transpose()));
  return {std::move(mean), std::move(cov)};
}

namespace reference {

Prediction predict(const GprModel& model, const Matrix& xs_test,
                   bool full_cov) {
  const Matrix kstar = reference::cross(model.kernel(), model.xs(), xs_test);
  const Vector kss = reference::self_variance(model.kernel(), xs_test);
  const Eigen::Index m = xs_test.rows();

  Prediction pred;
  pred.mean.resize(m);
  pred.variance.resize(m);
  for (Eigen::Index i = 0; i < m; ++i)
    predict_point(model.chol(), model.alpha(), kstar, kss, i, pred.mean[i],
                  pred.variance[i]);

  if (full_cov) {
    const Matrix v = model.chol().solve_lower(kstar.transpose());
    pred.covariance = reference::gram(model.kernel(), xs_test) -
                      v.transpose() * v;
  }
  return pred;
}

}  // namespace reference

}  // namespace gp
