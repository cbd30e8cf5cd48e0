#include "gp/numerics.hpp"

#include <cmath>

namespace gp {

namespace {

bool all_finite(const Matrix& a) { return a.allFinite(); }

}  // namespace

CholFactor cholesky(const Matrix& a, const JitterPolicy& policy) {
  if (a.rows() != a.cols())
    throw DimensionMismatch("cholesky: matrix must be square");
  if (a.rows() < 1) throw EmptyData("cholesky: empty matrix");
  if (!all_finite(a)) throw NonFinite("cholesky: non-finite entries");

  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale)
    throw NotSymmetric("cholesky: matrix is not symmetric");

  const double diag_mean = a.diagonal().mean();
  double eps = 0.0;
  for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
    Matrix trial = a;
    const double jitter = eps * diag_mean;
    if (jitter > 0.0) trial.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(trial);
    if (llt.info() == Eigen::Success) {
      Matrix lower = llt.matrixL();
      if ((lower.diagonal().array() > 0.0).all())
        return CholFactor(std::move(lower), jitter);
    }
    eps = (attempt == 0) ? policy.eps0 : eps * policy.factor;
  }
  throw NotPositiveDefinite(
      "cholesky: not positive definite after maximum jitter");
}

Vector CholFactor::solve(const Vector& b) const {
  if (b.size() != lower_.rows())
    throw DimensionMismatch("chol_solve: size mismatch");
  Vector x = lower_.triangularView<Eigen::Lower>().solve(b);
  lower_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
  return x;
}

Matrix CholFactor::solve(const Matrix& b) const {
  if (b.rows() != lower_.rows())
    throw DimensionMismatch("chol_solve: size mismatch");
  Matrix x = lower_.triangularView<Eigen::Lower>().solve(b);
  lower_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
  return x;
}

Vector CholFactor::solve_lower(const Vector& b) const {
  if (b.size() != lower_.rows())
    throw DimensionMismatch("chol_solve: size mismatch");
  return lower_.triangularView<Eigen::Lower>().solve(b);
}

Matrix CholFactor::solve_lower(const Matrix& b) const {
  if (b.rows() != lower_.rows())
    throw DimensionMismatch("chol_solve: size mismatch");
  return lower_.triangularView<Eigen::Lower>().solve(b);
}

double CholFactor::log_det() const {
  return 2.0 * lower_.diagonal().array().log().sum();
}

Vector chol_solve(const CholFactor& f, const Vector& b) { return f.solve(b); }
Matrix chol_solve(const CholFactor& f, const Matrix& b) { return f.solve(b); }
double log_det(const CholFactor& f) { return f.log_det(); }

Vector fd_gradient(const std::function<double(const Vector&)>& f,
                   const Vector& x, double step_scale) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step_scale * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double fp = f(probe);
    probe[i] = x[i] - h;
    const double fm = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NonFinite("fd_gradient: function not finite near x");
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace gp
