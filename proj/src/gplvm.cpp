#include "gp/gplvm.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace gp {

Matrix Standardizer::apply(const Matrix& y) const {
  if (y.cols() != mean.size())
    throw DimensionMismatch("standardizer: column count");
  return (y.rowwise() - mean.transpose()).array().rowwise() /
         scale.transpose().array();
}

Matrix Standardizer::invert(const Matrix& y_std) const {
  if (y_std.cols() != mean.size())
    throw DimensionMismatch("standardizer: column count");
  return (y_std.array().rowwise() * scale.transpose().array()).matrix()
             .rowwise() +
         mean.transpose();
}

std::pair<Matrix, Standardizer> preprocess(const Matrix& y_raw) {
  const Eigen::Index n = y_raw.rows(), d = y_raw.cols();
  if (n < 2) throw InvalidInput("preprocess: need at least two rows");
  if (!y_raw.allFinite()) throw NonFinite("preprocess: non-finite data");

  Standardizer s;
  s.mean = y_raw.colwise().mean();
  s.scale.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var =
        (y_raw.col(j).array() - s.mean[j]).square().sum() /
        static_cast<double>(n - 1);
    if (var <= 0.0)
      throw ZeroVarianceColumn("preprocess: column " + std::to_string(j) +
                               " has zero variance");
    s.scale[j] = std::sqrt(var);
  }
  return {s.apply(y_raw), std::move(s)};
}

namespace {

void check_theta(const LvmTheta& t) {
  if (!(t.sigma > 0.0) || !(t.length > 0.0) || !(t.beta > 0.0) ||
      !std::isfinite(t.sigma) || !std::isfinite(t.length) ||
      !std::isfinite(t.beta))
    throw NonFinite("lvm: theta must be positive and finite");
}

Matrix squared_dists(const Matrix& x) {
  const Eigen::Index n = x.rows();
  Matrix r2(n, n);
  const Matrix xt = x.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    r2(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (xt.col(i) - xt.col(j)).squaredNorm();
      r2(i, j) = v;
      r2(j, i) = v;
    }
  }
  return r2;
}

struct LvmParts {
  Matrix r2;  // squared latent distances
  Matrix s;   // smooth part sigma^2 exp(-r2 / 2l^2)
  Matrix k;   // s + I / beta
};

LvmParts lvm_parts(const Matrix& x, const LvmTheta& theta) {
  check_theta(theta);
  LvmParts p;
  p.r2 = squared_dists(x);
  p.s = (theta.sigma * theta.sigma) *
        (-p.r2 / (2.0 * theta.length * theta.length)).array().exp().matrix();
  p.k = p.s;
  p.k.diagonal().array() += 1.0 / theta.beta;
  return p;
}

// dL/dX shared by the parallel and serial twins: row i of the output is
// (-2 / l^2) sum_b H_ib (x_i - x_b) with H = G .* S.
void latent_gradient_row(const Matrix& h, const Matrix& x, double inv_l2,
                         Eigen::Index i, Matrix& dx) {
  const Eigen::Index n = x.rows(), q = x.cols();
  for (Eigen::Index col = 0; col < q; ++col) {
    double acc = 0.0;
    for (Eigen::Index b = 0; b < n; ++b)
      acc += h(i, b) * (x(i, col) - x(b, col));
    dx(i, col) = -2.0 * inv_l2 * acc;
  }
}

struct GradientCore {
  Matrix h;          // G .* S
  double inv_l2;
  Eigen::Vector3d dlog_theta;
};

GradientCore gradient_core(const Matrix& x, const LvmTheta& theta,
                           const Matrix& y_std) {
  if (x.rows() != y_std.rows())
    throw DimensionMismatch("lvm: latent and data row counts differ");
  const double d = static_cast<double>(y_std.cols());
  const LvmParts p = lvm_parts(x, theta);
  const CholFactor chol = cholesky(p.k);
  const Matrix a = chol.solve(y_std);               // K^-1 Y
  const Matrix kinv = chol.solve(Matrix(Matrix::Identity(x.rows(), x.rows())));
  const Matrix g = 0.5 * (a * a.transpose() - d * kinv);

  GradientCore core;
  core.h = g.cwiseProduct(p.s);
  core.inv_l2 = 1.0 / (theta.length * theta.length);
  core.dlog_theta[0] = 2.0 * core.h.sum();
  core.dlog_theta[1] = core.inv_l2 * core.h.cwiseProduct(p.r2).sum();
  core.dlog_theta[2] = -g.trace() / theta.beta;
  return core;
}

}  // namespace

Matrix lvm_gram(const Matrix& x, const LvmTheta& theta) {
  return lvm_parts(x, theta).k;
}

double lvm_log_likelihood(const Matrix& x, const LvmTheta& theta,
                          const Matrix& y_std) {
  if (x.rows() != y_std.rows())
    throw DimensionMismatch("lvm: latent and data row counts differ");
  const double n = static_cast<double>(x.rows());
  const double d = static_cast<double>(y_std.cols());
  const CholFactor chol = cholesky(lvm_parts(x, theta).k);
  const Matrix a = chol.solve(y_std);
  const double data_term = -0.5 * y_std.cwiseProduct(a).sum();
  return data_term - 0.5 * d * chol.log_det() -
         0.5 * n * d * std::log(2.0 * std::numbers::pi);
}

LvmGradients lvm_gradients(const Matrix& x, const LvmTheta& theta,
                           const Matrix& y_std) {
  const GradientCore core = gradient_core(x, theta, y_std);
  LvmGradients out;
  out.dlog_theta = core.dlog_theta;
  out.dx.resize(x.rows(), x.cols());
  const Eigen::Index n = x.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i)
    latent_gradient_row(core.h, x, core.inv_l2, i, out.dx);
  return out;
}

namespace reference {

LvmGradients lvm_gradients(const Matrix& x, const LvmTheta& theta,
                           const Matrix& y_std) {
  const GradientCore core = gradient_core(x, theta, y_std);
  LvmGradients out;
  out.dlog_theta = core.dlog_theta;
  out.dx.resize(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    latent_gradient_row(core.h, x, core.inv_l2, i, out.dx);
  return out;
}

}  // namespace reference

LvmModel fit_lvm(const Matrix& y_raw, const LvmConfig& config) {
  if (config.q < 1) throw InvalidInput("fit_lvm: q must be >= 1");
  if (config.q >= y_raw.cols())
    throw InvalidInput("fit_lvm: latent dimension must satisfy q < d");
  if (y_raw.rows() < 3) throw InvalidInput("fit_lvm: need at least 3 rows");

  auto [y_std, standardizer] = preprocess(y_raw);
  const Eigen::Index n = y_std.rows(), q = config.q;

  // PCA initialization: project onto the top-q principal components.
  Eigen::JacobiSVD<Matrix> svd(y_std, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Matrix x0 =
      svd.matrixU().leftCols(q) *
      svd.singularValues().head(q).asDiagonal();

  const Eigen::Index nvars = n * q + 3;
  Vector w0(nvars);
  Eigen::Map<Matrix>(w0.data(), n, q) = x0;
  w0[n * q + 0] = 0.0;                 // log sigma
  w0[n * q + 1] = 0.0;                 // log length
  w0[n * q + 2] = std::log(100.0);     // log beta

  auto unflatten = [&](const Vector& w) {
    Matrix x = Eigen::Map<const Matrix>(w.data(), n, q);
    LvmTheta theta{std::exp(w[n * q + 0]), std::exp(w[n * q + 1]),
                   std::exp(w[n * q + 2])};
    return std::make_pair(std::move(x), theta);
  };

  const ObjectiveGrad fg = [&](const Vector& w) -> std::pair<double, Vector> {
    try {
      const auto [x, theta] = unflatten(w);
      const double val = lvm_log_likelihood(x, theta, y_std);
      const LvmGradients g = lvm_gradients(x, theta, y_std);
      Vector grad(nvars);
      Eigen::Map<Matrix>(grad.data(), n, q) = g.dx;
      grad.segment(n * q, 3) = g.dlog_theta;
      return {val, std::move(grad)};
    } catch (const NumericFailure&) {
      return {-std::numeric_limits<double>::infinity(), Vector::Zero(nvars)};
    }
  };

  OptOptions opts;
  opts.max_evals = config.max_iters;
  opts.scg_grad_tol = config.grad_tol;
  const ScgResult res = scg(fg, w0, opts);

  LvmModel model;
  auto [x_best, theta_best] = unflatten(res.x_best);
  model.x_latent = std::move(x_best);
  model.theta = theta_best;
  model.y_std = std::move(y_std);
  model.standardizer = std::move(standardizer);
  model.history = res.trace;
  model.converged = res.converged;
  model.final_grad_norm = fg(res.x_best).second.cwiseAbs().maxCoeff();
  return model;
}

}  // namespace gp
