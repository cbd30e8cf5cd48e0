#include "gp/gpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gp {

namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log sqrt(2 pi)

// 1 - 1/z^2 + 3/z^4 - 15/z^6 + 105/z^8, the tail series of the Mills
// ratio; accurate to ~1e-15 relative for |z| >= 30.
double tail_series(double z) {
  const double iz2 = 1.0 / (z * z);
  return 1.0 + iz2 * (-1.0 + iz2 * (3.0 + iz2 * (-15.0 + iz2 * 105.0)));
}

}  // namespace

double probit(double f) { return 0.5 * std::erfc(-f * kInvSqrt2); }

double normal_pdf(double f) {
  return std::exp(-0.5 * f * f - kLogSqrt2Pi);
}

double log_probit(double f) {
  if (f >= 8.0) return std::log1p(-0.5 * std::erfc(f * kInvSqrt2));
  if (f >= -30.0) return std::log(0.5 * std::erfc(-f * kInvSqrt2));
  return -0.5 * f * f - kLogSqrt2Pi - std::log(-f) +
         std::log1p(tail_series(f) - 1.0);
}

double mills_ratio(double z) {
  if (z >= -30.0) return normal_pdf(z) / probit(z);
  return -z / tail_series(z);
}

Vector softmax(const Vector& f) {
  if (f.size() < 1) throw InvalidInput("softmax: empty input");
  if (!f.allFinite()) throw NonFinite("softmax: non-finite input");
  const double fmax = f.maxCoeff();
  Vector e = (f.array() - fmax).exp();
  return e / e.sum();
}

// ---------------------------------------------------------------------------
// Binary mode finding (Newton with step halving).

namespace {

struct BinaryIterate {
  Vector grad;    // y_i phi(y_i f_i) / Phi(y_i f_i)
  Vector w;       // -(log Phi)'' at y_i f_i, strictly positive
  double log_lik;  // sum_i log Phi(y_i f_i)
};

BinaryIterate binary_stats(const Vector& f, const std::vector<int>& y) {
  const Eigen::Index n = f.size();
  BinaryIterate it{Vector(n), Vector(n), 0.0};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = y[i] * f[i];
    const double m = mills_ratio(z);
    it.grad[i] = y[i] * m;
    it.w[i] = m * (m + z);
    it.log_lik += log_probit(z);
  }
  return it;
}

void check_binary_labels(const std::vector<int>& y, bool require_both) {
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1)
      pos = true;
    else if (v == -1)
      neg = true;
    else
      throw InvalidInput("binary labels must be -1 or +1");
  }
  if (require_both && (!pos || !neg))
    throw SingleClassData("training data contains only one class");
}

CholFactor factor_b(const Matrix& k, const Vector& sqrt_w) {
  Matrix b = sqrt_w.asDiagonal() * k * sqrt_w.asDiagonal();
  b.diagonal().array() += 1.0;
  return cholesky(b, JitterPolicy{.max_retries = 0});
}

}  // namespace

BinaryModeResult find_mode(const Matrix& k, const std::vector<int>& y) {
  const Eigen::Index n = k.rows();
  if (k.cols() != n) throw DimensionMismatch("find_mode: K must be square");
  if (static_cast<Eigen::Index>(y.size()) != n)
    throw DimensionMismatch("find_mode: label count");
  check_binary_labels(y, /*require_both=*/false);

  // The log posterior (up to a constant) is psi(f) = log p(y|f) - a'f / 2
  // with a = K^-1 f, tracked alongside f so psi never needs a solve with K.
  Vector f = Vector::Zero(n);
  Vector a = Vector::Zero(n);
  BinaryIterate cur = binary_stats(f, y);
  double psi = cur.log_lik;  // a'f = 0 at the start

  constexpr int kMaxIters = 50;
  constexpr double kStepTol = 1e-9;
  for (int iter = 1; iter <= kMaxIters; ++iter) {
    const Vector sqrt_w = cur.w.cwiseSqrt();
    const CholFactor lb = factor_b(k, sqrt_w);
    const Vector b = cur.w.cwiseProduct(f) + cur.grad;
    const Vector a_new =
        b - sqrt_w.cwiseProduct(lb.solve(Vector(sqrt_w.cwiseProduct(k * b))));
    const Vector f_new = k * a_new;
    const double newton_norm = (f_new - f).cwiseAbs().maxCoeff();

    double t = 1.0;
    Vector f_t, a_t;
    BinaryIterate stats_t;
    double psi_t;
    while (true) {
      f_t = f + t * (f_new - f);
      a_t = a + t * (a_new - a);
      stats_t = binary_stats(f_t, y);
      psi_t = stats_t.log_lik - 0.5 * a_t.dot(f_t);
      if (std::isfinite(psi_t) && psi_t >= psi) break;
      t *= 0.5;
      if (t < 1e-12) break;
    }
    if (t < 1e-12) break;  // no ascent possible: numerically at the mode

    f = f_t;
    a = a_t;
    cur = stats_t;
    psi = psi_t;
    if (newton_norm < kStepTol)
      return {f, cur.w, iter};
  }

  const double residual = (f - k * cur.grad).cwiseAbs().maxCoeff();
  if (residual < 1e-6) return {f, cur.w, kMaxIters};
  throw NoConvergence("find_mode: Newton did not converge (residual " +
                      std::to_string(residual) + ")");
}

double log_marginal_binary(const Matrix& k, const std::vector<int>& y,
                           const BinaryModeResult& mode) {
  const BinaryIterate stats = binary_stats(mode.f_hat, y);
  const CholFactor lb = factor_b(k, mode.w_diag.cwiseSqrt());
  // K^-1 f equals the likelihood gradient at the mode, and
  // |K| |K^-1 + W| = |I + K W| = |B|.
  return -0.5 * stats.grad.dot(mode.f_hat) + stats.log_lik -
         lb.lower().diagonal().array().log().sum();
}

// ---------------------------------------------------------------------------
// BinaryGpcModel

BinaryGpcModel::BinaryGpcModel(Matrix xs, std::vector<int> y,
                               KernelExpr kernel)
    : xs_(std::move(xs)),
      y_(std::move(y)),
      kernel_(std::move(kernel)),
      k_(gram(kernel_, xs_)),
      chol_b_(cholesky(Matrix::Identity(1, 1))) {
  const BinaryModeResult mode = find_mode(k_, y_);
  f_hat_ = mode.f_hat;
  w_diag_ = mode.w_diag;
  iterations_ = mode.iterations;
  sqrt_w_ = w_diag_.cwiseSqrt();
  chol_b_ = factor_b(k_, sqrt_w_);

  // At the mode, K^-1 f = grad log p(y|f), so alpha needs no solve.
  alpha_ = binary_stats(f_hat_, y_).grad;
  log_ml_ = log_marginal_binary(k_, y_, mode);
}

BinaryGpcModel BinaryGpcModel::fit(Matrix xs, std::vector<int> labels,
                                   KernelExpr kernel, bool optimize,
                                   const OptOptions& opts) {
  if (xs.rows() < 1) throw EmptyData("gpc fit: no training data");
  if (xs.rows() != static_cast<Eigen::Index>(labels.size()))
    throw DimensionMismatch("gpc fit: inputs and labels differ in length");
  check_binary_labels(labels, /*require_both=*/true);
  if (kernel.has_noise())
    throw InvalidInput("classifier kernels must not contain a noise term");

  if (optimize && kernel.free_param_count() > 0) {
    const auto objective = [&](const Vector& h) -> double {
      try {
        HyperVector hv = pack(kernel);
        hv.values = h;
        return BinaryGpcModel(xs, labels, unpack(hv, kernel)).log_ml_;
      } catch (const NumericFailure&) {
        return -std::numeric_limits<double>::infinity();
      }
    };
    const NmResult nm = nelder_mead(objective, pack(kernel).values, opts);
    if (!std::isfinite(nm.f_best))
      throw OptimizerDiverged("gpc fit: marginal likelihood never finite");
    HyperVector best = pack(kernel);
    best.values = nm.x_best;
    kernel = unpack(best, kernel);
  }
  return BinaryGpcModel(std::move(xs), std::move(labels), std::move(kernel));
}

std::pair<double, double> BinaryGpcModel::predict_latent(
    const Vector& x_star) const {
  const Matrix test = x_star.transpose();
  const Vector krow = cross(kernel_, xs_, test).row(0).transpose();
  const double kss = self_variance(kernel_, test)[0];
  const double mean = krow.dot(alpha_);
  const Vector v = chol_b_.solve_lower(Vector(sqrt_w_.cwiseProduct(krow)));
  const double var = std::max(0.0, kss - v.squaredNorm());
  return {mean, var};
}

double BinaryGpcModel::predict_prob(const Vector& x_star) const {
  const auto [mean, var] = predict_latent(x_star);
  return probit(mean / std::sqrt(1.0 + var));
}

Vector BinaryGpcModel::predict_prob(const Matrix& xs_test) const {
  Vector out(xs_test.rows());
  for (Eigen::Index i = 0; i < xs_test.rows(); ++i)
    out[i] = predict_prob(Vector(xs_test.row(i).transpose()));
  return out;
}

// ---------------------------------------------------------------------------
// Multi-class mode finding (damped fixed point f <- K (y - pi)).

namespace {

// Stacked softmax over C blocks of length n, plus the log likelihood
// y'f - sum_i log sum_c exp f_i^c.
struct MultiStats {
  Vector pi;
  double log_lik;
};

MultiStats multi_stats(const Vector& f, const Vector& y, Eigen::Index n,
                       int c_count) {
  MultiStats st{Vector(f.size()), y.dot(f)};
  Vector fi(c_count);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < c_count; ++c) fi[c] = f[c * n + i];
    const double fmax = fi.maxCoeff();
    double sum = 0.0;
    for (int c = 0; c < c_count; ++c) sum += std::exp(fi[c] - fmax);
    const double lse = fmax + std::log(sum);
    st.log_lik -= lse;
    for (int c = 0; c < c_count; ++c)
      st.pi[c * n + i] = std::exp(fi[c] - lse);
  }
  return st;
}

}  // namespace

MultiModeResult find_mode_multi(const std::vector<Matrix>& ks,
                                const Vector& y_onehot) {
  const int c_count = static_cast<int>(ks.size());
  if (c_count < 2) throw InvalidInput("find_mode_multi: need >= 2 classes");
  const Eigen::Index n = ks.front().rows();
  for (const Matrix& k : ks)
    if (k.rows() != n || k.cols() != n)
      throw DimensionMismatch("find_mode_multi: Gram blocks must agree");
  if (y_onehot.size() != static_cast<Eigen::Index>(c_count) * n)
    throw DimensionMismatch("find_mode_multi: label vector length");
  for (Eigen::Index i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int c = 0; c < c_count; ++c) {
      const double v = y_onehot[c * n + i];
      if (v != 0.0 && v != 1.0)
        throw InvalidInput("find_mode_multi: labels must be one-hot");
      row_sum += v;
    }
    if (row_sum != 1.0)
      throw InvalidInput("find_mode_multi: one-hot rows must sum to 1");
  }

  const Eigen::Index total = static_cast<Eigen::Index>(c_count) * n;
  Vector f = Vector::Zero(total);
  Vector g = Vector::Zero(total);  // K^-1 f, tracked blockwise
  MultiStats cur = multi_stats(f, y_onehot, n, c_count);
  double psi = cur.log_lik;

  constexpr int kMaxIters = 200;
  constexpr double kStepTol = 1e-8;
  for (int iter = 1; iter <= kMaxIters; ++iter) {
    const Vector b = y_onehot - cur.pi;
    Vector f_target(total);
    for (int c = 0; c < c_count; ++c)
      f_target.segment(c * n, n).noalias() = ks[c] * b.segment(c * n, n);
    const Vector step = f_target - f;
    const double step_norm = step.cwiseAbs().maxCoeff();

    double t = 1.0;
    Vector f_t, g_t;
    MultiStats stats_t{Vector(), 0.0};
    double psi_t = 0.0;
    while (true) {
      f_t = f + t * step;
      g_t = g + t * (b - g);
      stats_t = multi_stats(f_t, y_onehot, n, c_count);
      psi_t = stats_t.log_lik - 0.5 * g_t.dot(f_t);
      if (std::isfinite(psi_t) && psi_t >= psi) break;
      t *= 0.5;
      if (t < 1e-12) break;
    }
    if (t < 1e-12) break;

    f = f_t;
    g = g_t;
    cur = stats_t;
    psi = psi_t;
    if (step_norm < kStepTol) return {f, cur.pi, iter};
  }

  // Report the fixed-point residual when the iteration cap runs out.
  const Vector b = y_onehot - cur.pi;
  Vector resid(total);
  for (int c = 0; c < c_count; ++c)
    resid.segment(c * n, n) = ks[c] * b.segment(c * n, n) - f.segment(c * n, n);
  const double rnorm = resid.cwiseAbs().maxCoeff();
  if (rnorm < 1e-6) return {f, cur.pi, kMaxIters};
  throw NoConvergence("find_mode_multi: fixed point did not converge "
                      "(residual " + std::to_string(rnorm) + ")");
}

double log_marginal_multi(const std::vector<Matrix>& ks,
                          const Vector& y_onehot,
                          const MultiModeResult& mode) {
  const int c_count = static_cast<int>(ks.size());
  const Eigen::Index n = ks.front().rows();
  const Eigen::Index total = static_cast<Eigen::Index>(c_count) * n;
  const MultiStats stats = multi_stats(mode.f_hat, y_onehot, n, c_count);
  const Vector g = y_onehot - mode.pi_hat;  // K^-1 f at the mode

  // |K| |K^-1 + W| = |I + K W| with W = diag(pi) - Pi Pi'. W couples the
  // class blocks, so the determinant is taken over the full Cn x Cn
  // matrix by LU.
  Matrix w = Matrix::Zero(total, total);
  for (int c = 0; c < c_count; ++c)
    for (int cp = 0; cp < c_count; ++cp)
      for (Eigen::Index i = 0; i < n; ++i) {
        const double pc = mode.pi_hat[c * n + i];
        const double pcp = mode.pi_hat[cp * n + i];
        w(c * n + i, cp * n + i) = (c == cp ? pc : 0.0) - pc * pcp;
      }
  Matrix m = Matrix::Identity(total, total);
  for (int c = 0; c < c_count; ++c)
    m.middleRows(c * n, n).noalias() += ks[c] * w.middleRows(c * n, n);
  const Eigen::PartialPivLU<Matrix> lu(m);
  const double log_det_ikw =
      lu.matrixLU().diagonal().array().abs().log().sum();

  return -0.5 * g.dot(mode.f_hat) + stats.log_lik - 0.5 * log_det_ikw;
}

// ---------------------------------------------------------------------------
// MultiGpcModel

MultiGpcModel::MultiGpcModel(Matrix xs, std::vector<int> labels)
    : xs_(std::move(xs)), labels_(std::move(labels)) {}

MultiGpcModel MultiGpcModel::fit(Matrix xs, std::vector<int> labels,
                                 KernelExpr kernel, bool optimize,
                                 const OptOptions& opts) {
  if (xs.rows() < 1) throw EmptyData("gpc fit: no training data");
  if (xs.rows() != static_cast<Eigen::Index>(labels.size()))
    throw DimensionMismatch("gpc fit: inputs and labels differ in length");
  if (kernel.has_noise())
    throw InvalidInput("classifier kernels must not contain a noise term");

  const int c_count =
      labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  if (c_count < 2) throw SingleClassData("need at least two classes");
  std::vector<int> counts(c_count, 0);
  for (int v : labels) {
    if (v < 0 || v >= c_count)
      throw InvalidInput("class labels must be 0..C-1");
    ++counts[v];
  }
  for (int c = 0; c < c_count; ++c)
    if (counts[c] == 0)
      throw SingleClassData("class " + std::to_string(c) +
                            " has no training points");

  const Eigen::Index n = xs.rows();
  auto build = [&](const KernelExpr& k) {
    MultiGpcModel model(xs, labels);
    model.kernels_.assign(c_count, k);
    const Matrix shared_gram = gram(k, model.xs_);
    model.ks_.assign(c_count, shared_gram);
    model.y_ = Vector::Zero(static_cast<Eigen::Index>(c_count) * n);
    for (Eigen::Index i = 0; i < n; ++i)
      model.y_[model.labels_[i] * n + i] = 1.0;

    const MultiModeResult mode = find_mode_multi(model.ks_, model.y_);
    model.f_hat_ = mode.f_hat;
    model.pi_hat_ = mode.pi_hat;
    model.iterations_ = mode.iterations;

    for (int c = 0; c < c_count; ++c) {
      const Vector pi_c = model.pi_hat_.segment(c * n, n);
      model.alpha_.push_back(model.y_.segment(c * n, n) - pi_c);
      const Vector sw = (pi_c.array() * (1.0 - pi_c.array()))
                            .cwiseMax(0.0)
                            .sqrt()
                            .matrix();
      model.sqrt_w_.push_back(sw);
      model.chol_b_.push_back(factor_b(model.ks_[c], sw));
    }

    model.log_ml_ = log_marginal_multi(model.ks_, model.y_, mode);
    return model;
  };

  if (optimize && kernel.free_param_count() > 0) {
    const auto objective = [&](const Vector& h) -> double {
      try {
        HyperVector hv = pack(kernel);
        hv.values = h;
        return build(unpack(hv, kernel)).log_ml_;
      } catch (const NumericFailure&) {
        return -std::numeric_limits<double>::infinity();
      }
    };
    const NmResult nm = nelder_mead(objective, pack(kernel).values, opts);
    if (!std::isfinite(nm.f_best))
      throw OptimizerDiverged("gpc fit: marginal likelihood never finite");
    HyperVector best = pack(kernel);
    best.values = nm.x_best;
    kernel = unpack(best, kernel);
  }
  return build(kernel);
}

std::pair<Vector, Vector> MultiGpcModel::predict_latent(
    const Vector& x_star) const {
  const int c_count = num_classes();
  const Matrix test = x_star.transpose();
  Vector means(c_count), vars(c_count);
  for (int c = 0; c < c_count; ++c) {
    const Vector krow = cross(kernels_[c], xs_, test).row(0).transpose();
    const double kss = self_variance(kernels_[c], test)[0];
    means[c] = krow.dot(alpha_[c]);
    const Vector v =
        chol_b_[c].solve_lower(Vector(sqrt_w_[c].cwiseProduct(krow)));
    vars[c] = std::max(0.0, kss - v.squaredNorm());
  }
  return {std::move(means), std::move(vars)};
}

Vector MultiGpcModel::predict_prob(const Vector& x_star) const {
  return softmax(predict_latent(x_star).first);
}

Matrix MultiGpcModel::predict_prob(const Matrix& xs_test) const {
  Matrix out(xs_test.rows(), num_classes());
  for (Eigen::Index i = 0; i < xs_test.rows(); ++i)
    out.row(i) = predict_prob(Vector(xs_test.row(i).transpose())).transpose();
  return out;
}

Matrix MultiGpcModel::pi_stack() const {
  const Eigen::Index n = xs_.rows();
  const int c_count = num_classes();
  Matrix pi = Matrix::Zero(static_cast<Eigen::Index>(c_count) * n, n);
  for (int c = 0; c < c_count; ++c)
    for (Eigen::Index i = 0; i < n; ++i)
      pi(c * n + i, i) = pi_hat_[c * n + i];
  return pi;
}

Matrix MultiGpcModel::w_full() const {
  const Matrix pi = pi_stack();
  Matrix w = -pi * pi.transpose();
  w.diagonal() += pi_hat_;
  return w;
}

}  // namespace gp
