#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gp/gplvm.hpp"
#include "gp/gpr.hpp"
#include "test_util.hpp"

using gp::LvmConfig;
using gp::LvmTheta;
using gp::Matrix;
using gp::Vector;
using testutil::Rng;

namespace {

// Two offset arcs in the plane, 17 points total (9 + 8).
Matrix two_curve_data() {
  Matrix y(17, 2);
  for (int i = 0; i < 9; ++i) {
    const double t = -1.0 + 2.0 * i / 8.0;
    y(i, 0) = t - 1.2;
    y(i, 1) = t * t;
  }
  for (int i = 0; i < 8; ++i) {
    const double t = -1.0 + 2.0 * i / 7.0;
    y(9 + i, 0) = t + 1.2;
    y(9 + i, 1) = 0.8 - t * t;
  }
  return y;
}

}  // namespace

TEST_CASE("preprocess standardizes every column") {
  Matrix y(3, 1);
  y << 1, 2, 3;
  const auto [y_std, s] = gp::preprocess(y);
  CHECK(y_std.col(0).mean() == doctest::Approx(0.0).epsilon(1e-12));
  const double var = y_std.col(0).squaredNorm() / 2.0;
  CHECK(var == doctest::Approx(1.0).epsilon(1e-12));

  // Already standardized data: the transform is the identity.
  const auto [again, s2] = gp::preprocess(y_std);
  CHECK((again - y_std).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(s2.mean.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(s2.scale[0] - 1.0) < 1e-12);

  // Round trip.
  Rng rng(211);
  const Matrix big = testutil::random_matrix(rng, 12, 3, -4, 9);
  const auto [std_big, sb] = gp::preprocess(big);
  CHECK((sb.invert(std_big) - big).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("preprocess rejects degenerate input") {
  Matrix flat(4, 2);
  flat.col(0) << 1, 2, 3, 4;
  flat.col(1).setConstant(7.0);
  CHECK_THROWS_AS(gp::preprocess(flat), gp::ZeroVarianceColumn);

  CHECK_THROWS_AS(gp::preprocess(Matrix::Zero(1, 2)), gp::InvalidInput);

  Matrix bad(3, 1);
  bad << 1, std::numeric_limits<double>::quiet_NaN(), 3;
  CHECK_THROWS_AS(gp::preprocess(bad), gp::NonFinite);
}

TEST_CASE("d=1 likelihood equals the GPR marginal likelihood") {
  Rng rng(223);
  const Matrix x = testutil::random_matrix(rng, 7, 1, -2, 2);
  Matrix y(7, 1);
  for (int i = 0; i < 7; ++i) y(i, 0) = rng.gauss();

  const LvmTheta theta{1.3, 0.8, 25.0};
  const double lvm = gp::lvm_log_likelihood(x, theta, y);

  const gp::KernelExpr k = gp::KernelExpr::parse(
      "se(sf=1.3,l=0.8)+noise(sn=" +
      std::to_string(1.0 / std::sqrt(25.0)) + ")");
  const double gpr =
      gp::GprModel::fit(x, y.col(0), k).log_marginal_likelihood();
  CHECK(lvm == doctest::Approx(gpr).epsilon(1e-10));
}

TEST_CASE("duplicating the single data column doubles the likelihood") {
  Rng rng(227);
  const Matrix x = testutil::random_matrix(rng, 6, 1, -2, 2);
  Matrix y1(6, 1);
  for (int i = 0; i < 6; ++i) y1(i, 0) = rng.gauss();
  Matrix y2(6, 2);
  y2 << y1, y1;

  const LvmTheta theta{1.0, 1.0, 30.0};
  CHECK(gp::lvm_log_likelihood(x, theta, y2) ==
        doctest::Approx(2.0 * gp::lvm_log_likelihood(x, theta, y1))
            .epsilon(1e-9));
}

TEST_CASE("two-point likelihood matches the dense 2x2 formula") {
  Matrix x(2, 1);
  x << 0.0, 0.7;
  Matrix y(2, 1);
  y << 0.4, -1.1;
  const LvmTheta theta{1.2, 0.9, 10.0};

  const double r2 = 0.49;
  const double s = 1.44 * std::exp(-r2 / (2 * 0.81));
  const double diag = 1.44 + 0.1;
  const double det = diag * diag - s * s;
  Matrix k_inv(2, 2);
  k_inv << diag, -s, -s, diag;
  k_inv /= det;
  const double expect = -0.5 * y.col(0).dot(k_inv * y.col(0)) -
                        0.5 * std::log(det) - std::log(2 * M_PI);
  CHECK(gp::lvm_log_likelihood(x, theta, y) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("analytic gradients match finite differences") {
  Rng rng(229);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 4 + trial % 5;  // up to 8
    const Eigen::Index q = 1 + trial % 2;
    const Eigen::Index d = 1 + trial % 3;
    const Matrix x = testutil::random_matrix(rng, n, q, -1.5, 1.5);
    Matrix y(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d; ++j) y(i, j) = rng.gauss();
    const LvmTheta theta{rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5),
                         rng.uniform(5.0, 50.0)};

    const gp::LvmGradients g = gp::lvm_gradients(x, theta, y);

    // Flatten (X, log theta) and differentiate numerically.
    Vector w(n * q + 3);
    Eigen::Map<Matrix>(w.data(), n, q) = x;
    w[n * q + 0] = std::log(theta.sigma);
    w[n * q + 1] = std::log(theta.length);
    w[n * q + 2] = std::log(theta.beta);
    const auto f = [&](const Vector& v) {
      const Matrix xv = Eigen::Map<const Matrix>(v.data(), n, q);
      const LvmTheta tv{std::exp(v[n * q + 0]), std::exp(v[n * q + 1]),
                        std::exp(v[n * q + 2])};
      return gp::lvm_log_likelihood(xv, tv, y);
    };
    const Vector fd = gp::fd_gradient(f, w);

    Vector analytic(n * q + 3);
    Eigen::Map<Matrix>(analytic.data(), n, q) = g.dx;
    analytic.segment(n * q, 3) = g.dlog_theta;
    for (Eigen::Index i = 0; i < analytic.size(); ++i)
      CHECK(std::abs(analytic[i] - fd[i]) <=
            1e-5 * std::max(1.0, std::abs(fd[i])));
  }
}

TEST_CASE("latent gradient sums to zero under translation") {
  Rng rng(233);
  const Matrix x = testutil::random_matrix(rng, 8, 2, -1, 1);
  Matrix y(8, 3);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 3; ++j) y(i, j) = rng.gauss();
  const LvmTheta theta{1.0, 0.7, 20.0};

  const gp::LvmGradients g = gp::lvm_gradients(x, theta, y);
  CHECK(g.dx.colwise().sum().cwiseAbs().maxCoeff() < 1e-8);

  // The likelihood itself is translation invariant.
  Matrix shifted = x;
  shifted.col(0).array() += 3.7;
  shifted.col(1).array() -= 1.2;
  CHECK(gp::lvm_log_likelihood(x, theta, y) ==
        doctest::Approx(gp::lvm_log_likelihood(shifted, theta, y))
            .epsilon(1e-10));
}

TEST_CASE("likelihood is invariant under latent rotations") {
  Rng rng(239);
  const Matrix x = testutil::random_matrix(rng, 7, 2, -1, 1);
  Matrix y(7, 3);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 3; ++j) y(i, j) = rng.gauss();
  const LvmTheta theta{1.1, 0.9, 15.0};

  for (int trial = 0; trial < 5; ++trial) {
    const double angle = rng.uniform(0, 2 * M_PI);
    Matrix rot(2, 2);
    rot << std::cos(angle), -std::sin(angle), std::sin(angle),
        std::cos(angle);
    CHECK(std::abs(gp::lvm_log_likelihood(Matrix(x * rot), theta, y) -
                   gp::lvm_log_likelihood(x, theta, y)) < 1e-8);
  }
}

TEST_CASE("fit improves on the PCA initialization") {
  const Matrix y = two_curve_data();
  LvmConfig cfg;
  cfg.q = 1;
  cfg.max_iters = 200;
  const gp::LvmModel model = gp::fit_lvm(y, cfg);

  REQUIRE(model.history.size() >= 1);
  CHECK(model.history.back() >= model.history.front());
  for (std::size_t i = 1; i < model.history.size(); ++i)
    CHECK(model.history[i] >= model.history[i - 1]);
  CHECK(model.x_latent.rows() == 17);
  CHECK(model.x_latent.cols() == 1);
}

TEST_CASE("collinear data recovers the ordering along the line") {
  Matrix y(9, 2);
  for (int i = 0; i < 9; ++i) {
    const double t = -2.0 + 0.5 * i;
    y(i, 0) = 2.0 * t;
    y(i, 1) = -t;
  }
  LvmConfig cfg;
  cfg.q = 1;
  cfg.max_iters = 150;
  const gp::LvmModel model = gp::fit_lvm(y, cfg);

  // Latent coordinates must be monotone in the line parameter, up to a
  // global sign flip.
  const Vector z = model.x_latent.col(0);
  bool increasing = true, decreasing = true;
  for (int i = 1; i < 9; ++i) {
    increasing = increasing && z[i] > z[i - 1];
    decreasing = decreasing && z[i] < z[i - 1];
  }
  CHECK((increasing || decreasing));
}

TEST_CASE("stationary point has a small gradient") {
  const Matrix y = two_curve_data();
  LvmConfig cfg;
  cfg.q = 1;
  cfg.max_iters = 3000;
  cfg.grad_tol = 1e-4;
  const gp::LvmModel model = gp::fit_lvm(y, cfg);
  if (model.converged) CHECK(model.final_grad_norm <= cfg.grad_tol);
}

TEST_CASE("fit_lvm validation") {
  const Matrix y = two_curve_data();
  LvmConfig cfg;
  cfg.q = 2;
  CHECK_THROWS_AS(gp::fit_lvm(y, cfg), gp::InvalidInput);  // q == d
  cfg.q = 0;
  CHECK_THROWS_AS(gp::fit_lvm(y, cfg), gp::InvalidInput);
}
