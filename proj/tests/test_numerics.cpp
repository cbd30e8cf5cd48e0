#include <doctest.h>

#include "gp/numerics.hpp"
#include "test_util.hpp"

using gp::Matrix;
using gp::Vector;
using testutil::Rng;

TEST_CASE("cholesky of the identity") {
  const Matrix eye = Matrix::Identity(3, 3);
  const gp::CholFactor f = gp::cholesky(eye);
  CHECK(f.jitter_applied() == 0.0);
  CHECK((f.lower() - eye).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cholesky 2x2 known factor") {
  Matrix a(2, 2);
  a << 4, 2, 2, 3;
  const gp::CholFactor f = gp::cholesky(a);
  CHECK(f.lower()(0, 0) == doctest::Approx(2.0));
  CHECK(f.lower()(1, 0) == doctest::Approx(1.0));
  CHECK(f.lower()(0, 1) == 0.0);
  CHECK(f.lower()(1, 1) == doctest::Approx(std::sqrt(2.0)));
  const Matrix rec = f.lower() * f.lower().transpose();
  CHECK((rec - a).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("cholesky of a singular matrix applies jitter") {
  Matrix a(2, 2);
  a << 1, 1, 1, 1;
  const gp::CholFactor f = gp::cholesky(a);
  CHECK(f.jitter_applied() > 0.0);
  const Matrix rec = f.lower() * f.lower().transpose();
  CHECK((rec - a).cwiseAbs().maxCoeff() <= f.jitter_applied() * (1 + 1e-9));
}

TEST_CASE("cholesky error paths") {
  Matrix asym(2, 2);
  asym << 1, 0.5, 0.2, 1;
  CHECK_THROWS_AS(gp::cholesky(asym), gp::NotSymmetric);

  Matrix indef(2, 2);
  indef << 1, 0, 0, -1;
  CHECK_THROWS_AS(gp::cholesky(indef), gp::NotPositiveDefinite);

  Matrix nonfinite(2, 2);
  nonfinite << 1, 0, 0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(gp::cholesky(nonfinite), gp::NonFinite);

  Matrix rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(gp::cholesky(rect), gp::DimensionMismatch);
}

TEST_CASE("chol_solve identity and residual oracle") {
  const gp::CholFactor eye = gp::cholesky(Matrix::Identity(4, 4));
  Rng rng(7);
  const Vector b = testutil::random_vector(rng, 4);
  CHECK((gp::chol_solve(eye, b) - b).cwiseAbs().maxCoeff() == 0.0);

  const Matrix a = testutil::random_spd(rng, 4);
  const gp::CholFactor f = gp::cholesky(a);
  const Vector x = gp::chol_solve(f, b);
  CHECK((a * x - b).cwiseAbs().maxCoeff() < 1e-10);

  // Solving against a column of A recovers a unit basis vector.
  const Vector e2 = gp::chol_solve(f, Vector(a.col(2)));
  Vector expect = Vector::Zero(4);
  expect[2] = 1.0;
  CHECK((e2 - expect).cwiseAbs().maxCoeff() < 1e-9);

  CHECK_THROWS_AS(gp::chol_solve(f, Vector(Vector::Zero(5))),
                  gp::DimensionMismatch);
}

TEST_CASE("chol_solve handles moderately ill-conditioned systems") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 5;
    Matrix q = testutil::random_spd(rng, n);
    // Scale rows/cols to push the condition number toward 1e8.
    Vector scale(n);
    for (Eigen::Index i = 0; i < n; ++i)
      scale[i] = std::pow(10.0, 4.0 * i / double(n - 1));
    const Matrix a = scale.asDiagonal() * q * scale.asDiagonal();
    const Vector b = testutil::random_vector(rng, n);
    const Vector x = gp::chol_solve(gp::cholesky(a), b);
    CHECK((a * x - b).cwiseAbs().maxCoeff() <
          1e-8 * std::max(1.0, b.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("log_det") {
  CHECK(gp::log_det(gp::cholesky(Matrix::Identity(3, 3))) == 0.0);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 3.0;
  CHECK(gp::log_det(gp::cholesky(d)) == doctest::Approx(std::log(6.0)));

  Rng rng(13);
  for (Eigen::Index n = 2; n <= 6; ++n) {
    const Matrix a = testutil::random_spd(rng, n);
    const double expect = std::log(testutil::det_dense(a));
    const double got = gp::log_det(gp::cholesky(a));
    CHECK(got == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("SPD matrices factorize without jitter") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 1 + trial % 8;
    const Matrix a = testutil::random_spd(rng, n);
    const gp::CholFactor f = gp::cholesky(a);
    CHECK(f.jitter_applied() == 0.0);
    CHECK((f.lower() * f.lower().transpose() - a).cwiseAbs().maxCoeff() <
          1e-10);
  }
}

TEST_CASE("fd_gradient") {
  const auto quad = [](const Vector& x) { return x.squaredNorm(); };
  Vector x(2);
  x << 1, 2;
  const Vector g = gp::fd_gradient(quad, x);
  CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(g[1] == doctest::Approx(4.0).epsilon(1e-8));

  const auto constant = [](const Vector&) { return 3.5; };
  CHECK(gp::fd_gradient(constant, x).cwiseAbs().maxCoeff() == 0.0);

  const auto sine = [](const Vector& v) { return std::sin(v[0]); };
  Vector zero(1);
  zero << 0.0;
  CHECK(gp::fd_gradient(sine, zero)[0] == doctest::Approx(1.0).epsilon(1e-8));

  const auto bad = [](const Vector& v) {
    return v[0] > 0 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  };
  CHECK_THROWS_AS(gp::fd_gradient(bad, zero), gp::NonFinite);
}
