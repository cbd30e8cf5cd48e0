#ifndef GP_GPC_HPP
#define GP_GPC_HPP

#include <utility>
#include <vector>

#include "gp/kernels.hpp"
#include "gp/numerics.hpp"
#include "gp/optimize.hpp"

namespace gp {

/// Standard normal CDF, computed as erfc(-f / sqrt(2)) / 2 via the C
/// library's complementary error function.
double probit(double f);

/// log Phi(f), switching to the asymptotic tail expansion for f < -30
/// where erfc underflows.
double log_probit(double f);

/// Standard normal density.
double normal_pdf(double f);

/// phi(z) / Phi(z), the inverse Mills ratio; tail-stable.
double mills_ratio(double z);

/// exp(f_c) / sum_c' exp(f_c') with max-subtraction.
Vector softmax(const Vector& f);

struct BinaryModeResult {
  Vector f_hat;
  Vector w_diag;
  int iterations = 0;
};

/// Newton mode finding for the binary probit latent posterior: solves the
/// fixed point f = K grad log p(y|f) with step halving so the log
/// posterior never decreases. Labels must be -1 or +1.
BinaryModeResult find_mode(const Matrix& k, const std::vector<int>& y);

/// Laplace log marginal likelihood at a binary mode:
/// -1/2 f'K^-1 f + sum log Phi(y f) - 1/2 log|I + K W|.
double log_marginal_binary(const Matrix& k, const std::vector<int>& y,
                           const BinaryModeResult& mode);

/// Binary probit classifier with the Laplace approximation. The kernel
/// must not contain a noise term.
class BinaryGpcModel {
 public:
  static BinaryGpcModel fit(Matrix xs, std::vector<int> labels,
                            KernelExpr kernel, bool optimize = false,
                            const OptOptions& opts = {});

  /// Latent predictive mean and variance at one test point.
  std::pair<double, double> predict_latent(const Vector& x_star) const;

  /// Squashed class-1 probability Phi(mean / sqrt(1 + var)).
  double predict_prob(const Vector& x_star) const;
  Vector predict_prob(const Matrix& xs_test) const;

  double log_marginal() const noexcept { return log_ml_; }

  const Matrix& xs() const noexcept { return xs_; }
  const std::vector<int>& labels() const noexcept { return y_; }
  const KernelExpr& kernel() const noexcept { return kernel_; }
  const Matrix& gram_matrix() const noexcept { return k_; }
  const Vector& f_hat() const noexcept { return f_hat_; }
  const Vector& w_diag() const noexcept { return w_diag_; }
  const CholFactor& chol_b() const noexcept { return chol_b_; }
  int iterations() const noexcept { return iterations_; }

 private:
  BinaryGpcModel(Matrix xs, std::vector<int> y, KernelExpr kernel);

  Matrix xs_;
  std::vector<int> y_;
  KernelExpr kernel_;
  Matrix k_;
  Vector f_hat_, w_diag_, sqrt_w_, alpha_;
  CholFactor chol_b_;  // factor of B = I + W^1/2 K W^1/2
  double log_ml_ = 0.0;
  int iterations_ = 0;
};

struct MultiModeResult {
  Vector f_hat;   // stacked class-major: (f^1_1..f^1_n, ..., f^C_1..f^C_n)
  Vector pi_hat;  // softmax probabilities, same stacking
  int iterations = 0;
};

/// Damped fixed-point iteration f <- K (y - pi) for the softmax latent
/// posterior over C stacked GPs. `ks` holds the per-class Gram matrices
/// (the blocks of the block-diagonal K); `y_onehot` is the stacked one-hot
/// label vector.
MultiModeResult find_mode_multi(const std::vector<Matrix>& ks,
                                const Vector& y_onehot);

/// Laplace log marginal likelihood at a multi-class mode:
/// -1/2 f'K^-1 f + y'f - sum_i log sum_c exp f_i^c - 1/2 log|I + K W|,
/// with K block diagonal and W = diag(pi) - Pi Pi'.
double log_marginal_multi(const std::vector<Matrix>& ks,
                          const Vector& y_onehot,
                          const MultiModeResult& mode);

/// Softmax multi-class classifier with the Laplace approximation.
class MultiGpcModel {
 public:
  /// Labels are class indices 0..C-1; every class must appear. One kernel
  /// template is shared by all classes.
  static MultiGpcModel fit(Matrix xs, std::vector<int> labels,
                           KernelExpr kernel, bool optimize = false,
                           const OptOptions& opts = {});

  /// Per-class latent means and variances at one test point.
  std::pair<Vector, Vector> predict_latent(const Vector& x_star) const;

  /// Class probabilities: softmax over the per-class latent means.
  Vector predict_prob(const Vector& x_star) const;
  Matrix predict_prob(const Matrix& xs_test) const;  // one row per point

  double log_marginal() const noexcept { return log_ml_; }

  int num_classes() const noexcept { return static_cast<int>(kernels_.size()); }
  Eigen::Index num_points() const noexcept { return xs_.rows(); }
  const Matrix& xs() const noexcept { return xs_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<KernelExpr>& kernels() const noexcept { return kernels_; }
  const Vector& f_hat() const noexcept { return f_hat_; }
  const Vector& pi_hat() const noexcept { return pi_hat_; }
  const Vector& y_onehot() const noexcept { return y_; }

  /// Pi: the Cn x n stack of diag(pi^c).
  Matrix pi_stack() const;
  /// W = diag(pi) - Pi Pi', the full Cn x Cn likelihood Hessian.
  Matrix w_full() const;

 private:
  MultiGpcModel(Matrix xs, std::vector<int> labels);

  Matrix xs_;
  std::vector<int> labels_;
  std::vector<KernelExpr> kernels_;
  std::vector<Matrix> ks_;
  Vector y_, f_hat_, pi_hat_;
  std::vector<Vector> alpha_;   // per class: y^c - pi^c = (K^c)^-1 f^c
  std::vector<Vector> sqrt_w_;  // per class: sqrt(pi^c (1 - pi^c))
  std::vector<CholFactor> chol_b_;
  double log_ml_ = 0.0;
  int iterations_ = 0;
};

}  // namespace gp

#endif  // GP_GPC_HPP
