#ifndef GP_GPLVM_HPP
#define GP_GPLVM_HPP

#include <utility>
#include <vector>

#include "gp/numerics.hpp"
#include "gp/optimize.hpp"

namespace gp {

/// Kernel parameters of the latent-space GP: amplitude sigma, length
/// scale, and noise precision beta = 1 / sigma_n^2.
struct LvmTheta {
  double sigma = 1.0;
  double length = 1.0;
  double beta = 100.0;
};

struct LvmConfig {
  int q = 1;  // latent dimension, must satisfy q < d
  int max_iters = 500;
  double grad_tol = 1e-5;
  unsigned seed = 0;  // interface stability; the fit is deterministic
};

/// Per-column affine transform bringing data to zero mean, unit variance.
struct Standardizer {
  Vector mean;
  Vector scale;
  Matrix apply(const Matrix& y) const;
  Matrix invert(const Matrix& y_std) const;
};

/// Standardizes each column to mean 0, variance 1. Columns with zero
/// variance are rejected.
std::pair<Matrix, Standardizer> preprocess(const Matrix& y_raw);

/// sigma^2 exp(-|x_i - x_j|^2 / (2 l^2)) + delta_ij / beta.
Matrix lvm_gram(const Matrix& x, const LvmTheta& theta);

/// Joint likelihood of d independent GP draws sharing one Gram matrix:
/// sum_i -1/2 y_:i' K^-1 y_:i - (d/2) log|K| - (nd/2) log 2pi.
/// One factorization is shared across all d columns.
double lvm_log_likelihood(const Matrix& x, const LvmTheta& theta,
                          const Matrix& y_std);

struct LvmGradients {
  Matrix dx;                    // n x q
  Eigen::Vector3d dlog_theta;   // d/d(log sigma, log length, log beta)
};

/// Analytic gradients of lvm_log_likelihood via
/// dL/dK = 1/2 (K^-1 Y Y' K^-1 - d K^-1), chained through the kernel.
/// The latent-coordinate rows are computed in parallel; gp::reference
/// holds the serial twin.
LvmGradients lvm_gradients(const Matrix& x, const LvmTheta& theta,
                           const Matrix& y_std);

namespace reference {
LvmGradients lvm_gradients(const Matrix& x, const LvmTheta& theta,
                           const Matrix& y_std);
}  // namespace reference

struct LvmModel {
  Matrix x_latent;  // n x q
  LvmTheta theta;
  Matrix y_std;
  Standardizer standardizer;
  std::vector<double> history;  // accepted log-likelihood trace
  bool converged = false;       // gradient tolerance reached
  double final_grad_norm = 0.0;
};

/// Fits the latent variable model: latent coordinates start at the
/// projection of y_std onto its top-q principal components, theta at
/// {1, 1, 100}, then scaled conjugate gradients maximizes the joint
/// likelihood over all n*q + 3 variables (theta in log-space).
LvmModel fit_lvm(const Matrix& y_raw, const LvmConfig& config);

}  // namespace gp

#endif  // GP_GPLVM_HPP
