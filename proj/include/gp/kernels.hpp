#ifndef GP_KERNELS_HPP
#define GP_KERNELS_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gp/numerics.hpp"

namespace gp {

// Kernel parameters are stored as logarithms so that packing them into an
// optimizer vector and unpacking back is exact. Accessors expose the
// natural scale.

/// sigma_f^2 * exp(-|x - x'|^2 / (2 l^2))
struct SeTerm {
  double log_sigma_f = 0.0;
  double log_length = 0.0;
  bool fix_sigma_f = false;
  bool fix_length = false;

  static SeTerm make(double sigma_f, double length, bool fix_sf = false,
                     bool fix_l = false);
  double sigma_f() const { return std::exp(log_sigma_f); }
  double length() const { return std::exp(log_length); }
};

/// exp(-2 sin^2(nu pi (x - x'))), 1-D inputs only, unit amplitude.
struct PeriodicTerm {
  double log_nu = 0.0;
  bool fix_nu = false;

  static PeriodicTerm make(double nu, bool fix = false);
  double nu() const { return std::exp(log_nu); }
};

/// sigma_n^2 on identical indices (the folded-in noise variance).
struct NoiseTerm {
  double log_sigma_n = 0.0;
  bool fix_sigma_n = false;

  static NoiseTerm make(double sigma_n, bool fix = false);
  double sigma_n() const { return std::exp(log_sigma_n); }
};

using KernelTerm = std::variant<SeTerm, PeriodicTerm, NoiseTerm>;

/// Free kernel parameters in log-space plus the fixed-parameter mask over
/// all parameters in structural order.
struct HyperVector {
  Vector values;
  std::vector<std::uint8_t> fixed_mask;
};

/// A sum of kernel terms. Immutable after construction; at most one noise
/// term is allowed.
class KernelExpr {
 public:
  explicit KernelExpr(std::vector<KernelTerm> terms);

  /// Parses the textual kernel grammar:
  ///   expr := term ("+" term)*
  ///   term := "se(sf=R,l=R)" | "periodic(nu=R)" | "noise(sn=R)"
  /// where R is a decimal literal, whitespace is ignored, and a trailing
  /// "!" marks a parameter as fixed (excluded from optimization).
  static KernelExpr parse(std::string_view text);

  static KernelExpr se(double sigma_f, double length);
  static KernelExpr se_noise(double sigma_f, double length, double sigma_n);

  const std::vector<KernelTerm>& terms() const noexcept { return terms_; }
  bool has_noise() const noexcept;
  double noise_variance() const noexcept;  // 0 when no noise term
  int free_param_count() const noexcept;

  /// Covariance between two input vectors. `same_point` is the Kronecker
  /// delta: it marks identity of index, not numeric equality, and is the
  /// only way the noise term contributes.
  double eval(const Vector& x, const Vector& x_prime, bool same_point) const;

  /// Serializes back to the grammar above (round-trippable).
  std::string to_spec() const;

 private:
  std::vector<KernelTerm> terms_;
};

HyperVector pack(const KernelExpr& k);
KernelExpr unpack(const HyperVector& h, const KernelExpr& templ);

// Gram/cross builders. Rows of `xs` are input points. These run the inner
// loops in parallel with OpenMP; gp::reference holds the serial twins and
// both produce bitwise-identical matrices.

/// n x n matrix with entry (i,j) = eval(x_i, x_j, i == j).
Matrix gram(const KernelExpr& k, const Matrix& xs);

/// m x n matrix with entry (i,j) = eval(test_i, train_j, false); the noise
/// term never contributes across sets.
Matrix cross(const KernelExpr& k, const Matrix& xs_train,
             const Matrix& xs_test);

/// Entry i = eval(test_i, test_i, true); includes the noise variance.
Vector self_variance(const KernelExpr& k, const Matrix& xs_test);

namespace reference {
Matrix gram(const KernelExpr& k, const Matrix& xs);
Matrix cross(const KernelExpr& k, const Matrix& xs_train,
             const Matrix& xs_test);
Vector self_variance(const KernelExpr& k, const Matrix& xs_test);
}  // namespace reference

}  // namespace gp

#endif  // GP_KERNELS_HPP
