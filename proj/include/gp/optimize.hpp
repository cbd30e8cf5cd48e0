#ifndef GP_OPTIMIZE_HPP
#define GP_OPTIMIZE_HPP

#include <functional>
#include <utility>
#include <vector>

#include "gp/numerics.hpp"

namespace gp {

/// Both optimizers MAXIMIZE their objective; negation is internal.
struct OptOptions {
  int max_evals = 2000;
  double tol_f = 1e-10;  // simplex objective spread
  double tol_x = 1e-10;  // simplex vertex spread
  struct {
    double reflect = 1.0;
    double expand = 2.0;
    double contract = 0.5;
    double shrink = 0.5;
  } nm_coeffs;
  double scg_sigma0 = 1e-4;    // step used for the curvature probe
  double scg_grad_tol = 1e-6;  // gradient infinity-norm stop
  bool scg_check_gradient = false;  // compare against finite differences at x0
  unsigned seed = 0;  // kept for interface stability; both methods are
                      // deterministic and never draw random numbers
};

struct NmResult {
  Vector x_best;
  double f_best = 0.0;
  int evals = 0;
};

struct ScgResult {
  Vector x_best;
  double f_best = 0.0;
  std::vector<double> trace;  // accepted objective values, non-decreasing
  int iterations = 0;
  bool converged = false;  // gradient tolerance reached
};

using Objective = std::function<double(const Vector&)>;
using ObjectiveGrad = std::function<std::pair<double, Vector>(const Vector&)>;

/// Nelder-Mead simplex. Initial simplex is built from x0 with a
/// per-coordinate step of 0.1 * max(1, |x0_i|). Objective values that are
/// NaN are treated as -infinity.
NmResult nelder_mead(const Objective& f, const Vector& x0,
                     const OptOptions& opts = {});

/// Scaled conjugate gradients (Moller 1993). The callback returns the
/// objective value and its gradient. Restarts to steepest ascent every
/// dim(x) iterations.
ScgResult scg(const ObjectiveGrad& fg, const Vector& x0,
              const OptOptions& opts = {});

}  // namespace gp

#endif  // GP_OPTIMIZE_HPP
