#include "gp/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// NaN-guarded objective: any non-finite value is treated as -infinity so
// the simplex simply walks away from invalid regions.
double guarded(const Objective& f, const Vector& x) {
  const double v = f(x);
  return std::isnan(v) ? kNegInf : v;
}

}  // namespace

NmResult nelder_mead(const Objective& f, const Vector& x0,
                     const OptOptions& opts) {
  const Eigen::Index n = x0.size();
  if (n < 1) throw InvalidInput("nelder_mead: empty start point");

  int evals = 0;
  auto eval = [&](const Vector& x) {
    ++evals;
    return guarded(f, x);
  };

  const double f0 = eval(x0);
  if (!std::isfinite(f0))
    throw NonFiniteStart("nelder_mead: objective not finite at x0");

  // Simplex: x0 plus one vertex per coordinate.
  std::vector<Vector> verts;
  std::vector<double> vals;
  verts.reserve(n + 1);
  verts.push_back(x0);
  vals.push_back(f0);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector v = x0;
    v[i] += 0.1 * std::max(1.0, std::abs(x0[i]));
    verts.push_back(v);
    vals.push_back(eval(v));
  }

  std::vector<std::size_t> order(verts.size());
  const auto& c = opts.nm_coeffs;
  while (true) {
    // Descending by objective (we maximize); stable for determinism.
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                     std::size_t b) {
      return vals[a] > vals[b];
    });
    const std::size_t best = order.front(), worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];

    const double spread = vals[best] - vals[worst];
    double xspread = 0.0;
    for (std::size_t i = 0; i < verts.size(); ++i)
      xspread = std::max(
          xspread, (verts[i] - verts[best]).cwiseAbs().maxCoeff());
    if ((std::isfinite(spread) && spread < opts.tol_f) ||
        xspread < opts.tol_x || evals >= opts.max_evals)
      return {verts[best], vals[best], evals};

    Vector centroid = Vector::Zero(n);
    for (std::size_t i : order)
      if (i != worst) centroid += verts[i];
    centroid /= static_cast<double>(n);

    const Vector reflected = centroid + c.reflect * (centroid - verts[worst]);
    const double f_r = eval(reflected);

    if (f_r > vals[best]) {
      const Vector expanded = centroid + c.expand * (centroid - verts[worst]);
      const double f_e = eval(expanded);
      if (f_e > f_r) {
        verts[worst] = expanded;
        vals[worst] = f_e;
      } else {
        verts[worst] = reflected;
        vals[worst] = f_r;
      }
      continue;
    }
    if (f_r > vals[second_worst]) {
      verts[worst] = reflected;
      vals[worst] = f_r;
      continue;
    }

    // Contraction: outside when the reflection improved on the worst
    // vertex, inside otherwise.
    Vector contracted;
    if (f_r > vals[worst])
      contracted = centroid + c.contract * (reflected - centroid);
    else
      contracted = centroid + c.contract * (verts[worst] - centroid);
    const double f_c = eval(contracted);
    if (f_c > std::max(f_r, vals[worst])) {
      verts[worst] = contracted;
      vals[worst] = f_c;
      continue;
    }

    // Shrink toward the best vertex.
    for (std::size_t i = 0; i < verts.size(); ++i) {
      if (i == best) continue;
      verts[i] = verts[best] + c.shrink * (verts[i] - verts[best]);
      vals[i] = eval(verts[i]);
    }
  }
}

// ---------------------------------------------------------------------------
// Scaled conjugate gradients, following Moller (1993). The maximize
// convention is handled by negating: E(w) = -f(w), r = -E'(w) = f'(w).
//
// Per iteration k with search direction p and residual r:
//   1. curvature probe      sigma_k = sigma0 / |p|
//                           s = (E'(w + sigma_k p) - E'(w)) / sigma_k
//                           delta = p' s
//   2. scaling              delta += (lambda - lambda_bar) |p|^2
//   3. if delta <= 0        lambda_bar = 2 (lambda - delta / |p|^2)
//                           delta = -delta + lambda |p|^2; lambda = lambda_bar
//   4. step size            mu = p' r;  alpha = mu / delta
//   5. comparison           Delta = 2 delta (E(w) - E(w + alpha p)) / mu^2
//   6. if Delta >= 0        accept w += alpha p, recompute r,
//                           beta = (|r_new|^2 - r_new' r) / mu,
//                           p = r_new + beta p (restart p = r_new every
//                           dim(x) iterations); lambda /= 4 if Delta >= 0.75
//      else                 reject, lambda_bar = lambda
//   7. if Delta < 0.25      lambda += delta (1 - Delta) / |p|^2

ScgResult scg(const ObjectiveGrad& fg, const Vector& x0,
              const OptOptions& opts) {
  const Eigen::Index n = x0.size();
  if (n < 1) throw InvalidInput("scg: empty start point");

  auto eval = [&](const Vector& x) -> std::pair<double, Vector> {
    auto [v, g] = fg(x);
    if (!std::isfinite(v) || !g.allFinite()) {
      v = kNegInf;
      g = Vector::Zero(n);
    }
    return {v, std::move(g)};
  };

  auto [f_cur, g_cur] = fg(x0);
  if (!std::isfinite(f_cur) || !g_cur.allFinite())
    throw NonFiniteStart("scg: objective or gradient not finite at x0");

  if (opts.scg_check_gradient) {
    const Vector g_fd = fd_gradient(
        [&](const Vector& x) { return fg(x).first; }, x0);
    const double tol = 1e-4 * std::max(1.0, g_fd.cwiseAbs().maxCoeff());
    if ((g_cur - g_fd).cwiseAbs().maxCoeff() > tol)
      throw GradientMismatch(
          "scg: analytic gradient disagrees with finite differences at x0");
  }

  ScgResult res;
  res.trace.push_back(f_cur);

  Vector w = x0;
  Vector r = g_cur;  // residual = gradient of f (= -E')
  Vector p = r;
  double lambda = 1e-6, lambda_bar = 0.0;
  bool success = true;
  double delta = 0.0;
  Vector r_probe(n);

  int k = 0;
  while (k < opts.max_evals) {
    ++k;
    if (r.cwiseAbs().maxCoeff() <= opts.scg_grad_tol) {
      res.converged = true;
      break;
    }
    const double p_norm2 = p.squaredNorm();
    if (p_norm2 == 0.0) {
      res.converged = true;
      break;
    }

    if (success) {
      const double sigma_k = opts.scg_sigma0 / std::sqrt(p_norm2);
      auto [f_probe, g_probe] = eval(w + sigma_k * p);
      if (std::isfinite(f_probe)) {
        // s = (E'(w + sigma p) - E'(w)) / sigma = (r - g_probe) / sigma
        delta = p.dot(r - g_probe) / sigma_k;
      } else {
        delta = p_norm2;  // fall back to unit curvature; the acceptance
                          // test below still rejects bad steps
      }
    }

    delta += (lambda - lambda_bar) * p_norm2;
    if (delta <= 0.0) {
      lambda_bar = 2.0 * (lambda - delta / p_norm2);
      delta = -delta + lambda * p_norm2;
      lambda = lambda_bar;
    }

    double mu = p.dot(r);
    if (mu <= 0.0) {
      // Conjugacy lost; restart with steepest ascent.
      p = r;
      success = true;
      continue;
    }
    const double alpha = mu / delta;

    auto [f_new, g_new] = eval(w + alpha * p);
    const double comparison =
        std::isfinite(f_new)
            ? 2.0 * delta * (f_new - f_cur) / (mu * mu)
            : -1.0;

    if (comparison >= 0.0) {
      w += alpha * p;
      f_cur = f_new;
      const Vector r_new = g_new;
      lambda_bar = 0.0;
      success = true;
      if (k % static_cast<int>(n) == 0) {
        p = r_new;
      } else {
        const double beta = (r_new.squaredNorm() - r_new.dot(r)) / mu;
        p = r_new + beta * p;
      }
      r = r_new;
      if (comparison >= 0.75) lambda *= 0.25;
      res.trace.push_back(f_cur);
    } else {
      lambda_bar = lambda;
      success = false;
    }

    if (comparison < 0.25) lambda += delta * (1.0 - comparison) / p_norm2;
    if (!std::isfinite(lambda) || lambda > 1e150) break;  // step size pinned
  }

  res.x_best = w;
  res.f_best = f_cur;
  res.iterations = k;
  return res;
}

}  // namespace gp
