#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace crte {

/// Composite trapezoid weights for n equally spaced nodes of spacing h.
inline std::vector<double> trapezoid_weights(std::size_t n, double h) {
  std::vector<double> w(n, h);
  if (n == 0) return w;
  if (n == 1) {
    w[0] = 0;
    return w;
  }
  w.front() = w.back() = 0.5 * h;
  return w;
}

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [lo, hi] (Newton iteration on P_n).
inline GaussRule gauss_legendre(std::size_t n, double lo = -1.0, double hi = 1.0) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (hi + lo);
  const double half = 0.5 * (hi - lo);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = t;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1) * t * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(n) * (t * p1 - p0) / (t * t - 1);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1, p1 = t;
    for (std::size_t k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1) * t * p1 - (k - 1.0) * p0) / static_cast<double>(k);
      p0 = p1;
      p1 = pk;
    }
    dp = static_cast<double>(n) * (t * p1 - p0) / (t * t - 1);
    const double w = 2.0 / ((1 - t * t) * dp * dp);
    rule.nodes[i] = mid - half * t;
    rule.nodes[n - 1 - i] = mid + half * t;
    rule.weights[i] = rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

} // namespace crte
