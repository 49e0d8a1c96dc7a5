#pragma once

#include <carleman_rte/assembly.hpp>
#include <carleman_rte/errors.hpp>
#include <carleman_rte/grid.hpp>

#include <Eigen/Dense>

#include <cstddef>

namespace crte {

namespace detail {

/// d/dx of W along one axis: centred inside, one-sided second order at
/// the two ends.
inline Eigen::VectorXd axis_derivative(const CoefficientField& W, std::size_t i, std::size_t j, bool along_x) {
  const std::size_t n = along_x ? W.grid.nx() : W.grid.ny();
  const std::size_t k = along_x ? i : j;
  const double h = W.grid.step();
  auto at = [&](std::size_t m) { return along_x ? W.at(m, j) : W.at(i, m); };
  if (k == 0) return (-3 * at(0) + 4 * at(1) - at(2)) / (2 * h);
  if (k + 1 == n) return (3 * at(n - 1) - 4 * at(n - 2) + at(n - 3)) / (2 * h);
  return (at(k + 1) - at(k - 1)) / (2 * h);
}

} // namespace detail

/// a(x) = -(1/2d) int nu . grad w d alpha + (1/2d) int e^{-w} mu_s int K e^{w} d beta d alpha
/// with w(x, alpha) = sum_s w_s(x) Psi_s(alpha), evaluated on every node.
inline ScalarField2D recover_a(const CoefficientField& W, const AlphaTables& t, const ScalarField2D& mu_s) {
  const auto& g = W.grid;
  if (!(mu_s.grid() == g)) throw ConfigError("scattering field is not on the coefficient grid");
  if (W.N != t.psi.cols()) throw ConfigError("coefficient field and alpha tables disagree on N");
  if (g.nx() < 3 || g.ny() < 3) throw ConfigError("recovery needs at least 3 nodes per axis");
  const double two_d = t.sources.hi - t.sources.lo;
  ScalarField2D a(g, 0.0);
  for (std::size_t j = 0; j < g.ny(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const Eigen::VectorXd w = t.psi * W.at(i, j);
      detail::check_exponent(w);
      const Eigen::VectorXd wx = t.psi * detail::axis_derivative(W, i, j, true);
      const Eigen::VectorXd wy = t.psi * detail::axis_derivative(W, i, j, false);
      const Eigen::ArrayXd e = w.array().exp();
      const Eigen::ArrayXd S = (t.kw * e.matrix()).array();
      double acc = 0;
      for (Eigen::Index l = 0; l < w.size(); ++l) {
        const auto nu = direction_nu(g.x[i], g.y[j], t.sources[static_cast<std::size_t>(l)]);
        const double integrand = -(nu[0] * wx(l) + nu[1] * wy(l)) + mu_s(i, j) * S(l) / e(l);
        acc += t.tw[static_cast<std::size_t>(l)] * integrand;
      }
      a(i, j) = acc / two_d;
    }
  return a;
}

} // namespace crte
