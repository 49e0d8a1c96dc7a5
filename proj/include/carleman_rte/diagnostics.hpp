#pragma once

#include <carleman_rte/basis.hpp>
#include <carleman_rte/errors.hpp>
#include <carleman_rte/forward.hpp>
#include <carleman_rte/functional.hpp>
#include <carleman_rte/quadrature.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace crte {

/// Weights q(s, l) with sum_l q(s, l) f(alpha_l) = int f Psi_s d alpha, where f
/// is replaced by its piecewise Lagrange interpolant of `points` nodes and
/// each source cell is integrated by a `gauss`-point rule.
inline Eigen::MatrixXd product_projection_weights(const Basis& basis, const SourceGrid& sources, std::size_t points = 4,
                                                  std::size_t gauss = 8) {
  const std::size_t n = sources.size();
  if (points < 2 || points > n) throw ConfigError("interpolation stencil must have between 2 and n_alpha points");
  if (std::abs(sources.lo + basis.d) > 1e-12 || std::abs(sources.hi - basis.d) > 1e-12)
    throw ConfigError("source grid does not span the basis interval [-d, d]");
  const auto rule = gauss_legendre(gauss, 0.0, 1.0);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(basis.N, static_cast<Eigen::Index>(n));
  std::vector<double> v, dv;
  for (std::size_t cell = 0; cell + 1 < n; ++cell) {
    // stencil centred on the cell, shifted inwards at the ends
    const std::size_t half = points / 2 - 1;
    const std::size_t first = cell < half ? 0 : std::min(cell - half, n - points);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double al = sources[cell] + rule.nodes[k] * sources.step;
      const double wq = rule.weights[k] * sources.step;
      basis.eval_all(al, v, dv);
      for (std::size_t m = 0; m < points; ++m) {
        double L = 1;
        for (std::size_t r = 0; r < points; ++r)
          if (r != m) L *= (al - sources[first + r]) / (sources[first + m] - sources[first + r]);
        for (int s = 0; s < basis.N; ++s) q(s, static_cast<Eigen::Index>(first + m)) += wq * L * v[s];
      }
    }
  }
  return q;
}

struct FourierTable {
  std::vector<double> norms;  ///< ||w_s||_{L2(Omega)}, s = 0..N-1
  double tail_ratio = 0;      ///< sum_{s>=3} / sum_{s>=0}
};

/// L2(Omega) norms of the Fourier coefficients w_s(x) = int ln u(x, alpha) Psi_s d alpha
/// of a forward solution, with the trapezoid rule in x and y.
inline FourierTable fourier_table(const Radiance& u, const Basis& basis) {
  const auto q = product_projection_weights(basis, u.sources);
  const auto tx = trapezoid_weights(u.grid.nx(), u.grid.x.step);
  const auto ty = trapezoid_weights(u.grid.ny(), u.grid.y.step);
  FourierTable t;
  t.norms.assign(static_cast<std::size_t>(basis.N), 0.0);
  Eigen::VectorXd w(static_cast<Eigen::Index>(u.n_alpha()));
  for (std::size_t j = 0; j < u.grid.ny(); ++j)
    for (std::size_t i = 0; i < u.grid.nx(); ++i) {
      for (std::size_t l = 0; l < u.n_alpha(); ++l) {
        const double v = u(i, j, l);
        if (!(v > 0)) throw DataError("radiance is not positive; cannot take its logarithm");
        w(static_cast<Eigen::Index>(l)) = std::log(v);
      }
      const Eigen::VectorXd ws = q * w;
      for (int s = 0; s < basis.N; ++s) t.norms[s] += tx[i] * ty[j] * ws(s) * ws(s);
    }
  double total = 0, tail = 0;
  for (int s = 0; s < basis.N; ++s) {
    t.norms[s] = std::sqrt(t.norms[s]);
    total += t.norms[s];
    if (s >= 3) tail += t.norms[s];
  }
  t.tail_ratio = total > 0 ? tail / total : 0;
  return t;
}

struct ConvexityProbeReport {
  double lambda = 0;
  double radius = 0;
  int pairs = 0;
  int violations = 0;
  /// Largest J(midpoint) - (J1 + J2)/2 relative to max(J1, J2); negative
  /// when every pair satisfied midpoint convexity.
  double worst_relative_gap = -std::numeric_limits<double>::infinity();
};

/// Counts pairs W1, W2 in the discrete H^1 ball of `radius` around `center`
/// (boundary values fixed) with J((W1 + W2)/2) > (J(W1) + J(W2))/2 beyond
/// rounding.
inline ConvexityProbeReport convexity_probe(const Functional& f, const CoefficientField& center, double radius,
                                            int pairs, std::uint64_t seed) {
  if (!(radius > 0) || pairs < 1) throw ConfigError("convexity probe needs a positive radius and at least one pair");
  ConvexityProbeReport rep{f.lambda(), radius, pairs, 0, -std::numeric_limits<double>::infinity()};
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) / static_cast<double>(1ULL << 53); };
  auto gaussian = [&] {
    const double u1 = 1 - uniform(), u2 = uniform();
    return std::sqrt(-2 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
  };
  const Eigen::VectorXd c = f.pack(center);
  auto random_point = [&] {
    Eigen::VectorXd dir(c.size());
    for (Eigen::Index k = 0; k < dir.size(); ++k) dir(k) = gaussian();
    CoefficientField D(f.grid(), f.N());
    Eigen::Index k = 0;
    f.for_interior([&](std::size_t i, std::size_t j) {
      D.at(i, j) = dir.segment(k, f.N());
      k += f.N();
    });
    const double scale = radius * uniform() / f.h1_norm(D);
    return Eigen::VectorXd(c + scale * dir);
  };
  for (int p = 0; p < pairs; ++p) {
    const Eigen::VectorXd x1 = random_point(), x2 = random_point();
    const double J1 = f.eval_J(f.unpack(x1)), J2 = f.eval_J(f.unpack(x2));
    const double Jm = f.eval_J(f.unpack(0.5 * (x1 + x2)));
    const double scale = std::max(std::abs(J1), std::abs(J2));
    const double gap = (Jm - 0.5 * (J1 + J2)) / (scale > 0 ? scale : 1.0);
    rep.worst_relative_gap = std::max(rep.worst_relative_gap, gap);
    if (gap > 1e-12) ++rep.violations;
  }
  return rep;
}

} // namespace crte
