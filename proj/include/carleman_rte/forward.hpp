#pragma once

#include <carleman_rte/config.hpp>
#include <carleman_rte/errors.hpp>
#include <carleman_rte/grid.hpp>
#include <carleman_rte/quadrature.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace crte {

/// Smooth compactly supported source profile standing in for a point source:
/// f(x) = C_eps exp(|x|^2 / (|x|^2 - eps^2)) for |x| < eps, 0 otherwise,
/// normalized to unit mass in the plane.
class SourceModel {
public:
  explicit SourceModel(double eps) : eps_(eps) {
    if (!(eps > 0)) throw ConfigError("source radius eps must be positive");
    // 2 pi int_0^eps r phi(r) dr; the integrand is C-infinity and flat at eps
    const auto rule = gauss_legendre(200, 0.0, eps);
    double mass = 0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q)
      mass += rule.weights[q] * rule.nodes[q] * profile(rule.nodes[q]);
    c_eps_ = 1.0 / (2 * std::numbers::pi * mass);
    double radial = 0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) radial += rule.weights[q] * profile(rule.nodes[q]);
    radial_integral_ = radial;
  }

  double eps() const noexcept { return eps_; }
  double c_eps() const noexcept { return c_eps_; }

  /// Unnormalized radial profile phi(r), phi(0) = 1.
  double profile(double r) const {
    const double r2 = r * r, e2 = eps_ * eps_;
    return r2 < e2 ? std::exp(r2 / (r2 - e2)) : 0.0;
  }

  double operator()(double x1, double x2) const { return c_eps_ * profile(std::hypot(x1, x2)); }

  /// Integral of f along the segment of length `len` starting at the source
  /// centre; f is radial, so only the length matters.
  double ray_integral(double len) const {
    if (len >= eps_) return c_eps_ * radial_integral_;
    const auto rule = gauss_legendre(64, 0.0, len);
    double s = 0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) s += rule.weights[q] * profile(rule.nodes[q]);
    return c_eps_ * s;
  }

private:
  double eps_;
  double c_eps_ = 0;
  double radial_integral_ = 0;
};

/// x-independent 2-D Henyey-Greenstein phase function on [-d, d]^2.
struct PhaseKernel {
  double g_aniso = 0.5;
  double d = 0.5;

  double operator()(double alpha, double beta) const {
    const double g = g_aniso;
    return (1 - g * g) / (1 + g * g - 2 * g * std::cos(alpha - beta)) / (2 * d);
  }

  /// d/d alpha of the kernel.
  double d_alpha(double alpha, double beta) const {
    const double g = g_aniso;
    const double den = 1 + g * g - 2 * g * std::cos(alpha - beta);
    return -(1 - g * g) * 2 * g * std::sin(alpha - beta) / (den * den) / (2 * d);
  }
};

/// Unscattered source contribution integrated along L(x, x_alpha), i.e.
/// the radiance entering the domain on the bottom side.
inline double u0_baseline(const SourceModel& model, double x, double y, double alpha) {
  return model.ray_integral(std::hypot(x - alpha, y));
}

namespace detail {

/// Parameter interval [t0, t1] in [0, 1] on which alpha + t (x - alpha),
/// t y lies in the closed rectangle of `grid`. Empty when t0 > t1.
inline std::pair<double, double> clip_ray(const Grid2D& grid, double x, double y, double alpha) {
  double t0 = 0, t1 = 1;
  auto clip = [&](double origin, double slope, double lo, double hi) {
    if (slope == 0) {
      if (origin < lo || origin > hi) t0 = 1, t1 = 0;
      return;
    }
    double ta = (lo - origin) / slope, tb = (hi - origin) / slope;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  };
  clip(alpha, x - alpha, grid.x.lo, grid.x.hi);
  clip(0.0, y, grid.y.lo, grid.y.hi);
  return {t0, t1};
}

} // namespace detail

/// p(x, alpha) = |x - x_alpha| int_0^1 field(alpha + t (x - alpha), t y) dt
/// with the field extended by zero outside its grid. Composite trapezoid in
/// the height z = t y with step at most `max_step`; for grid nodes the
/// samples land on grid rows.
inline double line_integral_to_source(const ScalarField2D& field, double x, double y, double alpha, double max_step) {
  if (!(y > 0)) throw ConfigError("line integral needs a point above the source line");
  const auto [t0, t1] = detail::clip_ray(field.grid(), x, y, alpha);
  if (!(t1 > t0)) return 0.0;
  const double z0 = t0 * y, z1 = t1 * y;
  const auto n = std::max<long>(1, static_cast<long>(std::ceil((z1 - z0) / max_step - 1e-9)));
  const double dz = (z1 - z0) / static_cast<double>(n);
  const double slope = (x - alpha) / y;
  double sum = 0;
  for (long k = 0; k <= n; ++k) {
    const double z = k == n ? z1 : z0 + dz * static_cast<double>(k);
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    sum += w * field.sample(alpha + slope * z, z);
  }
  return std::hypot(x - alpha, y) / y * dz * sum;
}

/// Discrete radiance u(x, y, alpha); index = (j * nx + i) * n_alpha + l.
struct Radiance {
  Grid2D grid;
  SourceGrid sources;
  std::vector<double> values;

  std::size_t n_alpha() const noexcept { return sources.size(); }
  std::size_t index(std::size_t i, std::size_t j, std::size_t l) const noexcept {
    return grid.index(i, j) * n_alpha() + l;
  }
  double operator()(std::size_t i, std::size_t j, std::size_t l) const { return values[index(i, j, l)]; }
  double& operator()(std::size_t i, std::size_t j, std::size_t l) { return values[index(i, j, l)]; }
};

/// Everything that defines one forward problem on a fixed grid.
struct ForwardModel {
  Grid2D grid;
  SourceGrid sources;
  ScalarField2D a_field;  ///< total attenuation mu_a + mu_s
  ScalarField2D mu_s;     ///< scattering coefficient
  PhaseKernel kernel;
  SourceModel source;

  ForwardModel(ScalarField2D a, ScalarField2D mus, SourceGrid src, PhaseKernel k, SourceModel s)
      : grid(a.grid()), sources(std::move(src)), a_field(std::move(a)), mu_s(std::move(mus)), kernel(k),
        source(std::move(s)) {
    if (!(mu_s.grid() == grid)) throw ConfigError("attenuation and scattering fields use different grids");
    if (std::abs(sources.step - grid.step()) > 1e-12 || std::abs(grid.x.step - grid.y.step) > 1e-12)
      throw ConfigError("forward solver expects equal x, y and alpha steps");
  }
};

/// mu_s = config.mu_s_value on the closed domain, on the forward grid.
inline ScalarField2D uniform_scattering(const Grid2D& grid, double value) { return ScalarField2D(grid, value); }

inline ForwardModel make_forward_model(const ScalarField2D& a_field, const ExperimentConfig& config,
                                       const ScalarField2D* mu_s = nullptr) {
  config.validate();
  auto [grid, sources] = build_grids(config, GridPurpose::forward);
  if (!(a_field.grid() == grid)) throw ConfigError("attenuation field is not on the forward grid of the configuration");
  ScalarField2D mus = mu_s ? *mu_s : uniform_scattering(grid, config.mu_s_value);
  return ForwardModel(a_field, std::move(mus), std::move(sources), PhaseKernel{config.g_aniso, config.d},
                      SourceModel(config.eps));
}

namespace detail {

/// Trapezoid sub-steps per grid row in the attenuation integral p.
inline constexpr int ray_substeps = 8;

/// Discretized scattering integral along the ray from x_alpha to grid node
/// (i, j). Visits each grid row k <= j the ray crosses inside the domain
/// with the x-position of the crossing and its total weight
///   |x - x_alpha| / y * trapezoid_k * exp(p_k - p_j) * mu_s,
/// and returns the attenuated unscattered term u0 exp(-p_j). p is a
/// trapezoid sum with ray_substeps points per row.
class RayStencil {
public:
  explicit RayStencil(const ForwardModel& m) : m_(m) {}

  template <typename Visit>
  double visit(std::size_t i, std::size_t j, std::size_t l, Visit&& fn) const {
    const double x = m_.grid.x[i], y = m_.grid.y[j], alpha = m_.sources[l];
    const double h = m_.grid.y.step;
    const double ell = std::hypot(x - alpha, y) / y;
    const double slope = (x - alpha) / y;
    xs_.resize(j + 1);
    p_.resize(j + 1);
    for (std::size_t k = 0; k <= j; ++k) xs_[k] = k == j ? x : alpha + slope * m_.grid.y[k];
    p_[0] = 0;
    const double dz = h / ray_substeps;
    double prev = m_.a_field.sample_row(0, xs_[0]);
    for (std::size_t k = 1; k <= j; ++k) {
      const double cur = m_.a_field.sample_row(k, xs_[k]);
      double inner = 0;
      for (int q = 1; q < ray_substeps; ++q) {
        const double z = m_.grid.y[k - 1] + dz * q;
        inner += m_.a_field.sample(alpha + slope * z, z);
      }
      p_[k] = p_[k - 1] + ell * dz * (0.5 * (prev + cur) + inner);
      prev = cur;
    }
    if (j > 0) {
      for (std::size_t k = 0; k <= j; ++k) {
        const double trap = (k == 0 || k == j) ? 0.5 * h : h;
        const double w = ell * trap * std::exp(p_[k] - p_[j]) * m_.mu_s.sample_row(k, xs_[k]);
        fn(k, xs_[k], w);
      }
    }
    return u0_baseline(m_.source, x, y, alpha) * std::exp(-p_[j]);
  }

private:
  const ForwardModel& m_;
  mutable std::vector<double> xs_;
  mutable std::vector<double> p_;
};

/// K(alpha_l, beta_q) times the trapezoid weight of beta_q.
inline Eigen::MatrixXd weighted_kernel(const ForwardModel& m) {
  const auto n = static_cast<Eigen::Index>(m.sources.size());
  const auto w = trapezoid_weights(m.sources.size(), m.sources.step);
  Eigen::MatrixXd kw(n, n);
  for (Eigen::Index l = 0; l < n; ++l)
    for (Eigen::Index q = 0; q < n; ++q) kw(l, q) = m.kernel(m.sources[l], m.sources[q]) * w[q];
  return kw;
}

/// S(i, l) = sum_q K(alpha_l, beta_q) w_q u(i, row, q) for one grid row.
inline Eigen::MatrixXd row_scattering(const Radiance& u, std::size_t row, const Eigen::MatrixXd& kw) {
  const auto nx = static_cast<Eigen::Index>(u.grid.nx());
  const auto na = static_cast<Eigen::Index>(u.n_alpha());
  Eigen::MatrixXd s(na, nx);
  for (Eigen::Index i = 0; i < nx; ++i) {
    const Eigen::Map<const Eigen::VectorXd> ui(&u.values[u.index(static_cast<std::size_t>(i), row, 0)], na);
    s.col(i) = kw * ui;
  }
  return s;
}

/// Linear interpolation of row data S(l, i) at x-position px.
inline double interp_row(const Eigen::MatrixXd& s, const UniformAxis& xaxis, std::size_t l, double px) {
  if (px < xaxis.lo - 1e-12 || px > xaxis.hi + 1e-12) return 0.0;
  const auto [i, t] = ScalarField2D::locate(xaxis, px);
  const auto li = static_cast<Eigen::Index>(l);
  return (1 - t) * s(li, static_cast<Eigen::Index>(i)) + t * s(li, static_cast<Eigen::Index>(i) + 1);
}

inline void check_positive(const Radiance& u) {
  for (std::size_t j = 0; j < u.grid.ny(); ++j)
    for (std::size_t i = 0; i < u.grid.nx(); ++i)
      for (std::size_t l = 0; l < u.n_alpha(); ++l) {
        const double v = u(i, j, l);
        if (!std::isfinite(v) || v <= 0) {
          std::ostringstream os;
          os << "forward solve produced non-positive radiance " << v << " at x=" << u.grid.x[i]
             << " y=" << u.grid.y[j] << " alpha=" << u.sources[l];
          throw NumericalError(os.str());
        }
      }
}

} // namespace detail

/// Solves the Volterra integral equation for the radiance by marching up
/// the grid rows. Row j couples only to rows k <= j along each ray; the
/// coupling within row j is through the alpha-integral at the same x node
/// and is solved exactly with a dense LU per node.
inline Radiance solve_forward(const ForwardModel& m) {
  Radiance u{m.grid, m.sources, std::vector<double>(m.grid.size() * m.sources.size(), 0.0)};
  const auto kw = detail::weighted_kernel(m);
  const auto na = static_cast<Eigen::Index>(m.sources.size());
  const detail::RayStencil stencil(m);
  std::vector<Eigen::MatrixXd> rows;
  rows.reserve(m.grid.ny());
  Eigen::VectorXd rhs(na), self(na);
  for (std::size_t j = 0; j < m.grid.ny(); ++j) {
    for (std::size_t i = 0; i < m.grid.nx(); ++i) {
      for (std::size_t l = 0; l < m.sources.size(); ++l) {
        double explicit_part = 0, self_weight = 0;
        const double src = stencil.visit(i, j, l, [&](std::size_t k, double px, double w) {
          if (k == j) self_weight = w;
          else explicit_part += w * detail::interp_row(rows[k], m.grid.x, l, px);
        });
        rhs(static_cast<Eigen::Index>(l)) = explicit_part + src;
        self(static_cast<Eigen::Index>(l)) = self_weight;
      }
      Eigen::VectorXd ui;
      if (self.isZero(0.0)) {
        ui = rhs;
      } else {
        Eigen::MatrixXd sys = -(self.asDiagonal() * kw);
        sys.diagonal().array() += 1.0;
        ui = sys.partialPivLu().solve(rhs);
      }
      for (Eigen::Index l = 0; l < na; ++l) u(i, j, static_cast<std::size_t>(l)) = ui(l);
    }
    rows.push_back(detail::row_scattering(u, j, kw));
  }
  detail::check_positive(u);
  return u;
}

inline Radiance solve_forward(const ScalarField2D& a_field, const ExperimentConfig& config) {
  return solve_forward(make_forward_model(a_field, config));
}

/// Fixed-point (Neumann series) iteration u_n = T u_{n-1} + u0 e^{-p}
/// of the same discrete operator, starting from the unscattered term.
inline Radiance solve_forward_neumann(const ForwardModel& m, int iterations) {
  const auto kw = detail::weighted_kernel(m);
  const detail::RayStencil stencil(m);
  Radiance src{m.grid, m.sources, std::vector<double>(m.grid.size() * m.sources.size(), 0.0)};
  for (std::size_t j = 0; j < m.grid.ny(); ++j)
    for (std::size_t i = 0; i < m.grid.nx(); ++i)
      for (std::size_t l = 0; l < m.sources.size(); ++l)
        src(i, j, l) = stencil.visit(i, j, l, [](std::size_t, double, double) {});
  Radiance u = src;
  for (int it = 0; it < iterations; ++it) {
    std::vector<Eigen::MatrixXd> rows;
    rows.reserve(m.grid.ny());
    for (std::size_t j = 0; j < m.grid.ny(); ++j) rows.push_back(detail::row_scattering(u, j, kw));
    Radiance next = src;
    for (std::size_t j = 0; j < m.grid.ny(); ++j)
      for (std::size_t i = 0; i < m.grid.nx(); ++i)
        for (std::size_t l = 0; l < m.sources.size(); ++l) {
          double acc = 0;
          stencil.visit(i, j, l, [&](std::size_t k, double px, double w) {
            acc += w * detail::interp_row(rows[k], m.grid.x, l, px);
          });
          next(i, j, l) += acc;
        }
    u = std::move(next);
  }
  return u;
}

/// Radiance on the boundary of the inversion grid, one value per
/// (boundary node, alpha node).
enum class BoundarySide { bottom, top, left, right };

struct BoundaryNode {
  std::size_t i;
  std::size_t j;
  BoundarySide side;
};

/// Boundary nodes in a fixed order: bottom row (y = a, corners included),
/// top row (y = b, corners included), left column, right column.
inline std::vector<BoundaryNode> boundary_nodes(const Grid2D& g) {
  std::vector<BoundaryNode> out;
  const auto nx = g.nx(), ny = g.ny();
  for (std::size_t i = 0; i < nx; ++i) out.push_back({i, 0, BoundarySide::bottom});
  for (std::size_t i = 0; i < nx; ++i) out.push_back({i, ny - 1, BoundarySide::top});
  for (std::size_t j = 1; j + 1 < ny; ++j) out.push_back({0, j, BoundarySide::left});
  for (std::size_t j = 1; j + 1 < ny; ++j) out.push_back({nx - 1, j, BoundarySide::right});
  return out;
}

struct BoundaryTrace {
  Grid2D grid;
  SourceGrid sources;
  std::vector<BoundaryNode> nodes;
  std::vector<double> values;  ///< index = node * n_alpha + l

  std::size_t n_alpha() const noexcept { return sources.size(); }
  double operator()(std::size_t node, std::size_t l) const { return values[node * n_alpha() + l]; }
  double& operator()(std::size_t node, std::size_t l) { return values[node * n_alpha() + l]; }
};

namespace detail {

/// Index of `coarse` node values inside `fine`, or throws when the axes are
/// not nested.
inline std::vector<std::size_t> nested_indices(const UniformAxis& fine, const UniformAxis& coarse) {
  const double ratio = coarse.step / fine.step;
  const auto stride = static_cast<std::size_t>(std::llround(ratio));
  if (stride < 1 || std::abs(ratio - static_cast<double>(stride)) > 1e-9 ||
      std::abs(fine.lo - coarse.lo) > 1e-12 || std::abs(fine.hi - coarse.hi) > 1e-12 ||
      (coarse.size() - 1) * stride + 1 != fine.size())
    throw ConfigError("inversion grid is not nested in the forward grid");
  std::vector<std::size_t> idx(coarse.size());
  for (std::size_t k = 0; k < coarse.size(); ++k) idx[k] = k * stride;
  return idx;
}

} // namespace detail

/// Measured data g1 on the inversion grid: the radiance on the top and the
/// lateral sides, and the unscattered baseline u0 on the bottom side.
inline BoundaryTrace extract_boundary_data(const Radiance& u, const Grid2D& inv_grid, const SourceGrid& inv_sources,
                                           const SourceModel& source) {
  const auto ix = detail::nested_indices(u.grid.x, inv_grid.x);
  const auto iy = detail::nested_indices(u.grid.y, inv_grid.y);
  const auto ia = detail::nested_indices(u.sources, inv_sources);
  BoundaryTrace t{inv_grid, inv_sources, boundary_nodes(inv_grid), {}};
  t.values.resize(t.nodes.size() * inv_sources.size());
  for (std::size_t n = 0; n < t.nodes.size(); ++n) {
    const auto& node = t.nodes[n];
    for (std::size_t l = 0; l < inv_sources.size(); ++l) {
      t(n, l) = node.side == BoundarySide::bottom
                    ? u0_baseline(source, inv_grid.x[node.i], inv_grid.y[node.j], inv_sources[l])
                    : u(ix[node.i], iy[node.j], ia[l]);
    }
  }
  return t;
}

inline BoundaryTrace extract_boundary_data(const Radiance& u, const ExperimentConfig& config) {
  const auto [g, s] = build_grids(config, GridPurpose::inversion);
  return extract_boundary_data(u, g, s, SourceModel(config.eps));
}

} // namespace crte
