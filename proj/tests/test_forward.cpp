#include <carleman_rte/forward.hpp>
#include <carleman_rte/phantom.hpp>

#include "support/ray_oracle.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace crte;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ExperimentConfig coarse_config(double h) {
  ExperimentConfig c;
  c.h_fwd = h;
  c.h_inv = 2 * h;
  return c;
}

double max_rel_diff(const Radiance& u, const Radiance& v) {
  double e = 0;
  for (std::size_t k = 0; k < u.values.size(); ++k) e = std::max(e, std::abs(u.values[k] - v.values[k]) / v.values[k]);
  return e;
}

/// Length of the part of the segment from (alpha, 0) to (x, y) inside the
/// closed rectangle, for (x, y) inside it.
double chord_in_rectangle(double x, double y, double alpha, double A, double a) {
  double t_enter = a / y;
  const double x_enter = alpha + t_enter * (x - alpha);
  if (std::abs(x_enter) > A) t_enter = ((x_enter > 0 ? A : -A) - alpha) / (x - alpha);
  return (1 - t_enter) * std::hypot(x - alpha, y);
}

} // namespace

TEST_CASE("mollified source has unit mass on a 401 x 401 midpoint grid") {
  const SourceModel f(0.05);
  const int n = 401;
  const double h = 2 * 0.05 / n;
  double mass = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) mass += f(-0.05 + (i + 0.5) * h, -0.05 + (j + 0.5) * h) * h * h;
  CHECK_THAT(mass, WithinAbs(1.0, 1e-3));
  CHECK(f(0.05, 0.0) == 0.0);
  CHECK(f(0.03, 0.04) == 0.0);
  CHECK(f(0.0, 0.0) == f.c_eps());
  CHECK(f(0.0, 0.0) > 0);
  CHECK_THROWS_AS(SourceModel(0.0), ConfigError);
}

TEST_CASE("phase kernel values, symmetry and derivative") {
  const PhaseKernel K{0.5, 0.5};
  CHECK_THAT(K(0.2, 0.2), WithinAbs(3.0, 1e-14));
  const PhaseKernel iso{0.0, 0.5};
  CHECK_THAT(iso(-0.4, 0.3), WithinAbs(1.0, 1e-14));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int k = 0; k < 100; ++k) {
    const double al = u(rng), be = u(rng), h = 1e-6;
    CHECK(K(al, be) > 0);
    CHECK_THAT(K(al, be), WithinAbs(K(be, al), 1e-15));
    CHECK_THAT(K.d_alpha(al, be), WithinAbs((K(al + h, be) - K(al - h, be)) / (2 * h), 1e-6));
  }
}

TEST_CASE("unscattered baseline matches a 10^4-point quadrature above the source") {
  const SourceModel f(0.05);
  const int n = 10000;
  const double h = 0.05 / n;
  double s = 0;
  for (int k = 0; k < n; ++k) {
    const double t = (k + 0.5) * h;
    s += f.c_eps() * std::exp(t * t / (t * t - 0.05 * 0.05)) * h;
  }
  CHECK_THAT(u0_baseline(f, 0.1, 1.3, 0.1), WithinRel(s, 1e-6));
  CHECK_THAT(u0_baseline(f, 0.3, 1.0, -0.2), WithinRel(u0_baseline(f, 0.4, 1.0, -0.1), 1e-12));
  const ExperimentConfig c;
  const auto [g, sg] = build_grids(c, GridPurpose::forward);
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t l = 0; l < sg.size(); ++l) CHECK(u0_baseline(f, g.x[i], g.y[0], sg[l]) > 0);
}

TEST_CASE("line integral to the source") {
  const ExperimentConfig c;
  const auto [g, s] = build_grids(c, GridPurpose::forward);
  CHECK(line_integral_to_source(ScalarField2D(g, 0.0), 0.1, 1.5, 0.2, g.step()) == 0.0);
  CHECK_THAT(line_integral_to_source(ScalarField2D(g, 3.0), 0.25, 2.0, 0.25, g.step()), WithinAbs(3.0, 1e-12));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-0.5, 0.5), uy(1.0, 2.0);
  const ScalarField2D one(g, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double x = ux(rng), y = uy(rng), al = ux(rng);
    CHECK_THAT(line_integral_to_source(one, x, y, al, g.step()), WithinAbs(chord_in_rectangle(x, y, al, 0.5, 1.0), 1e-12));
  }
  CHECK_THROWS_AS(line_integral_to_source(one, 0.0, 0.0, 0.0, g.step()), ConfigError);
}

TEST_CASE("exact ray oracle agrees with chord clipping and fine trapezoid sums") {
  const ExperimentConfig c;
  const auto [g, s] = build_grids(c, GridPurpose::forward);
  const ScalarField2D one(g, 1.0);
  const auto disk = make_phantom("disk", 5, g).attenuation(0.0);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ux(-0.5, 0.5), uy(1.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    const double x = ux(rng), y = uy(rng), al = ux(rng);
    CHECK_THAT(oracle::exact_ray_integral(one, x, y, al), WithinAbs(chord_in_rectangle(x, y, al, 0.5, 1.0), 1e-12));
    const double fine = line_integral_to_source(disk, x, y, al, 1e-5);
    CHECK_THAT(oracle::exact_ray_integral(disk, x, y, al), WithinAbs(fine, 1e-6));
  }
}

TEST_CASE("without attenuation or scattering the radiance equals the baseline") {
  ExperimentConfig c;
  c.mu_s_value = 0;
  const auto [g, s] = build_grids(c, GridPurpose::forward);
  const auto u = solve_forward(ScalarField2D(g, 0.0), c);
  const SourceModel f(c.eps);
  for (std::size_t j = 0; j < g.ny(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i)
      for (std::size_t l = 0; l < s.size(); ++l)
        CHECK_THAT(u(i, j, l), WithinRel(u0_baseline(f, g.x[i], g.y[j], s[l]), 1e-3));
}

TEST_CASE("without scattering the radiance follows Beer-Lambert") {
  ExperimentConfig c;
  c.mu_s_value = 0;
  const auto [g, s] = build_grids(c, GridPurpose::forward);
  const auto a = make_phantom("disk", 5, g).attenuation(0);
  const auto u = solve_forward(a, c);
  const SourceModel f(c.eps);
  double worst = 0;
  for (std::size_t j = 0; j < g.ny(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i)
      for (std::size_t l = 0; l < s.size(); ++l) {
        const double exact =
            u0_baseline(f, g.x[i], g.y[j], s[l]) * std::exp(-oracle::exact_ray_integral(a, g.x[i], g.y[j], s[l]));
        worst = std::max(worst, std::abs(u(i, j, l) - exact) / exact);
      }
  CHECK(worst <= 0.02);
}

TEST_CASE("layer marching equals the global dense solve") {
  const auto c = coarse_config(0.1);
  const auto [g, s] = build_grids(c, GridPurpose::forward);
  const auto model = make_forward_model(make_phantom("A", 5, g).attenuation(c.mu_s_value), c);
  const auto u = solve_forward(model);
  // global system (I - T) u = src assembled node by node
  const std::size_t nx = g.nx(), na = s.size(), n = g.size() * na;
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd src(static_cast<Eigen::Index>(n));
  const detail::RayStencil stencil(model);
  const auto tw = trapezoid_weights(na, s.step);
  for (std::size_t j = 0; j < g.ny(); ++j)
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t l = 0; l < na; ++l) {
        const auto row = static_cast<Eigen::Index>(u.index(i, j, l));
        src(row) = stencil.visit(i, j, l, [&](std::size_t k, double px, double w) {
          const auto [cell, t] = ScalarField2D::locate(g.x, px);
          for (std::size_t q = 0; q < na; ++q) {
            const double kq = w * model.kernel(s[l], s[q]) * tw[q];
            M(row, static_cast<Eigen::Index>(u.index(cell, k, q))) -= (1 - t) * kq;
            M(row, static_cast<Eigen::Index>(u.index(cell + 1, k, q))) -= t * kq;
          }
        });
      }
  const Eigen::VectorXd direct = M.partialPivLu().solve(src);
  for (std::size_t k = 0; k < n; ++k) CHECK_THAT(u.values[k], WithinRel(direct(static_cast<Eigen::Index>(k)), 1e-10));
}

TEST_CASE("Neumann iterates converge to the layer-marching solution") {
  const auto c = coarse_config(0.1);
  const auto [g, s] = build_grids(c, GridPurpose::forward);
  const auto model = make_forward_model(make_phantom("A", 5, g).attenuation(c.mu_s_value), c);
  const auto u = solve_forward(model);
  double prev = std::numeric_limits<double>::infinity();
  for (int it : {5, 10, 20, 40}) {
    const double e = max_rel_diff(solve_forward_neumann(model, it), u);
    CHECK(e < prev);
    prev = e;
  }
  CHECK(max_rel_diff(solve_forward_neumann(model, 160), u) < 1e-12);
}

TEST_CASE("radiance is bounded below by the baseline minimum on the bottom side") {
  const ExperimentConfig c;
  const auto [g, s] = build_grids(c, GridPurpose::forward);
  const auto u = solve_forward(make_phantom("A", 5, g).attenuation(c.mu_s_value), c);
  const SourceModel f(c.eps);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t l = 0; l < s.size(); ++l) m = std::min(m, u0_baseline(f, g.x[i], g.y[0], s[l]));
  REQUIRE(m > 0);
  for (const double v : u.values) CHECK(v >= m * (1 - 1e-12));
}

TEST_CASE("stronger absorption does not increase the top-side radiance") {
  const ExperimentConfig c;
  const auto [g, s] = build_grids(c, GridPurpose::forward);
  const auto u5 = solve_forward(make_phantom("A", 5, g).attenuation(c.mu_s_value), c);
  const auto u10 = solve_forward(make_phantom("A", 10, g).attenuation(c.mu_s_value), c);
  const auto top = g.ny() - 1;
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t l = 0; l < s.size(); ++l) CHECK(u10(i, top, l) <= u5(i, top, l) * (1 + 1e-12));
}

TEST_CASE("halving the forward step changes the top-side trace by less than 1%") {
  const ExperimentConfig c;
  ExperimentConfig fine = c;
  fine.h_fwd = c.h_fwd / 2;
  const auto [g, s] = build_grids(c, GridPurpose::forward);
  const auto [gf, sf] = build_grids(fine, GridPurpose::forward);
  const auto u = solve_forward(make_phantom("A", 5, g).attenuation(c.mu_s_value), c);
  const auto uf = solve_forward(make_phantom("A", 5, gf).attenuation(c.mu_s_value), fine);
  double worst = 0;
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t l = 0; l < s.size(); ++l) {
      const double a = u(i, g.ny() - 1, l), b = uf(2 * i, gf.ny() - 1, 2 * l);
      worst = std::max(worst, std::abs(a - b) / b);
    }
  CHECK(worst < 0.01);
}

TEST_CASE("boundary data on the inversion grid") {
  const ExperimentConfig c;
  const auto [g, s] = build_grids(c, GridPurpose::forward);
  const auto u = solve_forward(make_phantom("A", 5, g).attenuation(c.mu_s_value), c);
  const auto t = extract_boundary_data(u, c);
  const auto [gi, si] = build_grids(c, GridPurpose::inversion);
  REQUIRE(t.nodes.size() == 2 * gi.nx() + 2 * (gi.ny() - 2));
  const SourceModel f(c.eps);
  std::size_t bottom = 0, top = 0, lateral = 0;
  for (std::size_t n = 0; n < t.nodes.size(); ++n) {
    const auto& node = t.nodes[n];
    CHECK(gi.is_boundary(node.i, node.j));
    for (std::size_t l = 0; l < si.size(); ++l) {
      CHECK(t(n, l) > 0);
      if (node.side == BoundarySide::bottom)
        CHECK_THAT(t(n, l), WithinAbs(u0_baseline(f, gi.x[node.i], gi.y[node.j], si[l]), 1e-9));
      else
        CHECK(t(n, l) == u(2 * node.i, 2 * node.j, 2 * l));
    }
    bottom += node.side == BoundarySide::bottom;
    top += node.side == BoundarySide::top;
    lateral += node.side == BoundarySide::left || node.side == BoundarySide::right;
  }
  CHECK(bottom == gi.nx());
  CHECK(top == gi.nx());
  CHECK(lateral == 2 * (gi.ny() - 2));
  ExperimentConfig bad = c;
  bad.h_inv = 1.0 / 30;
  CHECK_THROWS_AS(extract_boundary_data(u, bad), ConfigError);
}
