#pragma once

#include <carleman_rte/config.hpp>
#include <carleman_rte/errors.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace crte {

/// Uniform closed 1-D node set spanning [lo, hi], both endpoints included.
struct UniformAxis {
  double lo = 0;
  double hi = 0;
  double step = 0;
  std::vector<double> nodes;

  std::size_t size() const noexcept { return nodes.size(); }
  double operator[](std::size_t i) const { return nodes[i]; }
};

inline UniformAxis make_axis(double lo, double hi, double step) {
  const double extent = hi - lo;
  if (!(step > 0) || !(extent > 0)) throw ConfigError("axis needs positive extent and step");
  const double ratio = extent / step;
  const auto cells = static_cast<long>(std::llround(ratio));
  if (cells < 1 || std::abs(cells * step - extent) > 1e-12 * std::max(1.0, extent))
    throw ConfigError("grid step " + std::to_string(step) + " does not divide extent " + std::to_string(extent));
  UniformAxis ax;
  ax.lo = lo;
  ax.hi = hi;
  ax.step = extent / static_cast<double>(cells);
  ax.nodes.resize(static_cast<std::size_t>(cells) + 1);
  for (long i = 0; i <= cells; ++i) ax.nodes[static_cast<std::size_t>(i)] = lo + ax.step * static_cast<double>(i);
  ax.nodes.back() = hi;
  return ax;
}

/// Tensor grid on the closed rectangle [-A, A] x [a, b].
struct Grid2D {
  UniformAxis x;
  UniformAxis y;

  std::size_t nx() const noexcept { return x.size(); }
  std::size_t ny() const noexcept { return y.size(); }
  std::size_t size() const noexcept { return nx() * ny(); }
  double step() const noexcept { return x.step; }
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * nx() + i; }
  bool is_boundary(std::size_t i, std::size_t j) const noexcept {
    return i == 0 || j == 0 || i + 1 == nx() || j + 1 == ny();
  }
  bool contains(double px, double py, double tol = 1e-12) const noexcept {
    return px >= x.lo - tol && px <= x.hi + tol && py >= y.lo - tol && py <= y.hi + tol;
  }
  friend bool operator==(const Grid2D& l, const Grid2D& r) {
    return l.x.nodes == r.x.nodes && l.y.nodes == r.y.nodes;
  }
};

/// Source abscissae alpha in [-d, d].
using SourceGrid = UniformAxis;

enum class GridPurpose { forward, inversion };

inline std::pair<Grid2D, SourceGrid> build_grids(const ExperimentConfig& c, GridPurpose purpose) {
  const double h = purpose == GridPurpose::forward ? c.h_fwd : c.h_inv;
  Grid2D g{make_axis(-c.A, c.A, h), make_axis(c.a, c.b, h)};
  return {std::move(g), make_axis(-c.d, c.d, h)};
}

/// Scalar values on the nodes of a Grid2D; index = j * nx + i.
class ScalarField2D {
public:
  ScalarField2D() = default;
  explicit ScalarField2D(Grid2D grid, double fill = 0.0)
      : grid_(std::move(grid)), values_(grid_.size(), fill) {}
  ScalarField2D(Grid2D grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw ConfigError("field value count does not match grid");
  }

  const Grid2D& grid() const noexcept { return grid_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  double operator()(std::size_t i, std::size_t j) const { return values_[grid_.index(i, j)]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[grid_.index(i, j)]; }

  /// Bilinear interpolation; zero outside the closed rectangle.
  double sample(double px, double py) const {
    if (!grid_.contains(px, py)) return 0.0;
    const auto [i, tx] = locate(grid_.x, px);
    const auto [j, ty] = locate(grid_.y, py);
    const double v00 = (*this)(i, j), v10 = (*this)(i + 1, j);
    const double v01 = (*this)(i, j + 1), v11 = (*this)(i + 1, j + 1);
    return (1 - ty) * ((1 - tx) * v00 + tx * v10) + ty * ((1 - tx) * v01 + tx * v11);
  }

  /// Linear interpolation in x along grid row j; zero outside [-A, A].
  double sample_row(std::size_t j, double px) const {
    if (px < grid_.x.lo - 1e-12 || px > grid_.x.hi + 1e-12) return 0.0;
    const auto [i, tx] = locate(grid_.x, px);
    return (1 - tx) * (*this)(i, j) + tx * (*this)(i + 1, j);
  }

  /// Cell index and fractional offset of p on the axis; p is clamped.
  static std::pair<std::size_t, double> locate(const UniformAxis& ax, double p) {
    const double s = (p - ax.lo) / ax.step;
    const auto last = static_cast<long>(ax.size()) - 2;
    long cell = static_cast<long>(std::floor(s));
    cell = std::clamp(cell, 0L, last);
    const double t = std::clamp(s - static_cast<double>(cell), 0.0, 1.0);
    return {static_cast<std::size_t>(cell), t};
  }

private:
  Grid2D grid_;
  std::vector<double> values_;
};

/// Unit direction from the source point (alpha, 0) to (x, y), together with
/// its alpha-derivative.
struct Direction {
  double nu1;
  double nu2;
  double dnu1;  ///< d nu1 / d alpha = -y^2 / r^3
  double dnu2;  ///< d nu2 / d alpha = y (x - alpha) / r^3
};

inline std::array<double, 2> direction_nu(double x, double y, double alpha) {
  const double dx = x - alpha;
  const double r = std::hypot(dx, y);
  return {dx / r, y / r};
}

inline Direction direction_with_derivative(double x, double y, double alpha) {
  const double dx = x - alpha;
  const double r = std::hypot(dx, y);
  const double r3 = r * r * r;
  return {dx / r, y / r, -y * y / r3, y * dx / r3};
}

/// alpha-derivatives of nu by centered differences of step `h`, used to
/// reproduce the divided-difference setup.
inline Direction direction_with_fd_derivative(double x, double y, double alpha, double h) {
  const auto p = direction_nu(x, y, alpha + h);
  const auto m = direction_nu(x, y, alpha - h);
  const auto c = direction_nu(x, y, alpha);
  return {c[0], c[1], (p[0] - m[0]) / (2 * h), (p[1] - m[1]) / (2 * h)};
}

} // namespace crte
