#pragma once

#include <carleman_rte/errors.hpp>
#include <carleman_rte/forward.hpp>
#include <carleman_rte/glyphs.hpp>
#include <carleman_rte/grid.hpp>
#include <carleman_rte/io.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace crte {

/// Piecewise-constant absorber mu_a = c_value * mask.
struct Phantom {
  std::string name;
  double c_value = 0;
  ScalarField2D mask;

  ScalarField2D mu_a() const {
    ScalarField2D out = mask;
    for (auto& v : out.values()) v *= c_value;
    return out;
  }

  /// a = mu_a + mu_s with constant mu_s on the closed domain.
  ScalarField2D attenuation(double mu_s) const {
    ScalarField2D out = mu_a();
    for (auto& v : out.values()) v += mu_s;
    return out;
  }

  /// Inclusion/background contrast 1 + c / mu_s of the true phantom.
  double contrast(double mu_s = 5.0) const { return 1.0 + c_value / mu_s; }
};

inline Bitmap glyph_bitmap(const std::array<std::string_view, glyphs::size>& rows) {
  Bitmap bm;
  bm.width = bm.height = glyphs::size;
  bm.inside.reserve(bm.width * bm.height);
  for (const auto row : rows)
    for (const char c : row) bm.inside.push_back(c == '#' ? 1 : 0);
  return bm;
}

namespace detail {

/// Nearest-neighbour lookup of a bitmap stretched over the unit square
/// (u, v) in [0, 1]^2 with v pointing up.
inline bool bitmap_at(const Bitmap& bm, double u, double v) {
  const auto col = std::min<long>(static_cast<long>(bm.width) - 1, std::max(0L, std::lround(std::floor(u * bm.width))));
  const auto row =
      std::min<long>(static_cast<long>(bm.height) - 1, std::max(0L, std::lround(std::floor((1 - v) * bm.height))));
  return bm(static_cast<std::size_t>(row), static_cast<std::size_t>(col));
}

} // namespace detail

/// Rasterizes a bitmap over the whole closed domain of `grid`.
inline ScalarField2D rasterize(const Bitmap& bm, const Grid2D& grid) {
  ScalarField2D mask(grid, 0.0);
  const double w = grid.x.hi - grid.x.lo, hgt = grid.y.hi - grid.y.lo;
  for (std::size_t j = 0; j < grid.ny(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const double u = (grid.x[i] - grid.x.lo) / w, v = (grid.y[j] - grid.y.lo) / hgt;
      mask(i, j) = detail::bitmap_at(bm, u, v) ? 1.0 : 0.0;
    }
  return mask;
}

/// Disk of radius `radius` centred in the domain.
inline ScalarField2D disk_mask(const Grid2D& grid, double radius) {
  ScalarField2D mask(grid, 0.0);
  const double cx = 0.5 * (grid.x.lo + grid.x.hi), cy = 0.5 * (grid.y.lo + grid.y.hi);
  for (std::size_t j = 0; j < grid.ny(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i)
      mask(i, j) = std::hypot(grid.x[i] - cx, grid.y[j] - cy) <= radius + 1e-12 ? 1.0 : 0.0;
  return mask;
}

inline constexpr double default_disk_radius = 0.2;

/// Known names: A, Omega, SZ, S, Z, disk, and custom (which needs
/// `mask_file`). SZ places S in the left half and Z in the right half.
inline Phantom make_phantom(const std::string& name, double c_value, const Grid2D& grid,
                            const std::optional<std::filesystem::path>& mask_file = std::nullopt) {
  if (!std::isfinite(c_value) || c_value < 0) throw ConfigError("phantom amplitude c must be finite and >= 0");
  Phantom p{name, c_value, ScalarField2D(grid, 0.0)};
  if (name == "A") {
    p.mask = rasterize(glyph_bitmap(glyphs::A), grid);
  } else if (name == "Omega") {
    p.mask = rasterize(glyph_bitmap(glyphs::Omega), grid);
  } else if (name == "S") {
    p.mask = rasterize(glyph_bitmap(glyphs::S), grid);
  } else if (name == "Z") {
    p.mask = rasterize(glyph_bitmap(glyphs::Z), grid);
  } else if (name == "SZ") {
    const auto s = glyph_bitmap(glyphs::S), z = glyph_bitmap(glyphs::Z);
    const double w = grid.x.hi - grid.x.lo, hgt = grid.y.hi - grid.y.lo;
    for (std::size_t j = 0; j < grid.ny(); ++j)
      for (std::size_t i = 0; i < grid.nx(); ++i) {
        const double u = (grid.x[i] - grid.x.lo) / w, v = (grid.y[j] - grid.y.lo) / hgt;
        const bool in = u < 0.5 ? detail::bitmap_at(s, 2 * u, v) : detail::bitmap_at(z, 2 * u - 1, v);
        p.mask(i, j) = in ? 1.0 : 0.0;
      }
  } else if (name == "disk") {
    p.mask = disk_mask(grid, default_disk_radius);
  } else if (name == "custom") {
    if (!mask_file) throw ConfigError("custom phantom needs a mask file");
    p.mask = rasterize(read_mask(*mask_file), grid);
  } else {
    throw ConfigError("unknown phantom '" + name + "' (expected A, Omega, SZ, S, Z, disk or custom)");
  }
  return p;
}

/// Multiplicative noise g1 <- g1 (1 + sigma zeta), zeta uniform on [0, 1].
/// With NoiseDraw::per_node one zeta is drawn per boundary node and shared
/// by every alpha; per_node_alpha draws one per (node, alpha).
inline BoundaryTrace add_noise(const BoundaryTrace& trace, double sigma, std::uint64_t seed,
                               NoiseDraw draw = NoiseDraw::per_node) {
  if (!(sigma >= 0)) throw ConfigError("noise level sigma must be >= 0");
  BoundaryTrace out = trace;
  if (sigma == 0) return out;
  std::mt19937_64 rng(seed);
  // 53 random bits mapped to [0, 1]; avoids implementation-defined distributions
  auto zeta = [&] { return static_cast<double>(rng() >> 11) / static_cast<double>((1ULL << 53) - 1); };
  for (std::size_t n = 0; n < out.nodes.size(); ++n) {
    double z = zeta();
    for (std::size_t l = 0; l < out.n_alpha(); ++l) {
      if (draw == NoiseDraw::per_node_alpha && l > 0) z = zeta();
      out(n, l) *= 1 + sigma * z;
    }
  }
  return out;
}

struct QualityReport {
  double computed_contrast = 1;     ///< 1 + max(mu_a_rec) / mu_s
  double relative_l2_error = 0;     ///< ||a_rec - a_true|| / ||a_true||
  double centroid_displacement = 0; ///< distance between half-max support centroids
  double jaccard = 1;               ///< |S_rec & S_true| / |S_rec | S_true|
};

namespace detail {

/// Nodes with a >= mu_s + max(a - mu_s) / 2; empty when there is no
/// positive inclusion.
inline std::vector<bool> half_max_support(const ScalarField2D& a, double mu_s) {
  double peak = -std::numeric_limits<double>::infinity();
  for (const double v : a.values()) peak = std::max(peak, v - mu_s);
  std::vector<bool> s(a.values().size(), false);
  if (!(peak > 0)) return s;
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = a.values()[k] >= mu_s + 0.5 * peak;
  return s;
}

} // namespace detail

/// `mu_s` is the constant background scattering. An empty recovered support
/// is reported with the domain diagonal as its centroid displacement.
inline QualityReport score(const ScalarField2D& a_true, const ScalarField2D& a_rec, double mu_s) {
  if (!(a_true.grid() == a_rec.grid())) throw ConfigError("score: true and recovered fields use different grids");
  const auto& g = a_true.grid();
  QualityReport r;
  double peak = 0;
  for (const double v : a_rec.values()) peak = std::max(peak, v - mu_s);
  r.computed_contrast = 1 + peak / mu_s;

  double num = 0, den = 0;
  for (std::size_t k = 0; k < a_true.values().size(); ++k) {
    const double e = a_rec.values()[k] - a_true.values()[k];
    num += e * e;
    den += a_true.values()[k] * a_true.values()[k];
  }
  r.relative_l2_error = den > 0 ? std::sqrt(num / den) : std::sqrt(num);

  const auto st = detail::half_max_support(a_true, mu_s);
  const auto sr = detail::half_max_support(a_rec, mu_s);
  std::size_t inter = 0, uni = 0;
  for (std::size_t k = 0; k < st.size(); ++k) {
    inter += st[k] && sr[k];
    uni += st[k] || sr[k];
  }
  r.jaccard = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);

  auto centroid = [&](const std::vector<bool>& s) -> std::optional<std::array<double, 2>> {
    double cx = 0, cy = 0;
    std::size_t n = 0;
    for (std::size_t j = 0; j < g.ny(); ++j)
      for (std::size_t i = 0; i < g.nx(); ++i)
        if (s[g.index(i, j)]) {
          cx += g.x[i];
          cy += g.y[j];
          ++n;
        }
    if (n == 0) return std::nullopt;
    return std::array<double, 2>{cx / n, cy / n};
  };
  const auto ct = centroid(st), cr = centroid(sr);
  if (ct && cr) r.centroid_displacement = std::hypot((*ct)[0] - (*cr)[0], (*ct)[1] - (*cr)[1]);
  else if (ct || cr) r.centroid_displacement = std::hypot(g.x.hi - g.x.lo, g.y.hi - g.y.lo);
  return r;
}

} // namespace crte
