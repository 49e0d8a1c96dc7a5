#pragma once

#include <carleman_rte/assembly.hpp>
#include <carleman_rte/errors.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

namespace crte {

/// Sets every boundary node of W to P.
inline void apply_boundary(CoefficientField& W, const BoundaryCoefficients& P) {
  if (!(W.grid == P.grid) || W.N != P.N) throw ConfigError("boundary coefficients do not match the field");
  for (std::size_t n = 0; n < P.nodes.size(); ++n) W.at(P.nodes[n].i, P.nodes[n].j) = P.p[n];
}

/// Average of the x- and y-linear interpolants of the boundary values,
/// followed by an exact reset of the boundary nodes to P (the two
/// interpolants disagree on the lateral sides).
inline CoefficientField initial_guess(const BoundaryCoefficients& P) {
  const auto& g = P.grid;
  CoefficientField B(g, P.N);
  apply_boundary(B, P);
  CoefficientField W(g, P.N);
  const double A0 = g.x.lo, A1 = g.x.hi, a = g.y.lo, b = g.y.hi;
  const std::size_t nx = g.nx(), ny = g.ny();
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = g.x[i], y = g.y[j];
      const double tx = (x - A0) / (A1 - A0), ty = (y - a) / (b - a);
      W.at(i, j) = 0.5 * ((1 - tx) * B.at(0, j) + tx * B.at(nx - 1, j)) +
                   0.5 * ((1 - ty) * B.at(i, 0) + ty * B.at(i, ny - 1));
    }
  apply_boundary(W, P);
  return W;
}

/// Carleman-weighted least-squares functional
///   J(W) = sum_{interior} h^2 e^{2 lambda y} |D_N W_y + A_1 W_x + F(W)|^2
/// with centred differences in x and y and W fixed to P on the boundary.
class Functional {
public:
  Functional(SystemMatrices sys, BoundaryCoefficients P, double lambda)
      : sys_(std::move(sys)), P_(std::move(P)), lambda_(lambda) {
    if (!(P_.grid == sys_.grid) || P_.N != sys_.basis.N) throw ConfigError("boundary coefficients do not match system");
    const double h = sys_.grid.step();
    weight_.resize(sys_.grid.ny());
    for (std::size_t j = 0; j < sys_.grid.ny(); ++j) weight_[j] = h * h * std::exp(2 * lambda_ * sys_.grid.y[j]);
  }

  const SystemMatrices& system() const noexcept { return sys_; }
  const BoundaryCoefficients& boundary() const noexcept { return P_; }
  const Grid2D& grid() const noexcept { return sys_.grid; }
  int N() const noexcept { return sys_.basis.N; }
  double lambda() const noexcept { return lambda_; }
  /// h^2 e^{2 lambda y_j}
  double weight(std::size_t j) const { return weight_[j]; }

  std::size_t n_unknowns() const { return (grid().nx() - 2) * (grid().ny() - 2) * static_cast<std::size_t>(N()); }

  /// Interior values in row-major node order.
  Eigen::VectorXd pack(const CoefficientField& W) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n_unknowns()));
    Eigen::Index k = 0;
    for_interior([&](std::size_t i, std::size_t j) {
      v.segment(k, N()) = W.at(i, j);
      k += N();
    });
    return v;
  }

  CoefficientField unpack(const Eigen::VectorXd& v) const {
    CoefficientField W(grid(), N());
    apply_boundary(W, P_);
    Eigen::Index k = 0;
    for_interior([&](std::size_t i, std::size_t j) {
      W.at(i, j) = v.segment(k, N());
      k += N();
    });
    return W;
  }

  /// Residual D_N W_y + A_1 W_x + F(W) at interior nodes, zero elsewhere.
  CoefficientField residual(const CoefficientField& W) const {
    check(W);
    CoefficientField R(grid(), N());
    const double inv2h = 0.5 / grid().step();
    for_interior([&](std::size_t i, std::size_t j) {
      const auto& nm = sys_.at(i, j);
      const Eigen::VectorXd wy = (W.at(i, j + 1) - W.at(i, j - 1)) * inv2h;
      const Eigen::VectorXd wx = (W.at(i + 1, j) - W.at(i - 1, j)) * inv2h;
      R.at(i, j) = nm.D * wy + nm.A1 * wx + nonlinearity_F(W.at(i, j), nm, sys_.tables);
    });
    return R;
  }

  /// Weighted squared norm of a residual field.
  double weighted_norm2(const CoefficientField& R) const {
    double J = 0;
    for_interior([&](std::size_t i, std::size_t j) { J += weight_[j] * R.at(i, j).squaredNorm(); });
    return J;
  }

  double eval_J(const CoefficientField& W) const { return weighted_norm2(residual(W)); }

  /// Exact gradient of J with respect to every interior component; zero on
  /// the boundary. Returns J.
  double value_and_gradient(const CoefficientField& W, CoefficientField& grad) const {
    check(W);
    grad = CoefficientField(grid(), N());
    const double inv2h = 0.5 / grid().step();
    double J = 0;
    Eigen::MatrixXd jac;
    for_interior([&](std::size_t i, std::size_t j) {
      const auto& nm = sys_.at(i, j);
      const Eigen::VectorXd wy = (W.at(i, j + 1) - W.at(i, j - 1)) * inv2h;
      const Eigen::VectorXd wx = (W.at(i + 1, j) - W.at(i - 1, j)) * inv2h;
      const Eigen::VectorXd r = nm.D * wy + nm.A1 * wx + nonlinearity_F(W.at(i, j), nm, sys_.tables, &jac);
      J += weight_[j] * r.squaredNorm();
      const Eigen::VectorXd q = 2 * weight_[j] * r;
      const Eigen::VectorXd qd = nm.D.transpose() * q * inv2h;
      const Eigen::VectorXd qa = nm.A1.transpose() * q * inv2h;
      grad.at(i, j) += jac.transpose() * q;
      grad.at(i, j + 1) += qd;
      grad.at(i, j - 1) -= qd;
      grad.at(i + 1, j) += qa;
      grad.at(i - 1, j) -= qa;
    });
    for (const auto& node : P_.nodes) grad.at(node.i, node.j).setZero();
    return J;
  }

  CoefficientField grad_J(const CoefficientField& W) const {
    CoefficientField g;
    value_and_gradient(W, g);
    return g;
  }

  /// Discrete H^1 norm: node values over the whole grid, centred
  /// derivatives on interior nodes.
  double h1_norm(const CoefficientField& W) const {
    const double h = grid().step(), inv2h = 0.5 / h;
    double s = 0;
    for (std::size_t j = 0; j < grid().ny(); ++j)
      for (std::size_t i = 0; i < grid().nx(); ++i) s += h * h * W.at(i, j).squaredNorm();
    for_interior([&](std::size_t i, std::size_t j) {
      s += h * h * ((W.at(i + 1, j) - W.at(i - 1, j)) * inv2h).squaredNorm();
      s += h * h * ((W.at(i, j + 1) - W.at(i, j - 1)) * inv2h).squaredNorm();
    });
    return std::sqrt(s);
  }

  template <typename Fn>
  void for_interior(Fn&& fn) const {
    for (std::size_t j = 1; j + 1 < grid().ny(); ++j)
      for (std::size_t i = 1; i + 1 < grid().nx(); ++i) fn(i, j);
  }

private:
  void check(const CoefficientField& W) const {
    if (!(W.grid == grid()) || W.N != N()) throw ConfigError("coefficient field does not match the functional");
  }

  SystemMatrices sys_;
  BoundaryCoefficients P_;
  double lambda_;
  std::vector<double> weight_;
};

} // namespace crte
