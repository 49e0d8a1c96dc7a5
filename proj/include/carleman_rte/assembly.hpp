#pragma once

#include <carleman_rte/basis.hpp>
#include <carleman_rte/config.hpp>
#include <carleman_rte/errors.hpp>
#include <carleman_rte/forward.hpp>
#include <carleman_rte/grid.hpp>
#include <carleman_rte/quadrature.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

namespace crte {

/// ln g1 at every boundary node; throws DataError at the first
/// non-positive or non-finite value.
inline BoundaryTrace log_boundary(const BoundaryTrace& trace) {
  BoundaryTrace out = trace;
  for (std::size_t n = 0; n < trace.nodes.size(); ++n)
    for (std::size_t l = 0; l < trace.n_alpha(); ++l) {
      const double v = trace(n, l);
      if (!(v > 0) || !std::isfinite(v)) {
        const auto& node = trace.nodes[n];
        std::ostringstream os;
        os << "boundary value " << v << " is not positive at x=" << trace.grid.x[node.i]
           << " y=" << trace.grid.y[node.j] << " alpha=" << trace.sources[l];
        throw DataError(os.str());
      }
      out(n, l) = std::log(v);
    }
  return out;
}

/// N-vector field W(x) on a grid; index = (j * nx + i) * N + s.
struct CoefficientField {
  Grid2D grid;
  int N = 0;
  Eigen::VectorXd values;

  CoefficientField() = default;
  CoefficientField(Grid2D g, int n) : grid(std::move(g)), N(n), values(Eigen::VectorXd::Zero(grid.size() * n)) {}

  Eigen::Index offset(std::size_t i, std::size_t j) const {
    return static_cast<Eigen::Index>(grid.index(i, j)) * N;
  }
  auto at(std::size_t i, std::size_t j) { return values.segment(offset(i, j), N); }
  auto at(std::size_t i, std::size_t j) const { return values.segment(offset(i, j), N); }
  double operator()(std::size_t i, std::size_t j, int s) const { return values(offset(i, j) + s); }
  double& operator()(std::size_t i, std::size_t j, int s) { return values(offset(i, j) + s); }
};

/// Boundary coefficients P: p_s(x) = int ln g1(x, alpha) Psi_s(alpha) d alpha
/// at each boundary node, in boundary_nodes() order.
struct BoundaryCoefficients {
  Grid2D grid;
  int N = 0;
  std::vector<BoundaryNode> nodes;
  std::vector<Eigen::VectorXd> p;
};

inline BoundaryCoefficients project_boundary(const BoundaryTrace& log_trace, const Basis& basis) {
  if (std::abs(log_trace.sources.lo + basis.d) > 1e-12 || std::abs(log_trace.sources.hi - basis.d) > 1e-12)
    throw ConfigError("source grid does not span the basis interval [-d, d]");
  const auto tw = trapezoid_weights(log_trace.n_alpha(), log_trace.sources.step);
  Eigen::MatrixXd psi(static_cast<Eigen::Index>(log_trace.n_alpha()), basis.N);
  for (std::size_t l = 0; l < log_trace.n_alpha(); ++l)
    for (int s = 0; s < basis.N; ++s) psi(static_cast<Eigen::Index>(l), s) = tw[l] * basis.eval(s, log_trace.sources[l]);
  BoundaryCoefficients out{log_trace.grid, basis.N, log_trace.nodes, {}};
  out.p.reserve(log_trace.nodes.size());
  for (std::size_t n = 0; n < log_trace.nodes.size(); ++n) {
    const Eigen::Map<const Eigen::VectorXd> g(&log_trace.values[n * log_trace.n_alpha()],
                                              static_cast<Eigen::Index>(log_trace.n_alpha()));
    out.p.emplace_back(psi.transpose() * g);
  }
  return out;
}

/// Samples of Psi_s, Psi_s' and the weighted kernel on the source grid,
/// shared by every spatial node.
struct AlphaTables {
  SourceGrid sources;
  std::vector<double> tw;   ///< trapezoid weights in alpha
  Eigen::MatrixXd psi;      ///< (l, s) -> Psi_s(alpha_l)
  Eigen::MatrixXd dpsi;     ///< (l, s) -> Psi_s'(alpha_l)
  Eigen::MatrixXd kw;       ///< (l, q) -> K(alpha_l, beta_q) tw_q
  Eigen::MatrixXd dkw;      ///< (l, q) -> d_alpha K(alpha_l, beta_q) tw_q
  AlphaDerivative mode = AlphaDerivative::analytic;
};

/// In fd mode every alpha-derivative is a centred difference with the
/// source-grid step.
inline AlphaTables make_alpha_tables(const Basis& basis, const SourceGrid& sources, const PhaseKernel& kernel,
                                     AlphaDerivative mode) {
  const auto n = static_cast<Eigen::Index>(sources.size());
  AlphaTables t;
  t.sources = sources;
  t.mode = mode;
  t.tw = trapezoid_weights(sources.size(), sources.step);
  t.psi.resize(n, basis.N);
  t.dpsi.resize(n, basis.N);
  t.kw.resize(n, n);
  t.dkw.resize(n, n);
  const double delta = sources.step;
  for (Eigen::Index l = 0; l < n; ++l) {
    const double al = sources[static_cast<std::size_t>(l)];
    for (int s = 0; s < basis.N; ++s) {
      t.psi(l, s) = basis.eval(s, al);
      t.dpsi(l, s) = mode == AlphaDerivative::analytic
                         ? basis.eval_deriv(s, al)
                         : (basis.eval(s, al + delta) - basis.eval(s, al - delta)) / (2 * delta);
    }
    for (Eigen::Index q = 0; q < n; ++q) {
      const double be = sources[static_cast<std::size_t>(q)], w = t.tw[static_cast<std::size_t>(q)];
      t.kw(l, q) = kernel(al, be) * w;
      t.dkw(l, q) = (mode == AlphaDerivative::analytic ? kernel.d_alpha(al, be)
                                                        : (kernel(al + delta, be) - kernel(al - delta, be)) / (2 * delta)) *
                    w;
    }
  }
  return t;
}

/// Per-node matrices of the projected system D_N W_y + A_1 W_x + F(W) = 0.
struct NodeMatrices {
  Eigen::MatrixXd D;        ///< M_N + A_2(x)
  Eigen::MatrixXd A1;
  Eigen::MatrixXd D_inv;
  Eigen::VectorXd f_weight; ///< tw_l / nu_2(x, alpha_l)
  double mu_s = 0;
  double d_condition = 0;   ///< 2-norm condition number of D
};

struct SystemMatrices {
  Grid2D grid;
  Basis basis;
  AlphaTables tables;
  std::vector<NodeMatrices> nodes;  ///< one per grid node, index = grid.index(i, j)

  const NodeMatrices& at(std::size_t i, std::size_t j) const { return nodes[grid.index(i, j)]; }
};

/// Direction data at (x, y, alpha) in the selected derivative mode.
inline Direction direction_for(double x, double y, double alpha, AlphaDerivative mode, double delta) {
  return mode == AlphaDerivative::analytic ? direction_with_derivative(x, y, alpha)
                                           : direction_with_fd_derivative(x, y, alpha, delta);
}

/// Assembles D_N, A_1 and the F weights at one point. `zero_a2` drops the
/// (d nu_2 / nu_2) term, leaving D_N = M_N.
inline NodeMatrices assemble_matrices(double x, double y, double mu_s, const DerivMatrix& M, const AlphaTables& t,
                                      bool zero_a2 = false) {
  const int N = static_cast<int>(t.psi.cols());
  const auto na = t.psi.rows();
  NodeMatrices nm;
  nm.D = M.entries;
  nm.A1 = Eigen::MatrixXd::Zero(N, N);
  nm.f_weight.resize(na);
  nm.mu_s = mu_s;
  for (Eigen::Index l = 0; l < na; ++l) {
    const auto dir = direction_for(x, y, t.sources[static_cast<std::size_t>(l)], t.mode, t.sources.step);
    const double w = t.tw[static_cast<std::size_t>(l)];
    const double r2 = zero_a2 ? 0.0 : dir.dnu2 / dir.nu2;
    const double r_nu1 = dir.nu1 / dir.nu2, r_dnu1 = dir.dnu1 / dir.nu2;
    nm.f_weight(l) = w / dir.nu2;
    for (int k = 0; k < N; ++k)
      for (int s = 0; s < N; ++s) {
        nm.D(k, s) += w * r2 * t.psi(l, s) * t.psi(l, k);
        nm.A1(k, s) += w * (r_nu1 * t.dpsi(l, s) + r_dnu1 * t.psi(l, s)) * t.psi(l, k);
      }
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(nm.D);
  if (!lu.isInvertible()) {
    std::ostringstream os;
    os << "matrix D_N is singular at x=" << x << " y=" << y;
    throw NumericalError(os.str());
  }
  nm.D_inv = lu.inverse();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(nm.D);
  const auto& sv = svd.singularValues();
  nm.d_condition = sv(0) / sv(sv.size() - 1);
  return nm;
}

/// Precomputes the W-independent matrices on every node of `grid`.
inline SystemMatrices assemble_system(const Grid2D& grid, const SourceGrid& sources, const Basis& basis,
                                      const PhaseKernel& kernel, const ScalarField2D& mu_s, AlphaDerivative mode) {
  if (!(mu_s.grid() == grid)) throw ConfigError("scattering field is not on the inversion grid");
  SystemMatrices sm{grid, basis, make_alpha_tables(basis, sources, kernel, mode), {}};
  const auto M = deriv_matrix(basis);
  sm.nodes.reserve(grid.size());
  for (std::size_t j = 0; j < grid.ny(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i)
      sm.nodes.push_back(assemble_matrices(grid.x[i], grid.y[j], mu_s(i, j), M, sm.tables));
  return sm;
}

namespace detail {

inline void check_exponent(const Eigen::VectorXd& w) {
  const double m = w.cwiseAbs().maxCoeff();
  if (!(m <= 700.0)) throw DivergenceError("iterate diverged: |w| = " + std::to_string(m) + " overflows exp");
}

} // namespace detail

/// F_k(W) = -sum_l f_weight_l mu_s e^{-w_l} (T_l - w'_l S_l) Psi_k(alpha_l)
/// where S = Kw e^w and T = dKw e^w. When `jac` is given it receives dF/dW.
inline Eigen::VectorXd nonlinearity_F(const Eigen::VectorXd& W, const NodeMatrices& nm, const AlphaTables& t,
                                      Eigen::MatrixXd* jac = nullptr) {
  const int N = static_cast<int>(t.psi.cols());
  if (nm.mu_s == 0) {
    if (jac) *jac = Eigen::MatrixXd::Zero(N, N);
    return Eigen::VectorXd::Zero(N);
  }
  const Eigen::VectorXd w = t.psi * W;
  const Eigen::VectorXd dw = t.dpsi * W;
  detail::check_exponent(w);
  const Eigen::ArrayXd e = w.array().exp();
  const Eigen::ArrayXd einv = (-w.array()).exp();
  const Eigen::ArrayXd S = (t.kw * e.matrix()).array();
  const Eigen::ArrayXd T = (t.dkw * e.matrix()).array();
  const Eigen::ArrayXd G = einv * (T - dw.array() * S);
  const Eigen::ArrayXd c = -nm.mu_s * nm.f_weight.array();
  const Eigen::VectorXd F = t.psi.transpose() * (c * G).matrix();
  if (jac) {
    // dG_l/dW_s = -Psi_s G_l + e^{-w_l} (dKw E Psi - dpsi S - w' Kw E Psi)_{l s}
    const Eigen::MatrixXd EPsi = e.matrix().asDiagonal() * t.psi;
    const Eigen::MatrixXd dS = t.kw * EPsi, dT = t.dkw * EPsi;
    Eigen::MatrixXd dG = dT - dw.asDiagonal() * dS - S.matrix().asDiagonal() * t.dpsi;
    dG = einv.matrix().asDiagonal() * dG - G.matrix().asDiagonal() * t.psi;
    *jac = t.psi.transpose() * c.matrix().asDiagonal() * dG;
  }
  return F;
}

} // namespace crte
