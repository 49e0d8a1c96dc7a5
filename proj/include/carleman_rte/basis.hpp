#pragma once

#include <carleman_rte/errors.hpp>
#include <carleman_rte/quadrature.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace crte {

/// Largest supported basis size; Gram-Schmidt on {alpha^s e^alpha} degrades
/// beyond this in double precision.
inline constexpr int max_basis_size = 16;

/// Exact moment  int_{-d}^{d} alpha^j e^{2 alpha} d alpha  from the power
/// series of e^{2 alpha}. Odd powers vanish, so every term is positive and
/// the sum has no cancellation.
inline double exp_moment(int j, double d) {
  double sum = 0;
  double coeff = 1;  // 2^k / k!
  for (int k = 0; k < 200; ++k) {
    if (k > 0) coeff *= 2.0 / k;
    const int n = j + k;
    if (n % 2 == 0) {
      const double term = coeff * 2.0 * std::pow(d, n + 1) / (n + 1);
      sum += term;
      if (k > 10 && term < 1e-18 * sum) break;
    }
  }
  return sum;
}

namespace detail {

/// Legendre P_0..P_{n-1} and their derivatives at t.
inline void legendre_with_derivative(int n, double t, std::vector<double>& p, std::vector<double>& dp) {
  p.assign(static_cast<std::size_t>(n), 0.0);
  dp.assign(static_cast<std::size_t>(n), 0.0);
  if (n == 0) return;
  p[0] = 1;
  if (n == 1) return;
  p[1] = t;
  dp[1] = 1;
  for (int k = 2; k < n; ++k) {
    p[k] = ((2.0 * k - 1) * t * p[k - 1] - (k - 1.0) * p[k - 2]) / k;
    dp[k] = dp[k - 2] + (2.0 * k - 1) * p[k - 1];
  }
}

/// Monomial coefficients (ascending) of the Legendre polynomials P_0..P_{n-1}.
inline std::vector<std::vector<double>> legendre_monomials(int n) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out[k].assign(static_cast<std::size_t>(k) + 1, 0.0);
  if (n > 0) out[0][0] = 1;
  if (n > 1) out[1][1] = 1;
  for (int k = 2; k < n; ++k) {
    for (int i = 0; i < k; ++i) out[k][i + 1] += (2.0 * k - 1) / k * out[k - 1][i];
    for (int i = 0; i < k - 1; ++i) out[k][i] -= (k - 1.0) / k * out[k - 2][i];
  }
  return out;
}

inline double horner(const std::vector<double>& c, double x) {
  double v = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

} // namespace detail

/// Orthonormal basis Psi_s(alpha) = P_s(alpha) e^alpha of L2(-d, d), s < N,
/// obtained by Gram-Schmidt from {alpha^s e^alpha}.
///
/// Internally each P_s is held in the Legendre basis of t = alpha / d,
/// where the Gram matrix is well conditioned; the ascending monomial
/// coefficients in alpha are derived from that representation.
struct Basis {
  double d = 0.5;
  int N = 0;
  /// legendre(i, s): coefficient of L_i(alpha/d) in P_s.
  Eigen::MatrixXd legendre;
  /// poly_coeffs[s][i]: coefficient of alpha^i in P_s.
  std::vector<std::vector<double>> poly_coeffs;
  /// deriv_poly_coeffs[s][i]: coefficient of alpha^i in P_s + P_s'.
  std::vector<std::vector<double>> deriv_poly_coeffs;

  void check_index(int s) const {
    if (s < 0 || s >= N)
      throw std::out_of_range("basis index " + std::to_string(s) + " out of range [0, " + std::to_string(N) + ")");
  }

  double eval(int s, double alpha) const {
    check_index(s);
    return detail::horner(poly_coeffs[s], alpha) * std::exp(alpha);
  }

  double eval_deriv(int s, double alpha) const {
    check_index(s);
    return detail::horner(deriv_poly_coeffs[s], alpha) * std::exp(alpha);
  }

  /// Psi_s and Psi_s' for every s at alpha via the Legendre representation.
  void eval_all(double alpha, std::vector<double>& value, std::vector<double>& deriv) const {
    std::vector<double> p, dp;
    detail::legendre_with_derivative(N, alpha / d, p, dp);
    const double e = std::exp(alpha);
    value.assign(static_cast<std::size_t>(N), 0.0);
    deriv.assign(static_cast<std::size_t>(N), 0.0);
    for (int s = 0; s < N; ++s) {
      double v = 0, dv = 0;
      for (int i = 0; i <= s; ++i) {
        v += legendre(i, s) * p[i];
        dv += legendre(i, s) * dp[i] / d;
      }
      value[s] = v * e;
      deriv[s] = (v + dv) * e;
    }
  }
};

inline Basis build_basis(double d, int N) {
  if (!(d > 0)) throw ConfigError("basis half-interval d must be positive");
  if (N < 1) throw ConfigError("basis size N must be >= 1");
  if (N > max_basis_size)
    throw ConfigError("basis size N=" + std::to_string(N) + " unsupported (Gram-Schmidt is unstable beyond " +
                      std::to_string(max_basis_size) + ")");

  // Gram matrix of L_i(alpha/d) e^alpha; the integrand is a polynomial of
  // degree < 2N times e^{2 alpha}, integrated to rounding by 64 points.
  const auto rule = gauss_legendre(64, -d, d);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(N, N);
  std::vector<double> p, dp;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    detail::legendre_with_derivative(N, rule.nodes[q] / d, p, dp);
    const double w = rule.weights[q] * std::exp(2 * rule.nodes[q]);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) gram(i, j) += w * p[i] * p[j];
  }

  Basis basis;
  basis.d = d;
  basis.N = N;
  basis.legendre = Eigen::MatrixXd::Zero(N, N);
  const int passes = N > 6 ? 2 : 1;
  for (int s = 0; s < N; ++s) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(N, s);
    for (int pass = 0; pass < passes; ++pass) {
      for (int k = 0; k < s; ++k) {
        const auto qk = basis.legendre.col(k);
        v -= (qk.transpose() * gram * v).value() * qk;
      }
    }
    const double norm = std::sqrt((v.transpose() * gram * v).value());
    basis.legendre.col(s) = v / norm;
  }

  const auto mono = detail::legendre_monomials(N);
  basis.poly_coeffs.assign(static_cast<std::size_t>(N), {});
  basis.deriv_poly_coeffs.assign(static_cast<std::size_t>(N), {});
  for (int s = 0; s < N; ++s) {
    std::vector<double> c(static_cast<std::size_t>(s) + 1, 0.0);
    for (int i = 0; i <= s; ++i)
      for (int k = 0; k <= i; ++k) c[k] += basis.legendre(i, s) * mono[i][k] / std::pow(d, k);
    std::vector<double> dc = c;
    for (int k = 1; k <= s; ++k) dc[k - 1] += k * c[k];
    basis.poly_coeffs[s] = std::move(c);
    basis.deriv_poly_coeffs[s] = std::move(dc);
  }
  return basis;
}

/// N x N matrix with entry (k, s) = a_{s,k} = int Psi_s' Psi_k d alpha, so
/// that (M W)_k = sum_s a_{s,k} w_s.
struct DerivMatrix {
  Eigen::MatrixXd entries;
  /// a_{s,k} in the indexing of the defining integral.
  double a(int s, int k) const { return entries(k, s); }
};

/// Entries with k > s are stored as exact zeros: Psi_s' = (P_s + P_s') e^alpha
/// has degree s, so it is orthogonal to Psi_k. The remaining entries use
/// 64-point Gauss-Legendre.
inline DerivMatrix deriv_matrix(const Basis& basis) {
  const int N = basis.N;
  const auto rule = gauss_legendre(64, -basis.d, basis.d);
  DerivMatrix m{Eigen::MatrixXd::Zero(N, N)};
  std::vector<double> v, dv;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    basis.eval_all(rule.nodes[q], v, dv);
    for (int s = 0; s < N; ++s)
      for (int k = 0; k <= s; ++k) m.entries(k, s) += rule.weights[q] * dv[s] * v[k];
  }
  return m;
}

/// Gram matrix int Psi_s Psi_k d alpha by 64-point Gauss-Legendre.
inline Eigen::MatrixXd basis_gram(const Basis& basis) {
  const int N = basis.N;
  const auto rule = gauss_legendre(64, -basis.d, basis.d);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(N, N);
  std::vector<double> v, dv;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    basis.eval_all(rule.nodes[q], v, dv);
    for (int k = 0; k < N; ++k)
      for (int s = 0; s < N; ++s) g(k, s) += rule.weights[q] * v[s] * v[k];
  }
  return g;
}

} // namespace crte
