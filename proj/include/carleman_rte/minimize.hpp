#pragma once

#include <carleman_rte/config.hpp>
#include <carleman_rte/errors.hpp>
#include <carleman_rte/functional.hpp>
#include <carleman_rte/io.hpp>

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace crte {

struct MinimizeReport {
  int iterations = 0;
  double final_J = 0;
  std::vector<double> history;      ///< J after each accepted step; entry 0 is J(W0)
  std::string step_policy;
  bool converged = false;
  std::string stop_reason;
  double wall_seconds = 0;
  double final_grad_norm = 0;
  double max_h1_norm = 0;           ///< largest discrete H^1 norm over the iterates
  bool stayed_in_ball = true;       ///< max_h1_norm <= R_ball
  /// Geometric mean of ||W_n - W_min|| / ||W_{n-1} - W_min|| over the
  /// iterations before the final one; NaN with fewer than two iterations.
  double empirical_contraction = std::numeric_limits<double>::quiet_NaN();
};

struct MinimizeOptions {
  Method method = Method::quasi_newton;
  double stop_tol = 1e-2;
  int max_iters = 5000;
  double initial_step = 1e-2;
  int lbfgs_memory = 10;
  double R_ball = 100;
  /// Backtracking gives up once the step falls below this factor.
  double min_step = 1e-20;

  static MinimizeOptions from(const ExperimentConfig& c) {
    return {c.method, c.stop_tol, c.max_iters, c.initial_step, c.lbfgs_memory, c.R_ball};
  }
};

namespace detail {

/// J at x, or +inf when the iterate overflows.
inline double try_value_and_gradient(const Functional& f, const Eigen::VectorXd& x, Eigen::VectorXd& g) {
  try {
    CoefficientField grad;
    const double J = f.value_and_gradient(f.unpack(x), grad);
    g = f.pack(grad);
    return std::isfinite(J) ? J : std::numeric_limits<double>::infinity();
  } catch (const DivergenceError&) {
    return std::numeric_limits<double>::infinity();
  }
}

} // namespace detail

/// Minimizes J over the interior values of W, starting from W0.
///
/// gradient_descent: W_n = W_{n-1} - gamma grad J, gamma starting at
/// initial_step each iteration and halved until J decreases.
/// quasi_newton: L-BFGS direction with unit trial step and the same halving
/// rule. The first step, and any step after a non-descent direction, uses
/// the scaled gradient initial_step * grad / max(1, |grad|).
inline std::pair<CoefficientField, MinimizeReport> minimize(const Functional& f, const CoefficientField& W0,
                                                            const MinimizeOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  MinimizeReport rep;
  rep.step_policy = opt.method == Method::gradient_descent
                        ? "gradient descent, backtracking from " + format_double(opt.initial_step) + " by 1/2 on decrease"
                        : "L-BFGS (m=" + std::to_string(opt.lbfgs_memory) + "), backtracking from 1 by 1/2 on decrease";
  Eigen::VectorXd x = f.pack(W0);
  Eigen::VectorXd g;
  double J = detail::try_value_and_gradient(f, x, g);
  if (!std::isfinite(J)) throw DivergenceError("initial guess overflows the functional");
  rep.history.push_back(J);
  std::vector<Eigen::VectorXd> iterates{x};
  rep.max_h1_norm = f.h1_norm(f.unpack(x));

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
  rep.stop_reason = "iteration cap";
  while (true) {
    if (J < opt.stop_tol) {
      rep.converged = true;
      rep.stop_reason = "tolerance";
      break;
    }
    if (rep.iterations >= opt.max_iters) break;

    Eigen::VectorXd d;
    double t = 1;
    const double gnorm = g.norm();
    if (!(gnorm > 0)) {
      rep.stop_reason = "zero gradient";
      break;
    }
    auto scaled_gradient = [&] { return Eigen::VectorXd(-opt.initial_step * g / std::max(1.0, gnorm)); };
    if (opt.method == Method::gradient_descent) {
      d = -g;
      t = opt.initial_step;
    } else if (pairs.empty()) {
      d = scaled_gradient();
    } else {
      // two-loop recursion
      Eigen::VectorXd q = g;
      std::vector<double> alpha(pairs.size());
      for (std::size_t k = pairs.size(); k-- > 0;) {
        const auto& [s, y] = pairs[k];
        alpha[k] = s.dot(q) / y.dot(s);
        q -= alpha[k] * y;
      }
      const auto& [sl, yl] = pairs.back();
      q *= sl.dot(yl) / yl.dot(yl);
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto& [s, y] = pairs[k];
        const double beta = y.dot(q) / y.dot(s);
        q += (alpha[k] - beta) * s;
      }
      d = -q;
      if (!(d.dot(g) < 0)) {
        pairs.clear();
        d = scaled_gradient();
      }
    }

    Eigen::VectorXd x_new, g_new;
    double J_new = std::numeric_limits<double>::infinity();
    while (t >= opt.min_step) {
      x_new = x + t * d;
      J_new = detail::try_value_and_gradient(f, x_new, g_new);
      if (J_new < J) break;
      t *= 0.5;
    }
    if (!(J_new < J)) {
      if (opt.method == Method::quasi_newton && !pairs.empty()) {
        pairs.clear();  // retry once from the scaled gradient
        continue;
      }
      rep.stop_reason = "line search failed";
      break;
    }

    const Eigen::VectorXd s = x_new - x, y = g_new - g;
    if (opt.method == Method::quasi_newton && s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      pairs.emplace_back(s, y);
      if (static_cast<int>(pairs.size()) > opt.lbfgs_memory) pairs.pop_front();
    }
    x = std::move(x_new);
    g = std::move(g_new);
    J = J_new;
    ++rep.iterations;
    rep.history.push_back(J);
    iterates.push_back(x);
    rep.max_h1_norm = std::max(rep.max_h1_norm, f.h1_norm(f.unpack(x)));
  }

  rep.final_J = J;
  rep.final_grad_norm = g.norm();
  rep.stayed_in_ball = rep.max_h1_norm <= opt.R_ball;
  if (iterates.size() >= 3) {
    double log_sum = 0;
    int count = 0;
    for (std::size_t n = 1; n + 1 < iterates.size(); ++n) {
      const double prev = (iterates[n - 1] - x).norm(), cur = (iterates[n] - x).norm();
      if (prev > 0 && cur > 0) {
        log_sum += std::log(cur / prev);
        ++count;
      }
    }
    if (count > 0) rep.empirical_contraction = std::exp(log_sum / count);
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {f.unpack(x), rep};
}

inline std::pair<CoefficientField, MinimizeReport> minimize(const Functional& f, const CoefficientField& W0,
                                                            const ExperimentConfig& config) {
  return minimize(f, W0, MinimizeOptions::from(config));
}

} // namespace crte
