#pragma once

#include <carleman_rte/errors.hpp>
#include <carleman_rte/io.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace crte {

enum class AlphaDerivative { analytic, fd };
enum class NoiseDraw { per_node, per_node_alpha };
enum class Method { gradient_descent, quasi_newton };

inline std::string to_string(AlphaDerivative v) { return v == AlphaDerivative::analytic ? "analytic" : "fd"; }
inline std::string to_string(NoiseDraw v) { return v == NoiseDraw::per_node ? "per_node" : "per_node_alpha"; }
inline std::string to_string(Method v) { return v == Method::gradient_descent ? "gd" : "qn"; }

inline Method parse_method(std::string_view s) {
  if (s == "gd" || s == "gradient_descent") return Method::gradient_descent;
  if (s == "qn" || s == "quasi_newton") return Method::quasi_newton;
  throw ConfigError("unknown method '" + std::string(s) + "' (expected gd or qn)");
}

/// Every scalar parameter of the model, the discretization and the
/// optimizer. Defaults reproduce the published 2-D experiments.
struct ExperimentConfig {
  // geometry: Omega = (-A, A) x (a, b), sources on [-d, d] x {0}
  double A = 0.5;
  double a = 1.0;
  double b = 2.0;
  double d = 0.5;
  // physics
  double eps = 0.05;     ///< source mollifier radius
  double g_aniso = 0.5;  ///< Henyey-Greenstein anisotropy
  double mu_s_value = 5.0;
  // discretization
  int N = 3;
  double lambda = 5.0;
  double h_fwd = 1.0 / 40.0;
  double h_inv = 1.0 / 20.0;
  AlphaDerivative alpha_derivative = AlphaDerivative::analytic;
  // data
  double sigma_noise = 0.0;
  std::uint64_t rng_seed = 12345;
  NoiseDraw noise_draw = NoiseDraw::per_node;
  // optimizer
  double R_ball = 100.0;
  double stop_tol = 1e-2;
  Method method = Method::quasi_newton;
  int max_iters = 5000;
  double initial_step = 1e-2;
  int lbfgs_memory = 10;

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw ConfigError(std::string("invalid configuration: ") + what);
    };
    require(std::isfinite(A) && A > 0, "A > 0");
    require(std::isfinite(a) && std::isfinite(b) && 1.0 <= a && a < b, "1 <= a < b");
    require(std::isfinite(d) && d > 0, "d > 0");
    require(std::isfinite(eps) && eps > 0, "eps > 0");
    // the closest point of the closed domain to any source is at distance >= a
    require(eps < a, "eps < a (mollifier support must not meet the domain)");
    require(std::isfinite(g_aniso) && std::abs(g_aniso) < 1, "|g_aniso| < 1");
    require(std::isfinite(mu_s_value) && mu_s_value >= 0, "mu_s_value >= 0");
    require(N >= 1 && N <= 16, "1 <= N <= 16");
    require(std::isfinite(lambda) && lambda >= 0, "lambda >= 0");
    require(std::isfinite(h_fwd) && h_fwd > 0, "h_fwd > 0");
    require(std::isfinite(h_inv) && h_inv > 0, "h_inv > 0");
    require(std::isfinite(sigma_noise) && sigma_noise >= 0, "sigma_noise >= 0");
    require(std::isfinite(R_ball) && R_ball > 0, "R_ball > 0");
    require(std::isfinite(stop_tol) && stop_tol > 0, "stop_tol > 0");
    require(max_iters >= 0, "max_iters >= 0");
    require(std::isfinite(initial_step) && initial_step > 0, "initial_step > 0");
    require(lbfgs_memory >= 1, "lbfgs_memory >= 1");
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  }
  if (pos != v.size()) {
    // allow simple fractions such as 1/40
    const auto slash = v.find('/');
    if (slash == std::string::npos) throw ConfigError("key '" + key + "': not a number: '" + v + "'");
    const double num = parse_double(key, trim(v.substr(0, slash)));
    const double den = parse_double(key, trim(v.substr(slash + 1)));
    if (den == 0) throw ConfigError("key '" + key + "': division by zero");
    return num / den;
  }
  return out;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not an integer: '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("key '" + key + "': not an integer: '" + v + "'");
  return out;
}

} // namespace detail

/// Applies one `key = value` assignment. Unknown keys are an error.
inline void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_double;
  using detail::parse_int;
  if (key == "A") c.A = parse_double(key, value);
  else if (key == "a") c.a = parse_double(key, value);
  else if (key == "b") c.b = parse_double(key, value);
  else if (key == "d") c.d = parse_double(key, value);
  else if (key == "eps") c.eps = parse_double(key, value);
  else if (key == "g_aniso") c.g_aniso = parse_double(key, value);
  else if (key == "mu_s_value") c.mu_s_value = parse_double(key, value);
  else if (key == "N") c.N = static_cast<int>(parse_int(key, value));
  else if (key == "lambda") c.lambda = parse_double(key, value);
  else if (key == "h_fwd") c.h_fwd = parse_double(key, value);
  else if (key == "h_inv") c.h_inv = parse_double(key, value);
  else if (key == "alpha_derivative") {
    if (value == "analytic") c.alpha_derivative = AlphaDerivative::analytic;
    else if (value == "fd") c.alpha_derivative = AlphaDerivative::fd;
    else throw ConfigError("alpha_derivative must be analytic or fd");
  } else if (key == "sigma_noise") c.sigma_noise = parse_double(key, value);
  else if (key == "rng_seed") {
    const auto s = parse_int(key, value);
    if (s < 0) throw ConfigError("rng_seed must be non-negative");
    c.rng_seed = static_cast<std::uint64_t>(s);
  } else if (key == "noise_draw") {
    if (value == "per_node") c.noise_draw = NoiseDraw::per_node;
    else if (value == "per_node_alpha") c.noise_draw = NoiseDraw::per_node_alpha;
    else throw ConfigError("noise_draw must be per_node or per_node_alpha");
  } else if (key == "R_ball") c.R_ball = parse_double(key, value);
  else if (key == "stop_tol") c.stop_tol = parse_double(key, value);
  else if (key == "method") c.method = parse_method(value);
  else if (key == "max_iters") c.max_iters = static_cast<int>(parse_int(key, value));
  else if (key == "initial_step") c.initial_step = parse_double(key, value);
  else if (key == "lbfgs_memory") c.lbfgs_memory = static_cast<int>(parse_int(key, value));
  else throw ConfigError("unknown configuration key '" + key + "'");
}

/// Parses flat `key = value` text. `#` starts a comment; blank lines are
/// ignored. Keys not present keep their defaults.
inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const auto key = detail::trim(std::string_view(body).substr(0, eq));
    const auto value = detail::trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    set_config_value(c, key, value);
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

/// Writes every field, one per line, in a form `parse_config` reads back
/// to the identical configuration.
inline std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "# geometry\n"
     << "A = " << format_double(c.A) << "\n"
     << "a = " << format_double(c.a) << "\n"
     << "b = " << format_double(c.b) << "\n"
     << "d = " << format_double(c.d) << "\n"
     << "# physics\n"
     << "eps = " << format_double(c.eps) << "\n"
     << "g_aniso = " << format_double(c.g_aniso) << "\n"
     << "mu_s_value = " << format_double(c.mu_s_value) << "\n"
     << "# discretization\n"
     << "N = " << c.N << "\n"
     << "lambda = " << format_double(c.lambda) << "\n"
     << "h_fwd = " << format_double(c.h_fwd) << "\n"
     << "h_inv = " << format_double(c.h_inv) << "\n"
     << "alpha_derivative = " << to_string(c.alpha_derivative) << "\n"
     << "# data\n"
     << "sigma_noise = " << format_double(c.sigma_noise) << "\n"
     << "rng_seed = " << c.rng_seed << "\n"
     << "noise_draw = " << to_string(c.noise_draw) << "\n"
     << "# optimizer\n"
     << "R_ball = " << format_double(c.R_ball) << "\n"
     << "stop_tol = " << format_double(c.stop_tol) << "\n"
     << "method = " << to_string(c.method) << "\n"
     << "max_iters = " << c.max_iters << "\n"
     << "initial_step = " << format_double(c.initial_step) << "\n"
     << "lbfgs_memory = " << c.lbfgs_memory << "\n";
  return os.str();
}

} // namespace crte
