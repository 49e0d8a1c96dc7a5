#include <carleman_rte/pipeline.hpp>

#include "../support/ray_oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace crte;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> check;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

fs::path work_dir() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / "carleman_rte_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

/// run-test results shared between criteria, computed on first use.
const TestRun& run_once(const std::string& key, const ExperimentConfig& cfg, const std::string& test_id) {
  static std::map<std::string, TestRun> cache;
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, cmd_run_test(cfg, parse_test_id(test_id), work_dir() / key)).first;
  return it->second;
}

std::string describe(const TestRun& r) {
  return "J=" + fmt(r.report.final_J) + " after " + std::to_string(r.report.iterations) + " it, contrast=" +
         fmt(r.quality.computed_contrast) + ", rel L2=" + fmt(r.quality.relative_l2_error) +
         ", centroid=" + fmt(r.quality.centroid_displacement) + ", Jaccard=" + fmt(r.quality.jaccard);
}

Outcome basis_structure() {
  double gram = 0, diag = 0, upper = 0, det = 0;
  for (int N : {3, 12}) {
    const auto B = build_basis(0.5, N);
    const auto G = basis_gram(B);
    const auto M = deriv_matrix(B);
    gram = std::max(gram, (G - Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff());
    // strict-upper entries: the defining integral, and the value M stores
    const auto rule = gauss_legendre(48, -0.5, 0.5);
    for (int s = 0; s < N; ++s) {
      diag = std::max(diag, std::abs(M.a(s, s) - 1));
      for (int k = s + 1; k < N; ++k) {
        double integral = 0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q)
          integral += rule.weights[q] * B.eval_deriv(s, rule.nodes[q]) * B.eval(k, rule.nodes[q]);
        upper = std::max({upper, std::abs(integral), std::abs(M.a(s, k))});
      }
    }
    det = std::max(det, std::abs(M.entries.determinant() - 1));
  }
  return {gram <= 1e-10 && diag <= 1e-10 && upper <= 1e-10 && det <= 1e-9,
          "max |G - I|=" + fmt(gram) + ", max |a_ss - 1|=" + fmt(diag) + ", max |a_sk| (k>s)=" + fmt(upper) +
              ", |det M - 1|=" + fmt(det)};
}

Outcome beer_lambert() {
  ExperimentConfig c;
  c.mu_s_value = 0;
  const auto [g, s] = build_grids(c, GridPurpose::forward);
  const auto a = make_phantom("disk", 5, g).attenuation(0.0);
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
  return {worst <= 0.02, "max relative error " + fmt(worst) + " (tolerance 0.02)"};
}

Outcome positivity() {
  const ExperimentConfig c;
  const auto [g, s] = build_grids(c, GridPurpose::forward);
  const SourceModel f(c.eps);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t l = 0; l < s.size(); ++l) m = std::min(m, u0_baseline(f, g.x[i], g.y[0], s[l]));
  std::size_t violations = 0;
  std::string per_phantom;
  for (const auto& id : reference_test_ids()) {
    const auto t = parse_test_id(id);
    if (t.sigma) continue;
    const auto u = solve_forward(make_phantom(t.phantom, t.c_value, g).attenuation(c.mu_s_value), c);
    std::size_t bad = 0;
    double umin = std::numeric_limits<double>::infinity();
    for (const double v : u.values) {
      umin = std::min(umin, v);
      bad += !(v >= m);
    }
    violations += bad;
    per_phantom += " " + id + " (min u " + fmt(umin) + ", " + std::to_string(bad) + ")";
  }
  return {m > 0 && violations == 0, "m=" + fmt(m) + ";" + per_phantom + "; total violations " + std::to_string(violations)};
}

Outcome neumann() {
  ExperimentConfig c;
  c.h_fwd = 1.0 / 20;
  const auto [g, s] = build_grids(c, GridPurpose::forward);
  const auto model = make_forward_model(make_phantom("A", 5, g).attenuation(c.mu_s_value), c);
  const auto direct = solve_forward(model);
  const auto iter = solve_forward_neumann(model, 30);
  double worst = 0;
  for (std::size_t k = 0; k < direct.values.size(); ++k)
    worst = std::max(worst, std::abs(iter.values[k] - direct.values[k]) / direct.values[k]);
  return {worst <= 1e-8, "21^3 grid, 30 iterations: max relative difference " + fmt(worst) + " (tolerance 1e-8)"};
}

Outcome fourier_decay() {
  const auto [man, t] = cmd_basis_table(ExperimentConfig{}, parse_test_id("A5"), work_dir() / "basis_table");
  const double ref[3] = {5.7122, 1.6383, 0.1630};
  bool ok = t.tail_ratio < 0.05;
  std::string detail;
  for (int s = 0; s < 3; ++s) {
    const double r = t.norms[s] / ref[s];
    ok = ok && r >= 0.5 && r <= 2.0;
    detail += "||w_" + std::to_string(s) + "||=" + fmt(t.norms[s]) + " (ref " + fmt(ref[s]) + "), ";
  }
  return {ok, detail + "tail ratio " + fmt(t.tail_ratio) + " (must be < 0.05)"};
}

Outcome gradient_exactness() {
  const ExperimentConfig c;
  const auto data = make_data(c, parse_test_id("A5"));
  const auto [g, s] = build_grids(c, GridPurpose::inversion);
  const auto basis = build_basis(c.d, c.N);
  const auto P = project_boundary(log_boundary(data.trace), basis);
  const Functional f(assemble_system(g, s, basis, PhaseKernel{c.g_aniso, c.d}, ScalarField2D(g, c.mu_s_value),
                                     c.alpha_derivative),
                     P, c.lambda);
  const auto W0 = initial_guess(P);
  const Eigen::VectorXd x = f.pack(W0), grad = f.pack(f.grad_J(W0));
  std::mt19937_64 rng(20);
  std::normal_distribution<double> nd(0, 1);
  double worst = 0;
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd d(x.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = nd(rng);
    d.normalize();
    const double h = 1e-5;
    const double fd = (f.eval_J(f.unpack(x + h * d)) - f.eval_J(f.unpack(x - h * d))) / (2 * h);
    worst = std::max(worst, std::abs(grad.dot(d) - fd) / std::abs(fd));
  }
  return {worst < 1e-6, "20 directions, worst relative error " + fmt(worst) + " (tolerance 1e-6)"};
}

Outcome reconstruction_a5() {
  const auto& r = run_once("A5", ExperimentConfig{}, "A5");
  const auto& q = r.quality;
  const bool ok = r.report.final_J < 1e-2 && q.computed_contrast >= 1.6 && q.computed_contrast <= 2.4 &&
                  q.centroid_displacement <= 0.1 && q.relative_l2_error <= 0.3;
  return {ok, describe(r)};
}

Outcome carleman_ablation() {
  ExperimentConfig c0;
  c0.lambda = 0;
  const auto& r5 = run_once("A5", ExperimentConfig{}, "A5");
  const auto& r0 = run_once("A5_lambda0", c0, "A5");
  return {r5.quality.relative_l2_error < r0.quality.relative_l2_error,
          "rel L2 at lambda=5: " + fmt(r5.quality.relative_l2_error) +
              ", at lambda=0: " + fmt(r0.quality.relative_l2_error)};
}

Outcome truncation_plateau() {
  ExperimentConfig c1, c5;
  c1.N = 1;
  c5.N = 5;
  const auto& r1 = run_once("A5_N1", c1, "A5");
  const auto& r3 = run_once("A5", ExperimentConfig{}, "A5");
  const auto& r5 = run_once("A5_N5", c5, "A5");
  const double m3 = r3.quality.relative_l2_error, m5 = r5.quality.relative_l2_error;
  const double spread = std::abs(m3 - m5) / m5;
  return {r1.quality.jaccard < r3.quality.jaccard && spread <= 0.1,
          "Jaccard N=1: " + fmt(r1.quality.jaccard) + ", N=3: " + fmt(r3.quality.jaccard) +
              "; rel L2 N=3: " + fmt(m3) + ", N=5: " + fmt(m5) + " (spread " + fmt(spread) + ", limit 0.1)"};
}

Outcome noise_robustness() {
  bool ok = true;
  std::string detail;
  for (const char* id : {"A5n5", "Omega5n5"}) {
    const auto& r = run_once(std::string(id) + "_a", ExperimentConfig{}, id);
    const auto& q = r.quality;
    ok = ok && q.centroid_displacement <= 0.1 && std::abs(q.computed_contrast - 2.0) <= 0.35 * 2.0;
    detail += std::string(id) + ": centroid=" + fmt(q.centroid_displacement) +
              ", contrast=" + fmt(q.computed_contrast) + "; ";
  }
  return {ok, detail + "limits: centroid <= 0.1, contrast in [1.3, 2.7]"};
}

Outcome convexity_probe_report() {
  const ExperimentConfig c;
  const auto data = make_data(c, parse_test_id("A5"));
  const auto [g, s] = build_grids(c, GridPurpose::inversion);
  const auto basis = build_basis(c.d, c.N);
  const auto P = project_boundary(log_boundary(data.trace), basis);
  const auto sys =
      assemble_system(g, s, basis, PhaseKernel{c.g_aniso, c.d}, ScalarField2D(g, c.mu_s_value), c.alpha_derivative);
  const auto W0 = initial_guess(P);
  const auto at5 = convexity_probe(Functional(sys, P, 5.0), W0, 1.0, 100, 5);
  const auto at50 = convexity_probe(Functional(sys, P, 50.0), W0, 0.1, 100, 50);
  return {at5.pairs == 100 && at50.violations == 0,
          "lambda=5, radius 1: " + std::to_string(at5.violations) + "/100 violations (reported); lambda=50, radius 0.1: " +
              std::to_string(at50.violations) + "/100 violations (worst relative gap " + fmt(at50.worst_relative_gap) +
              ")"};
}

Outcome determinism() {
  const auto& a = run_once("A5n5_a", ExperimentConfig{}, "A5n5");
  const auto& b = run_once("A5n5_b", ExperimentConfig{}, "A5n5");
  std::size_t csv = 0, differing = 0;
  for (const auto& f : a.manifest.files) {
    if (fs::path(f.name).extension() != ".csv") continue;
    ++csv;
    if (read_file(a.manifest.out_dir / f.name) != read_file(b.manifest.out_dir / f.name)) ++differing;
  }
  return {csv > 0 && differing == 0,
          std::to_string(csv) + " CSV files compared, " + std::to_string(differing) + " differ"};
}

} // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "basis structure", 1, basis_structure},
      {2, "forward Beer-Lambert oracle", 30, beer_lambert},
      {3, "positivity", 1e9, positivity},
      {4, "Neumann/direct equivalence", 60, neumann},
      {5, "Fourier decay table", 300, fourier_decay},
      {6, "gradient exactness", 120, gradient_exactness},
      {7, "reconstruction A5", 600, reconstruction_a5},
      {8, "Carleman ablation", 1200, carleman_ablation},
      {9, "truncation plateau", 1e9, truncation_plateau},
      {10, "noise robustness", 1e9, noise_robustness},
      {11, "convexity probe", 1e9, convexity_probe_report},
      {12, "determinism", 1e9, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << "; "
              << fmt(secs) << " s";
    if (c.budget_seconds < 1e9) std::cout << " (budget " << fmt(c.budget_seconds) << " s" << (in_time ? ")" : ", exceeded)");
    std::cout << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
