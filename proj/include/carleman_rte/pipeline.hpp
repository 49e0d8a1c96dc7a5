#pragma once

#include <carleman_rte/assembly.hpp>
#include <carleman_rte/basis.hpp>
#include <carleman_rte/config.hpp>
#include <carleman_rte/diagnostics.hpp>
#include <carleman_rte/errors.hpp>
#include <carleman_rte/forward.hpp>
#include <carleman_rte/functional.hpp>
#include <carleman_rte/io.hpp>
#include <carleman_rte/minimize.hpp>
#include <carleman_rte/phantom.hpp>
#include <carleman_rte/recover.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <regex>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace crte {

/// Parsed test identifier such as A5, Omega5 or A5n3: phantom name, inclusion
/// amplitude c and, for an n-suffix, the noise level in percent.
struct TestSpec {
  std::string id;
  std::string phantom;
  double c_value = 0;
  std::optional<double> sigma;
};

inline TestSpec parse_test_id(const std::string& id) {
  static const std::regex pattern(R"(^(A|Omega|SZ|S|Z|disk|custom)([0-9]+(?:\.[0-9]+)?)(?:n([0-9]+))?$)");
  std::smatch m;
  if (!std::regex_match(id, m, pattern))
    throw ConfigError("unknown test id '" + id + "' (expected e.g. A5, A30, Omega5, SZ5, A5n3, Omega5n5)");
  TestSpec t{id, m[1].str(), std::stod(m[2].str()), std::nullopt};
  if (m[3].matched) t.sigma = std::stod(m[3].str()) / 100.0;
  return t;
}

/// The reference test ids reproduced by the CLI.
inline const std::vector<std::string>& reference_test_ids() {
  static const std::vector<std::string> ids{"A5",  "A10",  "A15",    "A20",      "A30",     "Omega5",
                                            "SZ5", "A5n3", "A5n5",   "Omega5n3", "Omega5n5"};
  return ids;
}

/// Wall-clock seconds of named pipeline stages, in execution order.
class StageTimer {
public:
  template <typename Fn>
  auto time(const std::string& stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record(stage, start);
    } else {
      auto out = fn();
      record(stage, start);
      return out;
    }
  }

  const std::vector<std::pair<std::string, double>>& stages() const noexcept { return stages_; }

private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
    stages_.emplace_back(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }

  std::vector<std::pair<std::string, double>> stages_;
};

/// Synthetic measurement for one test: phantom on the forward grid, forward
/// solution and (possibly noisy) boundary data on the inversion grid.
struct SyntheticData {
  TestSpec test;
  double sigma = 0;
  Phantom phantom_fwd;
  Phantom phantom_inv;
  Radiance radiance;
  BoundaryTrace clean;
  BoundaryTrace trace;
};

inline SyntheticData make_data(const ExperimentConfig& cfg, const TestSpec& test,
                               const std::optional<std::filesystem::path>& mask_file = std::nullopt,
                               StageTimer* timer = nullptr) {
  cfg.validate();
  StageTimer local;
  StageTimer& t = timer ? *timer : local;
  const auto [gf, sf] = build_grids(cfg, GridPurpose::forward);
  const auto [gi, si] = build_grids(cfg, GridPurpose::inversion);
  SyntheticData d{test, test.sigma.value_or(cfg.sigma_noise), make_phantom(test.phantom, test.c_value, gf, mask_file),
                  make_phantom(test.phantom, test.c_value, gi, mask_file), {}, {}, {}};
  d.radiance = t.time("forward", [&] { return solve_forward(d.phantom_fwd.attenuation(cfg.mu_s_value), cfg); });
  d.clean = extract_boundary_data(d.radiance, cfg);
  d.trace = add_noise(d.clean, d.sigma, cfg.rng_seed, cfg.noise_draw);
  return d;
}

struct InversionResult {
  SystemMatrices system;
  BoundaryCoefficients boundary;
  CoefficientField W0;
  CoefficientField W;
  MinimizeReport report;
  ScalarField2D a;
};

inline InversionResult invert(const ExperimentConfig& cfg, const BoundaryTrace& trace, StageTimer* timer = nullptr) {
  cfg.validate();
  StageTimer local;
  StageTimer& t = timer ? *timer : local;
  const auto [gi, si] = build_grids(cfg, GridPurpose::inversion);
  const auto basis = build_basis(cfg.d, cfg.N);
  const ScalarField2D mu_s(gi, cfg.mu_s_value);
  auto P = t.time("projection", [&] { return project_boundary(log_boundary(trace), basis); });
  auto sys = t.time("assembly", [&] {
    return assemble_system(gi, si, basis, PhaseKernel{cfg.g_aniso, cfg.d}, mu_s, cfg.alpha_derivative);
  });
  const Functional f(sys, P, cfg.lambda);
  auto W0 = initial_guess(P);
  auto [W, rep] = t.time("minimize", [&] { return minimize(f, W0, cfg); });
  auto a = t.time("recover", [&] { return recover_a(W, f.system().tables, mu_s); });
  return {f.system(), f.boundary(), std::move(W0), std::move(W), std::move(rep), std::move(a)};
}

struct ManifestFile {
  std::string name;
  std::string checksum;  ///< FNV-1a 64-bit, hex
};

/// Record of one CLI run: everything needed to repeat it and to audit what
/// it wrote.
struct RunManifest {
  ExperimentConfig config;
  std::string command;
  std::string test_id;
  std::filesystem::path out_dir;
  std::vector<std::pair<std::string, double>> timings;
  std::vector<ManifestFile> files;
  std::string status = "ok";
  bool converged = true;

  /// Checksums the file (relative to out_dir) and lists it.
  void add(const std::filesystem::path& file) {
    files.push_back({std::filesystem::relative(file, out_dir).generic_string(), file_checksum(file)});
  }

  std::filesystem::path write() const {
    const auto path = out_dir / "manifest.txt";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << "command = " << command << "\n";
    out << "test_id = " << test_id << "\n";
    out << "status = " << status << "\n";
    out << "converged = " << (converged ? 1 : 0) << "\n";
    out << "\n[config]\n" << serialize_config(config);
    out << "\n[timings]\n";
    for (const auto& [stage, seconds] : timings) out << stage << " = " << format_double(seconds) << "\n";
    out << "\n[files]\n";
    for (const auto& f : files) out << f.name << " = fnv1a64:" << f.checksum << "\n";
    return path;
  }
};

/// 8-bit grayscale images of several fields on one grid, all mapped linearly
/// from their joint [min, max] to [0, 255]; top image row is y = b.
inline void write_heatmaps(const std::vector<std::pair<std::filesystem::path, const ScalarField2D*>>& fields) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& [path, f] : fields)
    for (const double v : f->values()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  for (const auto& [path, f] : fields) {
    const auto& g = f->grid();
    std::vector<std::uint8_t> px(g.size());
    for (std::size_t r = 0; r < g.ny(); ++r)
      for (std::size_t i = 0; i < g.nx(); ++i) {
        const double v = (*f)(i, g.ny() - 1 - r);
        const double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
        px[r * g.nx() + i] = static_cast<std::uint8_t>(std::lround(std::clamp(t, 0.0, 1.0) * 255));
      }
    write_pgm(path, g.nx(), g.ny(), px);
  }
}

inline void write_field_csv(const std::filesystem::path& path, const ScalarField2D& f, const std::string& column) {
  CsvWriter csv(path, {"x", "y", column});
  const auto& g = f.grid();
  for (std::size_t j = 0; j < g.ny(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i) csv.values(g.x[i], g.y[j], f(i, j));
}

inline void write_coefficients_csv(const std::filesystem::path& path, const CoefficientField& W) {
  CsvWriter csv(path, {"x", "y", "s", "w_s"});
  for (std::size_t j = 0; j < W.grid.ny(); ++j)
    for (std::size_t i = 0; i < W.grid.nx(); ++i)
      for (int s = 0; s < W.N; ++s) csv.values(W.grid.x[i], W.grid.y[j], s, W(i, j, s));
}

inline void write_history_csv(const std::filesystem::path& path, const MinimizeReport& rep) {
  CsvWriter csv(path, {"iteration", "J"});
  for (std::size_t n = 0; n < rep.history.size(); ++n) csv.values(n, rep.history[n]);
}

inline const char* side_name(BoundarySide s) {
  switch (s) {
  case BoundarySide::bottom: return "bottom";
  case BoundarySide::top: return "top";
  case BoundarySide::left: return "left";
  case BoundarySide::right: return "right";
  }
  return "?";
}

inline void write_trace_csv(const std::filesystem::path& path, const BoundaryTrace& t) {
  CsvWriter csv(path, {"side", "x", "y", "alpha", "g"});
  for (std::size_t n = 0; n < t.nodes.size(); ++n)
    for (std::size_t l = 0; l < t.n_alpha(); ++l)
      csv.values(side_name(t.nodes[n].side), t.grid.x[t.nodes[n].i], t.grid.y[t.nodes[n].j], t.sources[l], t(n, l));
}

inline void write_radiance_csv(const std::filesystem::path& path, const Radiance& u) {
  CsvWriter csv(path, {"x", "y", "alpha", "u"});
  for (std::size_t j = 0; j < u.grid.ny(); ++j)
    for (std::size_t i = 0; i < u.grid.nx(); ++i)
      for (std::size_t l = 0; l < u.n_alpha(); ++l) csv.values(u.grid.x[i], u.grid.y[j], u.sources[l], u(i, j, l));
}

/// Optimizer summary without wall-clock time, so that it is reproducible.
inline void write_report_csv(const std::filesystem::path& path, const MinimizeReport& rep) {
  CsvWriter csv(path, {"quantity", "value"});
  csv.values("iterations", rep.iterations);
  csv.values("final_J", rep.final_J);
  csv.values("converged", rep.converged);
  csv.values("stop_reason", rep.stop_reason);
  csv.values("step_policy", "\"" + rep.step_policy + "\"");
  csv.values("final_grad_norm", rep.final_grad_norm);
  csv.values("max_h1_norm", rep.max_h1_norm);
  csv.values("stayed_in_ball", rep.stayed_in_ball);
  csv.values("empirical_contraction", rep.empirical_contraction);
}

inline void write_quality_csv(const std::filesystem::path& path, const QualityReport& q) {
  CsvWriter csv(path, {"metric", "value"});
  csv.values("computed_contrast", q.computed_contrast);
  csv.values("relative_l2_error", q.relative_l2_error);
  csv.values("centroid_displacement", q.centroid_displacement);
  csv.values("jaccard", q.jaccard);
}

namespace detail {

inline void prepare_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
}

/// Runs `body`, then writes the manifest whether or not it succeeded;
/// errors are recorded as the manifest status and rethrown.
template <typename Body>
void with_manifest(RunManifest& man, Body&& body) {
  prepare_dir(man.out_dir);
  try {
    body();
  } catch (const std::exception& e) {
    man.status = std::string("error: ") + e.what();
    man.write();
    throw;
  }
  man.write();
}

} // namespace detail

/// `forward`: radiance tensor and boundary trace of a test phantom.
inline RunManifest cmd_forward(const ExperimentConfig& cfg, const TestSpec& test, const std::filesystem::path& out,
                               const std::optional<std::filesystem::path>& mask = std::nullopt) {
  RunManifest man{cfg, "forward", test.id, out, {}, {}};
  detail::with_manifest(man, [&] {
    StageTimer t;
    const auto data = make_data(cfg, test, mask, &t);
    t.time("write", [&] {
      write_radiance_csv(out / "radiance.csv", data.radiance);
      man.add(out / "radiance.csv");
      write_trace_csv(out / "boundary_trace.csv", data.trace);
      man.add(out / "boundary_trace.csv");
    });
    man.timings = t.stages();
  });
  return man;
}

/// `invert`: minimizer, recovered a(x) and optimizer history for the data of
/// a test phantom. The recovered image uses its own range.
inline RunManifest cmd_invert(const ExperimentConfig& cfg, const TestSpec& test, const std::filesystem::path& out,
                              const std::optional<std::filesystem::path>& mask = std::nullopt) {
  RunManifest man{cfg, "invert", test.id, out, {}, {}};
  detail::with_manifest(man, [&] {
    StageTimer t;
    const auto data = make_data(cfg, test, mask, &t);
    const auto inv = invert(cfg, data.trace, &t);
    man.converged = inv.report.converged;
    t.time("write", [&] {
      write_coefficients_csv(out / "w_min.csv", inv.W);
      write_field_csv(out / "a_recovered.csv", inv.a, "a");
      write_heatmaps({{out / "a_recovered.pgm", &inv.a}});
      write_history_csv(out / "history.csv", inv.report);
      write_report_csv(out / "minimize_report.csv", inv.report);
      for (const char* f : {"w_min.csv", "a_recovered.csv", "a_recovered.pgm", "history.csv", "minimize_report.csv"})
        man.add(out / f);
    });
    man.timings = t.stages();
  });
  return man;
}

struct TestRun {
  RunManifest manifest;
  QualityReport quality;
  MinimizeReport report;
};

/// `run-test`: phantom -> forward -> data (+ noise) -> projection -> minimize
/// -> recover -> score, with paired heatmaps on a joint scale.
inline TestRun cmd_run_test(const ExperimentConfig& cfg, const TestSpec& test, const std::filesystem::path& out,
                            const std::optional<std::filesystem::path>& mask = std::nullopt) {
  TestRun run{RunManifest{cfg, "run-test", test.id, out, {}, {}}, {}, {}};
  auto& man = run.manifest;
  detail::with_manifest(man, [&] {
    StageTimer t;
    const auto data = make_data(cfg, test, mask, &t);
    const auto inv = invert(cfg, data.trace, &t);
    const auto a_true = data.phantom_inv.attenuation(cfg.mu_s_value);
    run.quality = t.time("score", [&] { return score(a_true, inv.a, cfg.mu_s_value); });
    run.report = inv.report;
    man.converged = inv.report.converged;
    t.time("write", [&] {
      write_field_csv(out / "a_true.csv", a_true, "a");
      write_field_csv(out / "a_recovered.csv", inv.a, "a");
      write_heatmaps({{out / "a_true.pgm", &a_true}, {out / "a_recovered.pgm", &inv.a}});
      write_coefficients_csv(out / "w_min.csv", inv.W);
      write_history_csv(out / "history.csv", inv.report);
      write_report_csv(out / "minimize_report.csv", inv.report);
      write_quality_csv(out / "quality.csv", run.quality);
      for (const char* f : {"a_true.csv", "a_recovered.csv", "a_true.pgm", "a_recovered.pgm", "w_min.csv",
                            "history.csv", "minimize_report.csv", "quality.csv"})
        man.add(out / f);
    });
    man.timings = t.stages();
  });
  return run;
}

enum class SweepParameter { lambda, N };

inline SweepParameter parse_sweep_parameter(const std::string& s) {
  if (s == "lambda") return SweepParameter::lambda;
  if (s == "N") return SweepParameter::N;
  throw ConfigError("sweep parameter must be lambda or N, got '" + s + "'");
}

inline std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const auto comma = std::min(list.find(',', pos), list.size());
    const auto item = detail::trim(std::string_view(list).substr(pos, comma - pos));
    if (item.empty()) throw ConfigError("empty entry in value list '" + list + "'");
    out.push_back(detail::parse_double("values", item));
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigError("sweep needs at least one value");
  return out;
}

struct SweepRow {
  double value = 0;
  std::string status;
  std::optional<TestRun> run;
};

/// `sweep`: one run-test per value in out/<parameter>_<value>, a summary CSV
/// and a copy of each recovered heatmap. Failures are recorded per value.
inline std::vector<SweepRow> cmd_sweep(const ExperimentConfig& cfg, const TestSpec& test, SweepParameter param,
                                       const std::vector<double>& values, const std::filesystem::path& out,
                                       const std::optional<std::filesystem::path>& mask = std::nullopt) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  const std::string pname = param == SweepParameter::lambda ? "lambda" : "N";
  RunManifest man{cfg, "sweep " + pname, test.id, out, {}, {}};
  std::vector<SweepRow> rows;
  detail::with_manifest(man, [&] {
    for (const double v : values) {
      ExperimentConfig c = cfg;
      if (param == SweepParameter::lambda) c.lambda = v;
      else {
        if (v != std::floor(v)) throw ConfigError("N values must be integers");
        c.N = static_cast<int>(v);
      }
      const std::string tag = pname + "_" + format_double(v);
      SweepRow row{v, "ok", std::nullopt};
      const auto start = std::chrono::steady_clock::now();
      try {
        c.validate();
        row.run = cmd_run_test(c, test, out / tag, mask);
        if (!row.run->report.converged) row.status = "not converged";
        std::filesystem::copy_file(out / tag / "a_recovered.pgm", out / ("a_recovered_" + tag + ".pgm"),
                                   std::filesystem::copy_options::overwrite_existing);
        man.add(out / ("a_recovered_" + tag + ".pgm"));
      } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
      }
      man.timings.emplace_back(tag, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      rows.push_back(std::move(row));
    }
    CsvWriter csv(out / "sweep.csv", {pname, "status", "iterations", "final_J", "computed_contrast",
                                      "relative_l2_error", "centroid_displacement", "jaccard"});
    for (const auto& r : rows) {
      if (r.run)
        csv.values(r.value, r.status, r.run->report.iterations, r.run->report.final_J,
                   r.run->quality.computed_contrast, r.run->quality.relative_l2_error,
                   r.run->quality.centroid_displacement, r.run->quality.jaccard);
      else
        csv.values(r.value, "\"" + r.status + "\"", "", "", "", "", "", "");
    }
  });
  man.add(out / "sweep.csv");
  man.converged = std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.status == "ok"; });
  man.write();
  return rows;
}

/// Number of basis functions in the Fourier-decay table.
inline constexpr int fourier_table_size = 12;

/// `basis-table`: L2(Omega) norms of w_s for s = 0..11 on the reference
/// phantom, the tail ratio, and M_N and the Gram matrix for the configured N.
inline std::pair<RunManifest, FourierTable> cmd_basis_table(const ExperimentConfig& cfg, const TestSpec& test,
                                                            const std::filesystem::path& out,
                                                            const std::optional<std::filesystem::path>& mask =
                                                                std::nullopt) {
  RunManifest man{cfg, "basis-table", test.id, out, {}, {}};
  FourierTable table;
  detail::with_manifest(man, [&] {
    StageTimer t;
    const auto [gf, sf] = build_grids(cfg, GridPurpose::forward);
    const auto phantom = make_phantom(test.phantom, test.c_value, gf, mask);
    const auto u = t.time("forward", [&] { return solve_forward(phantom.attenuation(cfg.mu_s_value), cfg); });
    table = t.time("projection", [&] { return fourier_table(u, build_basis(cfg.d, fourier_table_size)); });
    t.time("write", [&] {
      {
        CsvWriter csv(out / "fourier_norms.csv", {"s", "l2_norm"});
        for (std::size_t s = 0; s < table.norms.size(); ++s) csv.values(s, table.norms[s]);
      }
      {
        CsvWriter csv(out / "fourier_summary.csv", {"quantity", "value"});
        csv.values("tail_ratio", table.tail_ratio);
      }
      const auto basis = build_basis(cfg.d, cfg.N);
      const auto M = deriv_matrix(basis);
      const auto G = basis_gram(basis);
      CsvWriter mcsv(out / "deriv_matrix.csv", {"k", "s", "a_sk"});
      CsvWriter gcsv(out / "gram.csv", {"k", "s", "value"});
      for (int k = 0; k < basis.N; ++k)
        for (int s = 0; s < basis.N; ++s) {
          mcsv.values(k, s, M.a(s, k));
          gcsv.values(k, s, G(k, s));
        }
    });
    for (const char* f : {"fourier_norms.csv", "fourier_summary.csv", "deriv_matrix.csv", "gram.csv"})
      man.add(out / f);
    man.timings = t.stages();
  });
  return {man, table};
}

} // namespace crte
