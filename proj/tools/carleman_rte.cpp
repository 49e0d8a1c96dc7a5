#include <carleman_rte/pipeline.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;
constexpr int exit_not_converged = 4;

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::int64_t> seed;
  std::optional<double> lambda;
  std::optional<int> nbasis;
  std::optional<std::string> method;
  std::optional<int> max_iters;
  std::optional<double> stop_tol;
  std::string test = "A5";
  std::optional<std::string> mask;
  std::string param = "lambda";
  std::string values;
};

crte::ExperimentConfig load(const Options& o) {
  auto cfg = crte::load_config(o.config);
  if (o.seed) {
    if (*o.seed < 0) throw crte::ConfigError("--seed must be non-negative");
    cfg.rng_seed = static_cast<std::uint64_t>(*o.seed);
  }
  if (o.lambda) cfg.lambda = *o.lambda;
  if (o.nbasis) cfg.N = *o.nbasis;
  if (o.method) cfg.method = crte::parse_method(*o.method);
  if (o.max_iters) cfg.max_iters = *o.max_iters;
  if (o.stop_tol) cfg.stop_tol = *o.stop_tol;
  cfg.validate();
  return cfg;
}

std::optional<std::filesystem::path> mask_path(const Options& o) {
  if (o.mask) return std::filesystem::path(*o.mask);
  return std::nullopt;
}

void print_report(const crte::MinimizeReport& r) {
  std::cout << "iterations " << r.iterations << ", J = " << crte::format_double(r.final_J) << " (" << r.stop_reason
            << ")\n";
}

void print_quality(const crte::QualityReport& q) {
  std::cout << "contrast " << crte::format_double(q.computed_contrast) << ", relative L2 error "
            << crte::format_double(q.relative_l2_error) << ", centroid displacement "
            << crte::format_double(q.centroid_displacement) << ", Jaccard " << crte::format_double(q.jaccard) << "\n";
}

int run(const std::string& command, const Options& o) {
  const auto cfg = load(o);
  const auto test = crte::parse_test_id(o.test);
  const std::filesystem::path out(o.out);
  if (command == "forward") {
    crte::cmd_forward(cfg, test, out, mask_path(o));
    std::cout << "forward solution written to " << out.string() << "\n";
    return exit_ok;
  }
  if (command == "invert") {
    const auto man = crte::cmd_invert(cfg, test, out, mask_path(o));
    std::cout << "inversion written to " << out.string() << "\n";
    return man.converged ? exit_ok : exit_not_converged;
  }
  if (command == "run-test") {
    const auto r = crte::cmd_run_test(cfg, test, out, mask_path(o));
    print_report(r.report);
    print_quality(r.quality);
    return r.report.converged ? exit_ok : exit_not_converged;
  }
  if (command == "sweep") {
    const auto rows = crte::cmd_sweep(cfg, test, crte::parse_sweep_parameter(o.param), crte::parse_values(o.values),
                                      out, mask_path(o));
    int code = exit_ok;
    for (const auto& r : rows) {
      std::cout << o.param << " = " << crte::format_double(r.value) << ": " << r.status << "\n";
      if (r.run) print_quality(r.run->quality);
      if (!r.run) code = exit_numerical;
      else if (code == exit_ok && r.status != "ok") code = exit_not_converged;
    }
    return code;
  }
  const auto [man, table] = crte::cmd_basis_table(cfg, test, out, mask_path(o));
  for (std::size_t s = 0; s < table.norms.size(); ++s)
    std::cout << "||w_" << s << "|| = " << crte::format_double(table.norms[s]) << "\n";
  std::cout << "tail ratio " << crte::format_double(table.tail_ratio) << "\n";
  return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward radiative transfer and convexification inversion for the attenuation coefficient"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "key = value configuration file")->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "noise seed");
    sub->add_option("--lambda", o.lambda, "Carleman parameter");
    sub->add_option("--nbasis", o.nbasis, "number of basis functions N");
    sub->add_option("--method", o.method, "optimizer")->check(CLI::IsMember({"gd", "qn"}));
    sub->add_option("--test", o.test, "test id: A5, A10, A15, A20, A30, Omega5, SZ5, A5n3, A5n5, Omega5n3, Omega5n5");
    sub->add_option("--mask", o.mask, "PBM/PGM mask for the custom phantom");
  };

  auto* forward = app.add_subcommand("forward", "solve the forward problem and write radiance and boundary data");
  auto* invert = app.add_subcommand("invert", "reconstruct a(x) from synthetic boundary data");
  auto* run_test = app.add_subcommand("run-test", "end-to-end reconstruction of a test phantom with scoring");
  auto* sweep = app.add_subcommand("sweep", "run-test over several values of lambda or N");
  auto* basis_table = app.add_subcommand("basis-table", "L2 norms of the Fourier coefficients of ln u");
  for (auto* sub : {forward, invert, run_test, sweep, basis_table}) common(sub);
  for (auto* sub : {invert, run_test, sweep}) {
    sub->add_option("--max-iters", o.max_iters, "iteration cap of the optimizer");
    sub->add_option("--stop-tol", o.stop_tol, "stop once J falls below this value");
  }
  sweep->add_option("--param", o.param, "parameter to sweep")->check(CLI::IsMember({"lambda", "N"}));
  sweep->add_option("--values", o.values, "comma-separated values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  try {
    return run(app.get_subcommands().front()->get_name(), o);
  } catch (const crte::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_numerical;
  }
}
