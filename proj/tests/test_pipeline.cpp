#include <carleman_rte/pipeline.hpp>

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>

using namespace crte;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("carleman_rte_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) { return read_file(p); }

ExperimentConfig quick_config() {
  ExperimentConfig c;
  c.max_iters = 15;
  return c;
}

int run_cli(const std::string& args) {
  const char* exe = std::getenv("CARLEMAN_RTE_CLI");
  REQUIRE(exe != nullptr);
  const std::string cmd = std::string("\"") + exe + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("test ids") {
  for (const auto& id : reference_test_ids()) CHECK_NOTHROW(parse_test_id(id));
  const auto t = parse_test_id("Omega5n3");
  CHECK(t.phantom == "Omega");
  CHECK(t.c_value == 5.0);
  REQUIRE(t.sigma);
  CHECK(*t.sigma == 0.03);
  const auto a30 = parse_test_id("A30");
  CHECK(a30.c_value == 30.0);
  CHECK_FALSE(a30.sigma);
  CHECK(parse_test_id("SZ5").phantom == "SZ");
  CHECK_THROWS_AS(parse_test_id("B5"), ConfigError);
  CHECK_THROWS_AS(parse_test_id("A"), ConfigError);
  CHECK_THROWS_AS(parse_test_id("A5x"), ConfigError);
}

TEST_CASE("sweep value lists") {
  CHECK(parse_values("0,1, 2.5") == std::vector<double>{0, 1, 2.5});
  CHECK_THROWS_AS(parse_values(""), ConfigError);
  CHECK_THROWS_AS(parse_values("1,,2"), ConfigError);
  CHECK(parse_sweep_parameter("N") == SweepParameter::N);
  CHECK_THROWS_AS(parse_sweep_parameter("h"), ConfigError);
}

TEST_CASE("csv and pgm writers") {
  const auto dir = fresh_dir("writers");
  {
    CsvWriter csv(dir / "t.csv", {"a", "b"});
    csv.values(1, 0.1);
    csv.values("x", true);
  }
  CHECK(slurp(dir / "t.csv") == "a,b\n1,0.1\nx,1\n");
  write_pgm(dir / "t.pgm", 2, 1, {0, 255});
  CHECK(slurp(dir / "t.pgm") == std::string("P5\n2 1\n255\n") + char(0) + char(255));
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-20) == "1e-20");
}

TEST_CASE("paired heatmaps share one scale") {
  const auto dir = fresh_dir("heatmaps");
  const ExperimentConfig c;
  const auto g = build_grids(c, GridPurpose::inversion).first;
  const ScalarField2D lo(g, 5.0), hi(g, 10.0);
  write_heatmaps({{dir / "lo.pgm", &lo}, {dir / "hi.pgm", &hi}});
  const auto l = slurp(dir / "lo.pgm"), h = slurp(dir / "hi.pgm");
  const std::string header = "P5\n21 21\n255\n";
  REQUIRE(l.size() == header.size() + 441);
  CHECK(l.substr(0, header.size()) == header);
  CHECK(static_cast<unsigned char>(l.back()) == 0);
  CHECK(static_cast<unsigned char>(h.back()) == 255);
}

TEST_CASE("basis table writes norms and a complete manifest") {
  const auto dir = fresh_dir("basis_table");
  const auto [man, table] = cmd_basis_table(ExperimentConfig{}, parse_test_id("A5"), dir);
  REQUIRE(table.norms.size() == 12);
  CHECK(table.tail_ratio < 0.05);
  for (const auto& f : man.files) {
    INFO(f.name);
    CHECK(fs::exists(dir / f.name));
    CHECK(f.checksum == file_checksum(dir / f.name));
  }
  CHECK(man.files.size() == 4);
  const auto text = slurp(dir / "manifest.txt");
  CHECK(text.find("[config]") != std::string::npos);
  CHECK(text.find("fourier_norms.csv = fnv1a64:") != std::string::npos);
  const auto csv = slurp(dir / "fourier_norms.csv");
  CHECK(csv.rfind("s,l2_norm\n", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);
}

TEST_CASE("run-test writes every output and is reproducible") {
  const auto d1 = fresh_dir("run1"), d2 = fresh_dir("run2");
  const auto test = parse_test_id("A5n5");
  const auto r1 = cmd_run_test(quick_config(), test, d1);
  const auto r2 = cmd_run_test(quick_config(), test, d2);
  CHECK(r1.report.iterations == 15);
  CHECK_FALSE(r1.manifest.converged);
  REQUIRE(r1.manifest.files.size() == 8);
  for (const auto& f : r1.manifest.files) {
    INFO(f.name);
    CHECK(slurp(d1 / f.name) == slurp(d2 / f.name));
  }
  const auto manifest = slurp(d1 / "manifest.txt");
  CHECK(manifest.find("status = ok") != std::string::npos);
  CHECK(manifest.find("minimize = ") != std::string::npos);
  std::istringstream cfg_text(manifest.substr(manifest.find("[config]") + 9));
  std::ostringstream config_only;
  for (std::string line; std::getline(cfg_text, line) && !line.empty();) config_only << line << "\n";
  std::istringstream back(config_only.str());
  CHECK(serialize_config(parse_config(back)) == serialize_config(quick_config()));
}

TEST_CASE("sweep records each value") {
  const auto dir = fresh_dir("sweep");
  ExperimentConfig c = quick_config();
  c.max_iters = 3;
  const auto rows = cmd_sweep(c, parse_test_id("A5"), SweepParameter::N, {1, 2}, dir);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) CHECK(r.run.has_value());
  CHECK(fs::exists(dir / "sweep.csv"));
  CHECK(fs::exists(dir / "a_recovered_N_1.pgm"));
  CHECK(fs::exists(dir / "N_2" / "quality.csv"));
  const auto csv = slurp(dir / "sweep.csv");
  CHECK(csv.rfind("N,status,iterations,final_J,computed_contrast", 0) == 0);
}

TEST_CASE("command line exit codes") {
  const auto dir = fresh_dir("cli");
  {
    std::ofstream(dir / "ok.cfg") << "lambda = 5\nmax_iters = 3\n";
    std::ofstream(dir / "bad.cfg") << "lamda = 5\n";
  }
  const std::string ok = "--config \"" + (dir / "ok.cfg").string() + "\"";
  const std::string bad = "--config \"" + (dir / "bad.cfg").string() + "\"";
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("run-test " + bad + " --out \"" + (dir / "x").string() + "\"") == 2);
  CHECK(run_cli("run-test " + ok + " --test B5 --out \"" + (dir / "x").string() + "\"") == 2);
  CHECK(run_cli("run-test " + ok + " --method newton") == 2);
  CHECK(run_cli("basis-table " + ok + " --out \"" + (dir / "table").string() + "\"") == 0);
  CHECK(run_cli("run-test " + ok + " --out \"" + (dir / "run").string() + "\"") == 4);
  CHECK(run_cli("invert " + ok + " --stop-tol 1e30 --out \"" + (dir / "inv").string() + "\"") == 0);
  CHECK(fs::exists(dir / "inv" / "w_min.csv"));
  CHECK(run_cli("forward " + ok + " --test disk5 --out \"" + (dir / "fwd").string() + "\"") == 0);
  CHECK(fs::exists(dir / "fwd" / "radiance.csv"));
  CHECK(fs::exists(dir / "fwd" / "boundary_trace.csv"));
}
