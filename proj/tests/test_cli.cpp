#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "support/oracles.hpp"

using namespace selinv;
using namespace selinv::cli;
using namespace selinv::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / ("selinv_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string write_mm(const std::string& name, const SparseMatrix& a) {
  const std::string path = (scratch() / name).string();
  std::ofstream out(path);
  write_matrix_market(out, a);
  return path;
}

std::string write_text(const std::string& name, const std::string& text) {
  const std::string path = (scratch() / name).string();
  std::ofstream(path) << text;
  return path;
}

RunConfig config(const std::string& input) {
  RunConfig cfg;
  cfg.input = input;
  cfg.workers = 2;
  return cfg;
}

std::string field(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
  return {};
}

struct Run {
  int code;
  std::string out;
};

Run run_cli(const std::string& args) {
  const char* exe = std::getenv("SELINV_CLI");
  REQUIRE(exe != nullptr);
  const std::string out = (scratch() / "stdout.txt").string();
  const int status = std::system((std::string(exe) + " " + args + " > " + out + " 2>/dev/null").c_str());
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::map<std::pair<Int, Int>, double> read_entries(const std::string& mm_text) {
  std::istringstream in(mm_text);
  const SparseMatrix m = read_matrix_market(in);
  std::map<std::pair<Int, Int>, double> out;
  for (Int j = 0; j < m.n(); ++j) {
    const auto rows = m.column_rows(j);
    const auto vals = m.column_values(j);
    for (std::size_t q = 0; q < rows.size(); ++q) out[{rows[q], j}] = vals[q];
  }
  return out;
}

}  // namespace

TEST_CASE("cli analyze", "[cli]") {
  SECTION("identity n=3") {
    const auto path = write_mm("eye.mtx", SparseMatrix::from_triplets(
                                              3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}}));
    std::ostringstream out;
    REQUIRE(cmd_analyze(config(path), out) == 0);
    CHECK(field(out.str(), "n") == "3");
    CHECK(field(out.str(), "nnz(A)") == "3");
    CHECK(field(out.str(), "nnz(L+U)") == "3");
    CHECK(field(out.str(), "supernodes") == "3");
    CHECK(field(out.str(), "etree_height") == "1");
  }
  SECTION("M5 natural order") {
    auto cfg = config(write_mm("m5.mtx", make_m5()));
    cfg.ordering = OrderingMethod::kNatural;
    std::ostringstream out;
    REQUIRE(cmd_analyze(cfg, out) == 0);
    CHECK(field(out.str(), "nnz(A)") == "17");
    CHECK(field(out.str(), "nnz(L+U)") == "17");
    CHECK(field(out.str(), "ordering") == "natural");
    CHECK(field(out.str(), "supernodes") == "2");
    cfg.max_supernode_size = 2;
    std::ostringstream capped;
    cmd_analyze(cfg, capped);
    CHECK(field(capped.str(), "supernodes") == "3");
    CHECK(field(capped.str(), "max_supernode_width") == "2");
  }
  SECTION("grid generator input") {
    std::ostringstream out;
    REQUIRE(cmd_analyze(config("grid:10x10x10"), out) == 0);
    CHECK(field(out.str(), "n") == "1000");
    CHECK(field(out.str(), "nnz(A)") == "6400");
  }
}

TEST_CASE("cli invert", "[cli]") {
  SECTION("diagonal, --diag-only") {
    auto cfg = config(write_mm("d.mtx", SparseMatrix::from_triplets(
                                            3, {{0, 0, 2.0}, {1, 1, 4.0}, {2, 2, 8.0}})));
    cfg.diag_only = true;
    std::ostringstream out, err;
    REQUIRE(cmd_invert(cfg, out, err) == 0);
    CHECK(out.str() == "0.5\n0.25\n0.125\n");
  }
  SECTION("2x2 coordinate output") {
    const auto path = write_mm("two.mtx", from_rows({{2, 1}, {1, 2}}));
    std::ostringstream out, err;
    REQUIRE(cmd_invert(config(path), out, err) == 0);
    const auto e = read_entries(out.str());
    REQUIRE(e.size() == 4);
    CHECK_THAT(e.at({0, 0}), Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-15));
    CHECK_THAT(e.at({1, 0}), Catch::Matchers::WithinAbs(-1.0 / 3.0, 1e-15));
    CHECK_THAT(e.at({0, 1}), Catch::Matchers::WithinAbs(-1.0 / 3.0, 1e-15));
    CHECK_THAT(e.at({1, 1}), Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-15));
  }
  SECTION("variants agree on M5; left-parallel is reproducible") {
    auto cfg = config(write_mm("m5.mtx", make_m5()));
    std::map<Variant, std::string> text;
    for (Variant v : {Variant::kLeft, Variant::kRight, Variant::kLeftParallel}) {
      cfg.variant = v;
      std::ostringstream out, err;
      REQUIRE(cmd_invert(cfg, out, err) == 0);
      text[v] = out.str();
    }
    const auto left = read_entries(text[Variant::kLeft]);
    const auto right = read_entries(text[Variant::kRight]);
    REQUIRE(left.size() == 17);
    REQUIRE(left.size() == right.size());
    for (const auto& [ij, v] : left) CHECK(std::abs(v - right.at(ij)) <= 1e-12);
    CHECK(text[Variant::kLeftParallel] == text[Variant::kLeft]);
  }
  SECTION("trace file for left-parallel") {
    auto cfg = config("grid:5x5");
    cfg.variant = Variant::kLeftParallel;
    cfg.trace = (scratch() / "trace.csv").string();
    std::ostringstream out, err;
    REQUIRE(cmd_invert(cfg, out, err) == 0);
    std::ifstream in(cfg.trace);
    std::string header;
    std::getline(in, header);
    CHECK(header == "kind,snode,target_row,target_col,start_ns,finish_ns,worker");
  }
}

TEST_CASE("cli verify", "[cli]") {
  SECTION("oracle mode") {
    for (const std::string& input : {write_mm("m5.mtx", make_m5()), std::string("grid:8x8")}) {
      for (Variant v : {Variant::kLeft, Variant::kRight, Variant::kLeftParallel}) {
        auto cfg = config(input);
        cfg.variant = v;
        std::ostringstream out, err;
        REQUIRE(cmd_verify(cfg, out, err) == 0);
        CHECK(field(out.str(), "mode") == "oracle");
        CHECK(std::stod(field(out.str(), "max_rel_err")) <= 1e-12);
        CHECK(out.str().find("PASS") != std::string::npos);
      }
    }
  }
  SECTION("sampled mode") {
    auto cfg = config("grid:12x12");
    cfg.dense_limit = 10;
    cfg.samples = 7;
    std::ostringstream out, err;
    REQUIRE(cmd_verify(cfg, out, err) == 0);
    CHECK(field(out.str(), "mode") == "sampled");
    CHECK(field(out.str(), "samples") == "7");
    CHECK(std::stod(field(out.str(), "max_rel_err")) <= 1e-12);
  }
  SECTION("an impossible tolerance fails with exit code 1") {
    auto cfg = config("grid:6x6");
    cfg.tolerance = -1.0;
    std::ostringstream out, err;
    CHECK(cmd_verify(cfg, out, err) == exit_code::kVerifyFailed);
    CHECK(out.str().find("FAIL") != std::string::npos);
    CHECK(err.str().find("worst entry") != std::string::npos);
  }
}

TEST_CASE("cli bench", "[cli]") {
  auto cfg = config("grid:6x6x6");
  for (const std::vector<Int>& counts : {std::vector<Int>{1}, std::vector<Int>{1, 1}}) {
    cfg.bench_workers = counts;
    std::ostringstream out;
    REQUIRE(cmd_bench(cfg, out) == 0);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "workers,seconds,speedup");
    Int rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      CHECK(line.rfind("1,", 0) == 0);
      const double speedup = std::stod(line.substr(line.rfind(',') + 1));
      CHECK(speedup > 0.0);
      if (rows == 1) CHECK(speedup == 1.0);
    }
    CHECK(rows == static_cast<Int>(counts.size()));
  }
}

TEST_CASE("cli binary: output and exit codes", "[cli]") {
  const auto m5 = write_mm("m5.mtx", make_m5());
  SECTION("analyze prints the statistics") {
    const Run r = run_cli("analyze " + m5 + " --order natural");
    CHECK(r.code == 0);
    CHECK(field(r.out, "nnz(L+U)") == "17");
  }
  SECTION("invert output is bit-reproducible") {
    const Run a = run_cli("invert " + m5 + " --variant left-parallel --workers 3");
    const Run b = run_cli("invert " + m5 + " --variant left-parallel --workers 3");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("%%MatrixMarket", 0) == 0);
  }
  SECTION("verify passes") {
    const Run r = run_cli("verify grid:8x8 --variant right");
    CHECK(r.code == 0);
    CHECK(r.out.find("PASS") != std::string::npos);
  }
  SECTION("pivot breakdown exits with 2") {
    const auto bad = write_mm("bad.mtx", from_rows({{1, 1, 0}, {1, 1, 1}, {0, 1, 3}}));
    CHECK(run_cli("invert " + bad + " --order natural").code == 2);
  }
  SECTION("unsupported configuration exits with 3") {
    CHECK(run_cli("invert " + m5 + " --variant sideways").code == 3);
    CHECK(run_cli("invert " + m5 + " --workers 0").code == 3);
    CHECK(run_cli("invert " + m5 + " --order external").code == 3);
  }
  SECTION("input errors exit with 4") {
    CHECK(run_cli("analyze " + (scratch() / "missing.mtx").string()).code == 4);
    const auto cplx = write_text(
        "c.mtx", "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n");
    CHECK(run_cli("analyze " + cplx).code == 4);
    const auto broken =
        write_text("b.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1\n");
    CHECK(run_cli("analyze " + broken).code == 4);
  }
  SECTION("help exits with 0") { CHECK(run_cli("--help").code == 0); }
}
