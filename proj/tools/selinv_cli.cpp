#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace selinv;
using namespace selinv::cli;

namespace {

void add_common(CLI::App* sub, RunConfig& cfg) {
  static const std::map<std::string, OrderingMethod> orders{
      {"natural", OrderingMethod::kNatural},
      {"mindeg", OrderingMethod::kMinimumDegree},
      {"external", OrderingMethod::kExternal}};
  sub->add_option("input", cfg.input, "Matrix Market file or grid:AxBxC")->required();
  sub->add_option("--order", cfg.ordering, "Fill-reducing ordering")
      ->transform(CLI::CheckedTransformer(orders, CLI::ignore_case))
      ->default_str("mindeg");
  sub->add_option("--perm", cfg.permutation_file,
                  "Permutation file for --order external (0-based, one per line)");
  sub->add_option("--max-snode", cfg.max_supernode_size, "Maximum supernode width")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void add_numeric(CLI::App* sub, RunConfig& cfg) {
  static const std::map<std::string, Variant> variants{
      {"left", Variant::kLeft},
      {"right", Variant::kRight},
      {"left-parallel", Variant::kLeftParallel}};
  static const std::map<std::string, ModeChoice> modes{
      {"auto", ModeChoice::kAuto},
      {"symmetric", ModeChoice::kSymmetric},
      {"general", ModeChoice::kGeneral}};
  sub->add_option("--variant", cfg.variant, "Selected inversion variant")
      ->transform(CLI::CheckedTransformer(variants, CLI::ignore_case))
      ->default_str("left");
  sub->add_option("--workers", cfg.workers,
                  "Worker threads for left-parallel (default: SELINV_NUM_WORKERS or cores)")
      ->capture_default_str();
  sub->add_option("--mode", cfg.mode, "Factorization mode")
      ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case))
      ->default_str("auto");
  sub->add_option("--trace", cfg.trace, "Write the task event log (CSV) to this file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supernodal selected inversion"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* analyze = app.add_subcommand("analyze", "Ordering, fill and supernode statistics");
  add_common(analyze, cfg);

  auto* invert = app.add_subcommand("invert", "Write the selected entries of the inverse");
  add_common(invert, cfg);
  add_numeric(invert, cfg);
  invert->add_option("--out", cfg.output, "Output file (default: stdout)");
  invert->add_flag("--diag-only", cfg.diag_only, "Write only the diagonal, one value per line");

  auto* verify = app.add_subcommand("verify", "Check the selected inverse against an oracle");
  add_common(verify, cfg);
  add_numeric(verify, cfg);
  verify->add_option("--dense-limit", cfg.dense_limit, "Largest n for the dense oracle")
      ->capture_default_str();
  verify->add_option("--samples", cfg.samples, "Probe columns in sampled mode")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify->add_option("--seed", cfg.seed, "Seed for probe column selection")
      ->capture_default_str();
  verify->add_option("--tol", cfg.tolerance, "Pass threshold on the relative error")
      ->capture_default_str();

  auto* bench = app.add_subcommand("bench", "Strong scaling of the left-parallel inversion");
  add_common(bench, cfg);
  bench->add_option("--workers", cfg.bench_workers, "Comma-separated worker counts")
      ->delimiter(',')
      ->default_str("1");
  bench->add_option("--runs", cfg.bench_runs, "Timed runs per worker count (at least 3)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code::kUnsupported;
  }

  return guarded(
      [&] {
        if (analyze->parsed()) return cmd_analyze(cfg, std::cout);
        if (invert->parsed()) return cmd_invert(cfg, std::cout, std::cerr);
        if (verify->parsed()) return cmd_verify(cfg, std::cout, std::cerr);
        return cmd_bench(cfg, std::cout);
      },
      std::cerr);
}
