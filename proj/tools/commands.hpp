#ifndef SELINV_TOOLS_COMMANDS_HPP_
#define SELINV_TOOLS_COMMANDS_HPP_

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "selinv/selinv.hpp"

namespace selinv::cli {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kVerifyFailed = 1;
inline constexpr int kPivotBreakdown = 2;
inline constexpr int kUnsupported = 3;
inline constexpr int kInputError = 4;
inline constexpr int kInternal = 5;
}  // namespace exit_code

enum class Variant { kLeft, kRight, kLeftParallel };
enum class ModeChoice { kAuto, kSymmetric, kGeneral };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::kLeft: return "left";
    case Variant::kRight: return "right";
    case Variant::kLeftParallel: return "left-parallel";
  }
  return "?";
}

struct RunConfig {
  std::string input;
  OrderingMethod ordering = OrderingMethod::kMinimumDegree;
  std::string permutation_file;
  Int max_supernode_size = 64;
  Variant variant = Variant::kLeft;
  Int workers = default_worker_count();
  ModeChoice mode = ModeChoice::kAuto;
  std::string output;
  bool diag_only = false;
  Int dense_limit = kDefaultDenseLimit;
  Int samples = 20;
  std::string trace;
  std::uint64_t seed = 1;
  std::vector<Int> bench_workers{1};
  Int bench_runs = 3;
  double tolerance = 1e-8;
};

// Raised for option combinations the pipeline cannot honor.
class UnsupportedConfig : public Error {
 public:
  using Error::Error;
};

// "grid:AxBxC" generates a Laplacian; anything else is a Matrix Market path.
// Pattern-unsymmetric input is symmetrized with explicit zeros.
inline SparseMatrix load_input(const std::string& input, Int* stored_nnz = nullptr) {
  SparseMatrix a;
  if (input.rfind("grid:", 0) == 0) {
    std::vector<Int> dims;
    std::string dims_text = input.substr(5);
    std::size_t pos = 0;
    while (pos <= dims_text.size()) {
      const std::size_t next = std::min(dims_text.find('x', pos), dims_text.size());
      const std::string tok = dims_text.substr(pos, next - pos);
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (tok.empty() || used != tok.size() || v < 1)
        throw FormatError("bad grid extent '" + tok + "' in " + input, 0);
      dims.push_back(v);
      pos = next + 1;
    }
    if (dims.empty() || dims.size() > 3)
      throw FormatError("grid needs 1 to 3 extents: " + input, 0);
    a = generate_grid_laplacian(dims);
  } else {
    a = read_matrix_market(std::filesystem::path(input));
  }
  if (stored_nnz) *stored_nnz = a.nnz();
  if (!a.pattern_symmetric()) a = symmetrize_structure(a);
  return a;
}

inline SymbolicAnalysis run_analysis(const SparseMatrix& a, const RunConfig& cfg) {
  AnalyzeOptions opts;
  opts.ordering = cfg.ordering;
  opts.max_supernode_size = cfg.max_supernode_size;
  if (cfg.ordering == OrderingMethod::kExternal) {
    if (cfg.permutation_file.empty())
      throw UnsupportedConfig("--order external requires --perm FILE");
    opts.permutation_file = cfg.permutation_file;
  }
  return analyze(a, opts);
}

inline FactorMode resolve_mode(const SparseMatrix& a, ModeChoice m) {
  switch (m) {
    case ModeChoice::kAuto:
      return a.value_symmetric() ? FactorMode::kSymmetric : FactorMode::kGeneral;
    case ModeChoice::kSymmetric:
      if (!a.value_symmetric())
        throw UnsupportedConfig("symmetric mode requested for a matrix with unsymmetric values");
      return FactorMode::kSymmetric;
    case ModeChoice::kGeneral:
      return FactorMode::kGeneral;
  }
  throw UnsupportedConfig("unknown mode");
}

struct Factorization {
  SparseMatrix a;
  std::shared_ptr<const SymbolicAnalysis> symbolic;
  FactorMode mode;
  LUFactors factors;
};

inline Factorization factorize(const RunConfig& cfg) {
  if (cfg.workers < 1) throw UnsupportedConfig("--workers must be at least 1");
  SparseMatrix a = load_input(cfg.input);
  const FactorMode mode = resolve_mode(a, cfg.mode);
  auto sym = std::make_shared<const SymbolicAnalysis>(run_analysis(a, cfg));
  try {
    LUFactors f = supernodal_factor(a, sym, mode);
    return {std::move(a), std::move(sym), mode, std::move(f)};
  } catch (const PivotBreakdown& e) {
    throw PivotBreakdown(sym->ordering[e.column()], e.pivot(), "original column");
  }
}

inline SelectedInverse run_variant(const NormalizedFactors& nf, Variant v, Int workers,
                                   EventLog* log = nullptr) {
  switch (v) {
    case Variant::kLeft: return selinv_left(nf);
    case Variant::kRight: return selinv_right(nf);
    case Variant::kLeftParallel: return selinv_left_parallel(nf, workers, log);
  }
  throw UnsupportedConfig("unknown variant");
}

inline void write_trace(const RunConfig& cfg, const EventLog& log, std::ostream& err) {
  if (cfg.trace.empty()) return;
  if (cfg.variant != Variant::kLeftParallel) {
    err << "note: --trace only records the left-parallel variant\n";
    return;
  }
  std::ofstream out(cfg.trace);
  if (!out) throw Error("cannot write " + cfg.trace);
  log.write_csv(out);
}

// Entries of A^{-1} on the scalar L + U pattern, in original indices, ordered
// by column then row. Positions that the dense supernode blocks store but
// L + U does not contain are left out.
inline std::vector<Triplet> selected_entries(const SelectedInverse& si) {
  const auto& s = si.symbolic();
  const auto& p = s.ordering;
  auto in_pattern = [&](Int i, Int j) {
    if (i == j) return true;
    const auto& col = s.fill.columns[std::min(i, j)];
    return std::binary_search(col.begin(), col.end(), std::max(i, j));
  };
  std::vector<Triplet> out;
  out.reserve(static_cast<std::size_t>(s.fill.lu_nnz()));
  si.for_each_entry([&](Int i, Int j, double v) {
    if (in_pattern(i, j)) out.push_back({p[i], p[j], v});
  });
  std::sort(out.begin(), out.end(), [](const Triplet& x, const Triplet& y) {
    return x.col != y.col ? x.col < y.col : x.row < y.row;
  });
  return out;
}

inline void write_selected(std::ostream& out, const SelectedInverse& si, bool diag_only) {
  const auto& p = si.symbolic().ordering;
  if (diag_only) {
    std::vector<double> d(si.n());
    for (Int i = 0; i < si.n(); ++i) d[p[i]] = *si.value(i, i);
    for (double v : d) out << detail::format_double(v) << "\n";
    return;
  }
  const auto entries = selected_entries(si);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << si.n() << " " << si.n() << " " << entries.size() << "\n";
  for (const auto& t : entries)
    out << t.row + 1 << " " << t.col + 1 << " " << detail::format_double(t.value) << "\n";
}

inline int cmd_analyze(const RunConfig& cfg, std::ostream& out) {
  Int stored_nnz = 0;
  const SparseMatrix a = load_input(cfg.input, &stored_nnz);
  const SymbolicAnalysis s = run_analysis(a, cfg);
  out << "n: " << a.n() << "\n"
      << "nnz(A): " << stored_nnz << "\n"
      << "nnz(L+U): " << s.fill.lu_nnz() << "\n"
      << "ordering: " << to_string(s.method) << "\n"
      << "supernodes: " << s.supernode_count() << "\n"
      << "max_supernode_width: " << s.partition.max_width() << "\n"
      << "etree_height: " << s.etree.height() << "\n";
  return exit_code::kOk;
}

inline int cmd_invert(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Factorization fz = factorize(cfg);
  const NormalizedFactors nf = normalize_factors(std::move(fz.factors));
  EventLog log;
  const SelectedInverse si = run_variant(nf, cfg.variant, cfg.workers, &log);
  write_trace(cfg, log, err);
  if (cfg.output.empty()) {
    write_selected(out, si, cfg.diag_only);
  } else {
    std::ofstream file(cfg.output);
    if (!file) throw Error("cannot write " + cfg.output);
    write_selected(file, si, cfg.diag_only);
  }
  return exit_code::kOk;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Factorization fz = factorize(cfg);
  const NormalizedFactors nf = normalize_factors(fz.factors);
  EventLog log;
  const SelectedInverse si = run_variant(nf, cfg.variant, cfg.workers, &log);
  write_trace(cfg, log, err);
  const auto& p = fz.symbolic->ordering;
  const Int n = fz.a.n();

  double max_rel = 0.0;
  Int worst_row = -1, worst_col = -1;
  double worst_got = 0.0, worst_want = 0.0;
  if (n <= cfg.dense_limit) {
    out << "mode: oracle\n";
    const SelectedInverse ref = extract_selected(dense_inverse_oracle(fz.a, cfg.dense_limit),
                                                 fz.symbolic, si.symmetric());
    const Deviation d = compare(si, ref);
    max_rel = d.max_rel;
    if (d.row >= 0) {
      worst_row = p[d.row];
      worst_col = p[d.col];
      worst_got = *si.value(d.row, d.col);
      worst_want = *ref.value(d.row, d.col);
    }
  } else {
    out << "mode: sampled\n";
    std::mt19937_64 rng(cfg.seed);
    std::vector<Int> cols(n);
    for (Int i = 0; i < n; ++i) cols[i] = i;
    std::shuffle(cols.begin(), cols.end(), rng);
    cols.resize(std::min<Int>(cfg.samples, n));
    const Permutation pinv = p.inverse();
    std::vector<double> e(n, 0.0);
    double scale = 0.0, max_abs = 0.0;
    for (Int col : cols) {
      e[col] = 1.0;
      const std::vector<double> x = sparse_solve(fz.factors, e);
      e[col] = 0.0;
      for (const auto& [row, v] : si.column(pinv[col])) {
        const double want = x[p[row]];
        scale = std::max(scale, std::abs(want));
        const double diff = std::abs(v - want);
        if (diff > max_abs || std::isnan(diff)) {
          max_abs = std::isnan(diff) ? std::numeric_limits<double>::infinity() : diff;
          worst_row = p[row];
          worst_col = col;
          worst_got = v;
          worst_want = want;
        }
      }
    }
    out << "samples: " << cols.size() << "\n";
    max_rel = scale > 0.0 ? max_abs / scale : max_abs;
  }
  const bool pass = max_rel <= cfg.tolerance;
  out << "variant: " << to_string(cfg.variant) << "\n"
      << "nnz(L+U): " << fz.symbolic->fill.lu_nnz() << "\n"
      << "max_rel_err: " << detail::format_double(max_rel) << "\n"
      << (pass ? "PASS" : "FAIL") << "\n";
  if (!pass) {
    err << "worst entry (" << worst_row + 1 << "," << worst_col + 1
        << "): got " << detail::format_double(worst_got) << ", expected "
        << detail::format_double(worst_want) << "\n";
    return exit_code::kVerifyFailed;
  }
  return exit_code::kOk;
}

struct BenchRow {
  Int workers;
  double seconds;
  double speedup;
};

// Median wall time of the inversion phase of the left-parallel variant for
// each worker count; speedups are relative to one worker.
inline std::vector<BenchRow> run_bench(const NormalizedFactors& nf,
                                       const std::vector<Int>& worker_counts, Int runs) {
  if (runs < 1) throw UnsupportedConfig("bench needs at least one run");
  auto median_time = [&](Int w) {
    WorkerPool pool(w);
    std::vector<double> t;
    for (Int r = 0; r < runs; ++r) {
      const auto start = std::chrono::steady_clock::now();
      const SelectedInverse si = selinv_left_parallel(nf, pool);
      t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                      .count());
    }
    std::sort(t.begin(), t.end());
    return t.size() % 2 ? t[t.size() / 2] : 0.5 * (t[t.size() / 2 - 1] + t[t.size() / 2]);
  };
  std::vector<BenchRow> rows;
  std::optional<double> base;
  for (Int w : worker_counts) {
    if (w < 1) throw UnsupportedConfig("worker counts must be at least 1");
    const double s = median_time(w);
    if (w == 1 && !base) base = s;
    rows.push_back({w, s, 0.0});
  }
  if (!base) base = median_time(1);
  for (auto& r : rows) r.speedup = *base / r.seconds;
  return rows;
}

inline int cmd_bench(const RunConfig& cfg, std::ostream& out) {
  Factorization fz = factorize(cfg);
  const NormalizedFactors nf = normalize_factors(std::move(fz.factors));
  const auto rows = run_bench(nf, cfg.bench_workers, std::max<Int>(cfg.bench_runs, 3));
  out << "workers,seconds,speedup\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%.6f,%.3f\n", static_cast<long long>(r.workers),
                  r.seconds, r.speedup);
    out << buf;
  }
  return exit_code::kOk;
}

// Runs a command and maps failures to exit codes; diagnostics go to 'err'.
template <class F>
int guarded(F&& f, std::ostream& err) {
  try {
    return f();
  } catch (const PivotBreakdown& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kPivotBreakdown;
  } catch (const UnsupportedConfig& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kUnsupported;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kInputError;
  } catch (const UnsupportedFieldError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kInputError;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << "\n";
    return exit_code::kInternal;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kInputError;
  }
}

}  // namespace selinv::cli

#endif  // SELINV_TOOLS_COMMANDS_HPP_
