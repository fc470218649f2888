#ifndef SELINV_MATRIX_MARKET_HPP_
#define SELINV_MATRIX_MARKET_HPP_

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "selinv/sparse_matrix.hpp"

namespace selinv {

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string_view skip_space(std::string_view s) {
  std::size_t k = 0;
  while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
  return s.substr(k);
}

template <class T>
bool parse_token(std::string_view& s, T& out) {
  s = skip_space(s);
  if (s.empty()) return false;
  const char* begin = s.data();
  // from_chars rejects a leading '+', which some writers emit.
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), out);
  if (ec != std::errc()) return false;
  s = s.substr(static_cast<std::size_t>(ptr - s.data()));
  return true;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// Reads a real coordinate Matrix Market file (general or symmetric). Symmetric
// files are expanded to full storage. Indices are 1-based on disk.
inline SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  Int line_no = 0;
  if (!std::getline(in, line)) throw FormatError("empty input", 1);
  ++line_no;
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket")
    throw FormatError("missing %%MatrixMarket banner", line_no);
  object = detail::lower(object);
  format = detail::lower(format);
  field = detail::lower(field);
  symmetry = detail::lower(symmetry);
  if (object != "matrix" || format != "coordinate")
    throw FormatError("only 'matrix coordinate' files are supported", line_no);
  if (field != "real")
    throw UnsupportedFieldError("unsupported Matrix Market field '" + field +
                                "' (only real is supported)");
  if (symmetry != "general" && symmetry != "symmetric")
    throw UnsupportedFieldError("unsupported Matrix Market symmetry '" +
                                symmetry + "'");
  const bool symmetric = symmetry == "symmetric";

  Int rows = -1, cols = -1, entries = -1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = detail::skip_space(line);
    if (s.empty() || s.front() == '%') continue;
    if (!detail::parse_token(s, rows) || !detail::parse_token(s, cols) ||
        !detail::parse_token(s, entries))
      throw FormatError("malformed size line", line_no);
    break;
  }
  if (rows < 0) throw FormatError("missing size line", line_no);
  if (rows != cols)
    throw FormatError("matrix must be square, got " + std::to_string(rows) +
                          "x" + std::to_string(cols),
                      line_no);

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(symmetric ? 2 * entries : entries));
  Int read = 0;
  while (read < entries && std::getline(in, line)) {
    ++line_no;
    std::string_view s = detail::skip_space(line);
    if (s.empty() || s.front() == '%') continue;
    Int i = 0, j = 0;
    double v = 0.0;
    if (!detail::parse_token(s, i) || !detail::parse_token(s, j) ||
        !detail::parse_token(s, v))
      throw FormatError("malformed entry", line_no);
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw FormatError("index out of range", line_no);
    if (symmetric && i < j)
      throw FormatError("upper-triangular entry in symmetric file", line_no);
    t.push_back({i - 1, j - 1, v});
    if (symmetric && i != j) t.push_back({j - 1, i - 1, v});
    ++read;
  }
  if (read < entries)
    throw FormatError("expected " + std::to_string(entries) + " entries, found " +
                          std::to_string(read),
                      line_no);
  return SparseMatrix::from_triplets(rows, std::move(t));
}

inline SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_matrix_market(in);
}

// Writes the full pattern in general form, or only the lower triangle in
// symmetric form when 'as_symmetric' is set (requires a value-symmetric A).
inline void write_matrix_market(std::ostream& out, const SparseMatrix& a,
                                bool as_symmetric = false) {
  if (as_symmetric && !a.value_symmetric())
    throw Error("symmetric output requested for a nonsymmetric matrix");
  Int count = 0;
  for (Int j = 0; j < a.n(); ++j)
    for (Int i : a.column_rows(j))
      if (!as_symmetric || i >= j) ++count;
  out << "%%MatrixMarket matrix coordinate real "
      << (as_symmetric ? "symmetric" : "general") << "\n";
  out << a.n() << " " << a.n() << " " << count << "\n";
  for (Int j = 0; j < a.n(); ++j) {
    auto rows = a.column_rows(j);
    auto vals = a.column_values(j);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (as_symmetric && rows[k] < j) continue;
      out << rows[k] + 1 << " " << j + 1 << " " << detail::format_double(vals[k])
          << "\n";
    }
  }
}

inline void write_matrix_market(const std::filesystem::path& path,
                                const SparseMatrix& a, bool as_symmetric = false) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_matrix_market(out, a, as_symmetric);
}

// One 0-based index per line.
inline Permutation read_permutation(std::istream& in, Int expected_size) {
  std::vector<Int> p;
  std::string line;
  Int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = detail::skip_space(line);
    if (s.empty()) continue;
    Int v = 0;
    if (!detail::parse_token(s, v) || !detail::skip_space(s).empty())
      throw FormatError("expected one integer per line", line_no);
    p.push_back(v);
  }
  if (static_cast<Int>(p.size()) != expected_size)
    throw FormatError("permutation has " + std::to_string(p.size()) +
                          " entries, expected " + std::to_string(expected_size),
                      0);
  try {
    return Permutation(std::move(p));
  } catch (const DimensionMismatch& e) {
    throw FormatError(e.what(), 0);
  }
}

inline Permutation read_permutation(const std::filesystem::path& path,
                                    Int expected_size) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open permutation file " + path.string());
  return read_permutation(in, expected_size);
}

inline void write_permutation(std::ostream& out, const Permutation& p) {
  for (Int v : p.indices()) out << v << "\n";
}

}  // namespace selinv

#endif  // SELINV_MATRIX_MARKET_HPP_
