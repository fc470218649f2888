#include <catch_amalgamated.hpp>

#include <cstring>
#include <random>
#include <sstream>

#include "support/oracles.hpp"

using namespace selinv;
using namespace selinv::testing;
using Catch::Matchers::WithinAbs;

namespace {

SparseMatrix parse(const std::string& text) {
  std::istringstream in(text);
  return read_matrix_market(in);
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

template <class T>
std::vector<std::remove_const_t<T>> vec(std::span<T> s) {
  return {s.begin(), s.end()};
}

}  // namespace

TEST_CASE("matrix market: identity in coordinate format", "[matcore][io]") {
  const auto a = parse(
      "%%MatrixMarket matrix coordinate real general\n"
      "% comment\n"
      "3 3 3\n1 1 1.0\n2 2 1.0\n3 3 1.0\n");
  CHECK(a.n() == 3);
  CHECK(a.nnz() == 3);
  CHECK(a.pattern_symmetric());
  CHECK(a.value_symmetric());
}

TEST_CASE("matrix market: symmetric files expand to full storage", "[matcore][io]") {
  const auto a = parse(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "3 3 4\n1 1 2\n2 1 -1\n2 2 2\n3 3 5\n");
  CHECK(a.nnz() == 5);
  CHECK(a.at(0, 1) == -1.0);
  CHECK(a.at(1, 0) == -1.0);
  CHECK(a.pattern_symmetric());
  CHECK(a.value_symmetric());
}

TEST_CASE("matrix market: duplicates are summed and columns sorted", "[matcore][io]") {
  const auto a = parse(
      "%%MatrixMarket matrix coordinate real general\n"
      "2 2 4\n2 1 1\n1 1 1\n1 1 2\n2 2 1\n");
  CHECK(a.nnz() == 3);
  CHECK(a.at(0, 0) == 3.0);
  CHECK_FALSE(a.pattern_symmetric());
  const auto rows = a.column_rows(0);
  CHECK(rows[0] == 0);
  CHECK(rows[1] == 1);
}

TEST_CASE("matrix market: errors", "[matcore][io]") {
  SECTION("complex field is unsupported") {
    CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n"),
                    UnsupportedFieldError);
  }
  SECTION("pattern field is unsupported") {
    CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n"),
                    UnsupportedFieldError);
  }
  SECTION("parse failure reports the line") {
    try {
      parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 x 1.0\n");
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      CHECK(e.line() == 4);
    }
  }
  SECTION("index out of range") {
    CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n"),
                    FormatError);
  }
  SECTION("too few entries") {
    CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n"),
                    FormatError);
  }
  SECTION("missing file") {
    CHECK_THROWS_AS(read_matrix_market(std::filesystem::path("/nonexistent/x.mtx")), Error);
  }
}

TEST_CASE("matrix market: write then read is bit-identical", "[matcore][io][property]") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const bool sym = trial % 2 == 0;
    auto a = random_dd_matrix(5 + trial, 0.3, sym, rng);
    // awkward values
    std::vector<Triplet> t;
    for (Int j = 0; j < a.n(); ++j) {
      const auto r = a.column_rows(j);
      const auto v = a.column_values(j);
      for (std::size_t q = 0; q < r.size(); ++q) t.push_back({r[q], j, v[q] / 3.0e7});
    }
    a = SparseMatrix::from_triplets(a.n(), t);
    std::stringstream buf;
    write_matrix_market(buf, a, sym);
    const auto b = read_matrix_market(buf);
    REQUIRE(b.n() == a.n());
    REQUIRE(vec(b.col_ptr()) == vec(a.col_ptr()));
    REQUIRE(vec(b.row_idx()) == vec(a.row_idx()));
    for (std::size_t q = 0; q < a.values().size(); ++q)
      REQUIRE(same_bits(a.values()[q], b.values()[q]));
  }
}

TEST_CASE("symmetrize_structure", "[matcore]") {
  SECTION("pattern-symmetric input is a fixed point") {
    const auto a = make_m5();
    const auto b = symmetrize_structure(a);
    CHECK(vec(b.col_ptr()) == vec(a.col_ptr()));
    CHECK(vec(b.row_idx()) == vec(a.row_idx()));
    CHECK(vec(b.values()) == vec(a.values()));
  }
  SECTION("2x2 lower entry gains an explicit zero mirror") {
    const auto a = SparseMatrix::from_triplets(2, {{0, 0, 1.0}, {1, 1, 1.0}, {1, 0, 3.0}});
    REQUIRE(a.nnz() == 3);
    const auto b = symmetrize_structure(a);
    CHECK(b.nnz() == 4);
    CHECK(b.find(0, 1) >= 0);
    CHECK(b.at(0, 1) == 0.0);
    CHECK(b.at(1, 0) == 3.0);
    CHECK(b.pattern_symmetric());
  }
  SECTION("random 10x10 equals the pattern union, position by position") {
    std::mt19937_64 rng(3);
    std::bernoulli_distribution coin(0.25);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Triplet> t;
      for (Int j = 0; j < 10; ++j)
        for (Int i = 0; i < 10; ++i)
          if (i == j || coin(rng)) t.push_back({i, j, 1.0 + i + 10.0 * j});
      const auto a = SparseMatrix::from_triplets(10, t);
      const auto b = symmetrize_structure(a);
      const auto pa = pattern_of(a);
      for (Int i = 0; i < 10; ++i)
        for (Int j = 0; j < 10; ++j) {
          const bool want = pa[i][j] || pa[j][i];
          REQUIRE((b.find(i, j) >= 0) == want);
          if (pa[i][j]) REQUIRE(b.at(i, j) == a.at(i, j));
          else if (want) REQUIRE(b.at(i, j) == 0.0);
        }
      CHECK(b.pattern_symmetric());
      // idempotent
      const auto c = symmetrize_structure(b);
      CHECK(vec(c.row_idx()) == vec(b.row_idx()));
      CHECK(vec(c.values()) == vec(b.values()));
    }
  }
}

TEST_CASE("permute_symmetric", "[matcore]") {
  SECTION("identity permutation") {
    const auto a = make_m5(4.0, 1.5);
    const auto b = permute_symmetric(a, Permutation::identity(5));
    CHECK(vec(b.row_idx()) == vec(a.row_idx()));
    CHECK(vec(b.values()) == vec(a.values()));
  }
  SECTION("reversal of diag(1,2,3)") {
    const auto a = SparseMatrix::from_triplets(3, {{0, 0, 1.0}, {1, 1, 2.0}, {2, 2, 3.0}});
    const auto b = permute_symmetric(a, Permutation({2, 1, 0}));
    CHECK(b.at(0, 0) == 3.0);
    CHECK(b.at(1, 1) == 2.0);
    CHECK(b.at(2, 2) == 1.0);
  }
  SECTION("random n=20 checked exhaustively against a dense permutation") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
      const auto a = random_dd_matrix(20, 0.3, trial % 2 == 0, rng);
      std::vector<Int> perm(20);
      for (Int i = 0; i < 20; ++i) perm[i] = i;
      std::shuffle(perm.begin(), perm.end(), rng);
      const Permutation p(perm);
      const Permutation pinv = p.inverse();
      const auto b = permute_symmetric(a, p);
      const auto da = a.to_dense();
      const auto db = b.to_dense();
      for (Int i = 0; i < 20; ++i)
        for (Int j = 0; j < 20; ++j) {
          REQUIRE(db(pinv[i], pinv[j]) == da(i, j));
          REQUIRE((b.find(pinv[i], pinv[j]) >= 0) == (a.find(i, j) >= 0));
        }
      CHECK(b.pattern_symmetric());
      // applying the inverse restores the original arrays
      const auto c = permute_symmetric(b, pinv);
      CHECK(vec(c.row_idx()) == vec(a.row_idx()));
      CHECK(vec(c.values()) == vec(a.values()));
    }
  }
  SECTION("dimension mismatch") {
    CHECK_THROWS_AS(permute_symmetric(make_m5(), Permutation::identity(4)), DimensionMismatch);
  }
}

TEST_CASE("permutation validation", "[matcore]") {
  CHECK_THROWS_AS(Permutation({0, 0, 1}), DimensionMismatch);
  CHECK_THROWS_AS(Permutation({0, 3, 1}), DimensionMismatch);
  const Permutation p({2, 0, 1});
  const Permutation q = p.inverse();
  CHECK(p.compose(q).is_identity());
  std::istringstream in("2\n0\n1\n");
  CHECK(read_permutation(in, 3) == p);
  std::istringstream bad("2\n0\n");
  CHECK_THROWS_AS(read_permutation(bad, 3), FormatError);
}

TEST_CASE("dense_inverse_oracle", "[matcore][oracle]") {
  SECTION("diag(2,4,8)") {
    const auto a = SparseMatrix::from_triplets(3, {{0, 0, 2.0}, {1, 1, 4.0}, {2, 2, 8.0}});
    const auto inv = dense_inverse_oracle(a);
    CHECK(inv(0, 0) == 0.5);
    CHECK(inv(1, 1) == 0.25);
    CHECK(inv(2, 2) == 0.125);
    CHECK(inv(0, 1) == 0.0);
  }
  SECTION("[[2,1],[1,2]]") {
    const auto inv = dense_inverse_oracle(from_rows({{2, 1}, {1, 2}}));
    CHECK_THAT(inv(0, 0), WithinAbs(2.0 / 3.0, 1e-15));
    CHECK_THAT(inv(1, 1), WithinAbs(2.0 / 3.0, 1e-15));
    CHECK_THAT(inv(0, 1), WithinAbs(-1.0 / 3.0, 1e-15));
    CHECK_THAT(inv(1, 0), WithinAbs(-1.0 / 3.0, 1e-15));
  }
  SECTION("50x50 diagonally dominant residual") {
    std::mt19937_64 rng(7);
    for (bool sym : {true, false}) {
      const auto a = random_dd_matrix(50, 0.2, sym, rng);
      const auto inv = dense_inverse_oracle(a);
      const auto prod = dense_multiply(a.to_dense(), inv);
      const double resid = max_abs_diff(prod, DenseMatrix::identity(50));
      CHECK(resid < 1e-10);
      CHECK(resid <= 1e-10 * a.max_abs() * 50);
    }
  }
  SECTION("pivoting handles a zero leading entry") {
    const auto inv = dense_inverse_oracle(from_rows({{0, 1}, {1, 0}}));
    CHECK(inv(0, 1) == 1.0);
    CHECK(inv(1, 0) == 1.0);
  }
  SECTION("singular matrix names the pivot") {
    try {
      dense_inverse_oracle(from_rows({{1, 2, 0}, {2, 4, 0}, {0, 0, 1}}));
      FAIL("expected singularity");
    } catch (const SingularMatrixError& e) {
      CHECK(e.pivot() == 1);
    }
  }
  SECTION("dense limit") {
    CHECK_THROWS_AS(dense_inverse_oracle(generate_grid_laplacian({10}), 5), Error);
  }
}

TEST_CASE("extract_selected", "[matcore][oracle]") {
  SECTION("diagonal-only pattern copies only the diagonal") {
    const auto a = SparseMatrix::from_triplets(3, {{0, 0, 2.0}, {1, 1, 4.0}, {2, 2, 8.0}});
    auto s = std::make_shared<const SymbolicAnalysis>(analyze(a, options(OrderingMethod::kNatural, 1)));
    DenseMatrix full(3, 3, 7.0);
    for (Int i = 0; i < 3; ++i) full(i, i) = i + 1.0;
    const auto si = extract_selected(full, s);
    CHECK(si.stored_entries() == 3);
    for (Int i = 0; i < 3; ++i) CHECK(*si.value(i, i) == i + 1.0);
    CHECK_FALSE(si.value(0, 1).has_value());
  }
  SECTION("full pattern at n=4 reproduces all 16 entries") {
    DenseMatrix d(4, 4, 1.0);
    for (Int i = 0; i < 4; ++i) d(i, i) = 10.0;
    const auto a = SparseMatrix::from_dense(d);
    for (Int mx : {1, 2, 4}) {
      auto s = std::make_shared<const SymbolicAnalysis>(analyze(a, options(OrderingMethod::kNatural, mx)));
      DenseMatrix full(4, 4);
      for (Int j = 0; j < 4; ++j)
        for (Int i = 0; i < 4; ++i) full(i, j) = 1.0 + i + 4.0 * j;
      const auto si = extract_selected(full, s);
      CHECK(si.stored_entries() == 16);
      for (Int j = 0; j < 4; ++j)
        for (Int i = 0; i < 4; ++i) CHECK(*si.value(i, j) == full(i, j));
    }
  }
  SECTION("M5 pattern") {
    const auto a = make_m5();
    auto s = std::make_shared<const SymbolicAnalysis>(analyze(a, options(OrderingMethod::kNatural, 1)));
    DenseMatrix full(5, 5);
    for (Int j = 0; j < 5; ++j)
      for (Int i = 0; i < 5; ++i) full(i, j) = 1.0 + i + 5.0 * j;
    const auto si = extract_selected(full, s);
    // lower positions from the symbolic oracle, 0-based
    const auto fill = symbolic_elimination(pattern_of(a));
    std::set<std::pair<Int, Int>> expected;
    for (Int j = 0; j < 5; ++j) {
      expected.insert({j, j});
      for (Int i : fill[j]) {
        expected.insert({i, j});
        expected.insert({j, i});
      }
    }
    const std::set<std::pair<Int, Int>> listed{{1, 0}, {4, 0}, {4, 1}, {3, 2}, {4, 2}, {4, 3}};
    for (const auto& [i, j] : listed) {
      CHECK(expected.count({i, j}) == 1);
      CHECK(expected.count({j, i}) == 1);
    }
    CHECK(expected.size() == 17);
    std::set<std::pair<Int, Int>> got;
    si.for_each_entry([&](Int i, Int j, double v) {
      got.insert({i, j});
      CHECK(v == full(i, j));
    });
    CHECK(got == expected);
  }
}

TEST_CASE("generate_grid_laplacian", "[matcore]") {
  SECTION("dims=[3]") {
    const auto a = generate_grid_laplacian({3});
    const auto d = a.to_dense();
    CHECK(a.n() == 3);
    CHECK(a.nnz() == 7);
    for (Int i = 0; i < 3; ++i) CHECK(d(i, i) == 3.0);
    CHECK(d(0, 1) == -1.0);
    CHECK(d(2, 1) == -1.0);
    CHECK(d(0, 2) == 0.0);
  }
  SECTION("dims=[2,2]") {
    const auto a = generate_grid_laplacian({2, 2});
    CHECK(a.n() == 4);
    for (Int j = 0; j < 4; ++j) {
      CHECK(a.column_rows(j).size() == 3);
      CHECK(a.at(j, j) == 5.0);
    }
    CHECK(a.value_symmetric());
  }
  SECTION("dims=[10,10,10]") {
    const auto a = generate_grid_laplacian({10, 10, 10});
    CHECK(a.n() == 1000);
    CHECK(a.nnz() == 1000 + 2 * 3 * 10 * 10 * 9);
    CHECK(a.nnz() == 6400);
  }
  SECTION("errors") {
    CHECK_THROWS_AS(generate_grid_laplacian({0}), DimensionMismatch);
    CHECK_THROWS_AS(generate_grid_laplacian({1, 1, 1, 1}), DimensionMismatch);
    CHECK_THROWS_AS(generate_grid_laplacian({Int{1} << 31, Int{1} << 31, Int{1} << 31}),
                    DimensionMismatch);
  }
}

TEST_CASE("sparse matrix construction", "[matcore]") {
  SECTION("from_csc rejects unsorted rows") {
    CHECK_THROWS_AS(SparseMatrix::from_csc(2, {0, 2, 3}, {1, 0, 1}, {1, 1, 1}), Error);
  }
  SECTION("value symmetry flag") {
    CHECK(make_m5().value_symmetric());
    const auto a = from_rows({{2, 1}, {0.5, 2}});
    CHECK(a.pattern_symmetric());
    CHECK_FALSE(a.value_symmetric());
  }
  SECTION("multiply and transpose") {
    const auto a = from_rows({{2, 1, 0}, {0, 3, 0}, {4, 0, 5}});
    const auto y = a.multiply(std::vector<double>{1, 1, 1});
    CHECK(y == std::vector<double>{3, 3, 9});
    CHECK(a.transpose().at(0, 2) == 4.0);
  }
}
