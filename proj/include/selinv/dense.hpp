#ifndef SELINV_DENSE_HPP_
#define SELINV_DENSE_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "selinv/types.hpp"

namespace selinv {

// Non-owning column-major view: element (i, j) lives at data[i + j * ld].
template <class T>
struct BasicMatrixView {
  T* data = nullptr;
  Int rows = 0;
  Int cols = 0;
  Int ld = 1;

  T& operator()(Int i, Int j) const { return data[i + j * ld]; }

  BasicMatrixView block(Int row, Int col, Int num_rows, Int num_cols) const {
    return {data + row + col * ld, num_rows, num_cols, ld};
  }

  bool empty() const { return rows == 0 || cols == 0; }

  operator BasicMatrixView<const T>() const
    requires(!std::is_const_v<T>)
  {
    return {data, rows, cols, ld};
  }
};

using MatrixView = BasicMatrixView<double>;
using ConstMatrixView = BasicMatrixView<const double>;

inline ConstMatrixView as_const(MatrixView v) {
  return {v.data, v.rows, v.cols, v.ld};
}

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(Int rows, Int cols, double value = 0.0)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows * cols), value) {}

  static DenseMatrix identity(Int n) {
    DenseMatrix m(n, n);
    for (Int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  Int rows() const { return rows_; }
  Int cols() const { return cols_; }

  double& operator()(Int i, Int j) { return data_[i + j * rows_]; }
  double operator()(Int i, Int j) const { return data_[i + j * rows_]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  MatrixView view() { return {data_.data(), rows_, cols_, std::max<Int>(rows_, 1)}; }
  ConstMatrixView view() const {
    return {data_.data(), rows_, cols_, std::max<Int>(rows_, 1)};
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  Int rows_ = 0;
  Int cols_ = 0;
  std::vector<double> data_;
};

enum class Op { kNone, kTranspose };

namespace detail {

using EigenMap = Eigen::Map<Eigen::MatrixXd, 0, Eigen::OuterStride<>>;
using ConstEigenMap =
    Eigen::Map<const Eigen::MatrixXd, 0, Eigen::OuterStride<>>;

inline EigenMap eigen(MatrixView v) {
  return EigenMap(v.data, v.rows, v.cols, Eigen::OuterStride<>(v.ld));
}
inline ConstEigenMap eigen(ConstMatrixView v) {
  return ConstEigenMap(v.data, v.rows, v.cols, Eigen::OuterStride<>(v.ld));
}

}  // namespace detail

// C -= op(A) * op(B).
inline void multiply_subtract(MatrixView c, ConstMatrixView a, ConstMatrixView b,
                              Op op_a = Op::kNone, Op op_b = Op::kNone) {
  const Int inner = op_a == Op::kNone ? a.cols : a.rows;
  if (c.empty() || inner == 0) return;
  auto cm = detail::eigen(c);
  auto am = detail::eigen(a);
  auto bm = detail::eigen(b);
  if (op_a == Op::kNone && op_b == Op::kNone) {
    cm.noalias() -= am * bm;
  } else if (op_a == Op::kNone) {
    cm.noalias() -= am * bm.transpose();
  } else if (op_b == Op::kNone) {
    cm.noalias() -= am.transpose() * bm;
  } else {
    cm.noalias() -= am.transpose() * bm.transpose();
  }
}

// The triangular solves below read only the relevant triangle of a packed
// LU block: the strictly-lower part is a unit-lower L, the rest is U.

// B <- B * L^{-1}.
inline void solve_right_unit_lower(MatrixView b, ConstMatrixView packed) {
  if (b.empty()) return;
  auto bm = detail::eigen(b);
  detail::eigen(packed)
      .triangularView<Eigen::UnitLower>()
      .solveInPlace<Eigen::OnTheRight>(bm);
}

// B <- B * U^{-1}.
inline void solve_right_upper(MatrixView b, ConstMatrixView packed) {
  if (b.empty()) return;
  auto bm = detail::eigen(b);
  detail::eigen(packed)
      .triangularView<Eigen::Upper>()
      .solveInPlace<Eigen::OnTheRight>(bm);
}

// B <- L^{-1} * B.
inline void solve_left_unit_lower(MatrixView b, ConstMatrixView packed) {
  if (b.empty()) return;
  auto bm = detail::eigen(b);
  detail::eigen(packed).triangularView<Eigen::UnitLower>().solveInPlace(bm);
}

// B <- U^{-1} * B.
inline void solve_left_upper(MatrixView b, ConstMatrixView packed) {
  if (b.empty()) return;
  auto bm = detail::eigen(b);
  detail::eigen(packed).triangularView<Eigen::Upper>().solveInPlace(bm);
}

// In-place unpivoted LU of a square block. Returns the local index of the
// first pivot whose magnitude is not above 'threshold'.
inline std::optional<Int> factor_lu_unpivoted(MatrixView a, double threshold) {
  const Int n = a.rows;
  for (Int k = 0; k < n; ++k) {
    const double pivot = a(k, k);
    if (!(std::abs(pivot) > threshold)) return k;
    for (Int i = k + 1; i < n; ++i) a(i, k) /= pivot;
    for (Int j = k + 1; j < n; ++j) {
      const double ukj = a(k, j);
      if (ukj == 0.0) continue;
      for (Int i = k + 1; i < n; ++i) a(i, j) -= a(i, k) * ukj;
    }
  }
  return std::nullopt;
}

// In-place unpivoted LDL^T using the lower triangle only. On return the block
// is packed like an LU block with U = D * L^T written exactly from L and D.
inline std::optional<Int> factor_ldlt_unpivoted(MatrixView a, double threshold) {
  const Int n = a.rows;
  for (Int k = 0; k < n; ++k) {
    const double pivot = a(k, k);
    if (!(std::abs(pivot) > threshold)) return k;
    for (Int i = k + 1; i < n; ++i) a(k, i) = a(i, k);  // D * L^T row
    for (Int i = k + 1; i < n; ++i) a(i, k) /= pivot;
    for (Int j = k + 1; j < n; ++j) {
      const double ukj = a(k, j);
      if (ukj == 0.0) continue;
      for (Int i = j; i < n; ++i) a(i, j) -= a(i, k) * ukj;
    }
  }
  return std::nullopt;
}

// U^{-1} L^{-1} of a packed LU block.
inline DenseMatrix inverse_from_packed_lu(ConstMatrixView packed) {
  DenseMatrix inv = DenseMatrix::identity(packed.rows);
  solve_left_unit_lower(inv.view(), packed);
  solve_left_upper(inv.view(), packed);
  return inv;
}

// block <- (block + block^T) / 2, exactly symmetric afterwards.
inline void symmetrize(MatrixView a) {
  for (Int j = 0; j < a.cols; ++j) {
    for (Int i = j + 1; i < a.rows; ++i) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = v;
      a(j, i) = v;
    }
  }
}

inline void copy_transposed(MatrixView dst, ConstMatrixView src) {
  for (Int j = 0; j < src.cols; ++j)
    for (Int i = 0; i < src.rows; ++i) dst(j, i) = src(i, j);
}

inline void copy(MatrixView dst, ConstMatrixView src) {
  for (Int j = 0; j < src.cols; ++j)
    for (Int i = 0; i < src.rows; ++i) dst(i, j) = src(i, j);
}

inline void fill(MatrixView dst, double value) {
  for (Int j = 0; j < dst.cols; ++j)
    for (Int i = 0; i < dst.rows; ++i) dst(i, j) = value;
}

inline double max_abs(ConstMatrixView a) {
  double m = 0.0;
  for (Int j = 0; j < a.cols; ++j)
    for (Int i = 0; i < a.rows; ++i) m = std::max(m, std::abs(a(i, j)));
  return m;
}

}  // namespace selinv

#endif  // SELINV_DENSE_HPP_
