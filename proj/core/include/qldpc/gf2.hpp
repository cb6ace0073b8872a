#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qldpc {

/// Bit-packed GF(2) vector. Bits beyond size() in the last word are kept zero.
class BinVector {
 public:
  BinVector() = default;
  explicit BinVector(std::size_t len) : len_(len), w_(words_for(len)) {}

  static BinVector from_string(const std::string& bits);
  static BinVector unit(std::size_t len, std::size_t index);

  std::size_t size() const { return len_; }
  bool empty() const { return len_ == 0; }

  bool get(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool v) {
    const std::uint64_t m = std::uint64_t{1} << (i & 63);
    if (v)
      w_[i >> 6] |= m;
    else
      w_[i >> 6] &= ~m;
  }
  void flip(std::size_t i) { w_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  std::size_t weight() const;
  bool is_zero() const;
  /// Indices of set bits, ascending.
  std::vector<std::size_t> ones() const;

  BinVector& operator^=(const BinVector& o);
  friend BinVector operator^(BinVector a, const BinVector& b) { return a ^= b; }
  bool operator==(const BinVector&) const = default;

  std::string to_string() const;
  std::span<const std::uint64_t> words() const { return w_; }
  std::span<std::uint64_t> words() { return w_; }

  static std::size_t words_for(std::size_t bits) { return (bits + 63) / 64; }

 private:
  std::size_t len_ = 0;
  std::vector<std::uint64_t> w_;
};

/// Row-major bit-packed GF(2) matrix (64-bit word granularity).
class BinMatrix {
 public:
  BinMatrix() = default;
  BinMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), wpr_(BinVector::words_for(cols)), w_(rows * wpr_) {}

  static BinMatrix identity(std::size_t n);
  static BinMatrix from_rows(const std::vector<std::string>& rows);
  /// Text format: first line "rows cols", then one '0'/'1' line per row.
  static BinMatrix from_text(const std::string& text);
  std::string to_text() const;

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t words_per_row() const { return wpr_; }

  bool get(std::size_t r, std::size_t c) const {
    return (w_[r * wpr_ + (c >> 6)] >> (c & 63)) & 1u;
  }
  void set(std::size_t r, std::size_t c, bool v) {
    const std::uint64_t m = std::uint64_t{1} << (c & 63);
    if (v)
      w_[r * wpr_ + (c >> 6)] |= m;
    else
      w_[r * wpr_ + (c >> 6)] &= ~m;
  }

  std::span<const std::uint64_t> row_words(std::size_t r) const {
    return {w_.data() + r * wpr_, wpr_};
  }
  std::span<std::uint64_t> row_words(std::size_t r) { return {w_.data() + r * wpr_, wpr_}; }

  BinVector row(std::size_t r) const;
  BinVector col(std::size_t c) const;
  void set_row(std::size_t r, const BinVector& v);

  void xor_row_into(std::size_t src, std::size_t dst);
  void swap_rows(std::size_t a, std::size_t b);

  std::size_t row_weight(std::size_t r) const;
  std::size_t col_weight(std::size_t c) const;
  std::size_t popcount() const;
  std::size_t max_row_weight() const;
  std::size_t max_col_weight() const;
  bool is_zero() const;

  BinMatrix transposed() const;
  /// Horizontal concatenation [A | B]; row counts must match.
  friend BinMatrix hstack(const BinMatrix& a, const BinMatrix& b);
  /// Vertical concatenation; column counts must match.
  friend BinMatrix vstack(const BinMatrix& a, const BinMatrix& b);

  bool operator==(const BinMatrix&) const = default;

 private:
  std::size_t rows_ = 0, cols_ = 0, wpr_ = 0;
  std::vector<std::uint64_t> w_;
};

BinMatrix mat_mul(const BinMatrix& a, const BinMatrix& b);
BinVector mat_vec(const BinMatrix& a, const BinVector& x);
BinMatrix kron(const BinMatrix& a, const BinMatrix& b);
BinMatrix circulant(const BinVector& v);

struct RrefResult {
  BinMatrix reduced;
  std::vector<std::size_t> pivots;  // columns, in visit order
  std::size_t rank = 0;
};

/// Gaussian elimination to reduced row echelon form, visiting columns in
/// natural order. Pivot row choice: first nonzero row at or below the
/// current row, so results are deterministic.
RrefResult rref(const BinMatrix& a);
/// Same, visiting columns in `column_order` (a permutation of 0..cols-1).
RrefResult rref(const BinMatrix& a, std::span<const std::size_t> column_order);

std::size_t rank(const BinMatrix& a);

/// Solve A x = b with support(x) restricted to `pivots` (independent columns).
/// Throws if b is outside the span of the pivot columns.
BinVector solve_with_pivots(const BinMatrix& a, const BinVector& b,
                            std::span<const std::size_t> pivots);

/// Row-echelon basis of a rowspace, for repeated membership queries.
class RowBasis {
 public:
  explicit RowBasis(const BinMatrix& a);
  bool contains(const BinVector& x) const;
  std::size_t rank() const { return rows_.size(); }

 private:
  std::vector<BinVector> rows_;        // echelon rows
  std::vector<std::size_t> pivots_;    // pivot column of each row
  std::size_t cols_ = 0;
};

bool in_rowspace(const BinMatrix& a, const BinVector& x);

}  // namespace qldpc
