#include "qldpc/gf2.hpp"

#include <algorithm>
#include <bit>
#include <sstream>
#include <stdexcept>

namespace qldpc {

BinVector BinVector::from_string(const std::string& bits) {
  BinVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1')
      v.set(i, true);
    else if (bits[i] != '0')
      throw std::invalid_argument("BinVector::from_string: expected '0'/'1'");
  }
  return v;
}

BinVector BinVector::unit(std::size_t len, std::size_t index) {
  if (index >= len) throw std::out_of_range("BinVector::unit: index out of range");
  BinVector v(len);
  v.set(index, true);
  return v;
}

std::size_t BinVector::weight() const {
  std::size_t n = 0;
  for (std::uint64_t w : w_) n += std::popcount(w);
  return n;
}

bool BinVector::is_zero() const {
  return std::all_of(w_.begin(), w_.end(), [](std::uint64_t w) { return w == 0; });
}

std::vector<std::size_t> BinVector::ones() const {
  std::vector<std::size_t> idx;
  for (std::size_t wi = 0; wi < w_.size(); ++wi) {
    std::uint64_t w = w_[wi];
    while (w) {
      idx.push_back(wi * 64 + std::countr_zero(w));
      w &= w - 1;
    }
  }
  return idx;
}

BinVector& BinVector::operator^=(const BinVector& o) {
  if (len_ != o.len_) throw std::invalid_argument("BinVector xor: length mismatch");
  for (std::size_t i = 0; i < w_.size(); ++i) w_[i] ^= o.w_[i];
  return *this;
}

std::string BinVector::to_string() const {
  std::string s(len_, '0');
  for (std::size_t i = 0; i < len_; ++i)
    if (get(i)) s[i] = '1';
  return s;
}

BinMatrix BinMatrix::identity(std::size_t n) {
  BinMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
  return m;
}

BinMatrix BinMatrix::from_rows(const std::vector<std::string>& rows) {
  if (rows.empty()) return {};
  BinMatrix m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols_)
      throw std::invalid_argument("BinMatrix::from_rows: ragged rows");
    for (std::size_t c = 0; c < m.cols_; ++c) {
      if (rows[r][c] == '1')
        m.set(r, c, true);
      else if (rows[r][c] != '0')
        throw std::invalid_argument("BinMatrix::from_rows: expected '0'/'1'");
    }
  }
  return m;
}

BinMatrix BinMatrix::from_text(const std::string& text) {
  std::istringstream in(text);
  std::size_t rows = 0, cols = 0;
  if (!(in >> rows >> cols)) throw std::invalid_argument("BinMatrix::from_text: bad header");
  BinMatrix m(rows, cols);
  std::string line;
  std::getline(in, line);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw std::invalid_argument("BinMatrix::from_text: missing row");
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.size() != cols) throw std::invalid_argument("BinMatrix::from_text: bad row length");
    for (std::size_t c = 0; c < cols; ++c)
      if (line[c] == '1') m.set(r, c, true);
  }
  return m;
}

std::string BinMatrix::to_text() const {
  std::ostringstream out;
  out << rows_ << ' ' << cols_ << '\n';
  for (std::size_t r = 0; r < rows_; ++r) out << row(r).to_string() << '\n';
  return out.str();
}

BinVector BinMatrix::row(std::size_t r) const {
  BinVector v(cols_);
  std::copy_n(w_.data() + r * wpr_, wpr_, v.words().data());
  return v;
}

BinVector BinMatrix::col(std::size_t c) const {
  BinVector v(rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    if (get(r, c)) v.set(r, true);
  return v;
}

void BinMatrix::set_row(std::size_t r, const BinVector& v) {
  if (v.size() != cols_) throw std::invalid_argument("BinMatrix::set_row: length mismatch");
  std::copy_n(v.words().data(), wpr_, w_.data() + r * wpr_);
}

void BinMatrix::xor_row_into(std::size_t src, std::size_t dst) {
  std::uint64_t* d = w_.data() + dst * wpr_;
  const std::uint64_t* s = w_.data() + src * wpr_;
  for (std::size_t i = 0; i < wpr_; ++i) d[i] ^= s[i];
}

void BinMatrix::swap_rows(std::size_t a, std::size_t b) {
  if (a == b) return;
  std::swap_ranges(w_.begin() + a * wpr_, w_.begin() + (a + 1) * wpr_, w_.begin() + b * wpr_);
}

std::size_t BinMatrix::row_weight(std::size_t r) const {
  std::size_t n = 0;
  for (std::uint64_t w : row_words(r)) n += std::popcount(w);
  return n;
}

std::size_t BinMatrix::col_weight(std::size_t c) const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < rows_; ++r) n += get(r, c);
  return n;
}

std::size_t BinMatrix::popcount() const {
  std::size_t n = 0;
  for (std::uint64_t w : w_) n += std::popcount(w);
  return n;
}

std::size_t BinMatrix::max_row_weight() const {
  std::size_t m = 0;
  for (std::size_t r = 0; r < rows_; ++r) m = std::max(m, row_weight(r));
  return m;
}

std::size_t BinMatrix::max_col_weight() const {
  std::vector<std::size_t> w(cols_, 0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) w[c] += get(r, c);
  return w.empty() ? 0 : *std::max_element(w.begin(), w.end());
}

bool BinMatrix::is_zero() const {
  return std::all_of(w_.begin(), w_.end(), [](std::uint64_t w) { return w == 0; });
}

BinMatrix BinMatrix::transposed() const {
  BinMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    const std::uint64_t* rw = w_.data() + r * wpr_;
    for (std::size_t wi = 0; wi < wpr_; ++wi) {
      std::uint64_t w = rw[wi];
      while (w) {
        const std::size_t c = wi * 64 + std::countr_zero(w);
        t.set(c, r, true);
        w &= w - 1;
      }
    }
  }
  return t;
}

BinMatrix hstack(const BinMatrix& a, const BinMatrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("hstack: row count mismatch");
  BinMatrix m(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c)
      if (a.get(r, c)) m.set(r, c, true);
    for (std::size_t c = 0; c < b.cols(); ++c)
      if (b.get(r, c)) m.set(r, a.cols() + c, true);
  }
  return m;
}

BinMatrix vstack(const BinMatrix& a, const BinMatrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("vstack: column count mismatch");
  BinMatrix m(a.rows() + b.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) m.set_row(r, a.row(r));
  for (std::size_t r = 0; r < b.rows(); ++r) m.set_row(a.rows() + r, b.row(r));
  return m;
}

BinMatrix mat_mul(const BinMatrix& a, const BinMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("mat_mul: dimension mismatch");
  BinMatrix c(a.rows(), b.cols());
  const std::size_t wpr = c.words_per_row();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::uint64_t* out = c.row_words(i).data();
    const std::uint64_t* ar = a.row_words(i).data();
    for (std::size_t wi = 0; wi < a.words_per_row(); ++wi) {
      std::uint64_t w = ar[wi];
      while (w) {
        const std::size_t k = wi * 64 + std::countr_zero(w);
        const std::uint64_t* br = b.row_words(k).data();
        for (std::size_t j = 0; j < wpr; ++j) out[j] ^= br[j];
        w &= w - 1;
      }
    }
  }
  return c;
}

BinVector mat_vec(const BinMatrix& a, const BinVector& x) {
  if (a.cols() != x.size()) throw std::invalid_argument("mat_vec: dimension mismatch");
  BinVector y(a.rows());
  const std::uint64_t* xv = x.words().data();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const std::uint64_t* ar = a.row_words(i).data();
    std::uint64_t acc = 0;
    for (std::size_t wi = 0; wi < a.words_per_row(); ++wi) acc ^= ar[wi] & xv[wi];
    if (std::popcount(acc) & 1) y.set(i, true);
  }
  return y;
}

BinMatrix kron(const BinMatrix& a, const BinMatrix& b) {
  BinMatrix m(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (!a.get(i, j)) continue;
      for (std::size_t bi = 0; bi < b.rows(); ++bi)
        for (std::size_t bj = 0; bj < b.cols(); ++bj)
          if (b.get(bi, bj)) m.set(i * b.rows() + bi, j * b.cols() + bj, true);
    }
  return m;
}

BinMatrix circulant(const BinVector& v) {
  if (v.empty()) throw std::invalid_argument("circulant: empty vector");
  const std::size_t n = v.size();
  BinMatrix m(n, n);
  for (std::size_t j : v.ones())
    for (std::size_t i = 0; i < n; ++i) m.set(i, (j + i) % n, true);
  return m;
}

RrefResult rref(const BinMatrix& a) {
  std::vector<std::size_t> order(a.cols());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  return rref(a, order);
}

RrefResult rref(const BinMatrix& a, std::span<const std::size_t> column_order) {
  if (column_order.size() != a.cols())
    throw std::invalid_argument("rref: column_order size mismatch");
  std::vector<bool> seen(a.cols(), false);
  for (std::size_t c : column_order) {
    if (c >= a.cols() || seen[c]) throw std::invalid_argument("rref: invalid column permutation");
    seen[c] = true;
  }

  RrefResult res;
  res.reduced = a;
  BinMatrix& m = res.reduced;
  std::size_t r = 0;
  for (std::size_t c : column_order) {
    if (r == m.rows()) break;
    std::size_t pivot = r;
    while (pivot < m.rows() && !m.get(pivot, c)) ++pivot;
    if (pivot == m.rows()) continue;
    m.swap_rows(pivot, r);
    for (std::size_t i = 0; i < m.rows(); ++i)
      if (i != r && m.get(i, c)) m.xor_row_into(r, i);
    res.pivots.push_back(c);
    ++r;
  }
  res.rank = res.pivots.size();
  return res;
}

std::size_t rank(const BinMatrix& a) { return rref(a).rank; }

BinVector solve_with_pivots(const BinMatrix& a, const BinVector& b,
                            std::span<const std::size_t> pivots) {
  if (a.rows() != b.size()) throw std::invalid_argument("solve_with_pivots: size mismatch");
  // Eliminate the augmented system [A | b] visiting the pivot columns only.
  BinMatrix aug = hstack(a, BinMatrix(a.rows(), 1));
  for (std::size_t r = 0; r < a.rows(); ++r)
    if (b.get(r)) aug.set(r, a.cols(), true);

  std::vector<std::size_t> pivot_row(pivots.size());
  std::size_t r = 0;
  for (std::size_t pi = 0; pi < pivots.size(); ++pi) {
    const std::size_t c = pivots[pi];
    std::size_t pr = r;
    while (pr < aug.rows() && !aug.get(pr, c)) ++pr;
    if (pr == aug.rows())
      throw std::invalid_argument("solve_with_pivots: pivot column is dependent");
    aug.swap_rows(pr, r);
    for (std::size_t i = 0; i < aug.rows(); ++i)
      if (i != r && aug.get(i, c)) aug.xor_row_into(r, i);
    pivot_row[pi] = r;
    ++r;
  }
  // Rows below the pivot block must have a zero rhs, else b is out of span.
  for (std::size_t i = r; i < aug.rows(); ++i)
    if (aug.get(i, a.cols()))
      throw std::invalid_argument("solve_with_pivots: rhs not in span of pivot columns");

  BinVector x(a.cols());
  for (std::size_t pi = 0; pi < pivots.size(); ++pi)
    if (aug.get(pivot_row[pi], a.cols())) x.set(pivots[pi], true);
  return x;
}

RowBasis::RowBasis(const BinMatrix& a) : cols_(a.cols()) {
  RrefResult r = rref(a);
  for (std::size_t i = 0; i < r.rank; ++i) {
    rows_.push_back(r.reduced.row(i));
    pivots_.push_back(r.pivots[i]);
  }
}

bool RowBasis::contains(const BinVector& x) const {
  if (x.size() != cols_) throw std::invalid_argument("RowBasis::contains: length mismatch");
  BinVector y = x;
  for (std::size_t i = 0; i < rows_.size(); ++i)
    if (y.get(pivots_[i])) y ^= rows_[i];
  return y.is_zero();
}

bool in_rowspace(const BinMatrix& a, const BinVector& x) {
  return RowBasis(a).contains(x);
}

}  // namespace qldpc
