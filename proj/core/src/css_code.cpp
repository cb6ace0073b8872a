#include "qldpc/css_code.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qldpc/rng.hpp"

namespace qldpc {

namespace {

std::size_t poly_degree(std::uint64_t p) {
  if (p == 0) throw std::invalid_argument("zero polynomial");
  return 63 - std::countl_zero(p);
}

/// x^e mod g over GF(2)[x].
std::uint64_t x_power_mod(std::size_t e, std::uint64_t g) {
  const std::size_t r = poly_degree(g);
  std::uint64_t acc = 1;  // x^0
  for (std::size_t i = 0; i < e; ++i) {
    acc <<= 1;
    if (acc >> r & 1) acc ^= g;
  }
  return acc & ((std::uint64_t{1} << r) - 1);
}

std::string bicycle_name(std::size_t n, std::size_t k) {
  std::ostringstream s;
  s << "bicycle-" << n << '-' << k;
  return s.str();
}

void set_weight_bounds(CssCode& code) {
  code.row_bound = std::max(code.hx.max_row_weight(), code.hz.max_row_weight());
  code.col_bound = std::max(code.hx.max_col_weight(), code.hz.max_col_weight());
}

std::vector<std::size_t> choose_deleted_rows(const BinMatrix& h_o, std::size_t count,
                                             BicycleDeletion deletion, Rng& rng) {
  const std::size_t rows = h_o.rows();
  if (deletion == BicycleDeletion::kRandom) {
    std::vector<std::size_t> idx(rows);
    for (std::size_t i = 0; i < rows; ++i) idx[i] = i;
    rng.shuffle(idx);
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
  }

  // Greedy: at each step drop the row whose removal minimizes the spread of
  // the remaining column weights (sum of squares), ties -> lowest row index.
  std::vector<std::size_t> col_weight(h_o.cols());
  for (std::size_t c = 0; c < h_o.cols(); ++c) col_weight[c] = h_o.col_weight(c);
  std::vector<bool> deleted(rows, false);
  std::vector<std::size_t> out;
  for (std::size_t step = 0; step < count; ++step) {
    std::size_t best_row = rows;
    long long best_score = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (deleted[r]) continue;
      long long score = 0;
      for (std::size_t c = 0; c < h_o.cols(); ++c) {
        const long long w = static_cast<long long>(col_weight[c]) - h_o.get(r, c);
        score += w * w;
      }
      if (best_row == rows || score < best_score) {
        best_row = r;
        best_score = score;
      }
    }
    deleted[best_row] = true;
    out.push_back(best_row);
    for (std::size_t c = 0; c < h_o.cols(); ++c) col_weight[c] -= h_o.get(best_row, c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

BinMatrix delete_rows(const BinMatrix& a, const std::vector<std::size_t>& sorted_rows) {
  BinMatrix out(a.rows() - sorted_rows.size(), a.cols());
  std::size_t next = 0, w = 0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    if (next < sorted_rows.size() && sorted_rows[next] == r) {
      ++next;
      continue;
    }
    out.set_row(w++, a.row(r));
  }
  return out;
}

}  // namespace

BinMatrix systematic_parity_check(std::uint64_t gen_poly, std::size_t n) {
  const std::size_t r = poly_degree(gen_poly);
  if (r >= n) throw std::invalid_argument("generator degree must be below n");
  const std::size_t k = n - r;
  // Message bit i sits at degree r+i; its parity part is x^(r+i) mod g.
  // H = [P^T | I_r] with P[i][j] = coeff j of that remainder.
  BinMatrix h(r, n);
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint64_t rem = x_power_mod(r + i, gen_poly);
    for (std::size_t j = 0; j < r; ++j)
      if (rem >> j & 1) h.set(j, i, true);
  }
  for (std::size_t j = 0; j < r; ++j) h.set(j, k + j, true);
  return h;
}

std::pair<ClassicalCode, ClassicalCode> bch_seed_codes() {
  const std::uint64_t g1 = 0b1011;       // x^3 + x + 1
  const std::uint64_t g2 = 0b111010001;  // x^8 + x^7 + x^6 + x^4 + 1
  ClassicalCode c1{systematic_parity_check(g1, 7), 7, 4, 3};
  ClassicalCode c2{systematic_parity_check(g2, 15), 15, 7, 5};
  return {c1, c2};
}

CssCode build_hgp(const ClassicalCode& c1, const ClassicalCode& c2) {
  const BinMatrix& h1 = c1.h;
  const BinMatrix& h2 = c2.h;
  const std::size_t m1 = h1.rows(), n1 = h1.cols();
  const std::size_t m2 = h2.rows(), n2 = h2.cols();

  CssCode code;
  code.family = "hgp";
  code.hx = hstack(kron(h1, BinMatrix::identity(n2)),
                   kron(BinMatrix::identity(m1), h2.transposed()));
  code.hz = hstack(kron(BinMatrix::identity(n1), h2),
                   kron(h1.transposed(), BinMatrix::identity(m2)));
  code.n = n1 * n2 + m1 * m2;
  code.k = code.n - rank(code.hx) - rank(code.hz);
  set_weight_bounds(code);
  {
    std::ostringstream name;
    name << "hgp-" << code.n << '-' << code.k;
    code.name = name.str();
  }
  validate_css(code);
  return code;
}

CssCode build_bicycle(std::size_t n, std::size_t k, std::size_t row_weight_v,
                      std::uint64_t seed, BicycleDeletion deletion) {
  if (n % 2 || k % 2) throw std::invalid_argument("build_bicycle: n and k must be even");
  const std::size_t half = n / 2;
  if (row_weight_v > half) throw std::invalid_argument("build_bicycle: row weight > n/2");
  if (k >= n) throw std::invalid_argument("build_bicycle: need k < n");

  Rng rng(derive_seed(seed, 0xb1c));
  const int max_attempts = 256;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    // Random weight-row_weight_v vector v.
    std::vector<std::size_t> idx(half);
    for (std::size_t i = 0; i < half; ++i) idx[i] = i;
    rng.shuffle(idx);
    BinVector v(half);
    for (std::size_t i = 0; i < row_weight_v; ++i) v.set(idx[i], true);

    const BinMatrix c = circulant(v);
    const BinMatrix h_o = hstack(c, c.transposed());
    std::vector<std::size_t> drop = choose_deleted_rows(h_o, k / 2, deletion, rng);
    BinMatrix h = delete_rows(h_o, drop);
    if (n != 2 * rank(h) + k) continue;  // rank-deficient draw; resample v

    CssCode code;
    code.name = bicycle_name(n, k);
    code.family = "bicycle";
    code.hx = h;
    code.hz = std::move(h);
    code.n = n;
    code.k = k;
    code.seed = seed;
    code.deleted_rows = std::move(drop);
    set_weight_bounds(code);
    validate_css(code);
    return code;
  }
  throw std::runtime_error("build_bicycle: no full-rank draw in " +
                           std::to_string(max_attempts) + " attempts");
}

void validate_css(const CssCode& code) {
  if (code.hx.cols() != code.n || code.hz.cols() != code.n)
    throw std::runtime_error("css invariant: Hx/Hz column count != n");
  if (!mat_mul(code.hx, code.hz.transposed()).is_zero())
    throw std::runtime_error("css invariant: Hx * Hz^T != 0");
  if (code.k != code.n - rank(code.hx) - rank(code.hz))
    throw std::runtime_error("css invariant: k != n - rank(Hx) - rank(Hz)");
  if (code.hx.max_row_weight() > code.row_bound ||
      code.hz.max_row_weight() > code.row_bound)
    throw std::runtime_error("css invariant: row weight above bound");
  if (code.hx.max_col_weight() > code.col_bound ||
      code.hz.max_col_weight() > code.col_bound)
    throw std::runtime_error("css invariant: column weight above bound");
}

std::string code_hash(const CssCode& code) {
  // FNV-1a over the structural content.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  };
  mix(std::to_string(code.n));
  mix("|");
  mix(std::to_string(code.k));
  mix("|");
  mix(code.hx.to_text());
  mix("|");
  mix(code.hz.to_text());
  std::ostringstream out;
  out << std::hex;
  for (int i = 15; i >= 0; --i) out << ((h >> (4 * i)) & 0xF);
  return out.str();
}

void save_code_bundle(const CssCode& code, const std::string& path) {
  nlohmann::json j;
  j["format"] = "qldpc-code-bundle";
  j["version"] = 1;
  j["name"] = code.name;
  j["family"] = code.family;
  j["n"] = code.n;
  j["k"] = code.k;
  j["row_bound"] = code.row_bound;
  j["col_bound"] = code.col_bound;
  j["hx"] = code.hx.to_text();
  j["hz"] = code.hz.to_text();
  j["metadata"] = {{"seed", code.seed},
                   {"deleted_rows", code.deleted_rows},
                   {"generator_polys", code.generator_polys}};
  j["hash"] = code_hash(code);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write code bundle: " + path);
  out << j.dump(2) << '\n';
}

CssCode load_code_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read code bundle: " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != "qldpc-code-bundle")
    throw std::runtime_error("not a code bundle: " + path);

  CssCode code;
  code.name = j.at("name").get<std::string>();
  code.family = j.at("family").get<std::string>();
  code.n = j.at("n").get<std::size_t>();
  code.k = j.at("k").get<std::size_t>();
  code.row_bound = j.at("row_bound").get<std::size_t>();
  code.col_bound = j.at("col_bound").get<std::size_t>();
  code.hx = BinMatrix::from_text(j.at("hx").get<std::string>());
  code.hz = BinMatrix::from_text(j.at("hz").get<std::string>());
  const auto& meta = j.at("metadata");
  code.seed = meta.value("seed", std::uint64_t{0});
  code.deleted_rows = meta.value("deleted_rows", std::vector<std::size_t>{});
  code.generator_polys = meta.value("generator_polys", std::vector<std::uint64_t>{});
  if (j.contains("hash") && j["hash"].get<std::string>() != code_hash(code))
    throw std::runtime_error("code bundle hash mismatch: " + path);
  validate_css(code);
  return code;
}

}  // namespace qldpc
