#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qldpc/gf2.hpp"

namespace qldpc {

/// Classical binary code given by a parity-check matrix (m_c x n_c).
struct ClassicalCode {
  BinMatrix h;
  std::size_t n_c = 0;
  std::size_t k_c = 0;
  std::size_t d_c = 0;  // minimum distance if known, 0 otherwise
};

/// CSS code: Hx fixes Z-type errors, Hz fixes X-type errors, Hx*Hz^T = 0.
struct CssCode {
  std::string name;
  std::string family;  // "hgp" or "bicycle"
  BinMatrix hx;
  BinMatrix hz;
  std::size_t n = 0;          // qubits
  std::size_t k = 0;          // logical qubits, k = n - rank(Hx) - rank(Hz)
  std::size_t row_bound = 0;  // max row weight over Hx and Hz
  std::size_t col_bound = 0;  // max column weight over Hx and Hz

  // Construction provenance, carried into the bundle file.
  std::uint64_t seed = 0;                      // bicycle
  std::vector<std::size_t> deleted_rows;       // bicycle
  std::vector<std::uint64_t> generator_polys;  // hgp seeds, bit-packed LSB = x^0

  std::size_t m() const { return hx.rows() + hz.rows(); }
};

/// Parity check of the cyclic code generated by `gen_poly` (bit i = coeff of
/// x^i), in systematic form H = [P^T | I].
BinMatrix systematic_parity_check(std::uint64_t gen_poly, std::size_t n);

/// The [7,4,3] code from x^3+x+1 and the [15,7,5] code from x^8+x^7+x^6+x^4+1.
std::pair<ClassicalCode, ClassicalCode> bch_seed_codes();

/// Hypergraph product: Hx = [H1 x I_{n2} | I_{m1} x H2^T],
/// Hz = [I_{n1} x H2 | H1^T x I_{m2}], n = n1*n2 + m1*m2.
CssCode build_hgp(const ClassicalCode& c1, const ClassicalCode& c2);

enum class BicycleDeletion {
  kHeuristic,  // keep column weights maximally uniform, ties -> lowest row
  kRandom,
};

/// Bicycle code: C = circulant(v) with |v| = row_weight_v, H_o = [C | C^T],
/// k/2 rows deleted, Hx = Hz = result. Resamples v until the dimension works
/// out to exactly k; throws after too many attempts.
CssCode build_bicycle(std::size_t n, std::size_t k, std::size_t row_weight_v,
                      std::uint64_t seed,
                      BicycleDeletion deletion = BicycleDeletion::kHeuristic);

/// Checks all CssCode invariants; throws std::runtime_error on violation.
void validate_css(const CssCode& code);

/// Stable structural hash (over n, k and both matrices), 16 hex chars.
std::string code_hash(const CssCode& code);

/// JSON bundle holding matrices (text format), parameters and metadata.
void save_code_bundle(const CssCode& code, const std::string& path);
CssCode load_code_bundle(const std::string& path);

}  // namespace qldpc
