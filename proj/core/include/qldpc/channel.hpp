#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qldpc/css_code.hpp"
#include "qldpc/gf2.hpp"
#include "qldpc/rng.hpp"

namespace qldpc {

/// Pair of independent binary symmetric channels with flip probability p_f,
/// one acting on the x half of the error, one on the z half.
struct ChannelParams {
  double p_f = 0.0;
};

/// 2n bits laid out (x_1..x_n | z_1..z_n).
using ErrorVector = BinVector;
/// m bits laid out (s_x | s_z) = (Hz*x | Hx*z).
using Syndrome = BinVector;

/// log((1-p_f)/p_f); throws unless 0 < p_f < 0.5.
double prior_llr(ChannelParams params);

ErrorVector sample_error(const CssCode& code, ChannelParams params, Rng& rng);

Syndrome syndrome_of(const CssCode& code, const ErrorVector& e);

/// Weight law of the channel truncated to w >= 2 and renormalized:
/// P(w) proportional to Binomial(bits, p_f) pmf for w in 2..bits.
class ConditionedWeightSampler {
 public:
  ConditionedWeightSampler(std::size_t bits, double p_f);
  std::size_t sample(Rng& rng) const;
  double pmf(std::size_t w) const;

 private:
  std::vector<double> pmf_;
  std::vector<double> cdf_;
};

struct DatasetEntry {
  Syndrome s;
  ErrorVector e;
};

struct Dataset {
  std::string code_name;
  std::string code_hash_hex;
  std::string recipe;  // "train" or "test"
  double p_f = 0.0;
  std::uint64_t seed = 0;
  std::size_t bits = 0;      // 2n
  std::size_t checks = 0;    // m
  std::vector<DatasetEntry> entries;
};

/// Training recipe: entry 0 is the zero error, entries 1..2n the standard
/// basis, and the tail draws a conditioned weight w >= 2 with uniformly
/// placed support. count must be at least 2n+1.
Dataset gen_training_set(const CssCode& code, ChannelParams params, std::size_t count,
                         std::uint64_t seed);

/// Lazily yields `count` iid channel draws paired with their syndromes.
class TestStream {
 public:
  TestStream(const CssCode& code, ChannelParams params, std::size_t count,
             std::uint64_t seed);
  bool next(DatasetEntry& out);
  std::size_t remaining() const { return left_; }

 private:
  const CssCode* code_;
  ChannelParams params_;
  std::size_t left_;
  Rng rng_;
};

/// Materialized test set (small counts only; sweeps use TestStream).
Dataset gen_test_set(const CssCode& code, ChannelParams params, std::size_t count,
                     std::uint64_t seed);

/// Bit-vector <-> hex, LSB-first within each byte, two lowercase digits per byte.
std::string hex_encode(const BinVector& v);
BinVector hex_decode(const std::string& hex, std::size_t len);

/// JSON Lines: one metadata header line, then {"s": hex, "e": hex} per entry.
void save_dataset(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path);
/// Load plus consistency checks: code hash matches and every entry's
/// syndrome recomputes from its error.
Dataset load_dataset(const std::string& path, const CssCode& code);

}  // namespace qldpc
