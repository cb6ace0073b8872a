#include "qldpc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace qldpc {

namespace {

constexpr std::uint64_t kTrainStream = 0x7261;
constexpr std::uint64_t kTestStream = 0x7e57;

void check_params(ChannelParams params) {
  if (!(params.p_f > 0.0) || !(params.p_f < 0.5))
    throw std::invalid_argument("channel requires 0 < p_f < 0.5");
}

// Sampling tolerates the degenerate p_f = 0 channel (useful in smoke tests);
// prior_llr and the weight sampler do not, since their math diverges there.
void check_sampling_params(ChannelParams params) {
  if (!(params.p_f >= 0.0) || !(params.p_f < 0.5))
    throw std::invalid_argument("channel sampling requires 0 <= p_f < 0.5");
}

}  // namespace

double prior_llr(ChannelParams params) {
  check_params(params);
  return std::log((1.0 - params.p_f) / params.p_f);
}

ErrorVector sample_error(const CssCode& code, ChannelParams params, Rng& rng) {
  check_sampling_params(params);
  ErrorVector e(2 * code.n);
  for (std::size_t i = 0; i < 2 * code.n; ++i)
    if (rng.next_bernoulli(params.p_f)) e.set(i, true);
  return e;
}

Syndrome syndrome_of(const CssCode& code, const ErrorVector& e) {
  if (e.size() != 2 * code.n) throw std::invalid_argument("syndrome_of: error length != 2n");
  BinVector x(code.n), z(code.n);
  for (std::size_t i = 0; i < code.n; ++i) {
    if (e.get(i)) x.set(i, true);
    if (e.get(code.n + i)) z.set(i, true);
  }
  const BinVector sx = mat_vec(code.hz, x);
  const BinVector sz = mat_vec(code.hx, z);
  Syndrome s(sx.size() + sz.size());
  for (std::size_t i = 0; i < sx.size(); ++i)
    if (sx.get(i)) s.set(i, true);
  for (std::size_t i = 0; i < sz.size(); ++i)
    if (sz.get(i)) s.set(sx.size() + i, true);
  return s;
}

ConditionedWeightSampler::ConditionedWeightSampler(std::size_t bits, double p_f) {
  if (bits < 2) throw std::invalid_argument("ConditionedWeightSampler: need at least 2 bits");
  if (!(p_f > 0.0) || !(p_f < 0.5))
    throw std::invalid_argument("ConditionedWeightSampler: 0 < p_f < 0.5");
  // Binomial pmf by the ratio recurrence, then truncate to w >= 2.
  std::vector<double> raw(bits + 1);
  raw[0] = std::pow(1.0 - p_f, static_cast<double>(bits));
  for (std::size_t w = 0; w < bits; ++w)
    raw[w + 1] = raw[w] * static_cast<double>(bits - w) / static_cast<double>(w + 1) *
                 (p_f / (1.0 - p_f));
  double tail = 0.0;
  for (std::size_t w = 2; w <= bits; ++w) tail += raw[w];
  pmf_.assign(bits + 1, 0.0);
  cdf_.assign(bits + 1, 0.0);
  double acc = 0.0;
  for (std::size_t w = 2; w <= bits; ++w) {
    pmf_[w] = raw[w] / tail;
    acc += pmf_[w];
    cdf_[w] = acc;
  }
  cdf_[bits] = 1.0;  // guard against rounding shortfall
}

std::size_t ConditionedWeightSampler::sample(Rng& rng) const {
  const double u = rng.next_double();
  // First w with cdf >= u; cdf_ is nondecreasing with cdf_[0..1] = 0.
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t w = static_cast<std::size_t>(it - cdf_.begin());
  if (w < 2) w = 2;
  return std::min(w, pmf_.size() - 1);
}

double ConditionedWeightSampler::pmf(std::size_t w) const {
  return w < pmf_.size() ? pmf_[w] : 0.0;
}

Dataset gen_training_set(const CssCode& code, ChannelParams params, std::size_t count,
                         std::uint64_t seed) {
  check_params(params);
  const std::size_t bits = 2 * code.n;
  if (count < bits + 1)
    throw std::invalid_argument("gen_training_set: count must be at least 2n+1");

  Dataset d;
  d.code_name = code.name;
  d.code_hash_hex = code_hash(code);
  d.recipe = "train";
  d.p_f = params.p_f;
  d.seed = seed;
  d.bits = bits;
  d.checks = code.m();
  d.entries.reserve(count);

  ErrorVector zero(bits);
  d.entries.push_back({syndrome_of(code, zero), zero});
  for (std::size_t j = 0; j < bits; ++j) {
    ErrorVector e = BinVector::unit(bits, j);
    d.entries.push_back({syndrome_of(code, e), std::move(e)});
  }

  Rng rng(derive_seed(seed, kTrainStream));
  ConditionedWeightSampler weights(bits, params.p_f);
  std::vector<std::size_t> idx(bits);
  for (std::size_t i = 0; i < bits; ++i) idx[i] = i;
  while (d.entries.size() < count) {
    const std::size_t w = weights.sample(rng);
    rng.shuffle(idx);
    ErrorVector e(bits);
    for (std::size_t i = 0; i < w; ++i) e.set(idx[i], true);
    d.entries.push_back({syndrome_of(code, e), std::move(e)});
  }
  return d;
}

TestStream::TestStream(const CssCode& code, ChannelParams params, std::size_t count,
                       std::uint64_t seed)
    : code_(&code), params_(params), left_(count), rng_(derive_seed(seed, kTestStream)) {
  check_sampling_params(params);
}

bool TestStream::next(DatasetEntry& out) {
  if (left_ == 0) return false;
  --left_;
  out.e = sample_error(*code_, params_, rng_);
  out.s = syndrome_of(*code_, out.e);
  return true;
}

Dataset gen_test_set(const CssCode& code, ChannelParams params, std::size_t count,
                     std::uint64_t seed) {
  Dataset d;
  d.code_name = code.name;
  d.code_hash_hex = code_hash(code);
  d.recipe = "test";
  d.p_f = params.p_f;
  d.seed = seed;
  d.bits = 2 * code.n;
  d.checks = code.m();
  d.entries.reserve(count);
  TestStream stream(code, params, count, seed);
  DatasetEntry entry;
  while (stream.next(entry)) d.entries.push_back(entry);
  return d;
}

std::string hex_encode(const BinVector& v) {
  static const char* digits = "0123456789abcdef";
  const std::size_t bytes = (v.size() + 7) / 8;
  std::string out(2 * bytes, '0');
  for (std::size_t b = 0; b < bytes; ++b) {
    unsigned val = 0;
    for (std::size_t j = 0; j < 8 && 8 * b + j < v.size(); ++j)
      val |= static_cast<unsigned>(v.get(8 * b + j)) << j;
    out[2 * b] = digits[val >> 4];
    out[2 * b + 1] = digits[val & 0xF];
  }
  return out;
}

BinVector hex_decode(const std::string& hex, std::size_t len) {
  const std::size_t bytes = (len + 7) / 8;
  if (hex.size() != 2 * bytes) throw std::invalid_argument("hex_decode: bad length");
  auto nibble = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw std::invalid_argument("hex_decode: bad digit");
  };
  BinVector v(len);
  for (std::size_t b = 0; b < bytes; ++b) {
    const unsigned val = (nibble(hex[2 * b]) << 4) | nibble(hex[2 * b + 1]);
    for (std::size_t j = 0; j < 8 && 8 * b + j < len; ++j)
      if (val >> j & 1) v.set(8 * b + j, true);
  }
  return v;
}

void save_dataset(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  nlohmann::json header;
  header["format"] = "qldpc-dataset";
  header["version"] = 1;
  header["code"] = d.code_name;
  header["code_hash"] = d.code_hash_hex;
  header["recipe"] = d.recipe;
  header["p_f"] = d.p_f;
  header["seed"] = d.seed;
  header["bits"] = d.bits;
  header["checks"] = d.checks;
  header["count"] = d.entries.size();
  out << header.dump() << '\n';
  for (const DatasetEntry& entry : d.entries) {
    nlohmann::json rec;
    rec["s"] = hex_encode(entry.s);
    rec["e"] = hex_encode(entry.e);
    out << rec.dump() << '\n';
  }
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dataset: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);
  nlohmann::json header = nlohmann::json::parse(line);
  if (header.value("format", "") != "qldpc-dataset")
    throw std::runtime_error("not a dataset file: " + path);

  Dataset d;
  d.code_name = header.at("code").get<std::string>();
  d.code_hash_hex = header.at("code_hash").get<std::string>();
  d.recipe = header.at("recipe").get<std::string>();
  d.p_f = header.at("p_f").get<double>();
  d.seed = header.at("seed").get<std::uint64_t>();
  d.bits = header.at("bits").get<std::size_t>();
  d.checks = header.at("checks").get<std::size_t>();
  const std::size_t count = header.at("count").get<std::size_t>();
  d.entries.reserve(count);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json rec = nlohmann::json::parse(line);
    DatasetEntry entry;
    entry.s = hex_decode(rec.at("s").get<std::string>(), d.checks);
    entry.e = hex_decode(rec.at("e").get<std::string>(), d.bits);
    d.entries.push_back(std::move(entry));
  }
  if (d.entries.size() != count)
    throw std::runtime_error("dataset entry count mismatch: " + path);
  return d;
}

Dataset load_dataset(const std::string& path, const CssCode& code) {
  Dataset d = load_dataset(path);
  if (d.code_hash_hex != code_hash(code))
    throw std::runtime_error("dataset was generated for a different code: " + path);
  for (const DatasetEntry& entry : d.entries)
    if (syndrome_of(code, entry.e) != entry.s)
      throw std::runtime_error("dataset entry fails syndrome check: " + path);
  return d;
}

}  // namespace qldpc
