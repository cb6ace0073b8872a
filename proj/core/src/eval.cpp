#include "qldpc/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "qldpc/rng.hpp"

namespace qldpc {

namespace {

BinVector slice_bits(const BinVector& v, std::size_t begin, std::size_t count) {
  BinVector out(count);
  for (std::size_t i = 0; i < count; ++i)
    if (v.get(begin + i)) out.set(i, true);
  return out;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

}  // namespace

LogicalJudge::LogicalJudge(const CssCode& code)
    : n_(code.n), x_space_(code.hx), z_space_(code.hz) {
  if (x_space_.rank() + z_space_.rank() + code.k != code.n)
    throw std::invalid_argument("LogicalJudge: rank(Hx) + rank(Hz) != n - k");
}

bool LogicalJudge::success(const ErrorVector& e, const ErrorVector& e_hat) const {
  if (e.size() != 2 * n_ || e_hat.size() != 2 * n_)
    throw std::invalid_argument("LogicalJudge: error vectors must have length 2n");
  const ErrorVector e_tot = e ^ e_hat;
  return x_space_.contains(slice_bits(e_tot, 0, n_)) &&
         z_space_.contains(slice_bits(e_tot, n_, n_));
}

bool is_logical_success(const LogicalJudge& judge, const ErrorVector& e,
                        const ErrorVector& e_hat) {
  return judge.success(e, e_hat);
}

Interval wilson_interval(std::size_t failures, std::size_t trials, double confidence) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: trials must be positive");
  if (failures > trials)
    throw std::invalid_argument("wilson_interval: failures exceed trials");
  double z = 0.0;
  if (std::abs(confidence - 0.95) < 1e-9)
    z = 1.96;
  else if (std::abs(confidence - 0.90) < 1e-9)
    z = 1.645;
  else if (std::abs(confidence - 0.99) < 1e-9)
    z = 2.576;
  else
    throw std::invalid_argument("wilson_interval: confidence must be 0.90, 0.95 or 0.99");

  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(failures) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  Interval out;
  out.low = failures == 0 ? 0.0 : std::max(0.0, center - half);
  out.high = failures == trials ? 1.0 : std::min(1.0, center + half);
  return out;
}

namespace {

class BpSweepDecoder final : public Decoder {
 public:
  BpSweepDecoder(const CssCode& code, const BpConfig& bp)
      : graph_(tanner_graph(code)), bp_(bp) {}

  std::string name() const override { return "bp"; }
  std::size_t bits() const override { return graph_.var_count; }
  std::size_t checks() const override { return graph_.check_count; }

  std::vector<ErrorVector> decode_batch(const std::vector<Syndrome>& syndromes,
                                        double p_f) const override {
    const double prior = prior_llr({p_f});
    std::vector<ErrorVector> out;
    out.reserve(syndromes.size());
    for (const Syndrome& s : syndromes) out.push_back(bp_decode(graph_, s, prior, bp_).e_hat);
    return out;
  }

 private:
  TannerGraph graph_;
  BpConfig bp_;
};

class BpOsdSweepDecoder final : public Decoder {
 public:
  BpOsdSweepDecoder(const CssCode& code, const OsdConfig& osd, const BpConfig& bp)
      : code_(code), graph_(tanner_graph(code)), osd_(osd), bp_(bp) {}

  std::string name() const override { return "bp-osd"; }
  std::size_t bits() const override { return graph_.var_count; }
  std::size_t checks() const override { return graph_.check_count; }

  std::vector<ErrorVector> decode_batch(const std::vector<Syndrome>& syndromes,
                                        double p_f) const override {
    const double prior = prior_llr({p_f});
    std::vector<ErrorVector> out;
    out.reserve(syndromes.size());
    for (const Syndrome& s : syndromes)
      out.push_back(bp_osd_decode(code_, graph_, s, prior, bp_, osd_));
    return out;
  }

 private:
  CssCode code_;
  TannerGraph graph_;
  OsdConfig osd_;
  BpConfig bp_;
};

class NbpSweepDecoder final : public Decoder {
 public:
  NbpSweepDecoder(const CssCode& code, NbpModel model, const NbpConfig& config)
      : graph_(tanner_graph(code)), model_(std::move(model)), config_(config) {
    if (model_.var_count != graph_.var_count || model_.edge_count != graph_.edge_count())
      throw std::invalid_argument("make_nbp_decoder: model built for a different graph");
  }

  std::string name() const override { return "nbp"; }
  std::size_t bits() const override { return graph_.var_count; }
  std::size_t checks() const override { return graph_.check_count; }

  std::vector<ErrorVector> decode_batch(const std::vector<Syndrome>& syndromes,
                                        double p_f) const override {
    const double prior = prior_llr({p_f});
    std::vector<ErrorVector> out;
    out.reserve(syndromes.size());
    for (const Syndrome& s : syndromes)
      out.push_back(nbp_decode(graph_, s, prior, model_, config_).e_hat);
    return out;
  }

 private:
  TannerGraph graph_;
  NbpModel model_;
  NbpConfig config_;
};

class GnnSweepDecoder final : public Decoder {
 public:
  GnnSweepDecoder(const CssCode& code, GnnModel model, std::size_t chunk)
      : graph_(tanner_graph(code)), model_(std::move(model)), chunk_(chunk) {
    if (chunk_ == 0) throw std::invalid_argument("make_gnn_decoder: chunk must be positive");
    if (model_.var_count != graph_.var_count || model_.check_count != graph_.check_count)
      throw std::invalid_argument("make_gnn_decoder: model built for a different graph");
  }

  std::string name() const override { return "gnn"; }
  std::size_t bits() const override { return graph_.var_count; }
  std::size_t checks() const override { return graph_.check_count; }

  std::vector<ErrorVector> decode_batch(const std::vector<Syndrome>& syndromes,
                                        double /*p_f*/) const override {
    std::vector<DecodeOutput> decoded = gnn_decode_batch(graph_, syndromes, model_, chunk_);
    std::vector<ErrorVector> out;
    out.reserve(decoded.size());
    for (DecodeOutput& d : decoded) out.push_back(std::move(d.e_hat));
    return out;
  }

 private:
  TannerGraph graph_;
  GnnModel model_;
  std::size_t chunk_;
};

/// Contiguous slices of `syndromes`, one per worker; results land back in
/// input order, so the split is invisible to the caller.
std::vector<ErrorVector> decode_across_workers(const Decoder& decoder,
                                               const std::vector<Syndrome>& syndromes,
                                               double p_f, std::size_t workers) {
  if (syndromes.empty()) return {};
  if (workers <= 1 || syndromes.size() < 2) return decoder.decode_batch(syndromes, p_f);

  const std::size_t used = std::min(workers, syndromes.size());
  const std::size_t per = (syndromes.size() + used - 1) / used;
  std::vector<ErrorVector> out(syndromes.size());
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(used);
  for (std::size_t w = 0; w < used; ++w) {
    const std::size_t lo = w * per;
    const std::size_t hi = std::min(syndromes.size(), lo + per);
    if (lo >= hi) break;
    threads.emplace_back([&, w, lo, hi] {
      try {
        const std::vector<Syndrome> slice(syndromes.begin() + static_cast<std::ptrdiff_t>(lo),
                                          syndromes.begin() + static_cast<std::ptrdiff_t>(hi));
        std::vector<ErrorVector> part = decoder.decode_batch(slice, p_f);
        for (std::size_t i = 0; i < part.size(); ++i) out[lo + i] = std::move(part[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : threads) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

CurvePoint run_point(const CssCode& code, const LogicalJudge& judge, const Decoder& decoder,
                     double p_f, std::size_t point_idx, const SweepConfig& config) {
  std::size_t done = 0;
  std::size_t failures = 0;
  std::unordered_map<std::string, ErrorVector> cache;

  while (done < config.trials) {
    const std::size_t count = std::min(config.batch, config.trials - done);
    std::vector<ErrorVector> errors(count);
    std::vector<Syndrome> syndromes(count);
    for (std::size_t j = 0; j < count; ++j) {
      Rng rng(derive_seed(config.seed, point_idx, done + j));
      errors[j] = sample_error(code, {p_f}, rng);
      syndromes[j] = syndrome_of(code, errors[j]);
    }

    std::vector<ErrorVector> e_hats;
    if (config.dedup_cache) {
      std::vector<std::string> keys(count);
      std::vector<Syndrome> pending;
      std::vector<std::string> pending_keys;
      for (std::size_t j = 0; j < count; ++j) {
        keys[j] = hex_encode(syndromes[j]);
        if (cache.emplace(keys[j], ErrorVector{}).second) {
          pending.push_back(syndromes[j]);
          pending_keys.push_back(keys[j]);
        }
      }
      std::vector<ErrorVector> decoded =
          decode_across_workers(decoder, pending, p_f, config.workers);
      for (std::size_t k = 0; k < decoded.size(); ++k)
        cache[pending_keys[k]] = std::move(decoded[k]);
      e_hats.reserve(count);
      for (std::size_t j = 0; j < count; ++j) e_hats.push_back(cache.at(keys[j]));
    } else {
      e_hats = decode_across_workers(decoder, syndromes, p_f, config.workers);
    }

    for (std::size_t j = 0; j < count; ++j)
      if (!judge.success(errors[j], e_hats[j])) ++failures;
    done += count;

    if (config.adaptive_stop && failures >= config.min_failures) break;
  }

  CurvePoint pt;
  pt.p_f = p_f;
  pt.trials = done;
  pt.failures = failures;
  pt.ler = static_cast<double>(failures) / static_cast<double>(done);
  const Interval ci = wilson_interval(failures, done);
  pt.ci_low = ci.low;
  pt.ci_high = ci.high;
  return pt;
}

}  // namespace

std::unique_ptr<Decoder> make_bp_decoder(const CssCode& code, const BpConfig& bp) {
  return std::make_unique<BpSweepDecoder>(code, bp);
}

std::unique_ptr<Decoder> make_bp_osd_decoder(const CssCode& code, const OsdConfig& osd,
                                             const BpConfig& bp) {
  return std::make_unique<BpOsdSweepDecoder>(code, osd, bp);
}

std::unique_ptr<Decoder> make_nbp_decoder(const CssCode& code, NbpModel model,
                                          const NbpConfig& config) {
  return std::make_unique<NbpSweepDecoder>(code, std::move(model), config);
}

std::unique_ptr<Decoder> make_gnn_decoder(const CssCode& code, GnnModel model,
                                          std::size_t chunk) {
  return std::make_unique<GnnSweepDecoder>(code, std::move(model), chunk);
}

std::vector<CurvePoint> run_sweep(const CssCode& code, const Decoder& decoder,
                                  const SweepConfig& config) {
  if (config.p_f_list.empty())
    throw std::invalid_argument("run_sweep: p_f_list must not be empty");
  for (double p : config.p_f_list)
    if (!(p > 0.0 && p < 0.5))
      throw std::invalid_argument("run_sweep: p_f must lie in (0, 0.5)");
  if (config.trials == 0) throw std::invalid_argument("run_sweep: trials must be positive");
  if (config.batch == 0) throw std::invalid_argument("run_sweep: batch must be positive");
  if (config.workers == 0) throw std::invalid_argument("run_sweep: workers must be positive");
  if (decoder.bits() != 2 * code.n || decoder.checks() != code.m())
    throw std::invalid_argument("run_sweep: decoder was built for a different code");

  const LogicalJudge judge(code);
  std::vector<CurvePoint> curve;
  curve.reserve(config.p_f_list.size());
  for (std::size_t i = 0; i < config.p_f_list.size(); ++i)
    curve.push_back(run_point(code, judge, decoder, config.p_f_list[i], i, config));
  return curve;
}

void write_curve_xy(const std::vector<CurvePoint>& curve, const std::string& path,
                    const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_curve_xy: cannot open " + path);
  out << "# " << comment << "\n";
  for (const CurvePoint& pt : curve)
    out << format_double(pt.p_f) << " " << format_double(pt.ler) << "\n";
  if (!out) throw std::runtime_error("write_curve_xy: write failed for " + path);
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_curve_csv: cannot open " + path);
  out << "p_f,trials,failures,ler,ci_low,ci_high\n";
  for (const CurvePoint& pt : curve)
    out << format_double(pt.p_f) << "," << pt.trials << "," << pt.failures << ","
        << format_double(pt.ler) << "," << format_double(pt.ci_low) << ","
        << format_double(pt.ci_high) << "\n";
  if (!out) throw std::runtime_error("write_curve_csv: write failed for " + path);
}

namespace {

BinMatrix block_diag_copies(const BinMatrix& a, std::size_t copies) {
  BinMatrix out(a.rows() * copies, a.cols() * copies);
  for (std::size_t c = 0; c < copies; ++c)
    for (std::size_t r = 0; r < a.rows(); ++r)
      for (std::size_t col : a.row(r).ones()) out.set(c * a.rows() + r, c * a.cols() + col, true);
  return out;
}

}  // namespace

CssCode disjoint_copies(const CssCode& code, std::size_t copies) {
  if (copies == 0) throw std::invalid_argument("disjoint_copies: copies must be positive");
  CssCode out = code;
  out.name = code.name + "-x" + std::to_string(copies);
  out.hx = block_diag_copies(code.hx, copies);
  out.hz = block_diag_copies(code.hz, copies);
  out.n = code.n * copies;
  out.k = code.k * copies;
  validate_css(out);
  return out;
}

double time_per_decode(const Decoder& decoder, const std::vector<Syndrome>& syndromes,
                       double p_f, std::size_t repeats) {
  if (syndromes.empty())
    throw std::invalid_argument("time_per_decode: syndromes must not be empty");
  if (repeats == 0) throw std::invalid_argument("time_per_decode: repeats must be positive");
  std::vector<double> per_decode(repeats);
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<ErrorVector> out = decoder.decode_batch(syndromes, p_f);
    const auto t1 = std::chrono::steady_clock::now();
    if (out.size() != syndromes.size())
      throw std::runtime_error("time_per_decode: decoder returned wrong batch size");
    per_decode[r] = std::chrono::duration<double>(t1 - t0).count() /
                    static_cast<double>(syndromes.size());
  }
  std::sort(per_decode.begin(), per_decode.end());
  return per_decode[repeats / 2];
}

}  // namespace qldpc
