#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qldpc/bp.hpp"
#include "qldpc/channel.hpp"
#include "qldpc/css_code.hpp"
#include "qldpc/gf2.hpp"
#include "qldpc/gnn.hpp"
#include "qldpc/nbp.hpp"
#include "qldpc/osd.hpp"
#include "qldpc/tanner.hpp"

namespace qldpc {

/// Logical-success test: decoding succeeds when the residual e + e_hat is a
/// product of stabilizers, i.e. its x part lies in rowspace(Hx) and its z
/// part in rowspace(Hz). Degenerate corrections (residual a nonzero
/// stabilizer) count as success; membership in either rowspace already
/// forces a zero residual syndrome, since Hx * Hz^T = 0.
class LogicalJudge {
 public:
  explicit LogicalJudge(const CssCode& code);

  std::size_t qubits() const { return n_; }
  /// rank(Hx) + rank(Hz) == n - k.
  std::size_t x_rank() const { return x_space_.rank(); }
  std::size_t z_rank() const { return z_space_.rank(); }

  bool success(const ErrorVector& e, const ErrorVector& e_hat) const;

 private:
  std::size_t n_ = 0;
  RowBasis x_space_;
  RowBasis z_space_;
};

bool is_logical_success(const LogicalJudge& judge, const ErrorVector& e,
                        const ErrorVector& e_hat);

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for a binomial proportion. Supported confidence
/// levels: 0.90, 0.95 (default, z = 1.96) and 0.99. failures == 0 pins
/// low to exactly 0, failures == trials pins high to exactly 1.
Interval wilson_interval(std::size_t failures, std::size_t trials,
                         double confidence = 0.95);

/// One point of a logical-error-rate curve.
struct CurvePoint {
  double p_f = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double ler = 0.0;      // failures / trials
  double ci_low = 0.0;   // 95% Wilson bounds
  double ci_high = 0.0;
};

/// Uniform front end over the decoders a sweep can drive. Implementations
/// are stateless per call, so one instance may serve several worker threads.
class Decoder {
 public:
  virtual ~Decoder() = default;
  virtual std::string name() const = 0;
  virtual std::size_t bits() const = 0;    // error length, 2n
  virtual std::size_t checks() const = 0;  // syndrome length, m
  virtual std::vector<ErrorVector> decode_batch(const std::vector<Syndrome>& syndromes,
                                                double p_f) const = 0;
};

std::unique_ptr<Decoder> make_bp_decoder(const CssCode& code, const BpConfig& bp = {});
std::unique_ptr<Decoder> make_bp_osd_decoder(const CssCode& code, const OsdConfig& osd,
                                             const BpConfig& bp = {});
/// Throws if the model was built for a different decoding graph.
std::unique_ptr<Decoder> make_nbp_decoder(const CssCode& code, NbpModel model,
                                          const NbpConfig& config = {});
std::unique_ptr<Decoder> make_gnn_decoder(const CssCode& code, GnnModel model,
                                          std::size_t chunk = 16);

struct SweepConfig {
  std::vector<double> p_f_list;
  std::size_t trials = 10000;  // per point
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  /// When set, a point may stop at a batch boundary once it has accumulated
  /// at least min_failures failures; the recorded trial count shrinks to
  /// the trials actually run.
  bool adaptive_stop = false;
  std::size_t min_failures = 100;
  /// Trials per decode call. Batch boundaries, not worker count, decide
  /// where adaptive stops can happen, so results are worker-invariant.
  std::size_t batch = 256;
  /// Memoize e_hat per distinct syndrome within a point (pure speedup;
  /// decoders are deterministic, so results do not change).
  bool dedup_cache = true;
};

/// Monte Carlo logical-error-rate curve. Trial t of point i draws its error
/// from the substream derive_seed(seed, i, t), so any partition of trials
/// over workers reproduces the same counts.
std::vector<CurvePoint> run_sweep(const CssCode& code, const Decoder& decoder,
                                  const SweepConfig& config);

/// Two-column "p_f ler" text, one '#' comment line on top.
void write_curve_xy(const std::vector<CurvePoint>& curve, const std::string& path,
                    const std::string& comment);
/// CSV with header p_f,trials,failures,ler,ci_low,ci_high.
void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path);

/// Block-diagonal stack of `copies` disjoint instances of `code`; n, k and
/// the check counts all scale by `copies` while row/column weights stay
/// put. Used for decoder scaling measurements.
CssCode disjoint_copies(const CssCode& code, std::size_t copies);

/// Median over `repeats` passes of (wall seconds to decode `syndromes`) /
/// syndromes.size().
double time_per_decode(const Decoder& decoder, const std::vector<Syndrome>& syndromes,
                       double p_f, std::size_t repeats = 3);

}  // namespace qldpc
