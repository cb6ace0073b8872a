#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qldpc/bp.hpp"
#include "qldpc/channel.hpp"
#include "qldpc/css_code.hpp"
#include "qldpc/gf2.hpp"
#include "qldpc/tanner.hpp"

namespace qldpc {

struct OsdConfig {
  std::size_t order = 0;
  std::size_t candidate_limit = 0;  // 0 = no cap
  // Cheaper sweep for high orders: weight 0, all weight-1 flips, and weight-2
  // pairs within the first `order` most unreliable free coordinates.
  bool combination_sweep = false;
};

/// Columns sorted by ascending posterior LLR (most probable flips first),
/// ties broken by lower column index.
std::vector<std::size_t> reliability_order(std::span<const double> posterior_llr);

/// Sum of posterior LLRs over the support of e (the OSD candidate metric).
double soft_weight(const BinVector& e, std::span<const double> posterior_llr);

/// Ordered-statistics post-processing for one block: eliminate H in
/// reliability order, solve the pivot system for s with all free coordinates
/// zero (OSD-0), then sweep free-coordinate patterns of weight <= order
/// (increasing weight, lexicographic within a weight, first-found wins ties)
/// keeping the candidate with minimal soft weight. The output always
/// satisfies H * e_hat = s; an inconsistent syndrome throws.
BinVector osd_postprocess(const BinMatrix& h, const BinVector& s,
                          std::span<const double> posterior_llr, const OsdConfig& config);

/// BP with OSD fallback: returns BP's hard decision when BP converges,
/// otherwise post-processes the X block (Hz, s_x, x posteriors) and Z block
/// (Hx, s_z, z posteriors) independently and concatenates.
ErrorVector bp_osd_decode(const CssCode& code, const TannerGraph& graph, const Syndrome& s,
                          double prior_llr, const BpConfig& bp_config,
                          const OsdConfig& osd_config);
ErrorVector bp_osd_decode(const CssCode& code, const Syndrome& s, double prior_llr,
                          const BpConfig& bp_config, const OsdConfig& osd_config);

}  // namespace qldpc
