#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qldpc/gf2.hpp"
#include "qldpc/tanner.hpp"

namespace qldpc {

struct BpConfig {
  std::size_t max_iter = 12;
  double llr_clamp = 20.0;
  bool early_stop = true;
};

struct BpResult {
  BinVector e_hat;                   // hard decision, posterior < 0 -> 1
  std::vector<double> posterior_llr;
  bool converged = false;            // implies syndrome(e_hat) == s
  std::size_t iterations_used = 0;
};

/// Message snapshots after every half-iteration, for tests and the neural-BP
/// equivalence check. posterior[0] is the prior-only state.
struct BpTrace {
  std::vector<std::vector<double>> v2c;
  std::vector<std::vector<double>> c2v;
  std::vector<std::vector<double>> posterior;
};

/// One check-node update: out_j = (-1)^s_c * 2*atanh(prod_{i != j} tanh(in_i / 2)),
/// computed with prefix/suffix products (no division) and clamped to
/// +-llr_clamp. A degree-1 check emits (-1)^s_c * llr_clamp.
std::vector<double> check_node_update(std::span<const double> incoming, bool s_c,
                                      double llr_clamp);

/// Flooding belief propagation with uniform prior LLR over the graph's
/// variables. Messages are clamped after both half-iterations. Hard-decision
/// ties (posterior exactly 0) resolve to 0. With early_stop, decoding ends at
/// the first iteration (including iteration 0, prior only) whose hard decision
/// reproduces the syndrome.
BpResult bp_decode(const TannerGraph& graph, const BinVector& s, double prior_llr,
                   const BpConfig& config = {}, BpTrace* trace = nullptr);

}  // namespace qldpc
