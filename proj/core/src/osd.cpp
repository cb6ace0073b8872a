#include "qldpc/osd.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace qldpc {

namespace {

// Next lexicographic ascending index subset of {0..pool-1} with |c| fixed.
bool next_combination(std::vector<std::size_t>& c, std::size_t pool) {
  const std::size_t w = c.size();
  std::size_t i = w;
  while (i-- > 0) {
    if (c[i] < pool - w + i) {
      ++c[i];
      for (std::size_t j = i + 1; j < w; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

double soft_weight_words(std::span<const std::uint64_t> words,
                         std::span<const double> llr) {
  double total = 0.0;
  for (std::size_t wi = 0; wi < words.size(); ++wi) {
    std::uint64_t w = words[wi];
    while (w) {
      total += llr[wi * 64 + std::countr_zero(w)];
      w &= w - 1;
    }
  }
  return total;
}

}  // namespace

std::vector<std::size_t> reliability_order(std::span<const double> posterior_llr) {
  std::vector<std::size_t> order(posterior_llr.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return posterior_llr[a] < posterior_llr[b];
  });
  return order;
}

double soft_weight(const BinVector& e, std::span<const double> posterior_llr) {
  if (e.size() != posterior_llr.size())
    throw std::invalid_argument("soft_weight: length mismatch");
  return soft_weight_words(e.words(), posterior_llr);
}

BinVector osd_postprocess(const BinMatrix& h, const BinVector& s,
                          std::span<const double> posterior_llr, const OsdConfig& config) {
  const std::size_t n = h.cols();
  if (s.size() != h.rows()) throw std::invalid_argument("osd: syndrome length != rows");
  if (posterior_llr.size() != n) throw std::invalid_argument("osd: llr length != cols");

  // One elimination of [H | s] visiting columns in reliability order (rhs
  // last). A pivot landing on the rhs column means s is not in H's column
  // space, which only happens on corrupted inputs.
  std::vector<std::size_t> order = reliability_order(posterior_llr);
  order.push_back(n);
  BinMatrix aug = hstack(h, BinMatrix(h.rows(), 1));
  for (std::size_t r = 0; r < h.rows(); ++r)
    if (s.get(r)) aug.set(r, n, true);
  RrefResult red = rref(aug, order);
  std::vector<std::size_t> pivots = red.pivots;
  if (!pivots.empty() && pivots.back() == n)
    throw std::invalid_argument("osd: syndrome outside the column space of H");

  // OSD-0: free coordinates zero, pivots read off the reduced rhs.
  BinVector base(n);
  for (std::size_t pi = 0; pi < pivots.size(); ++pi)
    if (red.reduced.get(pi, n)) base.set(pivots[pi], true);

  BinVector best = base;
  double best_metric = soft_weight(base, posterior_llr);
  const std::size_t limit = config.candidate_limit == 0
                                ? std::numeric_limits<std::size_t>::max()
                                : config.candidate_limit;
  std::size_t seen = 1;
  if ((config.order == 0 && !config.combination_sweep) || limit <= 1) return best;

  // Free coordinates in reliability order and their pivot-compensation
  // vectors: flipping free coordinate f stays consistent when the pivots
  // flagged in f's reduced column flip along with it.
  std::vector<bool> is_pivot(n, false);
  for (std::size_t p : pivots) is_pivot[p] = true;
  std::vector<std::size_t> free_coords;
  for (std::size_t c : order)
    if (c < n && !is_pivot[c]) free_coords.push_back(c);
  std::vector<BinVector> delta;
  delta.reserve(free_coords.size());
  for (std::size_t f : free_coords) {
    BinVector d = BinVector::unit(n, f);
    for (std::size_t pi = 0; pi < pivots.size(); ++pi)
      if (red.reduced.get(pi, f)) d.flip(pivots[pi]);
    delta.push_back(std::move(d));
  }

  BinVector cand(n);
  auto consider = [&](const std::vector<std::size_t>& combo) {
    cand = base;
    for (std::size_t i : combo) cand ^= delta[i];
    const double metric = soft_weight(cand, posterior_llr);
    if (metric < best_metric) {  // strict: ties keep the earlier candidate
      best_metric = metric;
      best = cand;
    }
    return ++seen < limit;
  };

  if (config.combination_sweep) {
    std::vector<std::size_t> combo(1);
    for (std::size_t i = 0; i < free_coords.size(); ++i) {
      combo[0] = i;
      if (!consider(combo)) return best;
    }
    const std::size_t head = std::min(config.order, free_coords.size());
    for (std::size_t i = 0; i + 1 < head; ++i)
      for (std::size_t j = i + 1; j < head; ++j)
        if (!consider({i, j})) return best;
    return best;
  }

  const std::size_t max_w = std::min(config.order, free_coords.size());
  for (std::size_t w = 1; w <= max_w; ++w) {
    std::vector<std::size_t> combo(w);
    std::iota(combo.begin(), combo.end(), 0);
    do {
      if (!consider(combo)) return best;
    } while (next_combination(combo, free_coords.size()));
  }
  return best;
}

ErrorVector bp_osd_decode(const CssCode& code, const TannerGraph& graph, const Syndrome& s,
                          double prior_llr, const BpConfig& bp_config,
                          const OsdConfig& osd_config) {
  BpResult bp = bp_decode(graph, s, prior_llr, bp_config);
  if (bp.converged) return bp.e_hat;

  const std::size_t n = code.n;
  const std::size_t mz = code.hz.rows();
  BinVector sx(mz), sz(code.hx.rows());
  for (std::size_t i = 0; i < mz; ++i) sx.set(i, s.get(i));
  for (std::size_t i = 0; i < code.hx.rows(); ++i) sz.set(i, s.get(mz + i));
  std::span<const double> post(bp.posterior_llr);

  BinVector ex = osd_postprocess(code.hz, sx, post.subspan(0, n), osd_config);
  BinVector ez = osd_postprocess(code.hx, sz, post.subspan(n, n), osd_config);
  ErrorVector e(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (ex.get(i)) e.set(i, true);
    if (ez.get(i)) e.set(n + i, true);
  }
  return e;
}

ErrorVector bp_osd_decode(const CssCode& code, const Syndrome& s, double prior_llr,
                          const BpConfig& bp_config, const OsdConfig& osd_config) {
  return bp_osd_decode(code, tanner_graph(code), s, prior_llr, bp_config, osd_config);
}

}  // namespace qldpc
