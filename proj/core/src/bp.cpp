#include "qldpc/bp.hpp"

#include <stdexcept>

#include "check_update.hpp"

namespace qldpc {

using detail::check_update_into;
using detail::clamp_llr;

std::vector<double> check_node_update(std::span<const double> incoming, bool s_c,
                                      double llr_clamp) {
  if (incoming.empty()) throw std::invalid_argument("check_node_update: no incoming messages");
  std::vector<double> out(incoming.size());
  std::vector<double> prefix, suffix;
  check_update_into(incoming, s_c, llr_clamp, out, prefix, suffix);
  return out;
}

BpResult bp_decode(const TannerGraph& graph, const BinVector& s, double prior_llr,
                   const BpConfig& config, BpTrace* trace) {
  if (s.size() != graph.check_count)
    throw std::invalid_argument("bp_decode: syndrome length != check count");
  if (config.max_iter < 1) throw std::invalid_argument("bp_decode: max_iter must be >= 1");
  if (!(config.llr_clamp > 0.0)) throw std::invalid_argument("bp_decode: llr_clamp must be > 0");

  const std::size_t edges = graph.edge_count();
  std::vector<double> c2v(edges, 0.0), v2c(edges, 0.0);
  std::vector<double> post(graph.var_count);
  std::vector<double> in_buf, out_buf, prefix, suffix;
  BinVector e_hat(graph.var_count);

  auto refresh_posteriors = [&] {
    for (std::size_t v = 0; v < graph.var_count; ++v) {
      double total = 0.0;
      for (std::size_t e : graph.var_edges[v]) total += c2v[e];
      post[v] = prior_llr + total;
      e_hat.set(v, post[v] < 0.0);
    }
  };
  auto syndrome_matches = [&] {
    for (std::size_t c = 0; c < graph.check_count; ++c) {
      bool parity = false;
      for (std::size_t v : graph.check_vars[c]) parity ^= e_hat.get(v);
      if (parity != s.get(c)) return false;
    }
    return true;
  };
  auto make_result = [&](bool converged, std::size_t iters) {
    BpResult r;
    r.e_hat = e_hat;
    r.posterior_llr = post;
    r.converged = converged;
    r.iterations_used = iters;
    return r;
  };

  refresh_posteriors();
  if (trace) trace->posterior.push_back(post);
  if (config.early_stop && syndrome_matches()) return make_result(true, 0);

  for (std::size_t iter = 1; iter <= config.max_iter; ++iter) {
    // Variable half: mu_{v->c} = prior + (total - mu_{c->v}).
    for (std::size_t v = 0; v < graph.var_count; ++v) {
      double total = 0.0;
      for (std::size_t e : graph.var_edges[v]) total += c2v[e];
      for (std::size_t e : graph.var_edges[v])
        v2c[e] = clamp_llr(prior_llr + (total - c2v[e]), config.llr_clamp);
    }
    // Check half, gathered per check in edge order.
    for (std::size_t c = 0; c < graph.check_count; ++c) {
      const std::vector<std::size_t>& ce = graph.check_edges[c];
      in_buf.resize(ce.size());
      out_buf.resize(ce.size());
      for (std::size_t i = 0; i < ce.size(); ++i) in_buf[i] = v2c[ce[i]];
      check_update_into(in_buf, s.get(c), config.llr_clamp, out_buf, prefix, suffix);
      for (std::size_t i = 0; i < ce.size(); ++i) c2v[ce[i]] = out_buf[i];
    }
    refresh_posteriors();
    if (trace) {
      trace->v2c.push_back(v2c);
      trace->c2v.push_back(c2v);
      trace->posterior.push_back(post);
    }
    const bool match = syndrome_matches();
    if ((config.early_stop && match) || iter == config.max_iter)
      return make_result(match, iter);
  }
  return make_result(false, config.max_iter);  // unreachable
}

}  // namespace qldpc
