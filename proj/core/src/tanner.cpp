#include "qldpc/tanner.hpp"

namespace qldpc {

BinMatrix decoding_matrix(const CssCode& code) {
  // Checks (s_x | s_z) with s_x = Hz*x, s_z = Hx*z; variables (x | z).
  const std::size_t n = code.n;
  const std::size_t mz = code.hz.rows(), mx = code.hx.rows();
  BinMatrix h(mz + mx, 2 * n);
  for (std::size_t r = 0; r < mz; ++r)
    for (std::size_t c = 0; c < n; ++c)
      if (code.hz.get(r, c)) h.set(r, c, true);
  for (std::size_t r = 0; r < mx; ++r)
    for (std::size_t c = 0; c < n; ++c)
      if (code.hx.get(r, c)) h.set(mz + r, n + c, true);
  return h;
}

TannerGraph tanner_graph(const BinMatrix& h) {
  TannerGraph g;
  g.var_count = h.cols();
  g.check_count = h.rows();
  g.check_vars.resize(g.check_count);
  g.var_checks.resize(g.var_count);
  g.check_edges.resize(g.check_count);
  g.var_edges.resize(g.var_count);
  for (std::size_t c = 0; c < h.rows(); ++c)
    for (std::size_t v = 0; v < h.cols(); ++v) {
      if (!h.get(c, v)) continue;
      const std::size_t id = g.edges.size();
      g.edges.push_back({c, v});
      g.check_vars[c].push_back(v);
      g.var_checks[v].push_back(c);
      g.check_edges[c].push_back(id);
      g.var_edges[v].push_back(id);
    }
  return g;
}

TannerGraph tanner_graph(const CssCode& code) { return tanner_graph(decoding_matrix(code)); }

BinMatrix graph_to_matrix(const TannerGraph& g) {
  BinMatrix h(g.check_count, g.var_count);
  for (const TannerGraph::Edge& e : g.edges) h.set(e.check, e.var, true);
  return h;
}

}  // namespace qldpc
