#pragma once

#include <cstddef>
#include <vector>

#include "qldpc/css_code.hpp"
#include "qldpc/gf2.hpp"

namespace qldpc {

/// Bipartite factor graph the decoders run message passing on.
///
/// Variables are the 2n error bits laid out (x_1..x_n | z_1..z_n). Checks are
/// the m syndrome bits laid out (s_x | s_z). Because s_x = Hz*x and
/// s_z = Hx*z, the defining matrix is blockdiag(Hz, Hx) in that order.
struct TannerGraph {
  struct Edge {
    std::size_t check;
    std::size_t var;
  };

  std::size_t var_count = 0;    // 2n
  std::size_t check_count = 0;  // m

  std::vector<Edge> edges;  // sorted by (check, var); edge id = position
  std::vector<std::vector<std::size_t>> check_vars;   // ascending per check
  std::vector<std::vector<std::size_t>> var_checks;   // ascending per var
  std::vector<std::vector<std::size_t>> check_edges;  // edge ids per check
  std::vector<std::vector<std::size_t>> var_edges;    // edge ids per var

  std::size_t edge_count() const { return edges.size(); }
};

/// blockdiag(Hz, Hx): rows = checks (s_x | s_z), columns = variables (x | z).
BinMatrix decoding_matrix(const CssCode& code);

TannerGraph tanner_graph(const CssCode& code);

/// Graph over an arbitrary parity-check matrix (tests, classical codes).
TannerGraph tanner_graph(const BinMatrix& h);

/// Rebuilds the defining binary matrix from adjacency (round-trip check).
BinMatrix graph_to_matrix(const TannerGraph& g);

}  // namespace qldpc
