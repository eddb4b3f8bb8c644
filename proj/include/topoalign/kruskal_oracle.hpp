#pragma once

// Brute-force minimum spanning tree used as an independent reference for the
// Union-Find persistence path. It recomputes distances with its own loop and
// tracks components with a flat label array (relabel-on-merge), so it shares
// no code with geometry.hpp, union_find.hpp, or persistence.hpp.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <tuple>
#include <utility>
#include <vector>

namespace topoalign::oracle {

struct OracleEdge {
  std::size_t i;
  std::size_t j;
  double weight;
};

// MST edges of the complete Euclidean graph, Kruskal order with (weight, i, j)
// tie-breaking. Returned as (i, j) pairs with i < j, sorted lexicographically.
inline std::vector<std::pair<std::size_t, std::size_t>> kruskal_mst_pairs(
    const std::vector<std::vector<double>>& points) {
  const std::size_t n = points.size();
  std::vector<OracleEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < points[i].size(); ++k) s += (points[i][k] - points[j][k]) * (points[i][k] - points[j][k]);
      edges.push_back({i, j, std::sqrt(s)});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const OracleEdge& a, const OracleEdge& b) {
    return std::tie(a.weight, a.i, a.j) < std::tie(b.weight, b.i, b.j);
  });

  std::vector<std::size_t> component(n);
  for (std::size_t v = 0; v < n; ++v) component[v] = v;
  std::vector<std::pair<std::size_t, std::size_t>> tree;
  for (const auto& e : edges) {
    const std::size_t ci = component[e.i];
    const std::size_t cj = component[e.j];
    if (ci == cj) continue;
    for (auto& c : component)
      if (c == cj) c = ci;
    tree.emplace_back(e.i, e.j);
  }
  std::sort(tree.begin(), tree.end());
  return tree;
}

}  // namespace topoalign::oracle
