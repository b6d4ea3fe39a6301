#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "dcskel/dependence.hpp"
#include "dcskel/error.hpp"
#include "dcskel/types.hpp"

namespace dcskel {

/// Disjoint-set forest with union by size and path halving.
class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)), size_(static_cast<std::size_t>(n), 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }

  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

/// Maximum-weight spanning tree of the complete weighted graph (Kruskal).
/// Edges are taken by descending weight; equal weights go to the
/// lexicographically smaller (i, j) first.
inline Skeleton max_spanning_tree(const WeightedGraph& w) {
  const int p = w.p();
  if (p < 2) fail(ErrorKind::invalid_argument, "max spanning tree: need p >= 2");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(p) * (p - 1) / 2);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      if (!std::isfinite(w.at(i, j))) fail(ErrorKind::invalid_argument, "max spanning tree: non-finite weight");
      edges.push_back({i, j});
    }
  std::sort(edges.begin(), edges.end(), [&](const Edge& a, const Edge& b) {
    const double wa = w.at(a.u, a.v);
    const double wb = w.at(b.u, b.v);
    if (wa != wb) return wa > wb;
    return a < b;
  });
  Skeleton tree(p);
  UnionFind uf(p);
  for (const auto& e : edges) {
    if (uf.unite(e.u, e.v)) {
      tree.add_edge(e.u, e.v);
      if (static_cast<int>(tree.edge_count()) == p - 1) break;
    }
  }
  return tree;
}

inline double tree_weight(const WeightedGraph& w, const Skeleton& g) {
  double total = 0.0;
  for (const auto& e : g.edges()) total += w.at(e.u, e.v);
  return total;
}

/// Chow-Liu scaffold: dependency matrix followed by its maximum spanning
/// tree. Issues no conditional-independence tests.
inline Skeleton build_super_structure(const Dataset& d, const DependenceMeasure& m, unsigned threads = 1) {
  return max_spanning_tree(dependency_matrix(d, m, threads));
}

}  // namespace dcskel
