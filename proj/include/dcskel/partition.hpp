#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <set>
#include <vector>

#include "dcskel/error.hpp"
#include "dcskel/types.hpp"

namespace dcskel {

struct PartitionConfig {
  std::optional<int> max_block_size;  // default max(8, ceil(p / 2))
  int min_blocks = 1;
  int expansion_depth = 1;

  int resolved_max_block_size(int p) const {
    return max_block_size ? *max_block_size : std::max(8, (p + 1) / 2);
  }

  void validate(int p) const {
    if (resolved_max_block_size(p) < 2) fail(ErrorKind::invalid_argument, "partition: max block size must be >= 2");
    if (min_blocks < 1) fail(ErrorKind::invalid_argument, "partition: min blocks must be >= 1");
    if (min_blocks > std::max(p, 1)) {
      fail(ErrorKind::invalid_argument, "partition: min blocks " + std::to_string(min_blocks) +
                                            " exceeds variable count " + std::to_string(p));
    }
    if (expansion_depth < 0) fail(ErrorKind::invalid_argument, "partition: expansion depth must be >= 0");
  }
};

/// Components as sorted vertex lists, ordered by smallest member.
inline std::vector<std::vector<int>> connected_components(const Skeleton& g) {
  const int p = g.p();
  std::vector<int> label(static_cast<std::size_t>(p), -1);
  std::vector<std::vector<int>> comps;
  for (int s = 0; s < p; ++s) {
    if (label[s] >= 0) continue;
    const int id = static_cast<int>(comps.size());
    comps.emplace_back();
    std::deque<int> queue{s};
    label[s] = id;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      comps[id].push_back(v);
      for (int w : g.neighbors(v)) {
        if (label[w] < 0) {
          label[w] = id;
          queue.push_back(w);
        }
      }
    }
    std::sort(comps[id].begin(), comps[id].end());
  }
  return comps;
}

struct EdgeScore {
  Edge edge;
  double value = 0.0;
};

/// Exact edge betweenness by Brandes accumulation over unweighted shortest
/// paths. Each unordered source/target pair is counted once. Output follows
/// g.edges() order.
inline std::vector<EdgeScore> edge_betweenness(const Skeleton& g) {
  const int p = g.p();
  const auto edges = g.edges();
  std::vector<int> edge_id(static_cast<std::size_t>(p) * p, -1);
  for (std::size_t t = 0; t < edges.size(); ++t) {
    edge_id[static_cast<std::size_t>(edges[t].u) * p + edges[t].v] = static_cast<int>(t);
    edge_id[static_cast<std::size_t>(edges[t].v) * p + edges[t].u] = static_cast<int>(t);
  }
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(p));
  for (int v = 0; v < p; ++v) adj[v] = g.neighbors(v);

  std::vector<double> score(edges.size(), 0.0);
  std::vector<double> sigma(static_cast<std::size_t>(p));
  std::vector<double> delta(static_cast<std::size_t>(p));
  std::vector<int> dist(static_cast<std::size_t>(p));
  std::vector<std::vector<int>> preds(static_cast<std::size_t>(p));
  std::vector<int> stack;
  for (int s = 0; s < p; ++s) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    for (auto& pr : preds) pr.clear();
    stack.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      stack.push_back(v);
      for (int w : adj[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
      const int w = *it;
      for (int v : preds[w]) {
        const double c = sigma[v] / sigma[w] * (1.0 + delta[w]);
        score[edge_id[static_cast<std::size_t>(v) * p + w]] += c;
        delta[v] += c;
      }
    }
  }
  std::vector<EdgeScore> out(edges.size());
  for (std::size_t t = 0; t < edges.size(); ++t) out[t] = {edges[t], score[t] / 2.0};
  return out;
}

struct GirvanNewmanTrace {
  std::vector<Edge> removed;  // in removal order
};

/// Girvan-Newman division: repeatedly drop the edge with the highest
/// betweenness until every component has at most max_block_size vertices and
/// there are at least min_blocks components. Candidate edges are restricted
/// to oversized components while any exist. Ties go to the smallest edge.
inline Partition girvan_newman(const Skeleton& g, const PartitionConfig& cfg, GirvanNewmanTrace* trace = nullptr) {
  const int p = g.p();
  cfg.validate(p);
  const int max_size = cfg.resolved_max_block_size(p);
  Skeleton work = g;
  while (true) {
    auto comps = connected_components(work);
    std::vector<int> comp_of(static_cast<std::size_t>(p));
    bool oversized = false;
    std::vector<char> too_big(comps.size(), 0);
    for (std::size_t c = 0; c < comps.size(); ++c) {
      for (int v : comps[c]) comp_of[v] = static_cast<int>(c);
      if (static_cast<int>(comps[c].size()) > max_size) too_big[c] = oversized = true;
    }
    if (!oversized && static_cast<int>(comps.size()) >= cfg.min_blocks) return Partition{std::move(comps)};
    if (work.edge_count() == 0) return Partition{std::move(comps)};

    const auto scores = edge_betweenness(work);
    const EdgeScore* best = nullptr;
    for (const auto& s : scores) {
      if (oversized && !too_big[comp_of[s.edge.u]]) continue;
      // scores are sums of ratios; treat near-equal values as ties
      if (!best || s.value > best->value + 1e-9 * std::max(1.0, std::abs(best->value))) best = &s;
    }
    work.remove_edge(best->edge.u, best->edge.v);
    if (trace) trace->removed.push_back(best->edge);
  }
}

/// Grows every block by its neighborhood in the scaffold `g`, `depth` hops.
inline Partition causal_expansion(const Skeleton& g, const Partition& part, int depth = 1) {
  if (depth < 0) fail(ErrorKind::invalid_argument, "causal expansion: depth must be >= 0");
  Partition out;
  for (const auto& block : part.blocks) {
    std::vector<char> in(static_cast<std::size_t>(g.p()), 0);
    for (int v : block) {
      if (v < 0 || v >= g.p()) {
        fail(ErrorKind::invalid_argument, "causal expansion: vertex " + std::to_string(v) + " out of range");
      }
      in[v] = 1;
    }
    std::vector<int> frontier(block.begin(), block.end());
    for (int hop = 0; hop < depth; ++hop) {
      std::vector<int> next;
      for (int v : frontier)
        for (int w : g.neighbors(v))
          if (!in[w]) {
            in[w] = 1;
            next.push_back(w);
          }
      frontier = std::move(next);
    }
    std::vector<int> grown;
    for (int v = 0; v < g.p(); ++v)
      if (in[v]) grown.push_back(v);
    out.blocks.push_back(std::move(grown));
  }
  return out;
}

/// Skeleton over a vertex subset with the local <-> global index map.
struct Subgraph {
  Skeleton local;
  std::vector<int> vertices;  // local index -> global index, ascending

  Skeleton to_global(int p) const {
    Skeleton g(p);
    for (const auto& e : local.edges()) g.add_edge(vertices[e.u], vertices[e.v]);
    return g;
  }
};

inline Subgraph induce_subgraph(const Skeleton& g, std::vector<int> block) {
  std::sort(block.begin(), block.end());
  block.erase(std::unique(block.begin(), block.end()), block.end());
  for (int v : block) {
    if (v < 0 || v >= g.p()) fail(ErrorKind::invalid_argument, "induce subgraph: vertex " + std::to_string(v) + " out of range");
  }
  Subgraph sub{Skeleton(static_cast<int>(block.size())), block};
  for (std::size_t a = 0; a < block.size(); ++a)
    for (std::size_t b = a + 1; b < block.size(); ++b)
      if (g.has_edge(block[a], block[b])) sub.local.add_edge(static_cast<int>(a), static_cast<int>(b));
  return sub;
}

/// True if some block contains both endpoints.
inline bool pair_covered(const Partition& part, int a, int b) {
  for (const auto& block : part.blocks) {
    if (std::binary_search(block.begin(), block.end(), a) && std::binary_search(block.begin(), block.end(), b)) return true;
  }
  return false;
}

/// Diagnostic: edges of `truth` whose endpoints share no block.
inline std::size_t count_cross_block_edges(const Skeleton& truth, const Partition& part) {
  std::size_t count = 0;
  for (const auto& e : truth.edges())
    if (!pair_covered(part, e.u, e.v)) ++count;
  return count;
}

}  // namespace dcskel
