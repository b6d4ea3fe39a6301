#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dcskel/citest.hpp"
#include "dcskel/dependence.hpp"
#include "dcskel/error.hpp"
#include "dcskel/parallel.hpp"
#include "dcskel/partition.hpp"
#include "dcskel/scaffold.hpp"
#include "dcskel/types.hpp"

namespace dcskel {

struct LearnConfig {
  double alpha = 0.05;
  std::optional<int> max_order;  // unbounded when empty
  DependenceMeasure measure{};
  PartitionConfig partition{};
  bool use_partition = true;
  unsigned threads = 1;
  std::uint64_t seed = 0;  // recorded in the report; the learners are deterministic

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::invalid_argument, "learn: alpha must lie in (0, 1)");
    if (max_order && *max_order < 0) fail(ErrorKind::invalid_argument, "learn: max order must be >= 0");
  }
};

using SepSets = std::map<Edge, std::vector<int>>;

struct BackwardResult {
  Skeleton skeleton;
  SepSets sepsets;
};

/// Which non-adjacent pairs the forward phase examines.
enum class ForwardMode {
  all_non_adjacent,  // every pair in scope; cached verdicts are reused for free
  untested_only,     // only pairs whose marginal query is not yet cached
};

namespace detail {

inline std::vector<int> full_scope(int p) {
  std::vector<int> s(static_cast<std::size_t>(p));
  for (int v = 0; v < p; ++v) s[v] = v;
  return s;
}

inline std::vector<char> scope_mask(int p, std::span<const int> scope) {
  std::vector<char> mask(static_cast<std::size_t>(p), 0);
  for (int v : scope) {
    if (v < 0 || v >= p) fail(ErrorKind::invalid_argument, "scope vertex " + std::to_string(v) + " out of range");
    mask[v] = 1;
  }
  return mask;
}

/// Calls fn(subset) for every size-k subset of items in lexicographic order
/// of positions; stops early when fn returns true. Returns whether it stopped.
template <typename Fn>
bool for_each_subset(const std::vector<int>& items, int k, Fn&& fn) {
  const int m = static_cast<int>(items.size());
  if (k > m) return false;
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int t = 0; t < k; ++t) idx[t] = t;
  std::vector<int> subset(static_cast<std::size_t>(k));
  while (true) {
    for (int t = 0; t < k; ++t) subset[t] = items[idx[t]];
    if (fn(subset)) return true;
    int t = k - 1;
    while (t >= 0 && idx[t] == m - k + t) --t;
    if (t < 0) return false;
    ++idx[t];
    for (int u = t + 1; u < k; ++u) idx[u] = idx[u - 1] + 1;
  }
}

}  // namespace detail

/// Forward phase: marginal (order-0) test for the non-adjacent pairs in scope,
/// adding an edge for every dependent verdict. Pairs go in canonical order.
inline Skeleton forward_phase(Skeleton g, std::span<const int> scope, CICache& cache, const CITest& engine,
                              const LearnConfig& cfg, ForwardMode mode = ForwardMode::untested_only) {
  std::vector<int> vs(scope.begin(), scope.end());
  std::sort(vs.begin(), vs.end());
  detail::scope_mask(g.p(), vs);
  for (std::size_t a = 0; a < vs.size(); ++a)
    for (std::size_t b = a + 1; b < vs.size(); ++b) {
      const int i = vs[a], j = vs[b];
      if (g.has_edge(i, j)) continue;
      const CIQuery q(i, j);
      if (mode == ForwardMode::untested_only && cache.contains(q)) continue;
      if (!cache.test(engine, q, cfg.alpha).independent) g.add_edge(i, j);
    }
  return g;
}

inline Skeleton forward_phase(Skeleton g, CICache& cache, const CITest& engine, const LearnConfig& cfg,
                              ForwardMode mode = ForwardMode::untested_only) {
  const auto scope = detail::full_scope(g.p());
  return forward_phase(std::move(g), scope, cache, engine, cfg, mode);
}

/// Backward phase with PC-stable semantics. For order l = 0, 1, ... each
/// current edge {i, j} is tested against the size-l subsets of adj(i)\{j},
/// then adj(j)\{i}, with adjacencies frozen at the start of the level and
/// restricted to scope. The first independent verdict removes the edge.
inline BackwardResult backward_phase(Skeleton g, std::span<const int> scope, CICache& cache, const CITest& engine,
                                     const LearnConfig& cfg) {
  const auto mask = detail::scope_mask(g.p(), scope);
  SepSets sepsets;
  for (int level = 0;; ++level) {
    if (cfg.max_order && level > *cfg.max_order) break;
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.p()));
    for (int v = 0; v < g.p(); ++v) {
      if (!mask[v]) continue;
      for (int w : g.neighbors(v))
        if (mask[w]) adj[v].push_back(w);
    }
    bool testable = false;
    for (const auto& e : g.edges()) {
      if (!mask[e.u] || !mask[e.v]) continue;
      for (int side = 0; side < 2; ++side) {
        const int a = side == 0 ? e.u : e.v;
        const int b = side == 0 ? e.v : e.u;
        std::vector<int> candidates;
        for (int w : adj[a])
          if (w != b) candidates.push_back(w);
        if (static_cast<int>(candidates.size()) < level) continue;
        testable = true;
        const bool removed = detail::for_each_subset(candidates, level, [&](const std::vector<int>& s) {
          if (cache.test(engine, CIQuery(e.u, e.v, s), cfg.alpha).independent) {
            g.remove_edge(e.u, e.v);
            sepsets[e] = s;
            return true;
          }
          return false;
        });
        if (removed) break;
      }
    }
    if (!testable) break;
  }
  return {std::move(g), std::move(sepsets)};
}

inline BackwardResult backward_phase(Skeleton g, CICache& cache, const CITest& engine, const LearnConfig& cfg) {
  const auto scope = detail::full_scope(g.p());
  return backward_phase(std::move(g), scope, cache, engine, cfg);
}

/// Two-phase search inside every block, seeded with the scaffold edges
/// induced on that block. Blocks may run in parallel; each block tests all of
/// its own non-adjacent pairs so the local results do not depend on the order
/// in which blocks finish.
inline std::vector<Subgraph> learn_subgraphs(const Partition& blocks, const Skeleton& scaffold, CICache& cache,
                                             const CITest& engine, const LearnConfig& cfg) {
  std::vector<Subgraph> out(blocks.size());
  parallel_for(blocks.size(), cfg.threads, [&](std::size_t b) {
    const auto& block = blocks.blocks[b];
    const auto induced = induce_subgraph(scaffold, block);
    Skeleton work = induced.to_global(scaffold.p());
    work = forward_phase(std::move(work), induced.vertices, cache, engine, cfg, ForwardMode::all_non_adjacent);
    auto result = backward_phase(std::move(work), induced.vertices, cache, engine, cfg);
    out[b] = induce_subgraph(result.skeleton, induced.vertices);
  });
  return out;
}

/// Union rule: an edge survives if any block that learned it kept it.
inline Skeleton union_local_skeletons(int p, const std::vector<Subgraph>& locals) {
  Skeleton g(p);
  for (const auto& sub : locals)
    for (const auto& e : sub.local.edges()) g.add_edge(sub.vertices[e.u], sub.vertices[e.v]);
  return g;
}

struct MergeResult {
  Skeleton union_skeleton;   // before correction
  Skeleton corrected;        // after the correction forward + final backward pass
  std::size_t correction_pairs = 0;  // never-tested pairs examined by the correction
  SepSets sepsets;
};

/// Union of the local skeletons, then correction: forward phase over every
/// globally never-tested pair and a final backward phase on the full graph.
inline MergeResult merge_and_correct(int p, const std::vector<Subgraph>& locals, CICache& cache,
                                     const CITest& engine, const LearnConfig& cfg) {
  MergeResult m;
  m.union_skeleton = union_local_skeletons(p, locals);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      if (!m.union_skeleton.has_edge(i, j) && !cache.marginal_tested(i, j)) ++m.correction_pairs;
  Skeleton g = forward_phase(m.union_skeleton, cache, engine, cfg, ForwardMode::untested_only);
  auto back = backward_phase(std::move(g), cache, engine, cfg);
  m.corrected = std::move(back.skeleton);
  m.sepsets = std::move(back.sepsets);
  return m;
}

/// Order-by-order skeleton elimination from the complete graph.
inline BackwardResult pc_stable_skeleton(int p, CICache& cache, const CITest& engine, const LearnConfig& cfg) {
  return backward_phase(Skeleton::complete(p), cache, engine, cfg);
}

struct StageTimings {
  double scaffold_ms = 0.0;
  double partition_ms = 0.0;
  double learn_ms = 0.0;
  double merge_ms = 0.0;
  double total_ms = 0.0;
};

inline constexpr std::string_view kCorrectionRule = "order0-forward-on-untested-pairs+full-backward";

struct RunReport {
  std::string variant;  // pipeline | no-partition | pc-stable
  std::size_t unique_ci_tests = 0;
  StageTimings timings;
  Partition core_blocks;
  Partition blocks;
  std::size_t scaffold_edges = 0;
  std::size_t union_edges = 0;
  std::size_t correction_pairs = 0;
  std::size_t result_edges = 0;
  std::string engine;
  std::string measure;
  double alpha = 0.05;
  std::optional<int> max_order;
  std::uint64_t seed = 0;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["variant"] = variant;
    j["unique_ci_tests"] = unique_ci_tests;
    j["engine"] = engine;
    j["measure"] = measure;
    j["alpha"] = alpha;
    j["max_order"] = max_order ? nlohmann::ordered_json(*max_order) : nlohmann::ordered_json(nullptr);
    j["seed"] = seed;
    j["scaffold_edges"] = scaffold_edges;
    j["core_blocks"] = core_blocks.blocks;
    j["blocks"] = blocks.blocks;
    j["union_edges"] = union_edges;
    j["correction_pairs"] = correction_pairs;
    j["correction_rule"] = kCorrectionRule;
    j["result_edges"] = result_edges;
    j["timings_ms"] = {{"scaffold", timings.scaffold_ms},
                       {"partition", timings.partition_ms},
                       {"learn", timings.learn_ms},
                       {"merge", timings.merge_ms},
                       {"total", timings.total_ms}};
    return j;
  }
};

struct LearnResult {
  Skeleton skeleton;
  RunReport report;
};

namespace detail {

class Stopwatch {
 public:
  double lap_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

}  // namespace detail

/// scaffold -> divide -> expand -> learn per block -> merge and correct.
/// With cfg.use_partition == false the whole variable set is one block.
/// A precomputed scaffold (built with cfg.measure) skips the first stage.
inline LearnResult run_pipeline(const Dataset& d, const LearnConfig& cfg, const CITest& engine, CICache& cache,
                                const Skeleton* precomputed_scaffold = nullptr) {
  detail::run_stage("config", [&] { cfg.validate(); return 0; });
  const int p = static_cast<int>(d.p());
  LearnResult res;
  RunReport& rep = res.report;
  rep.variant = cfg.use_partition ? "pipeline" : "no-partition";
  rep.engine = std::string(engine.tag());
  rep.measure = std::string(to_string(cfg.measure.kind));
  rep.alpha = cfg.alpha;
  rep.max_order = cfg.max_order;
  rep.seed = cfg.seed;
  detail::Stopwatch clock;
  detail::Stopwatch total;

  const Skeleton scaffold = detail::run_stage("scaffold", [&] {
    if (!precomputed_scaffold) return build_super_structure(d, cfg.measure, cfg.threads);
    if (precomputed_scaffold->p() != p) fail(ErrorKind::invalid_argument, "precomputed scaffold has the wrong size");
    return *precomputed_scaffold;
  });
  rep.scaffold_edges = scaffold.edge_count();
  rep.timings.scaffold_ms = clock.lap_ms();

  detail::run_stage("partition", [&] {
    if (cfg.use_partition) {
      rep.core_blocks = girvan_newman(scaffold, cfg.partition);
      rep.blocks = causal_expansion(scaffold, rep.core_blocks, cfg.partition.expansion_depth);
    } else {
      rep.core_blocks.blocks = {detail::full_scope(p)};
      rep.blocks = rep.core_blocks;
    }
    return 0;
  });
  rep.timings.partition_ms = clock.lap_ms();

  const auto locals = detail::run_stage("learn", [&] { return learn_subgraphs(rep.blocks, scaffold, cache, engine, cfg); });
  rep.timings.learn_ms = clock.lap_ms();

  auto merged = detail::run_stage("merge", [&] { return merge_and_correct(p, locals, cache, engine, cfg); });
  rep.timings.merge_ms = clock.lap_ms();
  rep.union_edges = merged.union_skeleton.edge_count();
  rep.correction_pairs = merged.correction_pairs;
  res.skeleton = std::move(merged.corrected);
  rep.result_edges = res.skeleton.edge_count();
  rep.unique_ci_tests = cache.unique_count();
  rep.timings.total_ms = total.lap_ms();
  return res;
}

inline LearnResult run_pipeline(const Dataset& d, const LearnConfig& cfg, const Skeleton* precomputed_scaffold = nullptr) {
  const FisherZ engine = detail::run_stage("engine", [&] { return FisherZ(d); });
  CICache cache;
  return run_pipeline(d, cfg, engine, cache, precomputed_scaffold);
}

/// PC-stable baseline with a fresh cache of its own.
inline LearnResult run_pc_stable(const Dataset& d, const LearnConfig& cfg) {
  detail::run_stage("config", [&] { cfg.validate(); return 0; });
  const FisherZ engine = detail::run_stage("engine", [&] { return FisherZ(d); });
  CICache cache;
  detail::Stopwatch clock;
  LearnResult res;
  res.skeleton = detail::run_stage("learn", [&] { return pc_stable_skeleton(static_cast<int>(d.p()), cache, engine, cfg).skeleton; });
  auto& rep = res.report;
  rep.variant = "pc-stable";
  rep.unique_ci_tests = cache.unique_count();
  rep.engine = std::string(engine.tag());
  rep.measure = "none";
  rep.alpha = cfg.alpha;
  rep.max_order = cfg.max_order;
  rep.seed = cfg.seed;
  rep.result_edges = res.skeleton.edge_count();
  rep.timings.learn_ms = rep.timings.total_ms = clock.lap_ms();
  return res;
}

}  // namespace dcskel
