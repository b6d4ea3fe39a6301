#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "dcskel/error.hpp"
#include "dcskel/types.hpp"

namespace dcskel {

/// splitmix64 finalizer; used to derive independent per-cell seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <typename... Ts>
std::uint64_t derive_seed(std::uint64_t base, Ts... coords) {
  std::uint64_t s = mix_seed(base);
  ((s = mix_seed(s ^ static_cast<std::uint64_t>(coords))), ...);
  return s;
}

/// FNV-1a, stable across platforms and runs.
inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct GenConfig {
  int p = 20;
  std::optional<double> edge_prob;  // default 0.075 p / (p - 1)
  double weight_low = 0.5;
  double weight_high = 0.9;
  NoiseSpec noise{};
  int n = 5000;
  std::uint64_t seed = 1;

  double resolved_edge_prob() const { return edge_prob ? *edge_prob : 0.075 * p / (p - 1.0); }

  void validate() const {
    if (p < 2) fail(ErrorKind::invalid_argument, "gen: p must be >= 2");
    if (n < 1) fail(ErrorKind::invalid_argument, "gen: n must be >= 1");
    const double q = resolved_edge_prob();
    if (!(q > 0.0 && q <= 1.0)) fail(ErrorKind::invalid_argument, "gen: edge probability must lie in (0, 1]");
    if (!(weight_low <= weight_high)) fail(ErrorKind::invalid_argument, "gen: weight range must satisfy low <= high");
    if (!(noise.scale >= 0.0)) fail(ErrorKind::invalid_argument, "gen: noise scale must be >= 0");
  }
};

struct GeneratedDag {
  GaussianSEM sem;
  Skeleton truth;
};

/// Random DAG: Bernoulli lower-triangular pattern, joint row/column
/// permutation, then i.i.d. Uniform[low, high] coefficients per present edge.
inline GeneratedDag generate_dag(const GenConfig& cfg) {
  cfg.validate();
  const int p = cfg.p;
  std::mt19937_64 rng(cfg.seed);
  std::bernoulli_distribution coin(cfg.resolved_edge_prob());

  // lower[child * p + parent] for parent < child
  std::vector<char> lower(static_cast<std::size_t>(p) * p, 0);
  for (int child = 1; child < p; ++child)
    for (int parent = 0; parent < child; ++parent) lower[static_cast<std::size_t>(child) * p + parent] = coin(rng);

  std::vector<int> perm(static_cast<std::size_t>(p));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  GaussianSEM sem = GaussianSEM::empty(p);
  std::vector<char> pattern(static_cast<std::size_t>(p) * p, 0);
  for (int child = 1; child < p; ++child)
    for (int parent = 0; parent < child; ++parent)
      if (lower[static_cast<std::size_t>(child) * p + parent]) pattern[static_cast<std::size_t>(perm[parent]) * p + perm[child]] = 1;

  std::uniform_real_distribution<double> coef(cfg.weight_low, cfg.weight_high);
  for (int parent = 0; parent < p; ++parent)
    for (int child = 0; child < p; ++child)
      if (pattern[static_cast<std::size_t>(parent) * p + child]) {
        double w = cfg.weight_low == cfg.weight_high ? cfg.weight_low : coef(rng);
        // keep the pattern intact if the range includes zero
        if (w == 0.0) w = std::numeric_limits<double>::min();
        sem.set_coef(parent, child, w);
      }
  sem.noise.assign(static_cast<std::size_t>(p), cfg.noise);
  return {sem, skeleton_of(sem)};
}

namespace detail {

/// n mean-zero draws from `spec`.
inline void draw_noise(const NoiseSpec& spec, std::mt19937_64& rng, std::vector<double>& out) {
  switch (spec.family) {
    case NoiseFamily::gaussian: {
      std::normal_distribution<double> dist(0.0, 1.0);
      for (auto& v : out) v = spec.scale * dist(rng);
      break;
    }
    case NoiseFamily::exponential: {
      std::exponential_distribution<double> dist(1.0);
      for (auto& v : out) v = spec.scale * (dist(rng) - 1.0);
      break;
    }
    case NoiseFamily::gamma: {
      std::gamma_distribution<double> dist(2.0, 1.0);
      for (auto& v : out) v = spec.scale * (dist(rng) - 2.0);
      break;
    }
    case NoiseFamily::uniform: {
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      for (auto& v : out) v = spec.scale * dist(rng);
      break;
    }
  }
}

}  // namespace detail

/// Draws n samples from the SEM. Noise columns are drawn in variable-index
/// order, then the structural equations are evaluated in topological order.
inline Dataset sample_sem(const GaussianSEM& sem, int n, std::uint64_t seed) {
  if (n < 1) fail(ErrorKind::invalid_argument, "sample_sem: n must be >= 1");
  const auto order = topological_order(sem);
  if (!order) fail(ErrorKind::cyclic_graph, "sample_sem: weight pattern has a cycle");
  const int p = sem.p();
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(p), std::vector<double>(static_cast<std::size_t>(n)));
  for (int j = 0; j < p; ++j) detail::draw_noise(sem.noise[j], rng, cols[j]);
  for (int child : *order) {
    for (int parent = 0; parent < p; ++parent) {
      const double c = sem.coef(parent, child);
      if (c == 0.0) continue;
      const auto& src = cols[parent];
      auto& dst = cols[child];
      for (int r = 0; r < n; ++r) dst[r] += c * src[r];
    }
  }
  return Dataset(sem.names, std::move(cols));
}

}  // namespace dcskel
