#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcskel/error.hpp"
#include "dcskel/parallel.hpp"
#include "dcskel/types.hpp"

namespace dcskel {

enum class DependenceKind { copula_entropy, mutual_information, pearson, spearman };

inline std::string_view to_string(DependenceKind k) {
  switch (k) {
    case DependenceKind::copula_entropy: return "ce";
    case DependenceKind::mutual_information: return "mi";
    case DependenceKind::pearson: return "pearson";
    case DependenceKind::spearman: return "spearman";
  }
  return "ce";
}

inline DependenceKind parse_dependence_kind(std::string_view s) {
  if (s == "ce" || s == "copula-entropy") return DependenceKind::copula_entropy;
  if (s == "mi" || s == "mutual-information") return DependenceKind::mutual_information;
  if (s == "pearson") return DependenceKind::pearson;
  if (s == "spearman") return DependenceKind::spearman;
  fail(ErrorKind::invalid_argument, "unknown dependence measure '" + std::string(s) + "'");
}

struct DependenceMeasure {
  DependenceKind kind = DependenceKind::copula_entropy;
  int k = 3;  // neighbor count for the nearest-neighbor estimators

  bool uses_neighbors() const {
    return kind == DependenceKind::copula_entropy || kind == DependenceKind::mutual_information;
  }

  void validate(std::size_t n) const {
    if (!uses_neighbors()) return;
    if (k < 1) fail(ErrorKind::invalid_argument, "dependence: k must be >= 1");
    if (static_cast<std::size_t>(k) >= n) {
      fail(ErrorKind::invalid_argument,
           "dependence: k=" + std::to_string(k) + " must be < n=" + std::to_string(n));
    }
  }
};

/// 1-based ranks; tied values share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && x[idx[j]] == x[idx[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) ranks[idx[t]] = r;
    i = j;
  }
  return ranks;
}

inline bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

struct PseudoObservations {
  std::vector<double> u;
  std::vector<double> v;
};

namespace detail {

inline void require_pair(std::span<const double> x, std::span<const double> y, std::size_t min_n) {
  if (x.size() != y.size()) {
    fail(ErrorKind::invalid_argument, "dependence: columns differ in length (" + std::to_string(x.size()) +
                                          " vs " + std::to_string(y.size()) + ")");
  }
  if (x.size() < min_n) {
    fail(ErrorKind::insufficient_samples, "dependence: need at least " + std::to_string(min_n) + " samples");
  }
  if (is_constant(x) || is_constant(y)) fail(ErrorKind::degenerate_input, "dependence: constant column");
}

/// rank / (n + 1), strictly inside (0, 1).
inline std::vector<double> pseudo_observations(std::span<const double> x) {
  auto r = average_ranks(x);
  const double denom = static_cast<double>(x.size()) + 1.0;
  for (auto& v : r) v /= denom;
  return r;
}

inline std::vector<double> standardized(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / sd;
  return out;
}

/// digamma(m) for m = 0..n, with table[0] unused. psi(1) = -gamma, psi(m+1) = psi(m) + 1/m.
inline std::vector<double> digamma_table(std::size_t n) {
  std::vector<double> t(n + 1, 0.0);
  if (n >= 1) t[1] = -0.57721566490153286061;
  for (std::size_t m = 1; m < n; ++m) t[m + 1] = t[m] + 1.0 / static_cast<double>(m);
  return t;
}

/// Number of entries of the sorted array strictly within distance eps of c.
/// Uses |c - v| < eps directly; comparing against c +- eps rounds differently
/// right at the boundary, where the k-th neighbor always sits.
inline std::size_t count_open_interval(const std::vector<double>& sorted, double c, double eps) {
  auto lo = std::partition_point(sorted.begin(), sorted.end(), [&](double v) { return v < c && !(c - v < eps); });
  auto hi = std::partition_point(lo, sorted.end(), [&](double v) { return v <= c || v - c < eps; });
  return static_cast<std::size_t>(hi - lo);
}

/// Kraskov-Stoegbauer-Grassberger estimator (first variant) with the
/// max-norm on the joint space:
///   I = psi(k) + psi(n) - < psi(n_x + 1) + psi(n_y + 1) >
/// Neighbor search is exact; candidates are scanned outward in x order and
/// the scan stops once the x gap alone exceeds the current k-th distance.
inline double ksg_mutual_information(std::span<const double> x, std::span<const double> y, int k) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b] || (x[a] == x[b] && a < b); });
  std::vector<std::size_t> pos(n);
  for (std::size_t r = 0; r < n; ++r) pos[order[r]] = r;
  std::vector<double> xs(n), ys(y.begin(), y.end());
  for (std::size_t r = 0; r < n; ++r) xs[r] = x[order[r]];
  std::sort(ys.begin(), ys.end());
  const auto psi = digamma_table(n + 1);

  std::vector<double> best;  // k smallest joint distances, ascending
  best.reserve(static_cast<std::size_t>(k) + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    best.clear();
    const std::size_t r0 = pos[i];
    std::size_t left = r0;       // next candidate is left - 1
    std::size_t right = r0 + 1;  // next candidate is right
    while (left > 0 || right < n) {
      const double dl = left > 0 ? x[i] - xs[left - 1] : INFINITY;
      const double dr = right < n ? xs[right] - x[i] : INFINITY;
      const bool take_left = dl <= dr;
      const double dx = take_left ? dl : dr;
      if (static_cast<int>(best.size()) == k && dx >= best.back()) break;
      const std::size_t j = take_left ? order[--left] : order[right++];
      const double d = std::max(dx, std::abs(y[j] - y[i]));
      if (static_cast<int>(best.size()) < k || d < best.back()) {
        best.insert(std::upper_bound(best.begin(), best.end(), d), d);
        if (static_cast<int>(best.size()) > k) best.pop_back();
      }
    }
    const double eps = best.back();
    const std::size_t cx = count_open_interval(xs, x[i], eps);
    const std::size_t cy = count_open_interval(ys, y[i], eps);
    const std::size_t nx = cx > 0 ? cx - 1 : 0;  // exclude the point itself
    const std::size_t ny = cy > 0 ? cy - 1 : 0;
    sum += psi[nx + 1] + psi[ny + 1];
  }
  return psi[static_cast<std::size_t>(k)] + psi[n] - sum / static_cast<double>(n);
}

inline double pearson_unchecked(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = x[i] - mx;
    const double b = y[i] - my;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

/// Orders the two columns so every measure is bit-for-bit symmetric.
inline bool swap_for_symmetry(std::span<const double> x, std::span<const double> y) {
  return std::lexicographical_compare(y.begin(), y.end(), x.begin(), x.end());
}

}  // namespace detail

/// Pseudo-observations u_i = rank(x_i) / (n + 1), v_i likewise.
inline PseudoObservations empirical_copula(std::span<const double> x, std::span<const double> y) {
  detail::require_pair(x, y, 2);
  return {detail::pseudo_observations(x), detail::pseudo_observations(y)};
}

/// Copula entropy H_c = -int c(u) log c(u) du in nats, estimated as the
/// negated nearest-neighbor mutual information of the pseudo-observations.
/// Nonpositive up to estimator noise; |H_c| grows with dependence.
inline double copula_entropy(std::span<const double> x, std::span<const double> y, int k = 3) {
  detail::require_pair(x, y, 2);
  DependenceMeasure{DependenceKind::copula_entropy, k}.validate(x.size());
  if (detail::swap_for_symmetry(x, y)) std::swap(x, y);
  const auto u = detail::pseudo_observations(x);
  const auto v = detail::pseudo_observations(y);
  return -detail::ksg_mutual_information(u, v, k);
}

/// Nearest-neighbor mutual information (nats) on z-scored raw values.
inline double mutual_information(std::span<const double> x, std::span<const double> y, int k = 3) {
  detail::require_pair(x, y, 2);
  DependenceMeasure{DependenceKind::mutual_information, k}.validate(x.size());
  if (detail::swap_for_symmetry(x, y)) std::swap(x, y);
  return detail::ksg_mutual_information(detail::standardized(x), detail::standardized(y), k);
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  detail::require_pair(x, y, 2);
  if (detail::swap_for_symmetry(x, y)) std::swap(x, y);
  return detail::pearson_unchecked(x, y);
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  detail::require_pair(x, y, 2);
  if (detail::swap_for_symmetry(x, y)) std::swap(x, y);
  return detail::pearson_unchecked(average_ranks(x), average_ranks(y));
}

/// Nonnegative dependence strength used as the scaffold weight.
inline double dependence_strength(std::span<const double> x, std::span<const double> y, const DependenceMeasure& m) {
  switch (m.kind) {
    case DependenceKind::copula_entropy: return std::abs(copula_entropy(x, y, m.k));
    case DependenceKind::mutual_information: return std::max(0.0, mutual_information(x, y, m.k));
    case DependenceKind::pearson: return std::abs(pearson(x, y));
    case DependenceKind::spearman: return std::abs(spearman(x, y));
  }
  return 0.0;
}

/// Pairwise dependency matrix over all C(p, 2) variable pairs. Pairs are
/// evaluated in parallel; each pair writes only its own cell, so the result
/// does not depend on the worker count.
inline WeightedGraph dependency_matrix(const Dataset& d, const DependenceMeasure& m, unsigned threads = 1) {
  const int p = static_cast<int>(d.p());
  m.validate(d.n());
  if (d.n() < 2) fail(ErrorKind::insufficient_samples, "dependency matrix: need at least 2 samples");
  std::vector<char> constant(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) constant[j] = is_constant(d.column(j));
  std::vector<Edge> pairs;
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      if (constant[i] || constant[j]) {
        fail(ErrorKind::degenerate_input, "dependency matrix: pair (" + d.names()[i] + ", " + d.names()[j] +
                                              ") has a constant column");
      }
      pairs.push_back({i, j});
    }
  std::vector<double> values(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t t) {
    values[t] = dependence_strength(d.column(pairs[t].u), d.column(pairs[t].v), m);
  });
  WeightedGraph w(p);
  for (std::size_t t = 0; t < pairs.size(); ++t) w.set(pairs[t].u, pairs[t].v, values[t]);
  return w;
}

}  // namespace dcskel
