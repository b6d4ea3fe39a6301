#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dcskel/error.hpp"

namespace dcskel {

/// Unordered variable pair stored as (lo, hi) with lo < hi.
struct Edge {
  int u = 0;
  int v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

/// n x p matrix of continuous observations, stored column-major.
///
/// Columns are index-aligned with `names`. Construction validates shape,
/// name uniqueness and finiteness; the object is immutable afterwards.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns)
      : names_(std::move(names)), columns_(std::move(columns)) {
    if (names_.size() != columns_.size()) {
      fail(ErrorKind::invalid_argument, "dataset: " + std::to_string(names_.size()) +
                                            " names for " + std::to_string(columns_.size()) +
                                            " columns");
    }
    if (columns_.size() < 2) fail(ErrorKind::invalid_argument, "dataset: need at least 2 variables");
    const std::size_t n = columns_.front().size();
    if (n < 1) fail(ErrorKind::invalid_argument, "dataset: need at least 1 sample");
    std::unordered_set<std::string> seen;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      if (!seen.insert(names_[j]).second) {
        fail(ErrorKind::invalid_argument, "dataset: duplicate variable name '" + names_[j] + "'");
      }
      if (columns_[j].size() != n) {
        fail(ErrorKind::invalid_argument, "dataset: column '" + names_[j] + "' has " +
                                              std::to_string(columns_[j].size()) +
                                              " rows, expected " + std::to_string(n));
      }
      for (std::size_t r = 0; r < n; ++r) {
        if (!std::isfinite(columns_[j][r])) {
          fail(ErrorKind::invalid_argument, "dataset: non-finite value at row " +
                                                std::to_string(r + 1) + ", column " + names_[j]);
        }
      }
    }
  }

  /// Column names default to X0, X1, ...
  static Dataset from_columns(std::vector<std::vector<double>> columns) {
    std::vector<std::string> names;
    names.reserve(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) names.push_back("X" + std::to_string(j));
    return Dataset(std::move(names), std::move(columns));
  }

  std::size_t n() const noexcept { return columns_.empty() ? 0 : columns_.front().size(); }
  std::size_t p() const noexcept { return columns_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::span<const double> column(std::size_t j) const { return columns_.at(j); }
  const std::vector<std::vector<double>>& columns() const noexcept { return columns_; }
  double at(std::size_t row, std::size_t col) const { return columns_[col][row]; }

  /// Column `j` of the result is column `order[j]` of this dataset.
  Dataset select(std::span<const int> order) const {
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;
    for (int j : order) {
      names.push_back(names_.at(static_cast<std::size_t>(j)));
      cols.push_back(columns_.at(static_cast<std::size_t>(j)));
    }
    return Dataset(std::move(names), std::move(cols));
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
};

/// Undirected simple graph over p variables.
class Skeleton {
 public:
  Skeleton() = default;
  explicit Skeleton(int p) : p_(p), adj_(static_cast<std::size_t>(p) * static_cast<std::size_t>(p), 0) {
    if (p < 0) fail(ErrorKind::invalid_argument, "skeleton: negative variable count");
  }

  static Skeleton complete(int p) {
    Skeleton g(p);
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j) g.add_edge(i, j);
    return g;
  }

  int p() const noexcept { return p_; }
  std::size_t edge_count() const noexcept { return edge_count_; }

  bool has_edge(int a, int b) const {
    check(a);
    check(b);
    return adj_[index(a, b)] != 0;
  }

  /// Returns false if the edge was already present.
  bool add_edge(int a, int b) {
    check(a);
    check(b);
    if (a == b) fail(ErrorKind::invalid_argument, "skeleton: self-loop on " + std::to_string(a));
    if (adj_[index(a, b)]) return false;
    adj_[index(a, b)] = adj_[index(b, a)] = 1;
    ++edge_count_;
    return true;
  }

  bool remove_edge(int a, int b) {
    check(a);
    check(b);
    if (!adj_[index(a, b)]) return false;
    adj_[index(a, b)] = adj_[index(b, a)] = 0;
    --edge_count_;
    return true;
  }

  /// Sorted ascending.
  std::vector<int> neighbors(int a) const {
    check(a);
    std::vector<int> out;
    for (int b = 0; b < p_; ++b)
      if (adj_[index(a, b)]) out.push_back(b);
    return out;
  }

  int degree(int a) const {
    check(a);
    int d = 0;
    for (int b = 0; b < p_; ++b) d += adj_[index(a, b)];
    return d;
  }

  /// Lexicographically sorted, canonical (u < v).
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (int i = 0; i < p_; ++i)
      for (int j = i + 1; j < p_; ++j)
        if (adj_[index(i, j)]) out.push_back({i, j});
    return out;
  }

  friend bool operator==(const Skeleton&, const Skeleton&) = default;

 private:
  std::size_t index(int a, int b) const {
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(p_) + static_cast<std::size_t>(b);
  }
  void check(int a) const {
    if (a < 0 || a >= p_) {
      fail(ErrorKind::invalid_argument,
           "skeleton: vertex " + std::to_string(a) + " out of range [0, " + std::to_string(p_) + ")");
    }
  }

  int p_ = 0;
  std::vector<std::uint8_t> adj_;
  std::size_t edge_count_ = 0;
};

/// Symmetric nonnegative dependence matrix with zero diagonal.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  explicit WeightedGraph(int p) : p_(p), w_(static_cast<std::size_t>(p) * static_cast<std::size_t>(p), 0.0) {}

  int p() const noexcept { return p_; }
  double at(int i, int j) const { return w_[static_cast<std::size_t>(i) * p_ + j]; }

  void set(int i, int j, double w) {
    if (i == j) fail(ErrorKind::invalid_argument, "weighted graph: diagonal must stay zero");
    if (!(w >= 0.0) || !std::isfinite(w)) {
      fail(ErrorKind::invalid_argument, "weighted graph: weight for (" + std::to_string(i) + "," +
                                            std::to_string(j) + ") must be finite and >= 0");
    }
    w_[static_cast<std::size_t>(i) * p_ + j] = w;
    w_[static_cast<std::size_t>(j) * p_ + i] = w;
  }

  friend bool operator==(const WeightedGraph&, const WeightedGraph&) = default;

 private:
  int p_ = 0;
  std::vector<double> w_;
};

/// Ordered list of variable-index blocks. Blocks are sorted ascending.
struct Partition {
  std::vector<std::vector<int>> blocks;

  std::size_t size() const noexcept { return blocks.size(); }
  friend bool operator==(const Partition&, const Partition&) = default;
};

enum class NoiseFamily { gaussian, exponential, gamma, uniform };

inline std::string_view to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::exponential: return "exponential";
    case NoiseFamily::gamma: return "gamma";
    case NoiseFamily::uniform: return "uniform";
  }
  return "gaussian";
}

inline NoiseFamily parse_noise_family(std::string_view s) {
  if (s == "gaussian" || s == "normal") return NoiseFamily::gaussian;
  if (s == "exponential" || s == "exp") return NoiseFamily::exponential;
  if (s == "gamma") return NoiseFamily::gamma;
  if (s == "uniform") return NoiseFamily::uniform;
  fail(ErrorKind::invalid_argument, "unknown noise family '" + std::string(s) + "'");
}

/// Noise term for one variable: a mean-zero draw from `family` multiplied by `scale`.
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::gaussian;
  double scale = 1.0;

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

/// Linear SEM: X_j = sum_i coef(i, j) * X_i + noise_j.
struct GaussianSEM {
  std::vector<std::string> names;
  std::vector<double> weights;  // row-major p x p; [parent * p + child]
  std::vector<NoiseSpec> noise;

  int p() const noexcept { return static_cast<int>(names.size()); }
  double coef(int parent, int child) const { return weights[static_cast<std::size_t>(parent) * p() + child]; }
  void set_coef(int parent, int child, double c) { weights[static_cast<std::size_t>(parent) * p() + child] = c; }

  std::size_t arc_count() const {
    return static_cast<std::size_t>(std::count_if(weights.begin(), weights.end(), [](double w) { return w != 0.0; }));
  }

  static GaussianSEM empty(int p) {
    GaussianSEM sem;
    for (int j = 0; j < p; ++j) sem.names.push_back("X" + std::to_string(j));
    sem.weights.assign(static_cast<std::size_t>(p) * p, 0.0);
    sem.noise.assign(static_cast<std::size_t>(p), NoiseSpec{});
    return sem;
  }

  friend bool operator==(const GaussianSEM&, const GaussianSEM&) = default;
};

/// Kahn's algorithm on the nonzero pattern; smallest ready index first.
/// Empty optional when the pattern has a cycle.
inline std::optional<std::vector<int>> topological_order(const GaussianSEM& sem) {
  const int p = sem.p();
  std::vector<int> indeg(static_cast<std::size_t>(p), 0);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (sem.coef(i, j) != 0.0) ++indeg[j];
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int j = 0; j < p; ++j)
    if (indeg[j] == 0) ready.push(j);
  std::vector<int> order;
  while (!ready.empty()) {
    const int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int j = 0; j < p; ++j) {
      if (sem.coef(v, j) != 0.0 && --indeg[j] == 0) ready.push(j);
    }
  }
  if (static_cast<int>(order.size()) != p) return std::nullopt;
  return order;
}

/// Undirected version of the SEM's nonzero pattern.
inline Skeleton skeleton_of(const GaussianSEM& sem) {
  Skeleton g(sem.p());
  for (int i = 0; i < sem.p(); ++i)
    for (int j = 0; j < sem.p(); ++j)
      if (i != j && sem.coef(i, j) != 0.0) g.add_edge(i, j);
  return g;
}

}  // namespace dcskel
