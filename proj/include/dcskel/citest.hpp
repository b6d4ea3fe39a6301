#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dcskel/error.hpp"
#include "dcskel/types.hpp"

namespace dcskel {

/// Canonical conditional-independence query: i < j, s sorted, unique, and
/// disjoint from {i, j}.
struct CIQuery {
  int i = 0;
  int j = 1;
  std::vector<int> s;

  CIQuery() = default;
  CIQuery(int a, int b, std::vector<int> cond = {}) : i(std::min(a, b)), j(std::max(a, b)), s(std::move(cond)) {
    if (a == b) fail(ErrorKind::invalid_argument, "ci query: i and j must differ");
    if (i < 0) fail(ErrorKind::invalid_argument, "ci query: negative variable index");
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) {
      fail(ErrorKind::invalid_argument, "ci query: duplicate conditioning variable");
    }
    for (int v : s) {
      if (v == i || v == j) fail(ErrorKind::invalid_argument, "ci query: conditioning set contains i or j");
      if (v < 0) fail(ErrorKind::invalid_argument, "ci query: negative variable index");
    }
  }

  friend bool operator==(const CIQuery&, const CIQuery&) = default;
  friend auto operator<=>(const CIQuery&, const CIQuery&) = default;
};

inline std::string to_string(const CIQuery& q) {
  std::string out = std::to_string(q.i) + "," + std::to_string(q.j) + "|";
  for (std::size_t t = 0; t < q.s.size(); ++t) {
    if (t) out += ' ';
    out += std::to_string(q.s[t]);
  }
  return out;
}

struct CIResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool independent = true;

  friend bool operator==(const CIResult&, const CIResult&) = default;
};

inline CIResult make_result(double statistic, double p_value, double alpha) {
  return {statistic, p_value, p_value > alpha};
}

/// Pluggable test engine. Implementations must be deterministic and safe to
/// call concurrently.
class CITest {
 public:
  virtual ~CITest() = default;
  virtual CIResult test(const CIQuery& q, double alpha) const = 0;
  virtual std::string_view tag() const = 0;
  virtual int variable_count() const = 0;
};

/// Standard normal upper two-sided tail: 2 (1 - Phi(|z|)).
inline double two_sided_normal_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

/// Fisher z statistic for a partial correlation r from n samples and a
/// conditioning set of size s_size.
inline double fisher_z_statistic(double r, std::size_t n, std::size_t s_size) {
  constexpr double bound = 1.0 - 1e-12;
  r = std::clamp(r, -bound, bound);
  return 0.5 * std::log((1.0 + r) / (1.0 - r)) * std::sqrt(static_cast<double>(n) - static_cast<double>(s_size) - 3.0);
}

/// Gaussian CI test on the partial correlation, computed from the inverse of
/// the correlation submatrix over {i, j} U s. The full correlation matrix is
/// computed once at construction.
class FisherZ final : public CITest {
 public:
  static constexpr double kRidge = 1e-8;

  explicit FisherZ(const Dataset& d) : n_(d.n()), corr_(correlation_matrix(d)) {}

  static Eigen::MatrixXd correlation_matrix(const Dataset& d) {
    const auto p = static_cast<Eigen::Index>(d.p());
    const auto n = static_cast<Eigen::Index>(d.n());
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto col = d.column(static_cast<std::size_t>(j));
      for (Eigen::Index r = 0; r < n; ++r) x(r, j) = col[static_cast<std::size_t>(r)];
    }
    x.rowwise() -= x.colwise().mean();
    Eigen::MatrixXd cov = x.transpose() * x;
    Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!(sd(j) > 0.0)) fail(ErrorKind::degenerate_input, "fisher z: constant column " + d.names()[static_cast<std::size_t>(j)]);
    }
    Eigen::MatrixXd corr = sd.cwiseInverse().asDiagonal() * cov * sd.cwiseInverse().asDiagonal();
    corr.diagonal().setOnes();
    return corr;
  }

  /// r = -P_ij / sqrt(P_ii P_jj) with P the inverse correlation submatrix.
  double partial_correlation(const CIQuery& q) const {
    const auto p = static_cast<int>(corr_.rows());
    if (q.j >= p || (!q.s.empty() && q.s.back() >= p)) fail(ErrorKind::invalid_argument, "fisher z: variable index out of range");
    if (q.s.empty()) return corr_(q.i, q.j);
    std::vector<int> vars{q.i, q.j};
    vars.insert(vars.end(), q.s.begin(), q.s.end());
    const auto m = static_cast<Eigen::Index>(vars.size());
    Eigen::MatrixXd sub(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = corr_(vars[a], vars[b]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (!lu.isInvertible()) {
      sub.diagonal().array() += kRidge;
      lu.compute(sub);
      if (!lu.isInvertible()) fail(ErrorKind::singular_matrix, "fisher z: singular correlation submatrix for " + to_string(q));
    }
    const Eigen::MatrixXd prec = lu.inverse();
    return -prec(0, 1) / std::sqrt(prec(0, 0) * prec(1, 1));
  }

  CIResult test(const CIQuery& q, double alpha) const override {
    if (n_ <= q.s.size() + 3) {
      fail(ErrorKind::insufficient_samples, "fisher z: n=" + std::to_string(n_) + " too small for |s|=" +
                                                std::to_string(q.s.size()));
    }
    const double z = fisher_z_statistic(partial_correlation(q), n_, q.s.size());
    return make_result(z, two_sided_normal_p(z), alpha);
  }

  std::string_view tag() const override { return "fisher-z"; }
  int variable_count() const override { return static_cast<int>(corr_.rows()); }

 private:
  std::size_t n_;
  Eigen::MatrixXd corr_;
};

/// One-shot Fisher z test on a dataset.
inline CIResult fisher_z(const Dataset& d, const CIQuery& q, double alpha) { return FisherZ(d).test(q, alpha); }

/// Thread-safe memo of executed queries. unique_count() is the number of
/// distinct canonical queries ever run through the engine; repeated lookups
/// are free. Concurrent misses on the same key may both evaluate, but only the
/// first insert is kept and counted.
class CICache {
 public:
  CIResult test(const CITest& engine, const CIQuery& q, double alpha) {
    {
      std::lock_guard lock(mutex_);
      check_alpha(alpha);
      if (logging_) log_.push_back(q);
      if (auto it = entries_.find(q); it != entries_.end()) return it->second;
    }
    const CIResult fresh = engine.test(q, alpha);
    std::lock_guard lock(mutex_);
    return entries_.try_emplace(q, fresh).first->second;
  }

  std::optional<CIResult> find(const CIQuery& q) const {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(q); it != entries_.end()) return it->second;
    return std::nullopt;
  }

  bool contains(const CIQuery& q) const { return find(q).has_value(); }

  std::size_t unique_count() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

  /// True once (a, b | {}) has been run.
  bool marginal_tested(int a, int b) const { return contains(CIQuery(a, b)); }

  std::optional<double> alpha() const {
    std::lock_guard lock(mutex_);
    return alpha_;
  }

  /// Records every lookup, hits included, for auditing.
  void set_logging(bool on) {
    std::lock_guard lock(mutex_);
    logging_ = on;
  }

  std::vector<CIQuery> query_log() const {
    std::lock_guard lock(mutex_);
    return log_;
  }

  std::vector<CIQuery> keys() const {
    std::lock_guard lock(mutex_);
    std::vector<CIQuery> out;
    out.reserve(entries_.size());
    for (const auto& [k, _] : entries_) out.push_back(k);
    return out;
  }

 private:
  void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::invalid_argument, "ci cache: alpha must lie in (0, 1)");
    if (!alpha_) {
      alpha_ = alpha;
    } else if (*alpha_ != alpha) {
      fail(ErrorKind::invalid_argument, "ci cache: alpha changed within a run");
    }
  }

  mutable std::mutex mutex_;
  std::map<CIQuery, CIResult> entries_;
  std::optional<double> alpha_;
  bool logging_ = false;
  std::vector<CIQuery> log_;
};

inline CIResult test_cached(CICache& cache, const CITest& engine, const CIQuery& q, double alpha) {
  return cache.test(engine, q, alpha);
}

}  // namespace dcskel
