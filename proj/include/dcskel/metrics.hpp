#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dcskel/error.hpp"
#include "dcskel/types.hpp"

namespace dcskel {

struct SkeletonScore {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double precision = 1.0;
  double recall = 1.0;
  double accuracy = 1.0;
  double f1 = 1.0;
  std::size_t shd = 0;
  std::size_t ci_tests = 0;
};

/// Pair-level confusion counts over all C(p, 2) unordered pairs.
///
/// Conventions for empty denominators: precision is 1 with no predicted
/// edges, recall is 1 with no true edges, accuracy is 1 when p < 2, and f1 is
/// 0 when precision and recall are both 0.
inline SkeletonScore score_skeleton(const Skeleton& predicted, const Skeleton& truth, std::size_t ci_tests = 0) {
  if (predicted.p() != truth.p()) {
    fail(ErrorKind::invalid_argument, "score: predicted has p=" + std::to_string(predicted.p()) +
                                          ", truth has p=" + std::to_string(truth.p()));
  }
  SkeletonScore s;
  const int p = truth.p();
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      const bool pr = predicted.has_edge(i, j);
      const bool tr = truth.has_edge(i, j);
      if (pr && tr) ++s.tp;
      else if (pr) ++s.fp;
      else if (tr) ++s.fn;
      else ++s.tn;
    }
  const std::size_t pairs = s.tp + s.fp + s.fn + s.tn;
  s.precision = s.tp + s.fp == 0 ? 1.0 : static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp);
  s.recall = s.tp + s.fn == 0 ? 1.0 : static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn);
  s.accuracy = pairs == 0 ? 1.0 : static_cast<double>(s.tp + s.tn) / static_cast<double>(pairs);
  s.f1 = s.precision + s.recall == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  s.shd = s.fp + s.fn;
  s.ci_tests = ci_tests;
  return s;
}

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single score
};

struct ScoreSummary {
  std::size_t count = 0;
  MetricSummary precision, recall, accuracy, f1, shd, ci_tests;
};

inline MetricSummary summarize(const std::vector<double>& xs) {
  MetricSummary m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

inline ScoreSummary aggregate_scores(const std::vector<SkeletonScore>& scores) {
  if (scores.empty()) fail(ErrorKind::invalid_argument, "aggregate: empty score list");
  auto field = [&](auto get) {
    std::vector<double> xs;
    xs.reserve(scores.size());
    for (const auto& s : scores) xs.push_back(static_cast<double>(get(s)));
    return summarize(xs);
  };
  ScoreSummary out;
  out.count = scores.size();
  out.precision = field([](const SkeletonScore& s) { return s.precision; });
  out.recall = field([](const SkeletonScore& s) { return s.recall; });
  out.accuracy = field([](const SkeletonScore& s) { return s.accuracy; });
  out.f1 = field([](const SkeletonScore& s) { return s.f1; });
  out.shd = field([](const SkeletonScore& s) { return s.shd; });
  out.ci_tests = field([](const SkeletonScore& s) { return s.ci_tests; });
  return out;
}

}  // namespace dcskel
