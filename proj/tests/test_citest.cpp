#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <set>
#include <thread>

#include "dcskel/citest.hpp"
#include "dcskel/datagen.hpp"
#include "dcskel/dependence.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dcskel;

namespace {

/// Counts engine invocations so cache hits can be told apart from misses.
class CountingTest final : public CITest {
 public:
  explicit CountingTest(const CITest& inner) : inner_(inner) {}
  CIResult test(const CIQuery& q, double alpha) const override {
    ++calls;
    return inner_.test(q, alpha);
  }
  std::string_view tag() const override { return "counting"; }
  int variable_count() const override { return inner_.variable_count(); }
  mutable std::atomic<int> calls{0};

 private:
  const CITest& inner_;
};

Dataset chain_data(std::uint64_t seed, std::size_t n = 5000) { return sample_sem(fixtures::chain(3, 0.7), n, seed); }

}  // namespace

TEST(FisherZStatistic, KnownValue) {
  // atanh(0.5) * sqrt(97)
  const double z = fisher_z_statistic(0.5, 100, 0);
  EXPECT_NEAR(z, 5.410038105198994, 1e-3);
  EXPECT_NEAR(two_sided_normal_p(z), 6.301134015835326e-08, 1e-10);
}

TEST(FisherZStatistic, ZeroCorrelation) {
  EXPECT_EQ(fisher_z_statistic(0.0, 50, 2), 0.0);
  EXPECT_EQ(two_sided_normal_p(0.0), 1.0);
}

TEST(FisherZStatistic, ClampsPerfectCorrelation) {
  EXPECT_TRUE(std::isfinite(fisher_z_statistic(1.0, 50, 0)));
  EXPECT_TRUE(std::isfinite(fisher_z_statistic(-1.0, 50, 0)));
}

TEST(FisherZStatistic, MagnitudeGrowsWithSampleSize) {
  double last = 0.0;
  for (std::size_t n : {10, 20, 50, 100, 1000, 10000}) {
    const double z = std::abs(fisher_z_statistic(0.3, n, 1));
    EXPECT_GT(z, last);
    last = z;
  }
}

TEST(FisherZ, PartialCorrelationMatchesResidualCorrelation) {
  const auto d = chain_data(3, 2000);
  const FisherZ engine(d);
  // residualize 0 and 2 on 1 by least squares, then correlate the residuals
  auto resid = [&](std::size_t y) {
    const auto xs = d.column(1);
    const auto ys = d.column(y);
    const double n = static_cast<double>(d.n());
    double mx = 0, my = 0;
    for (std::size_t t = 0; t < d.n(); ++t) mx += xs[t], my += ys[t];
    mx /= n, my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t t = 0; t < d.n(); ++t) sxy += (xs[t] - mx) * (ys[t] - my), sxx += (xs[t] - mx) * (xs[t] - mx);
    std::vector<double> r(d.n());
    for (std::size_t t = 0; t < d.n(); ++t) r[t] = (ys[t] - my) - sxy / sxx * (xs[t] - mx);
    return r;
  };
  const auto r0 = resid(0), r2 = resid(2);
  EXPECT_NEAR(engine.partial_correlation(CIQuery(0, 2, {1})), pearson(r0, r2), 1e-9);
  EXPECT_NEAR(engine.partial_correlation(CIQuery(0, 1)), pearson(d.column(0), d.column(1)), 1e-12);
}

TEST(FisherZ, ChainConditionalIndependence) {
  int independent_given_middle = 0;
  int dependent_marginally = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto d = chain_data(500 + seed);
    independent_given_middle += fisher_z(d, CIQuery(0, 2, {1}), 0.05).independent;
    dependent_marginally += !fisher_z(d, CIQuery(0, 2), 0.05).independent;
  }
  EXPECT_GE(independent_given_middle, 90);
  EXPECT_GE(dependent_marginally, 99);
}

TEST(FisherZ, InsufficientSamples) {
  const auto d = Dataset::from_columns({{1, 2, 3, 4}, {2, 1, 4, 3}, {0, 1, 1, 5}});
  try {
    fisher_z(d, CIQuery(0, 1, {2}), 0.05);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::insufficient_samples);
  }
}

TEST(FisherZ, OutOfRangeVariable) {
  const auto d = chain_data(1, 50);
  EXPECT_THROW(fisher_z(d, CIQuery(0, 7), 0.05), Error);
}

TEST(FisherZ, CollinearConditioningSetStillAnswers) {
  auto cols = chain_data(2, 300).columns();
  cols.push_back(cols[1]);  // exact duplicate of column 1
  const auto d = Dataset::from_columns(cols);
  const auto r = fisher_z(d, CIQuery(0, 2, {1, 3}), 0.05);
  EXPECT_TRUE(std::isfinite(r.statistic));
  EXPECT_TRUE(r.p_value >= 0.0 && r.p_value <= 1.0);
}

TEST(CIQuery, Canonicalization) {
  EXPECT_EQ(CIQuery(3, 1, {7, 2}), CIQuery(1, 3, {2, 7}));
  EXPECT_EQ(to_string(CIQuery(3, 1, {7, 2})), "1,3|2 7");
  EXPECT_THROW(CIQuery(2, 2), Error);
  EXPECT_THROW(CIQuery(0, 1, {1}), Error);
  EXPECT_THROW(CIQuery(0, 1, {4, 4}), Error);
  EXPECT_THROW(CIQuery(-1, 1), Error);
}

TEST(CICache, CountsDistinctCanonicalQueries) {
  const auto d = chain_data(4, 200);
  const FisherZ fz(d);
  const CountingTest engine(fz);
  CICache cache;
  const auto a = cache.test(engine, CIQuery(0, 2, {1}), 0.05);
  const auto b = cache.test(engine, CIQuery(2, 0, {1}), 0.05);
  EXPECT_EQ(a, b);
  EXPECT_EQ(cache.unique_count(), 1u);
  EXPECT_EQ(engine.calls.load(), 1);
  cache.test(engine, CIQuery(0, 1), 0.05);
  EXPECT_EQ(cache.unique_count(), 2u);
  EXPECT_TRUE(cache.marginal_tested(1, 0));
  EXPECT_FALSE(cache.marginal_tested(0, 2));
}

TEST(CICache, RandomQueriesMatchSetRecount) {
  GenConfig cfg;
  cfg.p = 8;
  cfg.edge_prob = 0.3;
  const auto d = sample_sem(generate_dag(cfg).sem, 300, 1);
  const FisherZ engine(d);
  CICache cache;
  cache.set_logging(true);
  std::mt19937_64 rng(6);
  std::set<std::tuple<int, int, std::vector<int>>> distinct;
  for (int t = 0; t < 100; ++t) {
    const int a = static_cast<int>(rng() % 8);
    int b = static_cast<int>(rng() % 7);
    if (b >= a) ++b;
    std::vector<int> s;
    for (int v = 0; v < 8; ++v)
      if (v != a && v != b && rng() % 4 == 0) s.push_back(v);
    std::shuffle(s.begin(), s.end(), rng);
    const CIQuery q(a, b, s);
    cache.test(engine, q, 0.05);
    distinct.insert({q.i, q.j, q.s});
  }
  EXPECT_EQ(cache.unique_count(), distinct.size());
  EXPECT_EQ(cache.query_log().size(), 100u);
  const auto log = cache.query_log();
  EXPECT_EQ(std::set<CIQuery>(log.begin(), log.end()).size(), distinct.size());
}

TEST(CICache, CachedResultMatchesDirectEvaluation) {
  const auto d = chain_data(8, 400);
  const FisherZ engine(d);
  CICache cache;
  for (const auto& q : {CIQuery(0, 1), CIQuery(0, 2, {1}), CIQuery(1, 2)}) {
    EXPECT_EQ(cache.test(engine, q, 0.01), engine.test(q, 0.01));
    EXPECT_EQ(*cache.find(q), engine.test(q, 0.01));
  }
}

TEST(CICache, AlphaMustStayFixed) {
  const auto d = chain_data(9, 100);
  const FisherZ engine(d);
  CICache cache;
  cache.test(engine, CIQuery(0, 1), 0.05);
  EXPECT_EQ(cache.alpha(), 0.05);
  EXPECT_THROW(cache.test(engine, CIQuery(0, 2), 0.01), Error);
  EXPECT_THROW(CICache().test(engine, CIQuery(0, 2), 1.5), Error);
}

TEST(CICache, ConcurrentDuplicateMissesCountOnce) {
  const auto d = chain_data(10, 200);
  const FisherZ engine(d);
  CICache cache;
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < 8; ++t)
      pool.emplace_back([&] {
        for (int rep = 0; rep < 50; ++rep) cache.test(engine, CIQuery(0, 2, {1}), 0.05);
      });
  }
  EXPECT_EQ(cache.unique_count(), 1u);
}
