#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dcskel/datagen.hpp"
#include "dcskel/dependence.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dcskel;

namespace {

/// O(n^2) KSG reference with the same conventions (max-norm, strict counts).
double brute_force_ksg(const std::vector<double>& x, const std::vector<double>& y, int k) {
  const std::size_t n = x.size();
  auto psi = [](std::size_t m) {
    double v = -0.57721566490153286061;
    for (std::size_t t = 1; t < m; ++t) v += 1.0 / static_cast<double>(t);
    return v;
  };
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) d.push_back(std::max(std::abs(x[i] - x[j]), std::abs(y[i] - y[j])));
    std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
    const double eps = d[k - 1];
    std::size_t nx = 0, ny = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      nx += std::abs(x[i] - x[j]) < eps;
      ny += std::abs(y[i] - y[j]) < eps;
    }
    sum += psi(nx + 1) + psi(ny + 1);
  }
  return psi(k) + psi(n) - sum / static_cast<double>(n);
}

}  // namespace

TEST(EmpiricalCopula, RanksOverNPlusOne) {
  const std::vector<double> x{3, 1, 2}, y{1, 2, 3};
  const auto pu = empirical_copula(x, y);
  EXPECT_EQ(pu.u, (std::vector<double>{0.75, 0.25, 0.5}));
  EXPECT_EQ(pu.v, (std::vector<double>{0.25, 0.5, 0.75}));
}

TEST(EmpiricalCopula, TiesGetAverageRanks) {
  const std::vector<double> x{1, 1, 2}, y{1, 2, 3};
  EXPECT_EQ(empirical_copula(x, y).u, (std::vector<double>{0.375, 0.375, 0.75}));
}

TEST(EmpiricalCopula, ConstantColumnIsDegenerate) {
  const std::vector<double> x{2, 2, 2}, y{1, 2, 3};
  try {
    empirical_copula(x, y);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_input);
  }
}

TEST(EmpiricalCopula, InvariantUnderMonotoneTransforms) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    auto [x, y] = oracle::bivariate_normal(200, 0.5, rng());
    std::vector<double> gx(x.size());
    const int which = rep % 3;
    for (std::size_t i = 0; i < x.size(); ++i) {
      gx[i] = which == 0 ? std::exp(x[i]) : which == 1 ? x[i] * x[i] * x[i] : 3.0 * x[i] + 7.0;
    }
    const auto a = empirical_copula(x, y);
    const auto b = empirical_copula(gx, y);
    ASSERT_EQ(a.u, b.u);
    ASSERT_EQ(a.v, b.v);
    for (double u : a.u) ASSERT_TRUE(u > 0.0 && u < 1.0);
  }
}

TEST(Ksg, FastNeighborSearchMatchesBruteForce) {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    auto [x, y] = oracle::bivariate_normal(300, 0.1 * (rep % 9), rng());
    for (int k : {1, 3, 5}) {
      EXPECT_NEAR(detail::ksg_mutual_information(x, y, k), brute_force_ksg(x, y, k), 1e-12);
    }
  }
}

TEST(CopulaEntropy, IndependentUniformsNearZero) {
  const auto x = oracle::uniform_column(5000, 1);
  const auto y = oracle::uniform_column(5000, 2);
  EXPECT_NEAR(copula_entropy(x, y, 3), 0.0, 0.05);
}

TEST(CopulaEntropy, GaussianClosedForm) {
  // H_c = 0.5 ln(1 - rho^2) = -0.5108 for rho = 0.8
  auto [x, y] = oracle::bivariate_normal(5000, 0.8, 17);
  EXPECT_NEAR(copula_entropy(x, y, 3), 0.5 * std::log(1.0 - 0.64), 0.08);
}

TEST(CopulaEntropy, RankInvariantExactly) {
  auto [x, y] = oracle::bivariate_normal(2000, 0.6, 4);
  std::vector<double> ex(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) ex[i] = std::exp(x[i]);
  EXPECT_EQ(copula_entropy(ex, y, 3), copula_entropy(x, y, 3));
}

TEST(CopulaEntropy, RejectsBadK) {
  const std::vector<double> x{1, 2, 3}, y{3, 1, 2};
  EXPECT_THROW(copula_entropy(x, y, 3), Error);
  EXPECT_THROW(copula_entropy(x, y, 0), Error);
  EXPECT_NO_THROW(copula_entropy(x, y, 2));
}

TEST(Correlation, PerfectLinear) {
  const std::vector<double> x{0.5, -1, 2, 3, 4.25};
  EXPECT_DOUBLE_EQ(pearson(x, x), 1.0);
  EXPECT_DOUBLE_EQ(spearman(x, x), 1.0);
}

TEST(Correlation, MonotoneNonlinear) {
  std::vector<double> x, y;
  for (int i = -50; i <= 50; ++i) {
    x.push_back(i / 10.0);
    y.push_back(std::pow(i / 10.0, 3));
  }
  EXPECT_DOUBLE_EQ(spearman(x, y), 1.0);
  EXPECT_LT(pearson(x, y), 0.95);
}

TEST(Correlation, ConstantIsDegenerate) {
  const std::vector<double> x{1, 1, 1}, y{1, 2, 3};
  EXPECT_THROW(pearson(x, y), Error);
  EXPECT_THROW(spearman(y, x), Error);
}

TEST(MutualInformation, GaussianClosedForm) {
  // I = -0.5 ln(1 - rho^2) = 0.2231 for rho = 0.6
  auto [x, y] = oracle::bivariate_normal(5000, 0.6, 23);
  EXPECT_NEAR(mutual_information(x, y, 3), -0.5 * std::log(1.0 - 0.36), 0.05);
}

TEST(Dependence, SymmetricBitForBit) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    auto [x, y] = oracle::bivariate_normal(500, 0.4, rng());
    EXPECT_EQ(copula_entropy(x, y), copula_entropy(y, x));
    EXPECT_EQ(mutual_information(x, y), mutual_information(y, x));
    EXPECT_EQ(pearson(x, y), pearson(y, x));
    EXPECT_EQ(spearman(x, y), spearman(y, x));
  }
}

TEST(Dependence, CopulaEntropyAndMutualInformationAgreeOnGaussians) {
  for (double rho : {0.3, 0.6, 0.9}) {
    auto [x, y] = oracle::bivariate_normal(5000, rho, static_cast<std::uint64_t>(rho * 100));
    EXPECT_NEAR(std::abs(copula_entropy(x, y)), mutual_information(x, y), 0.1) << "rho=" << rho;
  }
}

TEST(DependencyMatrix, TwoVariables) {
  auto [x, y] = oracle::bivariate_normal(400, 0.5, 3);
  const auto d = Dataset::from_columns({x, y});
  const auto w = dependency_matrix(d, {DependenceKind::pearson, 3});
  EXPECT_EQ(w.p(), 2);
  EXPECT_EQ(w.at(0, 0), 0.0);
  EXPECT_EQ(w.at(0, 1), std::abs(pearson(x, y)));
  EXPECT_EQ(w.at(1, 0), w.at(0, 1));
}

TEST(DependencyMatrix, IndependentColumnsPearsonSmall) {
  const auto d = sample_sem(GaussianSEM::empty(3), 5000, 12);
  const auto w = dependency_matrix(d, {DependenceKind::pearson, 3});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_LT(w.at(i, j), 0.05);
}

TEST(DependencyMatrix, ChainOrderingForAllMeasures) {
  const auto d = sample_sem(fixtures::chain(3, 0.7), 5000, 31);
  for (auto kind : {DependenceKind::copula_entropy, DependenceKind::mutual_information, DependenceKind::pearson,
                    DependenceKind::spearman}) {
    const auto w = dependency_matrix(d, {kind, 3});
    EXPECT_GT(w.at(0, 1), w.at(0, 2)) << to_string(kind);
    EXPECT_GT(w.at(1, 2), w.at(0, 2)) << to_string(kind);
  }
}

TEST(DependencyMatrix, NonnegativeSymmetricAndWorkerCountIndependent) {
  GenConfig cfg;
  cfg.p = 8;
  cfg.edge_prob = 0.3;
  const auto d = sample_sem(generate_dag(cfg).sem, 600, 2);
  for (auto kind : {DependenceKind::copula_entropy, DependenceKind::mutual_information, DependenceKind::pearson,
                    DependenceKind::spearman}) {
    const auto w1 = dependency_matrix(d, {kind, 3}, 1);
    const auto w4 = dependency_matrix(d, {kind, 3}, 4);
    EXPECT_TRUE(w1 == w4);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        EXPECT_GE(w1.at(i, j), 0.0);
        EXPECT_EQ(w1.at(i, j), w1.at(j, i));
      }
  }
}

TEST(DependencyMatrix, ConstantColumnNamesPair) {
  const auto d = Dataset({"a", "b", "c"}, {{1, 2, 3, 4}, {5, 5, 5, 5}, {2, 1, 4, 3}});
  try {
    dependency_matrix(d, {DependenceKind::pearson, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_input);
    EXPECT_NE(std::string(e.what()).find("(a, b)"), std::string::npos) << e.what();
  }
}

TEST(DependencyMatrix, RankMeasuresInvariantUnderMonotoneColumnTransforms) {
  const auto d = sample_sem(fixtures::chain(4, 0.6), 800, 6);
  auto cols = d.columns();
  for (auto& v : cols[1]) v = std::exp(v);
  for (auto& v : cols[3]) v = v * v * v;
  const auto t = Dataset::from_columns(cols);
  for (auto kind : {DependenceKind::copula_entropy, DependenceKind::spearman}) {
    EXPECT_TRUE(dependency_matrix(d, {kind, 3}) == dependency_matrix(t, {kind, 3})) << to_string(kind);
  }
}
