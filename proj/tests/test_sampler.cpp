#include "mkmr/sampler.hpp"

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "mkmr/stats.hpp"

namespace mkmr {
namespace {

TEST(GaussianSpec, DefaultTableShape) {
  const GaussianSpec spec = GaussianSpec::defaults();
  EXPECT_DOUBLE_EQ(spec.sigma, 3.2);
  EXPECT_EQ(spec.tail_cut, 6);
  EXPECT_EQ(spec.support_bound, 20);  // ceil(6 * 3.2)
  EXPECT_EQ(spec.pmf.size(), 41u);

  // w(0) is the mode; the edge weight ratio follows the weight formula
  for (std::int64_t x = -20; x <= 20; ++x) EXPECT_LE(spec.weight(x), spec.weight(0));
  EXPECT_NEAR(spec.weight(20) / spec.weight(0), 3.2937141103060925e-9, 1e-17);
  EXPECT_EQ(spec.weight(21), 0.0);
}

TEST(GaussianSpec, SymmetricAndNormalized) {
  const GaussianSpec spec = GaussianSpec::build(3.2, 6);
  for (std::int64_t x = 0; x <= spec.support_bound; ++x) {
    EXPECT_DOUBLE_EQ(spec.weight(x), spec.weight(-x));
  }
  double total = 0.0;
  for (double p : spec.pmf) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
  for (std::size_t i = 1; i < spec.cdf.size(); ++i) EXPECT_GE(spec.cdf[i], spec.cdf[i - 1]);
  EXPECT_DOUBLE_EQ(spec.cdf.back(), 1.0);
}

TEST(GaussianSpec, TableMomentsMatchClosedForms) {
  const GaussianSpec spec = GaussianSpec::defaults();
  EXPECT_NEAR(spec.table_mean(), 0.0, 1e-15);
  // truncation at 6.25 sigma sheds almost no mass, so the table variance
  // sits just under sigma^2
  EXPECT_NEAR(spec.table_variance(), 10.239999944900259, 1e-9);
  EXPECT_NEAR(spec.table_variance(), spec.sigma * spec.sigma, 0.01 * spec.sigma * spec.sigma);
}

TEST(GaussianSpec, RejectsBadParameters) {
  EXPECT_THROW(GaussianSpec::build(0.0, 6), std::invalid_argument);
  EXPECT_THROW(GaussianSpec::build(-1.0, 6), std::invalid_argument);
  EXPECT_THROW(GaussianSpec::build(3.2, 3), std::invalid_argument);
}

TEST(GaussianSpec, DegenerateIsAllZeroMass) {
  const GaussianSpec spec = GaussianSpec::degenerate();
  EXPECT_TRUE(spec.is_degenerate());
  EXPECT_EQ(spec.support_bound, 0);
  Rng rng(Seed::from_u64(5));
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_gaussian(spec, rng), 0);
}

TEST(SampleGaussian, StaysInSupportAndMatchesMoments) {
  const GaussianSpec spec = GaussianSpec::defaults();
  Rng rng(Seed::from_u64(2024));
  const int n = 1000000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::int64_t x = sample_gaussian(spec, rng);
    ASSERT_LE(std::llabs(x), spec.support_bound);
    sum += static_cast<double>(x);
    sum_sq += static_cast<double>(x) * static_cast<double>(x);
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  EXPECT_GE(mean, -0.02);
  EXPECT_LE(mean, 0.02);
  EXPECT_GE(var, 0.95 * spec.sigma * spec.sigma);
  EXPECT_LE(var, 1.05 * spec.sigma * spec.sigma);
}

TEST(SampleGaussian, HistogramMatchesTable) {
  const GaussianSpec spec = GaussianSpec::defaults();
  Rng rng(Seed::from_u64(31337));
  const int n = 1000000;
  std::vector<std::size_t> counts(spec.pmf.size(), 0);
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(sample_gaussian(spec, rng) + spec.support_bound)];

  // Pearson test against the table itself, greedily merging adjacent values
  // until each group expects at least 5 hits.
  std::vector<double> group_expected;
  std::vector<double> group_observed;
  double exp_acc = 0.0, obs_acc = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    exp_acc += spec.pmf[i] * n;
    obs_acc += static_cast<double>(counts[i]);
    if (exp_acc >= 5.0) {
      group_expected.push_back(exp_acc);
      group_observed.push_back(obs_acc);
      exp_acc = obs_acc = 0.0;
    }
  }
  if (exp_acc > 0.0) {  // fold the thin right tail into the last group
    group_expected.back() += exp_acc;
    group_observed.back() += obs_acc;
  }
  ASSERT_GE(group_expected.size(), 10u);

  double statistic = 0.0;
  for (std::size_t i = 0; i < group_expected.size(); ++i) {
    const double d = group_observed[i] - group_expected[i];
    statistic += d * d / group_expected[i];
  }
  const double dof = static_cast<double>(group_expected.size() - 1);
  const double critical = boost::math::quantile(boost::math::chi_squared(dof), 0.99);
  EXPECT_LT(statistic, critical);
}

TEST(SampleGaussian, ConsumesExactlyOneWordPerDraw) {
  // Draw accounting is part of the contract: the degenerate table must burn
  // a word too, so noiseless and noisy runs stay stream-aligned.
  for (const GaussianSpec& spec : {GaussianSpec::defaults(), GaussianSpec::degenerate()}) {
    Rng a(Seed::from_u64(9)), b(Seed::from_u64(9));
    for (int i = 0; i < 100; ++i) sample_gaussian(spec, a);
    for (int i = 0; i < 100; ++i) b.next_u64();
    EXPECT_EQ(a.next_u64(), b.next_u64());
  }
}

TEST(SampleUniform, VectorShapeAndDeterminism) {
  const FieldParams f = FieldParams::default_params();
  Rng a(Seed::from_u64(44)), b(Seed::from_u64(44));
  const auto va = sample_uniform_vector(f, 257, a);
  const auto vb = sample_uniform_vector(f, 257, b);
  ASSERT_EQ(va.size(), 257u);
  EXPECT_EQ(va, vb);
  for (const auto& e : va) EXPECT_LT(e.value, f.q);
}

TEST(SampleUniform, PassesBucketedUniformityTest) {
  const FieldParams f = FieldParams::default_params();
  Rng rng(Seed::from_u64(123456));
  std::vector<FieldElement> draws(1000000);
  for (auto& e : draws) e = sample_uniform_element(f, rng);
  const UniformityReport report = chi_square_uniform(draws, f, 256, 0.01);
  EXPECT_TRUE(report.pass) << "statistic " << report.statistic << " vs " << report.critical;
}

}  // namespace
}  // namespace mkmr
