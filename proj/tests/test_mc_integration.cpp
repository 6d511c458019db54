#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mcoce/mc_integration.hpp"

using namespace mcoce;

namespace {

double sample_variance(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST(ImportanceEstimate, ConstantIntegrandIsExact) {
  Rng rng(1);
  const UniformDensity1D h({0.0, 1.0});
  for (int i = 0; i < 10; ++i) {
    EXPECT_DOUBLE_EQ(importance_estimate([](double) { return 3.25; }, h, 17, rng).value, 3.25);
  }
}

TEST(ImportanceEstimate, LinearIntegrandWithinFiveStandardErrors) {
  Rng rng(2);
  const UniformDensity1D h({0.0, 1.0});
  const std::size_t m = 100000;
  const ISEstimate e = importance_estimate([](double x) { return x; }, h, m, rng);
  EXPECT_EQ(e.n, m);
  EXPECT_NEAR(e.value, 0.5, 5.0 / (std::sqrt(12.0) * std::sqrt(static_cast<double>(m))));
  EXPECT_GE(e.ratio_min, 0.0);
  EXPECT_LE(e.ratio_max, 1.0);
}

TEST(ImportanceEstimate, ZeroDensityDrawThrows) {
  // all mass in the left half, integrand evaluated fine, but a density that
  // reports zero where it samples is invalid
  class Broken final : public SamplingDensity1D {
   public:
    double pdf(double) const override { return 0.0; }
    double sample(Rng&) const override { return 0.5; }
  };
  Rng rng(3);
  EXPECT_THROW(importance_estimate([](double x) { return x; }, Broken{}, 4, rng), InvalidProposal);
}

TEST(OptimalDensity, ConstantGivesUniform) {
  const auto h = optimal_importance_density_1d([](double) { return 1.0; }, {0.0, 1.0}, 50);
  for (double x : {0.01, 0.3, 0.77, 0.999}) EXPECT_NEAR(h.pdf(x), 1.0, 1e-12);
}

TEST(OptimalDensity, LinearCdfMatchesSquare) {
  const auto h = optimal_importance_density_1d([](double x) { return x; }, {0.0, 1.0}, 10000);
  for (int i = 0; i <= 100; ++i) {
    const double x = i / 100.0;
    EXPECT_NEAR(h.cdf(x), x * x, 1e-3);
  }
}

TEST(OptimalDensity, ZeroVarianceForExactShape) {
  // |f| piecewise constant on the grid: the ratio f/h is the integral everywhere
  const auto f = [](double x) { return x < 0.5 ? 1.0 : 3.0; };
  const auto h = optimal_importance_density_1d(f, {0.0, 1.0}, 2);
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const ISEstimate e = importance_estimate(f, h, 10, rng);
    EXPECT_NEAR(e.value, 2.0, 1e-12);
    EXPECT_NEAR(e.ratio_max - e.ratio_min, 0.0, 1e-12);
  }
}

TEST(OptimalDensity, ZeroIntegrandThrows) {
  EXPECT_THROW(optimal_importance_density_1d([](double) { return 0.0; }, {0.0, 1.0}, 10),
               std::invalid_argument);
}

TEST(OptimalDensity, SamplesFollowTheCdf) {
  const auto h = optimal_importance_density_1d([](double x) { return x; }, {0.0, 1.0}, 1000);
  Rng rng(5);
  const int n = 20000;
  int below = 0;
  for (int i = 0; i < n; ++i) below += h.sample(rng) < 0.5 ? 1 : 0;
  // P(X < 0.5) = 0.25
  EXPECT_NEAR(below / static_cast<double>(n), 0.25, 5.0 * std::sqrt(0.25 * 0.75 / n));
}

TEST(OptimalDensity, ReducesVarianceForSquare) {
  const auto f = [](double x) { return x * x; };
  const UniformDensity1D uniform({0.0, 1.0});
  const auto opt = optimal_importance_density_1d(f, {0.0, 1.0}, 1000);
  Rng a(6), b(7);
  std::vector<double> eu, eo;
  for (int i = 0; i < 2000; ++i) {
    eu.push_back(importance_estimate(f, uniform, 10, a).value);
    eo.push_back(importance_estimate(f, opt, 10, b).value);
  }
  EXPECT_LT(sample_variance(eo), sample_variance(eu));
}

TEST(BiasVariance, HandValues) {
  const std::vector<double> same = {0.3, 0.3, 0.3};
  const auto z = empirical_bias_variance(same, 0.3);
  EXPECT_EQ(z.mse, 0.0);
  EXPECT_EQ(z.bias_sq, 0.0);
  EXPECT_EQ(z.variance, 0.0);
  const std::vector<double> two = {0.0, 2.0};
  const auto r = empirical_bias_variance(two, 0.0);
  EXPECT_DOUBLE_EQ(r.mse, 2.0);
  EXPECT_DOUBLE_EQ(r.bias_sq, 1.0);
  EXPECT_DOUBLE_EQ(r.variance, 1.0);
  EXPECT_THROW(empirical_bias_variance(std::vector<double>{}, 0.0), std::invalid_argument);
}

TEST(BiasVariance, IdentityOnRandomSets) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> e(1 + rep % 50);
    const double shift = z(rng) * 3.0;
    for (auto& v : e) v = shift + z(rng);
    const auto r = empirical_bias_variance(e, z(rng));
    EXPECT_LE(std::abs(r.mse - (r.bias_sq + r.variance)), 1e-12 * std::max(r.mse, 1e-300));
  }
}

TEST(NaiveMco, Examples) {
  const std::vector<double> one = {0.7};
  const std::vector<ImportanceSample> data = {{0.1, 1.0}, {0.9, 1.0}};
  const auto loss = [](double t, double x) { return (t - x) * (t - x); };
  EXPECT_EQ(naive_mco_argmin<double>(one, loss, data), 0u);

  const std::vector<double> thetas = {0.0, 0.5, 1.0};
  std::vector<ImportanceSample> dense;
  for (int i = 0; i < 1000; ++i) dense.push_back({(i + 0.5) / 1000.0, 1.0});
  EXPECT_EQ(naive_mco_argmin<double>(thetas, loss, dense), 1u);

  // scaling every density by a constant leaves the argmin unchanged
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<ImportanceSample> d, scaled;
    for (int i = 0; i < 3; ++i) {
      const ImportanceSample s{u(rng), 0.2 + u(rng)};
      d.push_back(s);
      scaled.push_back({s.x, s.density * 7.5});
    }
    EXPECT_EQ(naive_mco_argmin<double>(thetas, loss, d), naive_mco_argmin<double>(thetas, loss, scaled));
  }

  // ties: lowest index
  const std::vector<ImportanceSample> mid = {{0.5, 1.0}};
  const std::vector<double> sym = {0.0, 1.0};
  EXPECT_EQ(naive_mco_argmin<double>(sym, loss, mid), 0u);
}

TEST(LabDemos, Unbiasedness) {
  const auto s = is_unbiased_demo(2000, 100, 42);
  EXPECT_TRUE(s.within_bound);
  EXPECT_LE(std::abs(s.mean - 0.5), 4.0 * s.sd / std::sqrt(2000.0));
}

TEST(LabDemos, NaiveMcoMisselectsWithTwoSamples) {
  const auto s = naive_mco_demo(2, 500, 42);
  EXPECT_GT(s.misselection_frequency, 0.0);
  EXPECT_EQ(s.true_argmin, 0.5);
  const auto big = naive_mco_demo(1000, 50, 42);
  EXPECT_LT(big.misselection_frequency, s.misselection_frequency);
}

TEST(LabDemos, BiasVarianceRowsSatisfyIdentity) {
  for (const auto& row : bias_variance_demo(500, 3)) {
    EXPECT_LE(std::abs(row.report.mse - row.report.bias_sq - row.report.variance), 1e-12 * row.report.mse);
  }
}
