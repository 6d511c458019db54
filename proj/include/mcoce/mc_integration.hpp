#pragma once

// Importance-sampled integration, the variance-minimizing proposal in 1-D,
// the empirical MSE = bias^2 + variance split, and naive Monte Carlo
// optimization (argmin of an importance-sampled sum).

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcoce/objectives.hpp"
#include "mcoce/rng.hpp"

namespace mcoce {

class InvalidProposal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Integrand1D = std::function<double(double)>;

/// A 1-D density that can be both evaluated and sampled.
class SamplingDensity1D {
 public:
  virtual ~SamplingDensity1D() = default;
  virtual double pdf(double x) const = 0;
  virtual double sample(Rng& rng) const = 0;
};

class UniformDensity1D final : public SamplingDensity1D {
 public:
  explicit UniformDensity1D(Interval domain);
  double pdf(double x) const override;
  double sample(Rng& rng) const override;

 private:
  Interval domain_;
};

/// Piecewise-constant density on a uniform grid, sampled by inverse CDF.
class PiecewiseConstantDensity1D final : public SamplingDensity1D {
 public:
  PiecewiseConstantDensity1D(Interval domain, std::vector<double> cell_mass);
  double pdf(double x) const override;
  double sample(Rng& rng) const override;
  double cdf(double x) const;
  std::size_t cells() const { return mass_.size(); }

 private:
  Interval domain_;
  double cell_width_;
  std::vector<double> mass_;  // normalized, sums to 1
  std::vector<double> cum_;   // cum_[i] = mass of cells [0, i)
};

struct ISEstimate {
  double value = 0.0;  // (1/m) sum f(x_i) / h(x_i)
  std::size_t n = 0;
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  double ratio_mean = 0.0;
};

/// Throws InvalidProposal when a draw lands where h = 0.
ISEstimate importance_estimate(const Integrand1D& f, const SamplingDensity1D& h, std::size_t m,
                               Rng& rng);

/// Normalized |f| evaluated at cell midpoints of a uniform grid. Throws
/// std::invalid_argument when |f| integrates to zero.
PiecewiseConstantDensity1D optimal_importance_density_1d(const Integrand1D& f, Interval domain,
                                                         std::size_t grid);

/// Population (1/N) variance, so mse == bias_sq + variance exactly up to
/// rounding. The coupling between an estimator and a data-dependent target is
/// not modelled; `truth` is a fixed input.
struct BiasVarianceReport {
  double mse = 0.0;
  double bias_sq = 0.0;
  double variance = 0.0;
};

BiasVarianceReport empirical_bias_variance(std::span<const double> estimates, double truth);

struct ImportanceSample {
  double x = 0.0;
  double density = 1.0;  // h(x) of the distribution that drew x
};

/// Index of the theta minimizing (1/m) sum loss(theta, x_i) / h(x_i); lowest
/// index wins ties.
template <class Theta, class Loss>
std::size_t naive_mco_argmin(std::span<const Theta> thetas, Loss&& loss,
                             std::span<const ImportanceSample> data) {
  if (thetas.empty()) throw std::invalid_argument("naive_mco_argmin needs at least one theta");
  for (const auto& s : data) {
    if (!(s.density > 0.0)) throw InvalidProposal("sample with non-positive density");
  }
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  const double inv_m = data.empty() ? 0.0 : 1.0 / static_cast<double>(data.size());
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    double s = 0.0;
    for (const auto& sample : data) s += loss(thetas[k], sample.x) / sample.density;
    s *= inv_m;
    if (s < best_value) {
      best_value = s;
      best = k;
    }
  }
  return best;
}

// Repetition experiments behind `mco_ce lab`.

struct UnbiasednessSummary {
  std::size_t reps = 0;
  std::size_t m = 0;
  double truth = 0.0;
  double mean = 0.0;
  double sd = 0.0;     // sample sd of the estimates
  double bound = 0.0;  // 4 sd / sqrt(reps)
  bool within_bound = false;
};

/// f(x) = x on [0,1] with a uniform proposal.
UnbiasednessSummary is_unbiased_demo(std::size_t reps, std::size_t m, std::uint64_t seed);

struct BiasVarianceRow {
  std::string estimator;
  std::size_t m = 0;
  BiasVarianceReport report;
};

/// Integral of x^2 on [0,1] by plain importance sampling and by a shrunk
/// (0.9 x) version, at several sample sizes.
std::vector<BiasVarianceRow> bias_variance_demo(std::size_t reps, std::uint64_t seed);

struct NaiveMcoSummary {
  std::size_t m = 0;
  std::size_t reps = 0;
  double true_argmin = 0.0;
  std::size_t misselections = 0;
  double misselection_frequency = 0.0;
};

/// Thetas {0, 0.5, 1}, loss (theta - x)^2, x uniform on [0,1].
NaiveMcoSummary naive_mco_demo(std::size_t m, std::size_t reps, std::uint64_t seed);

}  // namespace mcoce
