#include "mcoce/mc_integration.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace mcoce {

UniformDensity1D::UniformDensity1D(Interval domain) : domain_(domain) {
  if (!(domain.hi > domain.lo)) throw std::invalid_argument("empty uniform domain");
}

double UniformDensity1D::pdf(double x) const {
  return (x >= domain_.lo && x <= domain_.hi) ? 1.0 / domain_.width() : 0.0;
}

double UniformDensity1D::sample(Rng& rng) const {
  std::uniform_real_distribution<double> u(domain_.lo, domain_.hi);
  return u(rng);
}

PiecewiseConstantDensity1D::PiecewiseConstantDensity1D(Interval domain,
                                                       std::vector<double> cell_mass)
    : domain_(domain), mass_(std::move(cell_mass)) {
  if (mass_.empty() || !(domain.hi > domain.lo)) {
    throw std::invalid_argument("piecewise density needs cells and a nonempty domain");
  }
  double total = 0.0;
  for (double m : mass_) {
    if (!(m >= 0.0)) throw std::invalid_argument("negative cell mass");
    total += m;
  }
  if (!(total > 0.0)) throw std::invalid_argument("density has zero total mass");
  cell_width_ = domain.width() / static_cast<double>(mass_.size());
  cum_.resize(mass_.size() + 1, 0.0);
  for (std::size_t i = 0; i < mass_.size(); ++i) {
    mass_[i] /= total;
    cum_[i + 1] = cum_[i] + mass_[i];
  }
}

double PiecewiseConstantDensity1D::pdf(double x) const {
  if (x < domain_.lo || x > domain_.hi) return 0.0;
  auto cell = static_cast<std::size_t>((x - domain_.lo) / cell_width_);
  cell = std::min(cell, mass_.size() - 1);
  return mass_[cell] / cell_width_;
}

double PiecewiseConstantDensity1D::cdf(double x) const {
  if (x <= domain_.lo) return 0.0;
  if (x >= domain_.hi) return 1.0;
  auto cell = static_cast<std::size_t>((x - domain_.lo) / cell_width_);
  cell = std::min(cell, mass_.size() - 1);
  const double left = domain_.lo + static_cast<double>(cell) * cell_width_;
  return cum_[cell] + mass_[cell] * (x - left) / cell_width_;
}

double PiecewiseConstantDensity1D::sample(Rng& rng) const {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double u = u01(rng);
  auto it = std::upper_bound(cum_.begin() + 1, cum_.end(), u);
  auto cell = static_cast<std::size_t>(std::distance(cum_.begin() + 1, it));
  cell = std::min(cell, mass_.size() - 1);
  // skip zero-mass cells so the draw always has positive density
  while (mass_[cell] == 0.0 && cell + 1 < mass_.size()) ++cell;
  const double frac = mass_[cell] > 0.0 ? std::clamp((u - cum_[cell]) / mass_[cell], 0.0, 1.0) : 0.5;
  return domain_.lo + (static_cast<double>(cell) + frac) * cell_width_;
}

ISEstimate importance_estimate(const Integrand1D& f, const SamplingDensity1D& h, std::size_t m,
                               Rng& rng) {
  if (m < 1) throw std::invalid_argument("importance_estimate needs m >= 1");
  ISEstimate est;
  est.n = m;
  est.ratio_min = std::numeric_limits<double>::infinity();
  est.ratio_max = -std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = h.sample(rng);
    const double density = h.pdf(x);
    if (!(density > 0.0)) throw InvalidProposal("proposal density is zero at a drawn point");
    const double r = f(x) / density;
    s += r;
    est.ratio_min = std::min(est.ratio_min, r);
    est.ratio_max = std::max(est.ratio_max, r);
  }
  est.value = s / static_cast<double>(m);
  est.ratio_mean = est.value;
  return est;
}

PiecewiseConstantDensity1D optimal_importance_density_1d(const Integrand1D& f, Interval domain,
                                                         std::size_t grid) {
  if (grid < 1) throw std::invalid_argument("grid must have at least one cell");
  const double width = domain.width() / static_cast<double>(grid);
  std::vector<double> mass(grid);
  double total = 0.0;
  for (std::size_t i = 0; i < grid; ++i) {
    const double mid = domain.lo + (static_cast<double>(i) + 0.5) * width;
    mass[i] = std::abs(f(mid)) * width;
    total += mass[i];
  }
  if (!(total > 0.0)) throw std::invalid_argument("|f| integrates to zero on the domain");
  return PiecewiseConstantDensity1D(domain, std::move(mass));
}

BiasVarianceReport empirical_bias_variance(std::span<const double> estimates, double truth) {
  if (estimates.empty()) throw std::invalid_argument("need at least one estimate");
  const double n = static_cast<double>(estimates.size());
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= n;
  BiasVarianceReport r;
  for (double e : estimates) {
    r.variance += (e - mean) * (e - mean);
    r.mse += (e - truth) * (e - truth);
  }
  r.variance /= n;
  r.mse /= n;
  r.bias_sq = (mean - truth) * (mean - truth);
  return r;
}

UnbiasednessSummary is_unbiased_demo(std::size_t reps, std::size_t m, std::uint64_t seed) {
  if (reps < 2) throw std::invalid_argument("is_unbiased needs reps >= 2");
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(StreamTag::Lab), 1));
  const UniformDensity1D h({0.0, 1.0});
  const Integrand1D f = [](double x) { return x; };
  std::vector<double> est(reps);
  for (auto& e : est) e = importance_estimate(f, h, m, rng).value;
  UnbiasednessSummary s;
  s.reps = reps;
  s.m = m;
  s.truth = 0.5;
  for (double e : est) s.mean += e;
  s.mean /= static_cast<double>(reps);
  double ss = 0.0;
  for (double e : est) ss += (e - s.mean) * (e - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(reps - 1));
  s.bound = 4.0 * s.sd / std::sqrt(static_cast<double>(reps));
  s.within_bound = std::abs(s.mean - s.truth) <= s.bound;
  return s;
}

std::vector<BiasVarianceRow> bias_variance_demo(std::size_t reps, std::uint64_t seed) {
  if (reps < 1) throw std::invalid_argument("bias_variance needs reps >= 1");
  const UniformDensity1D h({0.0, 1.0});
  const Integrand1D f = [](double x) { return x * x; };
  constexpr double kTruth = 1.0 / 3.0;
  constexpr double kShrink = 0.9;
  std::vector<BiasVarianceRow> rows;
  for (std::size_t m : std::array<std::size_t, 4>{4, 16, 64, 256}) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(StreamTag::Lab), 2, m));
    std::vector<double> plain(reps), shrunk(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      plain[r] = importance_estimate(f, h, m, rng).value;
      shrunk[r] = kShrink * plain[r];
    }
    rows.push_back({"importance", m, empirical_bias_variance(plain, kTruth)});
    rows.push_back({"shrunk_0.9", m, empirical_bias_variance(shrunk, kTruth)});
  }
  return rows;
}

NaiveMcoSummary naive_mco_demo(std::size_t m, std::size_t reps, std::uint64_t seed) {
  if (m < 1 || reps < 1) throw std::invalid_argument("naive_mco needs m >= 1 and reps >= 1");
  const std::array<double, 3> thetas = {0.0, 0.5, 1.0};
  const auto loss = [](double theta, double x) { return (theta - x) * (theta - x); };
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(StreamTag::Lab), 3));
  const UniformDensity1D h({0.0, 1.0});
  NaiveMcoSummary s;
  s.m = m;
  s.reps = reps;
  s.true_argmin = 0.5;
  std::vector<ImportanceSample> data(m);
  for (std::size_t r = 0; r < reps; ++r) {
    for (auto& d : data) {
      d.x = h.sample(rng);
      d.density = h.pdf(d.x);
    }
    const std::size_t k = naive_mco_argmin<double>(thetas, loss, data);
    if (thetas[k] != s.true_argmin) ++s.misselections;
  }
  s.misselection_frequency = static_cast<double>(s.misselections) / static_cast<double>(reps);
  return s;
}

}  // namespace mcoce
