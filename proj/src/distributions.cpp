#include "mcoce/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "mcoce/kernels.hpp"

namespace mcoce {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const Matrix& m) { return m.allFinite(); }

bool try_factor(const Matrix& cov, Matrix& chol) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) return false;
  chol = llt.matrixL();
  for (Eigen::Index i = 0; i < chol.rows(); ++i) {
    const double v = chol(i, i);
    if (!(v > 0.0) || !std::isfinite(v)) return false;
  }
  return true;
}

void check_finite(const Vector& mean, const Matrix& cov) {
  if (mean.size() == 0) throw InvalidDistribution("Gaussian with zero dimension");
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw InvalidDistribution("covariance shape does not match mean");
  }
  if (!all_finite(mean) || !all_finite(cov)) {
    throw InvalidDistribution("non-finite Gaussian parameters");
  }
}

// x = mean + L z, written out so sample_gaussian and sample_mixture share rounding.
void affine_point(const GaussianParams& g, const double* z, PointMatrix& out, Eigen::Index row) {
  const Matrix& L = g.chol();
  const Eigen::Index d = L.rows();
  for (Eigen::Index j = 0; j < d; ++j) {
    double acc = g.mean()(j);
    for (Eigen::Index k = 0; k <= j; ++k) acc += L(j, k) * z[k];
    out(row, j) = acc;
  }
}

}  // namespace

double covariance_jitter(const Matrix& cov) {
  const double d = static_cast<double>(cov.rows());
  return std::max(1e-12, 1e-10 * cov.trace() / d);
}

GaussianParams::GaussianParams(Vector mean, Matrix cov, Matrix chol)
    : mean_(std::move(mean)), cov_(std::move(cov)), chol_(std::move(chol)) {
  const double d = static_cast<double>(mean_.size());
  log_norm_ = -0.5 * d * kLog2Pi - chol_.diagonal().array().log().sum();
}

GaussianParams GaussianParams::regularized(Vector mean, Matrix cov) {
  check_finite(mean, cov);
  Matrix sym = 0.5 * (cov + cov.transpose());
  double jitter = covariance_jitter(sym);
  Matrix chol;
  for (int attempt = 0; attempt < 4; ++attempt, jitter *= 10.0) {
    Matrix candidate = sym;
    candidate.diagonal().array() += jitter;
    if (try_factor(candidate, chol)) {
      return GaussianParams(std::move(mean), std::move(candidate), std::move(chol));
    }
  }
  throw InvalidDistribution("covariance is not positive definite after regularization");
}

GaussianParams GaussianParams::from_spd(Vector mean, Matrix cov) {
  check_finite(mean, cov);
  Matrix sym = 0.5 * (cov + cov.transpose());
  Matrix chol;
  if (try_factor(sym, chol)) return GaussianParams(std::move(mean), std::move(sym), std::move(chol));
  return regularized(std::move(mean), std::move(sym));
}

MixtureParams::MixtureParams(Vector weights, std::vector<GaussianParams> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
  if (components_.empty()) throw InvalidDistribution("mixture needs at least one component");
  if (static_cast<std::size_t>(weights_.size()) != components_.size()) {
    throw InvalidDistribution("mixture weight count does not match component count");
  }
  const std::size_t d = components_.front().dim();
  for (const auto& c : components_) {
    if (c.dim() != d) throw InvalidDistribution("mixture components differ in dimension");
  }
  if (!all_finite(weights_) || (weights_.array() < 0.0).any()) {
    throw InvalidDistribution("mixture weights must be finite and nonnegative");
  }
  const double total = weights_.sum();
  if (!(total > 0.0)) throw InvalidDistribution("mixture weights sum to zero");
  // already-normalized weights are kept bit-for-bit
  if (std::abs(total - 1.0) > 1e-12) weights_ /= total;
}

MixtureParams::MixtureParams(GaussianParams single)
    : MixtureParams(Vector::Ones(1), std::vector<GaussianParams>{std::move(single)}) {}

PointMatrix sample_gaussian(const GaussianParams& params, std::size_t n, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(params.dim());
  PointMatrix out(static_cast<Eigen::Index>(n), d);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    for (auto& v : z) v = normal(rng);
    affine_point(params, z.data(), out, i);
  }
  return out;
}

PointMatrix sample_mixture(const MixtureParams& params, std::size_t n, Rng& normal_rng,
                           Rng& component_rng, std::vector<std::size_t>* labels) {
  const auto d = static_cast<Eigen::Index>(params.dim());
  PointMatrix out(static_cast<Eigen::Index>(n), d);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> z(static_cast<std::size_t>(d));
  if (labels != nullptr) labels->assign(n, 0);
  const std::size_t k_count = params.size();
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    std::size_t k = 0;
    if (k_count > 1) {
      const double u = uniform(component_rng);
      double cum = 0.0;
      k = k_count - 1;
      for (std::size_t c = 0; c < k_count; ++c) {
        cum += params.weights()(static_cast<Eigen::Index>(c));
        if (u < cum) {
          k = c;
          break;
        }
      }
    }
    for (auto& v : z) v = normal(normal_rng);
    affine_point(params.component(k), z.data(), out, i);
    if (labels != nullptr) (*labels)[static_cast<std::size_t>(i)] = k;
  }
  return out;
}

Vector logpdf_gaussian(const GaussianParams& params, const PointMatrix& points) {
  const std::size_t n = static_cast<std::size_t>(points.rows());
  const std::size_t d = params.dim();
  if (static_cast<std::size_t>(points.cols()) != d) {
    throw std::invalid_argument("point dimension does not match distribution");
  }
  Vector out(static_cast<Eigen::Index>(n));
  kernels::mahalanobis_sq({params.chol().data(), d * d}, {params.mean().data(), d},
                          {points.data(), n * d}, n, {out.data(), n});
  out = (-0.5 * out.array() + params.log_norm()).matrix();
  return out;
}

double logpdf_gaussian(const GaussianParams& params, const Vector& x) {
  PointMatrix row = x.transpose();
  return logpdf_gaussian(params, row)(0);
}

double logpdf_gaussian(const GaussianParams& params, std::span<const double> x) {
  return logpdf_gaussian(params, Vector(Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()))));
}

Vector logpdf_mixture(const MixtureParams& params, const PointMatrix& points) {
  const Eigen::Index n = points.rows();
  const auto k_count = static_cast<Eigen::Index>(params.size());
  if (k_count == 1) return logpdf_gaussian(params.component(0), points);
  Matrix terms(n, k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const double w = params.weights()(k);
    if (w > 0.0) {
      terms.col(k) = (logpdf_gaussian(params.component(static_cast<std::size_t>(k)), points).array() +
                      std::log(w))
                         .matrix();
    } else {
      terms.col(k).setConstant(-std::numeric_limits<double>::infinity());
    }
  }
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = terms.row(i).maxCoeff();
    if (!std::isfinite(m)) {
      out(i) = m;
      continue;
    }
    out(i) = m + std::log((terms.row(i).array() - m).exp().sum());
  }
  return out;
}

double logpdf_mixture(const MixtureParams& params, const Vector& x) {
  PointMatrix row = x.transpose();
  return logpdf_mixture(params, row)(0);
}

Moments weighted_moments(const PointMatrix& points, std::span<const double> weights) {
  const std::size_t n = static_cast<std::size_t>(points.rows());
  const auto d = points.cols();
  if (weights.size() != n) throw std::invalid_argument("weight count does not match point count");
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("weights must be finite and nonnegative");
    }
  }
  const double total = kernels::sum(weights);
  if (!(total > 0.0)) throw EmptyFit("all weights are zero");

  Moments m;
  m.total_weight = total;
  m.mean.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    m.mean(j) = kernels::weighted_sum(weights, {points.col(j).data(), n}) / total;
  }
  PointMatrix centered = points.rowwise() - m.mean.transpose();
  m.covariance.resize(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = 0; k <= j; ++k) {
      const double c = kernels::weighted_dot(weights, {centered.col(j).data(), n},
                                             {centered.col(k).data(), n}) /
                       total;
      m.covariance(j, k) = c;
      m.covariance(k, j) = c;
    }
  }
  return m;
}

GaussianParams weighted_gaussian_mle(const WeightedPoints& data) {
  Moments m = weighted_moments(data.points, {data.weights.data(), data.size()});
  return GaussianParams::regularized(std::move(m.mean), std::move(m.covariance));
}

std::size_t distinct_support(const WeightedPoints& data) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < data.points.rows(); ++i) {
    if (data.weights(i) > 0.0) idx.push_back(i);
  }
  const auto row_less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < data.points.cols(); ++j) {
      if (data.points(a, j) != data.points(b, j)) return data.points(a, j) < data.points(b, j);
    }
    return false;
  };
  std::sort(idx.begin(), idx.end(), row_less);
  std::size_t count = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i == 0 || row_less(idx[i - 1], idx[i])) ++count;
  }
  return count;
}

namespace {

Eigen::Index draw_weighted_index(const Vector& weights, Rng& rng) {
  const double total = weights.sum();
  std::uniform_real_distribution<double> uniform(0.0, total);
  const double u = uniform(rng);
  double cum = 0.0;
  Eigen::Index last_positive = 0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights(i) <= 0.0) continue;
    cum += weights(i);
    last_positive = i;
    if (u < cum) return i;
  }
  return last_positive;
}

class EmFitter {
 public:
  EmFitter(const WeightedPoints& data, Rng& rng, const EmOptions& options)
      : data_(data), rng_(rng), opt_(options) {
    global_ = weighted_moments(data.points, {data.weights.data(), data.size()});
    global_trace_ = global_.covariance.trace();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(global_.covariance, Eigen::EigenvaluesOnly);
    global_min_eig_ = eig.eigenvalues()(0);
  }

  // One-hot responsibilities from farthest-point seeding.
  Matrix seed_responsibilities(std::size_t k_count) {
    const Eigen::Index n = data_.points.rows();
    std::vector<Eigen::Index> centres{draw_weighted_index(data_.weights, rng_)};
    Vector min_dist = Vector::Constant(n, std::numeric_limits<double>::infinity());
    while (centres.size() < k_count) {
      const auto c = data_.points.row(centres.back());
      Eigen::Index best = -1;
      double best_dist = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (data_.weights(i) <= 0.0) continue;
        min_dist(i) = std::min(min_dist(i), (data_.points.row(i) - c).squaredNorm());
        if (min_dist(i) > best_dist) {
          best_dist = min_dist(i);
          best = i;
        }
      }
      centres.push_back(best);
    }
    Matrix resp = Matrix::Zero(n, static_cast<Eigen::Index>(k_count));
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index nearest = 0;
      double nearest_dist = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centres.size(); ++c) {
        const double dist = (data_.points.row(i) - data_.points.row(centres[c])).squaredNorm();
        if (dist < nearest_dist) {
          nearest_dist = dist;
          nearest = static_cast<Eigen::Index>(c);
        }
      }
      resp(i, nearest) = 1.0;
    }
    return resp;
  }

  // Returns true when a degenerate component was re-seeded.
  bool m_step(const Matrix& resp, const MixtureParams* previous, std::vector<GaussianParams>& comps,
              Vector& weights) {
    const auto k_count = resp.cols();
    const double total = global_.total_weight;
    bool rescued = false;
    comps.clear();
    weights.resize(k_count);
    for (Eigen::Index k = 0; k < k_count; ++k) {
      Vector v = data_.weights.cwiseProduct(resp.col(k));
      const double nk = v.sum();
      const double pik = nk / total;
      bool degenerate = !(pik >= opt_.min_component_weight);
      Moments m;
      if (nk > 0.0) {
        m = weighted_moments(data_.points, {v.data(), data_.size()});
        // collapse onto a point or onto a lower-dimensional subspace
        if (global_trace_ > 0.0) {
          const double floor = opt_.collapse_ratio * global_trace_;
          Eigen::SelfAdjointEigenSolver<Matrix> eig(m.covariance, Eigen::EigenvaluesOnly);
          if (m.covariance.trace() <= floor) degenerate = true;
          // only when the data itself is full-dimensional
          if (global_min_eig_ > floor && eig.eigenvalues()(0) <= floor) degenerate = true;
        }
      }
      if (degenerate && rescues_ < opt_.max_rescues) {
        ++rescues_;
        rescued = true;
        const Eigen::Index at = draw_weighted_index(data_.weights, rng_);
        comps.push_back(
            GaussianParams::regularized(data_.points.row(at).transpose(), global_.covariance));
        weights(k) = 1.0 / static_cast<double>(k_count);
        continue;
      }
      if (degenerate) exhausted_ = true;
      if (nk > 0.0) {
        comps.push_back(GaussianParams::regularized(std::move(m.mean), std::move(m.covariance)));
      } else if (previous != nullptr) {
        comps.push_back(previous->component(static_cast<std::size_t>(k)));
      } else {
        comps.push_back(GaussianParams::regularized(global_.mean, global_.covariance));
      }
      weights(k) = pik;
    }
    return rescued;
  }

  // Fills resp and returns the weighted log-likelihood.
  double e_step(const MixtureParams& params, Matrix& resp) const {
    const Eigen::Index n = data_.points.rows();
    const auto k_count = static_cast<Eigen::Index>(params.size());
    Matrix terms(n, k_count);
    for (Eigen::Index k = 0; k < k_count; ++k) {
      const double w = params.weights()(k);
      if (w > 0.0) {
        terms.col(k) = (logpdf_gaussian(params.component(static_cast<std::size_t>(k)), data_.points)
                            .array() +
                        std::log(w))
                           .matrix();
      } else {
        terms.col(k).setConstant(-std::numeric_limits<double>::infinity());
      }
    }
    resp.resize(n, k_count);
    Vector row_ll(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = terms.row(i).maxCoeff();
      const Eigen::ArrayXd shifted = (terms.row(i).array() - m).exp().transpose();
      const double s = shifted.sum();
      row_ll(i) = m + std::log(s);
      resp.row(i) = (shifted / s).transpose();
    }
    return kernels::weighted_sum({data_.weights.data(), data_.size()}, {row_ll.data(), data_.size()});
  }

  EmResult run(MixtureParams params, std::size_t requested, bool reduced, bool rescued_at_init) {
    EmResult result{params, {}, {}, 0, requested, reduced, false};
    Matrix resp;
    double ll = e_step(params, resp);
    result.loglik.push_back(ll);
    if (rescued_at_init) result.rescue_steps.push_back(0);
    for (int it = 1; it <= opt_.max_iterations; ++it) {
      std::vector<GaussianParams> comps;
      Vector weights;
      const bool rescued = m_step(resp, &params, comps, weights);
      // out of rescues: keep the last non-degenerate fit
      if (exhausted_) break;
      params = MixtureParams(std::move(weights), std::move(comps));
      const double ll_new = e_step(params, resp);
      result.loglik.push_back(ll_new);
      result.iterations = it;
      if (rescued) {
        result.rescue_steps.push_back(result.loglik.size() - 1);
        ll = ll_new;
        continue;
      }
      const double gain = ll_new - ll;
      ll = ll_new;
      if (gain < opt_.relative_tolerance * std::max(1.0, std::abs(ll))) break;
    }
    result.params = std::move(params);
    result.degenerate = exhausted_;
    return result;
  }

  MixtureParams initial_from_seeding(std::size_t k_count, bool& rescued) {
    const Matrix resp = seed_responsibilities(k_count);
    std::vector<GaussianParams> comps;
    Vector weights;
    rescued = m_step(resp, nullptr, comps, weights);
    return MixtureParams(std::move(weights), std::move(comps));
  }

 private:
  const WeightedPoints& data_;
  Rng& rng_;
  EmOptions opt_;
  Moments global_;
  double global_trace_ = 0.0;
  double global_min_eig_ = 0.0;
  int rescues_ = 0;
  bool exhausted_ = false;
};

}  // namespace

EmResult em_fit_mixture(const WeightedPoints& data, std::size_t components, Rng& rng,
                        const EmOptions& options) {
  if (components < 1) throw std::invalid_argument("EM needs at least one component");
  EmFitter fitter(data, rng, options);
  const std::size_t support = distinct_support(data);
  const std::size_t k_count = std::min(components, support);
  bool rescued = false;
  MixtureParams init = fitter.initial_from_seeding(k_count, rescued);
  return fitter.run(std::move(init), components, k_count < components, rescued);
}

EmResult em_fit_mixture(const WeightedPoints& data, const MixtureParams& init, Rng& rng,
                        const EmOptions& options) {
  if (init.dim() != data.dim()) throw std::invalid_argument("EM init dimension mismatch");
  EmFitter fitter(data, rng, options);
  return fitter.run(init, init.size(), false, false);
}

double covariance_smoothing_weight(const SmoothingConfig& cfg, std::size_t t) {
  if (t < 1) throw std::invalid_argument("smoothing iteration index must be >= 1");
  const double base = 1.0 - 1.0 / static_cast<double>(t);
  return cfg.beta - cfg.beta * std::pow(base, cfg.q);
}

GaussianParams smooth_update(const GaussianParams& old, const GaussianParams& fitted,
                             std::size_t t, const SmoothingConfig& cfg) {
  if (old.dim() != fitted.dim()) throw std::invalid_argument("smoothing dimension mismatch");
  const double bt = covariance_smoothing_weight(cfg, t);
  Vector mean = cfg.alpha * fitted.mean() + (1.0 - cfg.alpha) * old.mean();
  Matrix cov = bt * fitted.covariance() + (1.0 - bt) * old.covariance();
  return GaussianParams::from_spd(std::move(mean), std::move(cov));
}

std::vector<std::size_t> match_components(const MixtureParams& old, const MixtureParams& fitted) {
  struct Pair {
    double dist;
    std::size_t fitted, old;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < fitted.size(); ++i) {
    for (std::size_t j = 0; j < old.size(); ++j) {
      pairs.push_back({(fitted.component(i).mean() - old.component(j).mean()).squaredNorm(), i, j});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& a, const Pair& b) { return a.dist < b.dist; });
  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> match(fitted.size(), kUnset);
  std::vector<bool> old_used(old.size(), false);
  for (const Pair& p : pairs) {
    if (match[p.fitted] != kUnset || old_used[p.old]) continue;
    match[p.fitted] = p.old;
    old_used[p.old] = true;
  }
  // Surplus fitted components: nearest old one, shared.
  for (const Pair& p : pairs) {
    if (match[p.fitted] == kUnset) match[p.fitted] = p.old;
  }
  return match;
}

MixtureParams smooth_update(const MixtureParams& old, const MixtureParams& fitted,
                            std::size_t t, const SmoothingConfig& cfg) {
  if (old.dim() != fitted.dim()) throw std::invalid_argument("smoothing dimension mismatch");
  const auto match = match_components(old, fitted);
  std::vector<GaussianParams> comps;
  Vector weights(static_cast<Eigen::Index>(fitted.size()));
  for (std::size_t i = 0; i < fitted.size(); ++i) {
    const std::size_t j = match[i];
    comps.push_back(smooth_update(old.component(j), fitted.component(i), t, cfg));
    weights(static_cast<Eigen::Index>(i)) =
        cfg.alpha * fitted.weights()(static_cast<Eigen::Index>(i)) +
        (1.0 - cfg.alpha) * old.weights()(static_cast<Eigen::Index>(j));
  }
  return MixtureParams(std::move(weights), std::move(comps));
}

}  // namespace mcoce
