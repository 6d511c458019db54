#pragma once

// Gaussian and Gaussian-mixture proposal distributions for the CE method.
//
// Points are stored as rows of an n x d column-major matrix (PointMatrix), so
// each coordinate is contiguous across points; the batched density kernels
// vectorize across points.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcoce/rng.hpp"

namespace mcoce {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using PointMatrix = Eigen::MatrixXd;  // n x d, row i is point i

class InvalidDistribution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyFit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Jitter added to a covariance before factorization:
/// max(1e-12, 1e-10 * trace / d).
double covariance_jitter(const Matrix& cov);

/// Immutable multivariate normal with a cached Cholesky factor.
///
/// The stored covariance is the one that was actually factorized, so
/// chol * chol^T reproduces covariance() to rounding.
class GaussianParams {
 public:
  /// Adds the jitter floor and factorizes; retries with 10x jitter up to three
  /// times. Throws InvalidDistribution on non-finite input or failure.
  static GaussianParams regularized(Vector mean, Matrix cov);

  /// Factorizes cov as given when it is already SPD, else falls back to
  /// regularized(). Used where cov is a convex blend of factorized matrices.
  static GaussianParams from_spd(Vector mean, Matrix cov);

  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return cov_; }
  const Matrix& chol() const { return chol_; }
  /// -(d/2) ln(2 pi) - sum_i ln chol_ii
  double log_norm() const { return log_norm_; }

 private:
  GaussianParams(Vector mean, Matrix cov, Matrix chol);

  Vector mean_;
  Matrix cov_;
  Matrix chol_;
  double log_norm_ = 0.0;
};

/// Immutable finite Gaussian mixture. Weights are renormalized on construction.
class MixtureParams {
 public:
  MixtureParams(Vector weights, std::vector<GaussianParams> components);
  explicit MixtureParams(GaussianParams single);

  std::size_t size() const { return components_.size(); }
  std::size_t dim() const { return components_.front().dim(); }
  const Vector& weights() const { return weights_; }
  const std::vector<GaussianParams>& components() const { return components_; }
  const GaussianParams& component(std::size_t k) const { return components_[k]; }

 private:
  Vector weights_;
  std::vector<GaussianParams> components_;
};

/// Nonnegative per-point weights over the rows of a PointMatrix.
struct WeightedPoints {
  PointMatrix points;
  Vector weights;

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }
};

// Sampling

/// n draws mean + chol * z with z standard normal, z drawn point-major.
PointMatrix sample_gaussian(const GaussianParams& params, std::size_t n, Rng& rng);

/// Component indices come from `component_rng`; the normal deviates from
/// `normal_rng` in the same order as sample_gaussian, so a mixture of identical
/// components reproduces sample_gaussian exactly.
PointMatrix sample_mixture(const MixtureParams& params, std::size_t n, Rng& normal_rng,
                           Rng& component_rng, std::vector<std::size_t>* labels = nullptr);

// Densities

double logpdf_gaussian(const GaussianParams& params, std::span<const double> x);
double logpdf_gaussian(const GaussianParams& params, const Vector& x);
/// Log-density at every row of `points`.
Vector logpdf_gaussian(const GaussianParams& params, const PointMatrix& points);

double logpdf_mixture(const MixtureParams& params, const Vector& x);
Vector logpdf_mixture(const MixtureParams& params, const PointMatrix& points);

// Fitting

struct Moments {
  Vector mean;
  Matrix covariance;  // unregularized
  double total_weight = 0.0;
};

/// Weighted mean and (1/sum w) covariance. Throws EmptyFit if all weights are 0.
Moments weighted_moments(const PointMatrix& points, std::span<const double> weights);

/// Closed-form single-Gaussian cross-entropy fit: weighted moments, regularized.
GaussianParams weighted_gaussian_mle(const WeightedPoints& data);

struct EmOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-8;
  double min_component_weight = 1e-6;
  /// A component whose raw covariance trace falls below this fraction of the
  /// global trace counts as collapsed onto a point; so does one whose
  /// smallest eigenvalue falls below it (collapse onto a subspace).
  double collapse_ratio = 1e-9;
  int max_rescues = 6;
};

struct EmResult {
  MixtureParams params;
  /// Weighted log-likelihood after initialization and after every iteration.
  std::vector<double> loglik;
  /// Indices into `loglik` whose step re-seeded a degenerate component; the
  /// monotonicity guarantee does not span these steps.
  std::vector<std::size_t> rescue_steps;
  int iterations = 0;
  std::size_t requested_components = 0;
  bool components_reduced = false;
  bool degenerate = false;  // rescues exhausted with a degenerate component left
};

/// Weighted EM with farthest-point seeding (first centre drawn from rng in
/// proportion to weight).
EmResult em_fit_mixture(const WeightedPoints& data, std::size_t components, Rng& rng,
                        const EmOptions& options = {});

/// Weighted EM from explicit starting parameters.
EmResult em_fit_mixture(const WeightedPoints& data, const MixtureParams& init, Rng& rng,
                        const EmOptions& options = {});

/// Number of distinct rows among points with positive weight.
std::size_t distinct_support(const WeightedPoints& data);

// Dynamic smoothing

struct SmoothingConfig {
  double alpha = 0.9;
  double beta = 0.9;
  double q = 5.0;
};

/// beta_t = beta - beta * (1 - 1/t)^q, t >= 1.
double covariance_smoothing_weight(const SmoothingConfig& cfg, std::size_t t);

GaussianParams smooth_update(const GaussianParams& old, const GaussianParams& fitted,
                             std::size_t t, const SmoothingConfig& cfg);

/// Fitted components are paired with old ones greedily by mean distance
/// (unique pairs first; surplus fitted components take their nearest old one).
MixtureParams smooth_update(const MixtureParams& old, const MixtureParams& fitted,
                            std::size_t t, const SmoothingConfig& cfg);

/// match[i] = index of the old component paired with fitted component i.
std::vector<std::size_t> match_components(const MixtureParams& old,
                                          const MixtureParams& fitted);

}  // namespace mcoce
