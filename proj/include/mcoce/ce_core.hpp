#pragma once

// The cross-entropy method for continuous minimization.
//
// One iteration: draw a population from the current proposal, keep the best
// ceil(kappa * n) samples, refit the proposal to them (weighted MLE for a
// single Gaussian, EM for a mixture) and blend the fit with the previous
// proposal (dynamic smoothing).
//
// Randomness is never threaded through as a single stream. Each consumer
// derives its own substream from (seed, iteration, purpose), see rng.hpp.

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mcoce/distributions.hpp"
#include "mcoce/objectives.hpp"
#include "mcoce/rng.hpp"

namespace mcoce {

class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

using DistributionId = std::uint32_t;

struct TaggedSample {
  Vector x;
  double g = 0.0;
  DistributionId gen_id = 0;
  double gen_logpdf = 0.0;  // log q_gen(x) at generation time
};

enum class WeightMode { CeUnity, LikelihoodRatio };

struct CEConfig {
  std::size_t pop_size = 0;  // 0: 50 * dim
  double kappa = 0.10;
  /// 1 with mixture == false is the single-Gaussian model class.
  std::size_t components = 1;
  bool mixture = false;
  SmoothingConfig smoothing;
  std::uint64_t max_evals = 0;  // 0: 20000 * dim
  std::size_t archive_window = 1;
  EmOptions em;
  WeightMode weight_mode = WeightMode::CeUnity;
};

/// Fills the dimension-dependent defaults.
CEConfig resolve_defaults(CEConfig cfg, std::size_t dim);

/// Every violated constraint, as human-readable messages (empty when valid).
std::vector<std::string> validate(const CEConfig& cfg, std::size_t dim);

/// ceil(kappa * n) clamped to [1, n]; a 1e-9 slack absorbs representation
/// error in products like 0.15 * 300.
std::size_t elite_count(double kappa, std::size_t n);

/// Frozen proposal parameters keyed by id; every archived sample's gen_id
/// resolves here.
class DistributionArchive {
 public:
  DistributionId add(MixtureParams params);
  const MixtureParams& get(DistributionId id) const;
  bool contains(DistributionId id) const { return table_.count(id) != 0; }
  std::size_t size() const { return table_.size(); }
  /// Drops every entry not listed in `keep`.
  void retain(const std::vector<DistributionId>& keep);
  const std::map<DistributionId, MixtureParams>& entries() const { return table_; }
  DistributionId next_id() const { return next_; }

  void restore(std::map<DistributionId, MixtureParams> table, DistributionId next);

 private:
  std::map<DistributionId, MixtureParams> table_;
  DistributionId next_ = 0;
};

struct BestRecord {
  Vector x;
  double g = std::numeric_limits<double>::infinity();
};

struct CEState {
  explicit CEState(MixtureParams initial) : theta(std::move(initial)) {}

  std::uint64_t seed = 0;
  std::size_t t = 0;
  MixtureParams theta;
  DistributionId theta_id = 0;
  std::vector<std::vector<TaggedSample>> archive;  // oldest generation first
  DistributionArchive generators;
  BestRecord best;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t evals_used = 0;
  std::size_t degenerate_fits = 0;
  // hyperparameters used by the most recent update
  double kappa_sel = std::numeric_limits<double>::quiet_NaN();
  std::size_t k_sel = 0;

  /// All archived samples, oldest generation first.
  std::vector<TaggedSample> pooled() const;
};

/// theta_0: region centre, covariance diag((width/2)^2). A mixture starts as
/// identical copies with equal weights, so every model class draws the same
/// first population.
CEState init_state(const Problem& problem, const CEConfig& cfg, std::uint64_t seed);

/// Draws, evaluates and tags cfg.pop_size samples from theta_t; updates best
/// and evals_used. Throws BudgetExhausted when the budget cannot cover it.
std::vector<TaggedSample> draw_population(CEState& state, EvalCounter& counter,
                                          const CEConfig& cfg);

struct EliteSelection {
  std::vector<std::size_t> indices;  // into the input, best first
  double gamma = 0.0;                // largest g among elites
};

/// Stable: equal g keep their input order.
EliteSelection select_elite(std::span<const TaggedSample> samples, double kappa);

/// ce_unity: weight 1 each. likelihood_ratio: 1 / q_gen(x), capped at 1e12.
WeightedPoints elite_weights(std::span<const TaggedSample> samples,
                             std::span<const std::size_t> elite, WeightMode mode,
                             std::size_t* capped = nullptr);

struct ModelFit {
  MixtureParams params;
  bool degenerate = false;
};

/// Unsmoothed fit of the requested model class. components == 1 and
/// !mixture uses the closed-form Gaussian fit; otherwise EM.
ModelFit fit_model(const WeightedPoints& elite, std::size_t components, bool mixture, Rng& rng,
                   const EmOptions& em);

/// Fit followed by smoothing against state.theta with index t + 1.
MixtureParams update_params(CEState& state, const WeightedPoints& elite, std::size_t components,
                            bool mixture, const CEConfig& cfg);

/// Adds a generation to the archive and trims it to the configured window.
void push_generation(CEState& state, std::vector<TaggedSample> population, const CEConfig& cfg);

/// Installs a new proposal: archives it, advances t, prunes unused generators.
void advance(CEState& state, MixtureParams next);

void ce_step(CEState& state, EvalCounter& counter, const CEConfig& cfg);

struct TracePoint {
  std::uint64_t evals = 0;
  double best_g = 0.0;
  double gamma = 0.0;
  double kappa_sel = 0.0;
  std::size_t k_sel = 0;
};

struct TrialResult {
  std::string algorithm;
  std::string problem;
  std::size_t trial = 0;
  std::vector<TracePoint> series;  // one point per iteration
};

/// Steps until fewer than pop_size evaluations remain in the budget.
TrialResult run_ce(const Problem& problem, const CEConfig& cfg, std::uint64_t seed);

// Persistence as JSON text. Doubles round-trip exactly.
std::string serialize_state(const CEState& state);
CEState deserialize_state(std::string_view text);

}  // namespace mcoce
