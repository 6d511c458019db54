#pragma once

// Cross-validated CE: each iteration picks the elite fraction and the number
// of mixture components by k-fold cross-validation. A candidate is trained by
// the ordinary CE update on k-1 folds and scored on the held-out fold with an
// importance-weighted estimate of E_theta[G]:
//
//   score = (1/m) sum_i  q_theta(x_i) / q_gen(x_i) * G(x_i)
//
// using the density of the distribution that actually generated each x_i.

#include <cstdint>
#include <span>
#include <vector>

#include "mcoce/ce_core.hpp"

namespace mcoce {

struct Candidate {
  double kappa = 0.1;
  std::size_t components = 1;

  bool operator==(const Candidate&) const = default;
};

struct CandidateGrid {
  std::vector<double> kappas{0.05, 0.10, 0.15};
  std::vector<std::size_t> component_counts{1};

  static CandidateGrid single_gaussian() { return {}; }
  static CandidateGrid mixtures() { return {{0.05, 0.10, 0.15}, {1, 2, 3}}; }
  std::vector<Candidate> candidates() const;  // component-major, kappas in grid order
};

struct CVConfig {
  std::size_t folds = 4;
  double ratio_cap = 1e12;
  double near_zero_ratio = 1e-12;  // diagnostic threshold only
};

struct FoldSpec {
  std::size_t k = 0;
  std::vector<std::size_t> assignment;  // sample position -> fold

  std::vector<std::size_t> sizes() const;
};

/// Seeded random partition of n positions into k folds whose sizes differ by
/// at most one. Throws std::invalid_argument when n < k or k < 2.
FoldSpec kfold_partition(std::size_t n, std::size_t k, Rng& rng);

struct HeldoutDiagnostics {
  std::size_t ratios = 0;
  std::size_t capped = 0;
  std::size_t near_zero = 0;

  HeldoutDiagnostics& operator+=(const HeldoutDiagnostics& o) {
    ratios += o.ratios;
    capped += o.capped;
    near_zero += o.near_zero;
    return *this;
  }
};

/// Mean over held-out samples of min(q_theta/q_gen, cap) * g.
double heldout_score(const MixtureParams& theta_hat, std::span<const TaggedSample> heldout,
                     const CVConfig& cfg = {}, HeldoutDiagnostics* diag = nullptr);

struct CandidateScore {
  Candidate candidate;
  bool feasible = false;
  std::vector<double> fold_scores;
  double mean = 0.0;
  std::size_t degenerate_fits = 0;
};

/// Trains on each union of k-1 folds (elite selection at kappa, unit weights,
/// unsmoothed fit) and scores on the remaining fold. `fit_seed` keys the EM
/// substreams. Infeasible when some training set yields fewer than d+1 elites.
CandidateScore cv_evaluate_candidate(std::span<const TaggedSample> pool, const Candidate& candidate,
                                     const FoldSpec& folds, const CEConfig& ce, const CVConfig& cv,
                                     std::uint64_t fit_seed, HeldoutDiagnostics* diag = nullptr);

struct CVReport {
  std::vector<CandidateScore> scores;
  Candidate winner;
  bool fallback = false;  // no feasible candidate
  HeldoutDiagnostics diagnostics;
};

/// Best kappa per component count, then the best component count. Ties go to
/// the larger kappa, then to fewer components. With no feasible candidate the
/// winner is (largest kappa, 1) and `fallback` is set.
Candidate select_winner(std::span<const CandidateScore> scores, const CandidateGrid& grid,
                        bool* fallback = nullptr);

/// Folds are drawn over a canonical ordering of the pool (by g, then x), so
/// the result does not depend on the order samples are supplied in.
CVReport cv_select(std::span<const TaggedSample> pool, const CandidateGrid& grid,
                   const CEConfig& ce, const CVConfig& cv, std::uint64_t seed, std::size_t t);

/// Canonical order used by cv_select.
std::vector<std::size_t> canonical_order(std::span<const TaggedSample> pool);

void plmco_ce_step(CEState& state, EvalCounter& counter, const CEConfig& ce,
                   const CandidateGrid& grid, const CVConfig& cv, CVReport* report = nullptr);

/// Every violated constraint for a cross-validated run in dimension `dim`.
std::vector<std::string> validate_plmco(const CEConfig& ce, const CandidateGrid& grid,
                                        const CVConfig& cv, std::size_t dim);

TrialResult run_plmco_ce(const Problem& problem, const CEConfig& ce, const CandidateGrid& grid,
                         const CVConfig& cv, std::uint64_t seed);

}  // namespace mcoce
