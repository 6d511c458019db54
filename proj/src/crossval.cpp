#include "mcoce/crossval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mcoce {

std::vector<Candidate> CandidateGrid::candidates() const {
  std::vector<Candidate> out;
  for (std::size_t k : component_counts) {
    for (double kappa : kappas) out.push_back({kappa, k});
  }
  return out;
}

std::vector<std::size_t> FoldSpec::sizes() const {
  std::vector<std::size_t> s(k, 0);
  for (std::size_t f : assignment) ++s[f];
  return s;
}

FoldSpec kfold_partition(std::size_t n, std::size_t k, Rng& rng) {
  if (k < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
  if (n < k) throw std::invalid_argument("fewer samples than folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(perm[i], perm[pick(rng)]);
  }
  FoldSpec spec{k, std::vector<std::size_t>(n)};
  for (std::size_t i = 0; i < n; ++i) spec.assignment[perm[i]] = i % k;
  return spec;
}

double heldout_score(const MixtureParams& theta_hat, std::span<const TaggedSample> heldout,
                     const CVConfig& cfg, HeldoutDiagnostics* diag) {
  if (heldout.empty()) throw std::invalid_argument("held-out set is empty");
  PointMatrix x(static_cast<Eigen::Index>(heldout.size()), heldout.front().x.size());
  for (std::size_t i = 0; i < heldout.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = heldout[i].x.transpose();
  }
  const Vector logq = logpdf_mixture(theta_hat, x);
  HeldoutDiagnostics local;
  double s = 0.0;
  for (std::size_t i = 0; i < heldout.size(); ++i) {
    double ratio = std::exp(logq(static_cast<Eigen::Index>(i)) - heldout[i].gen_logpdf);
    if (!(ratio <= cfg.ratio_cap)) {
      ratio = cfg.ratio_cap;
      ++local.capped;
    }
    if (ratio < cfg.near_zero_ratio) ++local.near_zero;
    s += ratio * heldout[i].g;
  }
  local.ratios = heldout.size();
  if (diag != nullptr) *diag += local;
  return s / static_cast<double>(heldout.size());
}

CandidateScore cv_evaluate_candidate(std::span<const TaggedSample> pool, const Candidate& candidate,
                                     const FoldSpec& folds, const CEConfig& ce, const CVConfig& cv,
                                     std::uint64_t fit_seed, HeldoutDiagnostics* diag) {
  if (folds.k < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
  if (folds.assignment.size() != pool.size()) {
    throw std::invalid_argument("fold assignment does not cover the pool");
  }
  CandidateScore result;
  result.candidate = candidate;
  const std::size_t d = pool.empty() ? 0 : static_cast<std::size_t>(pool.front().x.size());
  const auto sizes = folds.sizes();
  for (std::size_t j = 0; j < folds.k; ++j) {
    const std::size_t n_train = pool.size() - sizes[j];
    if (sizes[j] == 0 || n_train == 0 || elite_count(candidate.kappa, n_train) < d + 1) {
      return result;  // infeasible
    }
  }
  std::vector<TaggedSample> train, held;
  for (std::size_t j = 0; j < folds.k; ++j) {
    train.clear();
    held.clear();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      (folds.assignment[i] == j ? held : train).push_back(pool[i]);
    }
    const EliteSelection sel = select_elite(train, candidate.kappa);
    const WeightedPoints elite = elite_weights(train, sel.indices, WeightMode::CeUnity);
    Rng rng(derive_seed(fit_seed, j));
    try {
      const ModelFit fit = fit_model(elite, candidate.components, candidate.components > 1, rng, ce.em);
      if (fit.degenerate) ++result.degenerate_fits;
      result.fold_scores.push_back(heldout_score(fit.params, held, cv, diag));
    } catch (const InvalidDistribution&) {
      result.fold_scores.clear();
      return result;
    } catch (const EmptyFit&) {
      result.fold_scores.clear();
      return result;
    }
  }
  double total = 0.0;
  for (double s : result.fold_scores) total += s;
  result.mean = total / static_cast<double>(result.fold_scores.size());
  result.feasible = std::isfinite(result.mean);
  return result;
}

namespace {

// Strictly better under (lower score, larger kappa, fewer components).
bool better(const CandidateScore& a, const CandidateScore& b) {
  if (a.mean != b.mean) return a.mean < b.mean;
  if (a.candidate.kappa != b.candidate.kappa) return a.candidate.kappa > b.candidate.kappa;
  return a.candidate.components < b.candidate.components;
}

}  // namespace

Candidate select_winner(std::span<const CandidateScore> scores, const CandidateGrid& grid,
                        bool* fallback) {
  const CandidateScore* overall = nullptr;
  for (std::size_t k : grid.component_counts) {
    const CandidateScore* best_for_k = nullptr;
    for (const auto& s : scores) {
      if (!s.feasible || s.candidate.components != k) continue;
      if (best_for_k == nullptr || better(s, *best_for_k)) best_for_k = &s;
    }
    if (best_for_k != nullptr && (overall == nullptr || better(*best_for_k, *overall))) {
      overall = best_for_k;
    }
  }
  if (fallback != nullptr) *fallback = overall == nullptr;
  if (overall != nullptr) return overall->candidate;
  const double kappa = grid.kappas.empty() ? 0.1 : *std::max_element(grid.kappas.begin(), grid.kappas.end());
  return {kappa, 1};
}

std::vector<std::size_t> canonical_order(std::span<const TaggedSample> pool) {
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pool[a].g != pool[b].g) return pool[a].g < pool[b].g;
    const Vector& xa = pool[a].x;
    const Vector& xb = pool[b].x;
    return std::lexicographical_compare(xa.data(), xa.data() + xa.size(), xb.data(), xb.data() + xb.size());
  });
  return order;
}

CVReport cv_select(std::span<const TaggedSample> pool, const CandidateGrid& grid,
                   const CEConfig& ce, const CVConfig& cv, std::uint64_t seed, std::size_t t) {
  std::vector<TaggedSample> canon;
  canon.reserve(pool.size());
  for (std::size_t i : canonical_order(pool)) canon.push_back(pool[i]);

  Rng fold_rng = substream(seed, t, StreamTag::Folds);
  const FoldSpec folds = kfold_partition(canon.size(), cv.folds, fold_rng);

  CVReport report;
  const auto candidates = grid.candidates();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const std::uint64_t fit_seed = derive_seed(seed, t, static_cast<std::uint64_t>(StreamTag::CvFit), c);
    report.scores.push_back(
        cv_evaluate_candidate(canon, candidates[c], folds, ce, cv, fit_seed, &report.diagnostics));
  }
  report.winner = select_winner(report.scores, grid, &report.fallback);
  return report;
}

void plmco_ce_step(CEState& state, EvalCounter& counter, const CEConfig& ce,
                   const CandidateGrid& grid, const CVConfig& cv, CVReport* report) {
  push_generation(state, draw_population(state, counter, ce), ce);
  const std::vector<TaggedSample> pool = state.pooled();
  CVReport r = cv_select(pool, grid, ce, cv, state.seed, state.t);
  const Candidate winner = r.winner;
  const EliteSelection sel = select_elite(pool, winner.kappa);
  state.gamma = sel.gamma;
  const WeightedPoints elite = elite_weights(pool, sel.indices, ce.weight_mode);
  MixtureParams next = update_params(state, elite, winner.components, winner.components > 1, ce);
  state.kappa_sel = winner.kappa;
  state.k_sel = winner.components;
  advance(state, std::move(next));
  if (report != nullptr) *report = std::move(r);
}

std::vector<std::string> validate_plmco(const CEConfig& ce, const CandidateGrid& grid,
                                        const CVConfig& cv, std::size_t dim) {
  std::vector<std::string> violations;
  if (grid.kappas.empty() || grid.component_counts.empty()) {
    violations.push_back("candidate grid must be nonempty");
  }
  for (double k : grid.kappas) {
    if (!(k > 0.0 && k < 1.0)) violations.push_back("grid kappa must lie in (0, 1)");
  }
  for (std::size_t k : grid.component_counts) {
    if (k < 1) violations.push_back("grid component counts must be >= 1");
  }
  if (cv.folds < 2) violations.push_back("cross-validation needs at least 2 folds");
  CEConfig probe = ce;
  probe.mixture = false;
  probe.components = 1;
  if (!grid.kappas.empty()) probe.kappa = *std::max_element(grid.kappas.begin(), grid.kappas.end());
  for (auto& v : validate(probe, dim)) violations.push_back(std::move(v));
  const CEConfig resolved = resolve_defaults(ce, dim);
  if (cv.folds >= 2 && resolved.pop_size < cv.folds) {
    violations.push_back("pop_size must be >= the number of folds");
  }
  return violations;
}

TrialResult run_plmco_ce(const Problem& problem, const CEConfig& ce_in, const CandidateGrid& grid,
                         const CVConfig& cv, std::uint64_t seed) {
  if (auto v = validate_plmco(ce_in, grid, cv, problem.dim); !v.empty()) throw ConfigError(std::move(v));
  const CEConfig ce = resolve_defaults(ce_in, problem.dim);
  CEState state = init_state(problem, ce, seed);
  EvalCounter counter(problem);
  TrialResult result;
  result.problem = problem.label;
  while (state.evals_used + ce.pop_size <= ce.max_evals) {
    plmco_ce_step(state, counter, ce, grid, cv);
    result.series.push_back({state.evals_used, state.best.g, state.gamma, state.kappa_sel, state.k_sel});
  }
  return result;
}

}  // namespace mcoce
