#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mcoce/crossval.hpp"

using namespace mcoce;

namespace {

Problem bimodal_1d() {
  Problem p;
  p.name = p.label = "bimodal";
  p.dim = 1;
  p.eval = [](std::span<const double> x) { return std::min((x[0] - 2) * (x[0] - 2), (x[0] + 2) * (x[0] + 2)); };
  p.g_star = 0.0;
  p.init_region = {{-4.0, 4.0}};
  return p;
}

// One generation drawn from the problem's initial proposal.
std::vector<TaggedSample> random_archive(const Problem& p, std::size_t n, std::uint64_t seed, CEState* out = nullptr) {
  CEConfig ce;
  ce.pop_size = n;
  ce.max_evals = n;
  CEState s = init_state(p, ce, seed);
  EvalCounter counter(p);
  auto pop = draw_population(s, counter, ce);
  if (out != nullptr) *out = s;
  return pop;
}

CandidateScore scored(double kappa, std::size_t k, double mean, bool feasible = true) {
  CandidateScore s;
  s.candidate = {kappa, k};
  s.mean = mean;
  s.feasible = feasible;
  return s;
}

}  // namespace

TEST(Folds, SizesAndDeterminism) {
  Rng a(1), b(1);
  const FoldSpec f8 = kfold_partition(8, 4, a);
  EXPECT_EQ(f8.sizes(), (std::vector<std::size_t>{2, 2, 2, 2}));
  Rng c(2);
  auto s10 = kfold_partition(10, 4, c).sizes();
  std::sort(s10.begin(), s10.end());
  EXPECT_EQ(s10, (std::vector<std::size_t>{2, 2, 3, 3}));
  EXPECT_EQ(kfold_partition(8, 4, b).assignment, f8.assignment);
  Rng d(3);
  EXPECT_THROW(kfold_partition(3, 4, d), std::invalid_argument);
  EXPECT_THROW(kfold_partition(10, 1, d), std::invalid_argument);
  for (std::size_t n = 4; n < 60; ++n) {
    const auto s = kfold_partition(n, 4, d).sizes();
    EXPECT_LE(*std::max_element(s.begin(), s.end()) - *std::min_element(s.begin(), s.end()), 1u);
  }
}

TEST(HeldoutScore, HandValues) {
  const auto g = GaussianParams::regularized(Vector::Zero(1), Matrix::Identity(1, 1));
  const MixtureParams theta(g);
  std::vector<TaggedSample> held(2);
  held[0].x = Vector::Constant(1, 0.3);
  held[1].x = Vector::Constant(1, -1.1);
  held[0].g = 2.0;
  held[1].g = 4.0;
  // ratios {1, 3}
  held[0].gen_logpdf = logpdf_mixture(theta, held[0].x);
  held[1].gen_logpdf = logpdf_mixture(theta, held[1].x) - std::log(3.0);
  EXPECT_NEAR(heldout_score(theta, held), 7.0, 1e-12);
  std::reverse(held.begin(), held.end());
  EXPECT_NEAR(heldout_score(theta, held), 7.0, 1e-12);

  // same generator: plain average
  held[0].gen_logpdf = logpdf_mixture(theta, held[0].x);
  EXPECT_NEAR(heldout_score(theta, std::span(held).first(1)), held[0].g, 1e-12);

  // vanishing density: score ~ 0 whatever g is
  const MixtureParams far(GaussianParams::regularized(Vector::Constant(1, 100.0), Matrix::Identity(1, 1) * 0.01));
  HeldoutDiagnostics diag;
  EXPECT_LT(heldout_score(far, held, {}, &diag), 1e-100);
  EXPECT_EQ(diag.near_zero, 2u);
}

TEST(CandidateEvaluation, MeanOfFoldScoresAndFeasibility) {
  const Problem p = make_problem("rosenbrock", 2);
  const auto pool = random_archive(p, 80, 3);
  Rng rng(4);
  const FoldSpec folds = kfold_partition(pool.size(), 4, rng);
  const auto s = cv_evaluate_candidate(pool, {0.10, 1}, folds, CEConfig{}, CVConfig{}, 11);
  ASSERT_TRUE(s.feasible);
  ASSERT_EQ(s.fold_scores.size(), 4u);
  EXPECT_NEAR(s.mean, (s.fold_scores[0] + s.fold_scores[1] + s.fold_scores[2] + s.fold_scores[3]) / 4.0, 1e-15);
  // 60 training points, 2% gives 2 elites < d + 1
  EXPECT_FALSE(cv_evaluate_candidate(pool, {0.02, 1}, folds, CEConfig{}, CVConfig{}, 11).feasible);
  FoldSpec one{1, std::vector<std::size_t>(pool.size(), 0)};
  EXPECT_THROW(cv_evaluate_candidate(pool, {0.10, 1}, one, CEConfig{}, CVConfig{}, 11), std::invalid_argument);
}

TEST(CandidateEvaluation, IndependentSingleGaussianScore) {
  // Recompute one K = 1 candidate from scratch: elite moments, density, ratio.
  const Problem p = make_problem("woods");
  const auto pool = random_archive(p, 200, 8);
  Rng rng(5);
  const FoldSpec folds = kfold_partition(pool.size(), 4, rng);
  const double kappa = 0.15;
  const auto s = cv_evaluate_candidate(pool, {kappa, 1}, folds, CEConfig{}, CVConfig{}, 1);
  ASSERT_TRUE(s.feasible);
  for (std::size_t j = 0; j < 4; ++j) {
    std::vector<std::pair<double, std::size_t>> train;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (folds.assignment[i] != j) train.push_back({pool[i].g, i});
    }
    std::stable_sort(train.begin(), train.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    const auto n_elite = static_cast<std::size_t>(std::ceil(kappa * train.size() - 1e-9));
    Eigen::Vector4d mean = Eigen::Vector4d::Zero();
    for (std::size_t e = 0; e < n_elite; ++e) mean += pool[train[e].second].x;
    mean /= static_cast<double>(n_elite);
    Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
    for (std::size_t e = 0; e < n_elite; ++e) {
      const Eigen::Vector4d c = pool[train[e].second].x - mean;
      cov += c * c.transpose();
    }
    cov /= static_cast<double>(n_elite);
    cov += Eigen::Matrix4d::Identity() * std::max(1e-12, 1e-10 * cov.trace() / 4.0);
    const Eigen::Matrix4d inv = cov.inverse();
    const double log_norm = -2.0 * std::log(2.0 * M_PI) - 0.5 * std::log(cov.determinant());
    double total = 0.0, m = 0.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (folds.assignment[i] != j) continue;
      const Eigen::Vector4d c = pool[i].x - mean;
      const double logq = log_norm - 0.5 * c.dot(inv * c);
      total += std::min(std::exp(logq - pool[i].gen_logpdf), 1e12) * pool[i].g;
      m += 1.0;
    }
    EXPECT_NEAR(s.fold_scores[j], total / m, 1e-8 * std::max(1.0, std::abs(total / m))) << "fold " << j;
  }
}

TEST(SelectWinner, ArgminAndTieBreaks) {
  const CandidateGrid grid = CandidateGrid::mixtures();
  std::vector<CandidateScore> scores;
  for (const auto& c : grid.candidates()) scores.push_back(scored(c.kappa, c.components, 5.0));
  scores[4].mean = 1.0;  // (0.10, 2)
  EXPECT_EQ(select_winner(scores, grid), (Candidate{0.10, 2}));

  std::vector<CandidateScore> tie = {scored(0.05, 1, 2.0), scored(0.10, 1, 3.0), scored(0.15, 1, 2.0)};
  EXPECT_EQ(select_winner(tie, CandidateGrid::single_gaussian()), (Candidate{0.15, 1}));

  std::vector<CandidateScore> ktie = {scored(0.10, 1, 2.0), scored(0.10, 2, 2.0), scored(0.10, 3, 2.0)};
  EXPECT_EQ(select_winner(ktie, CandidateGrid{{0.10}, {1, 2, 3}}), (Candidate{0.10, 1}));

  std::vector<CandidateScore> none = {scored(0.05, 2, 1.0, false), scored(0.10, 3, 1.0, false)};
  bool fallback = false;
  EXPECT_EQ(select_winner(none, CandidateGrid{{0.05, 0.10}, {2, 3}}, &fallback), (Candidate{0.10, 1}));
  EXPECT_TRUE(fallback);

  std::vector<CandidateScore> single = {scored(0.07, 1, 9.0)};
  EXPECT_EQ(select_winner(single, CandidateGrid{{0.07}, {1}}), (Candidate{0.07, 1}));
}

TEST(CvSelect, EqualScoresFallToTieBreak) {
  // g == 0 makes every held-out score exactly 0
  Problem flat = make_problem("rosenbrock", 2);
  flat.eval = [](std::span<const double>) { return 0.0; };
  const auto pool = random_archive(flat, 120, 6);
  const CVReport r = cv_select(pool, CandidateGrid::mixtures(), CEConfig{}, CVConfig{}, 3, 0);
  for (const auto& s : r.scores) {
    ASSERT_TRUE(s.feasible);
    EXPECT_EQ(s.mean, 0.0);
  }
  EXPECT_EQ(r.winner, (Candidate{0.15, 1}));
}

TEST(CvSelect, FoldExchangeability) {
  const Problem p = make_problem("shekel5");
  auto pool = random_archive(p, 160, 12);
  const CandidateGrid grid = CandidateGrid::mixtures();
  const CVReport a = cv_select(pool, grid, CEConfig{}, CVConfig{}, 5, 2);
  std::mt19937_64 rng(3);
  std::shuffle(pool.begin(), pool.end(), rng);
  const CVReport b = cv_select(pool, grid, CEConfig{}, CVConfig{}, 5, 2);
  ASSERT_EQ(a.scores.size(), b.scores.size());
  for (std::size_t c = 0; c < a.scores.size(); ++c) {
    auto fa = a.scores[c].fold_scores, fb = b.scores[c].fold_scores;
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    EXPECT_EQ(fa, fb);
  }
  EXPECT_EQ(a.winner, b.winner);
}

TEST(Plmco, SingletonGridReducesToFixedCe) {
  const Problem p = make_problem("rosenbrock", 4);
  CEConfig ce;
  ce.pop_size = 200;
  ce.kappa = 0.10;
  ce.max_evals = 5000;
  const TrialResult fixed = run_ce(p, ce, 21);
  const TrialResult cv = run_plmco_ce(p, ce, CandidateGrid{{0.10}, {1}}, CVConfig{}, 21);
  ASSERT_EQ(fixed.series.size(), cv.series.size());
  for (std::size_t i = 0; i < fixed.series.size(); ++i) {
    EXPECT_EQ(fixed.series[i].evals, cv.series[i].evals);
    EXPECT_EQ(fixed.series[i].best_g, cv.series[i].best_g);
    EXPECT_EQ(fixed.series[i].gamma, cv.series[i].gamma);
    EXPECT_EQ(fixed.series[i].kappa_sel, cv.series[i].kappa_sel);
    EXPECT_EQ(fixed.series[i].k_sel, cv.series[i].k_sel);
  }
}

TEST(Plmco, TraceRecordsWinnersEachIteration) {
  const Problem p = make_problem("woods");
  CEConfig ce;
  ce.pop_size = 200;
  ce.max_evals = 2000;
  const TrialResult r = run_plmco_ce(p, ce, CandidateGrid::mixtures(), CVConfig{}, 4);
  EXPECT_EQ(r.series.size(), 10u);
  for (const auto& t : r.series) {
    EXPECT_TRUE(t.kappa_sel == 0.05 || t.kappa_sel == 0.10 || t.kappa_sel == 0.15);
    EXPECT_GE(t.k_sel, 1u);
    EXPECT_LE(t.k_sel, 3u);
  }
  const TrialResult again = run_plmco_ce(p, ce, CandidateGrid::mixtures(), CVConfig{}, 4);
  for (std::size_t i = 0; i < r.series.size(); ++i) EXPECT_EQ(r.series[i].best_g, again.series[i].best_g);
}

TEST(Plmco, BimodalObjectivePrefersTwoComponents) {
  const Problem p = bimodal_1d();
  CEConfig ce;
  ce.pop_size = 100;
  ce.max_evals = 100;
  int two = 0, one = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CEState s = init_state(p, ce, seed);
    EvalCounter counter(p);
    CVReport report;
    plmco_ce_step(s, counter, ce, CandidateGrid{{0.05, 0.10, 0.15}, {1, 2}}, CVConfig{}, &report);
    two += report.winner.components == 2 ? 1 : 0;
    one += report.winner.components == 1 ? 1 : 0;
  }
  EXPECT_GT(two, one);
}

TEST(Plmco, ValidationListsProblems) {
  CEConfig ce;
  ce.pop_size = 3;
  ce.max_evals = 100;
  const auto v = validate_plmco(ce, CandidateGrid{{0.10, 1.5}, {0}}, CVConfig{1}, 2);
  EXPECT_GE(v.size(), 3u);
}
