#pragma once

// Multi-trial benchmark protocol: every algorithm sees the same initial
// proposal and first population for a given (problem, trial); statistics are
// taken on a shared checkpoint grid.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcoce/ce_core.hpp"
#include "mcoce/crossval.hpp"

namespace mcoce {

/// CESxx / CEMxx run fixed-kappa CE (single Gaussian / mixture); CESX / CEMX
/// pick kappa (and, for CEMX, the component count) by cross-validation.
struct AlgorithmSpec {
  std::string name;
  bool cross_validated = false;
  bool mixture = false;
  double kappa = 0.0;  // fixed variants only
};

const std::vector<std::string>& algorithm_names();

/// Throws std::invalid_argument listing the vocabulary on unknown names.
AlgorithmSpec parse_algorithm(std::string_view name);

struct BenchSettings {
  std::vector<std::string> problems;  // registry keys, "name" or "name:dim"
  std::vector<std::string> algorithms;
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  std::uint64_t budget = 0;  // 0: 20000 * dim
  std::size_t pop_size = 0;  // 0: 50 * dim
  SmoothingConfig smoothing;
  CVConfig cv;
  std::vector<double> kappas{0.05, 0.10, 0.15};        // CESX / CEMX grid
  std::vector<std::size_t> component_counts{1, 2, 3};  // CEMX grid
  std::size_t mixture_components = 3;                  // CEMxx
  std::size_t archive_window = 1;
  std::size_t checkpoints = 50;
  std::size_t threads = 1;  // 0: hardware concurrency
};

/// Trial seed shared by all algorithms for (problem, trial).
std::uint64_t trial_seed(std::uint64_t master_seed, std::string_view problem_label, std::size_t trial);

/// CE configuration for one algorithm on a problem of dimension `dim`.
CEConfig make_ce_config(const AlgorithmSpec& algo, const BenchSettings& s, std::size_t dim);
CandidateGrid make_grid(const AlgorithmSpec& algo, const BenchSettings& s);

TrialResult run_trial(const Problem& problem, const AlgorithmSpec& algo, const BenchSettings& s,
                      std::size_t trial);

struct BenchError {
  std::string problem;
  std::string algorithm;
  std::string message;
  bool runtime = false;  // a trial failed while running, not a config problem
};

struct BenchOutput {
  std::vector<TrialResult> results;  // sorted by (problem, algorithm, trial)
  std::vector<BenchError> errors;    // skipped pairs and failed trials
};

BenchOutput run_benchmark(const BenchSettings& s);

/// count points geometrically spaced from first to last, rounded and deduplicated.
std::vector<std::uint64_t> checkpoint_grid(std::uint64_t first, std::uint64_t last, std::size_t count);

/// best_g at each checkpoint, carrying the last value forward (the first
/// recorded value is used before the series starts).
std::vector<double> align_to_checkpoints(const TrialResult& r, std::span<const std::uint64_t> checkpoints);

struct CheckpointStats {
  std::uint64_t evals = 0;
  double mean = 0.0;
  double ci95 = 0.0;  // 1.96 s / sqrt(n), s the sample sd
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct AggregateStats {
  std::string problem;
  std::string algorithm;
  double reference = 0.0;  // value subtracted from best_g
  bool empirical_reference = false;
  std::vector<CheckpointStats> points;
};

/// Statistics of best_g - reference per checkpoint. Throws on empty input.
AggregateStats aggregate(std::span<const TrialResult> results, double reference,
                         std::span<const std::uint64_t> checkpoints);

CheckpointStats summarize(std::span<const double> values);

/// Groups results by (problem, algorithm). The reference is g_star when known,
/// otherwise the best value seen across every run of that problem.
std::vector<AggregateStats> aggregate_all(std::span<const TrialResult> results,
                                          const BenchSettings& s);

// CSV. LF line endings, 17 significant digits.
inline constexpr std::string_view kRawHeader = "problem,algorithm,trial,evals,best_g,kappa_sel,k_sel";
inline constexpr std::string_view kAggregateHeader = "problem,algorithm,evals,mean,ci95,median,min,max";

void write_raw_csv(std::ostream& out, std::span<const TrialResult> results);
void write_aggregate_csv(std::ostream& out, std::span<const AggregateStats> stats);
void write_raw_csv(const std::string& path, std::span<const TrialResult> results);
void write_aggregate_csv(const std::string& path, std::span<const AggregateStats> stats);

/// Parses an aggregate CSV (header required); throws std::runtime_error
/// naming missing columns or malformed rows.
std::vector<AggregateStats> read_aggregate_csv(std::istream& in);

}  // namespace mcoce
