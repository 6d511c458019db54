#include "mcoce/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include "mcoce/csv.hpp"

namespace mcoce {

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names = {"CES05", "CES10", "CES15", "CEM05",
                                                 "CEM10", "CEM15", "CESX",  "CEMX"};
  return names;
}

AlgorithmSpec parse_algorithm(std::string_view name) {
  AlgorithmSpec a;
  a.name = std::string(name);
  if (name == "CESX" || name == "CEMX") {
    a.cross_validated = true;
    a.mixture = name == "CEMX";
    return a;
  }
  if (name.size() == 5 && (name.starts_with("CES") || name.starts_with("CEM"))) {
    const std::string_view pct = name.substr(3);
    if (pct == "05" || pct == "10" || pct == "15") {
      a.mixture = name[2] == 'M';
      a.kappa = pct == "05" ? 0.05 : (pct == "10" ? 0.10 : 0.15);
      return a;
    }
  }
  std::string msg = "unknown algorithm '" + std::string(name) + "'; valid:";
  for (const auto& n : algorithm_names()) msg += " " + n;
  throw std::invalid_argument(msg);
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::string_view problem_label, std::size_t trial) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : problem_label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return derive_seed(master_seed, static_cast<std::uint64_t>(StreamTag::Trial), h, trial);
}

CEConfig make_ce_config(const AlgorithmSpec& algo, const BenchSettings& s, std::size_t dim) {
  CEConfig c;
  c.pop_size = s.pop_size;
  c.max_evals = s.budget;
  c.smoothing = s.smoothing;
  c.archive_window = s.archive_window;
  if (!algo.cross_validated) {
    c.kappa = algo.kappa;
    c.mixture = algo.mixture;
    c.components = algo.mixture ? s.mixture_components : 1;
  }
  return resolve_defaults(c, dim);
}

CandidateGrid make_grid(const AlgorithmSpec& algo, const BenchSettings& s) {
  CandidateGrid g;
  g.kappas = s.kappas;
  g.component_counts = algo.mixture ? s.component_counts : std::vector<std::size_t>{1};
  return g;
}

TrialResult run_trial(const Problem& problem, const AlgorithmSpec& algo, const BenchSettings& s,
                      std::size_t trial) {
  const CEConfig ce = make_ce_config(algo, s, problem.dim);
  const std::uint64_t seed = trial_seed(s.master_seed, problem.label, trial);
  TrialResult r = algo.cross_validated ? run_plmco_ce(problem, ce, make_grid(algo, s), s.cv, seed)
                                       : run_ce(problem, ce, seed);
  r.algorithm = algo.name;
  r.trial = trial;
  return r;
}

namespace {

std::vector<std::string> validate_pair(const Problem& p, const AlgorithmSpec& a, const BenchSettings& s) {
  const CEConfig ce = make_ce_config(a, s, p.dim);
  return a.cross_validated ? validate_plmco(ce, make_grid(a, s), s.cv, p.dim) : validate(ce, p.dim);
}

struct Job {
  std::size_t problem;
  std::size_t algorithm;
  std::size_t trial;
};

}  // namespace

BenchOutput run_benchmark(const BenchSettings& s) {
  BenchOutput out;
  std::vector<Problem> problems;
  for (const auto& key : s.problems) {
    try {
      problems.push_back(make_problem_from_key(key));
    } catch (const std::exception& e) {
      out.errors.push_back({key, "", e.what()});
    }
  }
  std::vector<AlgorithmSpec> algos;
  for (const auto& name : s.algorithms) {
    try {
      algos.push_back(parse_algorithm(name));
    } catch (const std::exception& e) {
      out.errors.push_back({"", name, e.what()});
    }
  }

  std::vector<Job> jobs;
  for (std::size_t p = 0; p < problems.size(); ++p) {
    for (std::size_t a = 0; a < algos.size(); ++a) {
      const auto violations = validate_pair(problems[p], algos[a], s);
      if (!violations.empty()) {
        out.errors.push_back({problems[p].label, algos[a].name, ConfigError(violations).what()});
        continue;
      }
      for (std::size_t t = 0; t < s.trials; ++t) jobs.push_back({p, a, t});
    }
  }

  std::vector<std::optional<TrialResult>> slots(jobs.size());
  std::vector<std::string> failures(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      const Job& j = jobs[i];
      try {
        slots[i] = run_trial(problems[j.problem], algos[j.algorithm], s, j.trial);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  std::size_t threads = s.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : s.threads;
  threads = std::max<std::size_t>(1, std::min(threads, jobs.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (slots[i]) {
      out.results.push_back(std::move(*slots[i]));
    } else {
      out.errors.push_back({problems[jobs[i].problem].label, algos[jobs[i].algorithm].name,
                            "trial " + std::to_string(jobs[i].trial) + ": " + failures[i], true});
    }
  }
  std::sort(out.results.begin(), out.results.end(), [](const TrialResult& a, const TrialResult& b) {
    if (a.problem != b.problem) return a.problem < b.problem;
    if (a.algorithm != b.algorithm) return a.algorithm < b.algorithm;
    return a.trial < b.trial;
  });
  return out;
}

std::vector<std::uint64_t> checkpoint_grid(std::uint64_t first, std::uint64_t last, std::size_t count) {
  if (first == 0 || last < first) throw std::invalid_argument("checkpoint grid needs 0 < first <= last");
  if (count <= 1 || first == last) return {last};
  std::vector<std::uint64_t> grid;
  const double ratio = static_cast<double>(last) / static_cast<double>(first);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(count - 1);
    auto v = static_cast<std::uint64_t>(std::llround(static_cast<double>(first) * std::pow(ratio, f)));
    v = std::clamp(v, first, last);
    if (grid.empty() || v > grid.back()) grid.push_back(v);
  }
  grid.back() = last;
  return grid;
}

std::vector<double> align_to_checkpoints(const TrialResult& r, std::span<const std::uint64_t> checkpoints) {
  if (r.series.empty()) throw std::invalid_argument("trial has an empty series");
  std::vector<double> out;
  out.reserve(checkpoints.size());
  std::size_t i = 0;
  double current = r.series.front().best_g;
  for (std::uint64_t c : checkpoints) {
    while (i < r.series.size() && r.series[i].evals <= c) current = r.series[i++].best_g;
    out.push_back(current);
  }
  return out;
}

CheckpointStats summarize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("no values to summarize");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  CheckpointStats s;
  for (double x : v) s.mean += x;
  s.mean /= n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.ci95 = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  const std::size_t mid = v.size() / 2;
  s.median = v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  s.min = v.front();
  s.max = v.back();
  return s;
}

AggregateStats aggregate(std::span<const TrialResult> results, double reference,
                         std::span<const std::uint64_t> checkpoints) {
  if (results.empty()) throw std::invalid_argument("aggregate needs at least one trial");
  AggregateStats agg;
  agg.problem = results.front().problem;
  agg.algorithm = results.front().algorithm;
  agg.reference = reference;
  std::vector<std::vector<double>> aligned;
  for (const auto& r : results) aligned.push_back(align_to_checkpoints(r, checkpoints));
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    std::vector<double> column;
    for (const auto& a : aligned) column.push_back(a[c] - reference);
    CheckpointStats st = summarize(column);
    st.evals = checkpoints[c];
    agg.points.push_back(st);
  }
  return agg;
}

std::vector<AggregateStats> aggregate_all(std::span<const TrialResult> results, const BenchSettings& s) {
  std::map<std::pair<std::string, std::string>, std::vector<TrialResult>> groups;
  std::map<std::string, double> best_seen;
  for (const auto& r : results) {
    groups[{r.problem, r.algorithm}].push_back(r);
    double& b = best_seen.try_emplace(r.problem, std::numeric_limits<double>::infinity()).first->second;
    for (const auto& p : r.series) b = std::min(b, p.best_g);
  }
  std::vector<AggregateStats> out;
  for (const auto& [key, group] : groups) {
    const Problem p = make_problem_from_key(key.first);
    const std::uint64_t pop = s.pop_size != 0 ? s.pop_size : 50 * p.dim;
    const std::uint64_t budget = s.budget != 0 ? s.budget : 20000 * static_cast<std::uint64_t>(p.dim);
    const auto grid = checkpoint_grid(pop, budget, s.checkpoints);
    const bool empirical = !p.g_star.has_value();
    AggregateStats a = aggregate(group, empirical ? best_seen[key.first] : *p.g_star, grid);
    a.empirical_reference = empirical;
    out.push_back(std::move(a));
  }
  return out;
}

void write_raw_csv(std::ostream& out, std::span<const TrialResult> results) {
  out << kRawHeader << '\n';
  for (const auto& r : results) {
    for (const auto& p : r.series) {
      out << r.problem << ',' << r.algorithm << ',' << r.trial << ',' << p.evals << ','
          << csv::format_real(p.best_g) << ',' << csv::format_real(p.kappa_sel) << ',' << p.k_sel << '\n';
    }
  }
}

void write_aggregate_csv(std::ostream& out, std::span<const AggregateStats> stats) {
  out << kAggregateHeader << '\n';
  for (const auto& a : stats) {
    for (const auto& p : a.points) {
      out << a.problem << ',' << a.algorithm << ',' << p.evals << ',' << csv::format_real(p.mean) << ','
          << csv::format_real(p.ci95) << ',' << csv::format_real(p.median) << ','
          << csv::format_real(p.min) << ',' << csv::format_real(p.max) << '\n';
    }
  }
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  return f;
}

}  // namespace

void write_raw_csv(const std::string& path, std::span<const TrialResult> results) {
  auto f = open_out(path);
  write_raw_csv(f, results);
  if (!f) throw std::runtime_error("write failed: " + path);
}

void write_aggregate_csv(const std::string& path, std::span<const AggregateStats> stats) {
  auto f = open_out(path);
  write_aggregate_csv(f, stats);
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<AggregateStats> read_aggregate_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("aggregate CSV is empty");
  const auto header = csv::split_line(line);
  const std::vector<std::string> required = {"problem", "algorithm", "evals", "mean",
                                             "ci95",    "median",    "min",   "max"};
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  std::string missing;
  for (const auto& r : required) {
    if (!col.count(r)) missing += (missing.empty() ? "" : ", ") + r;
  }
  if (!missing.empty()) throw std::runtime_error("aggregate CSV is missing columns: " + missing);

  std::vector<AggregateStats> out;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = csv::split_line(line);
    if (f.size() < header.size()) {
      throw std::runtime_error("aggregate CSV line " + std::to_string(line_no) + " has too few fields");
    }
    const std::pair<std::string, std::string> key{f[col["problem"]], f[col["algorithm"]]};
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      AggregateStats a;
      a.problem = key.first;
      a.algorithm = key.second;
      out.push_back(std::move(a));
    }
    CheckpointStats p;
    p.evals = static_cast<std::uint64_t>(csv::parse_real(f[col["evals"]]));
    p.mean = csv::parse_real(f[col["mean"]]);
    p.ci95 = csv::parse_real(f[col["ci95"]]);
    p.median = csv::parse_real(f[col["median"]]);
    p.min = csv::parse_real(f[col["min"]]);
    p.max = csv::parse_real(f[col["max"]]);
    out[it->second].points.push_back(p);
  }
  return out;
}

}  // namespace mcoce
