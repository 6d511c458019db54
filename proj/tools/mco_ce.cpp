#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mcoce/bench.hpp"
#include "mcoce/config.hpp"
#include "mcoce/csv.hpp"
#include "mcoce/mc_integration.hpp"
#include "mcoce/objectives.hpp"
#include "mcoce/svg_plot.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::size_t threads_from_env(std::size_t fallback) {
  const char* env = std::getenv("MCO_CE_THREADS");
  if (env == nullptr || *env == '\0') return fallback;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0' || env[0] == '-') {
    throw UsageError(std::string("MCO_CE_THREADS must be a non-negative integer, got '") + env + "'");
  }
  return static_cast<std::size_t>(v);
}

std::vector<std::string> split_commas(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    for (auto& f : mcoce::csv::split_line(item)) {
      if (!f.empty()) out.push_back(f);
    }
  }
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

struct BenchArgs {
  std::string config;
  std::vector<std::string> problems;
  std::vector<std::string> algos;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::uint64_t> budget;
  std::optional<std::size_t> pop;
  std::optional<std::size_t> checkpoints;
};

int cmd_bench(const BenchArgs& a) {
  mcoce::RunConfig cfg;
  if (!a.config.empty()) cfg = mcoce::load_run_config(a.config);
  if (!a.problems.empty()) cfg.bench.problems = split_commas(a.problems);
  if (!a.algos.empty()) cfg.bench.algorithms = split_commas(a.algos);
  if (a.trials) cfg.bench.trials = *a.trials;
  if (a.seed) cfg.bench.master_seed = *a.seed;
  if (a.out) cfg.output.dir = *a.out;
  if (a.budget) cfg.bench.budget = *a.budget;
  if (a.pop) cfg.bench.pop_size = *a.pop;
  if (a.checkpoints) cfg.bench.checkpoints = *a.checkpoints;
  cfg.bench.threads = threads_from_env(cfg.bench.threads);

  const auto violations = mcoce::validate_run_config(cfg);
  if (!violations.empty()) throw mcoce::ConfigError(violations);

  const mcoce::BenchOutput out = mcoce::run_benchmark(cfg.bench);
  bool config_errors = false;
  bool runtime_errors = false;
  for (const auto& e : out.errors) {
    std::cerr << "error: " << e.problem << (e.problem.empty() || e.algorithm.empty() ? "" : "/")
              << e.algorithm << ": " << e.message << "\n";
    (e.runtime ? runtime_errors : config_errors) = true;
  }

  std::filesystem::create_directories(cfg.output.dir);
  mcoce::write_raw_csv(cfg.output.raw_path(), out.results);
  const auto stats = mcoce::aggregate_all(out.results, cfg.bench);
  mcoce::write_aggregate_csv(cfg.output.aggregate_path(), stats);
  // the effective configuration, so the run can be repeated exactly
  mcoce::RunConfig effective = cfg;
  effective.bench.threads = 0;
  write_file((std::filesystem::path(cfg.output.dir) / "config.json").string(),
             mcoce::serialize_run_config(effective));
  std::cout << "wrote " << cfg.output.raw_path() << " and " << cfg.output.aggregate_path() << " ("
            << out.results.size() << " trials)\n";
  if (config_errors) return kUsageError;
  return runtime_errors ? kRuntimeError : kOk;
}

int cmd_plot(const std::string& input, const std::string& style_name, const std::string& out) {
  mcoce::PlotStyle style;
  try {
    style = mcoce::parse_plot_style(style_name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::ifstream in(input, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + input + "'");
  const auto stats = mcoce::read_aggregate_csv(in);
  write_file(out, mcoce::render_svg(stats, style));
  std::cout << "wrote " << out << "\n";
  return kOk;
}

struct LabArgs {
  std::string demo;
  std::size_t reps = 0;
  std::size_t m = 0;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_lab(const LabArgs& a) {
  using mcoce::csv::format_real;
  std::ostringstream csv;
  if (a.demo == "is_unbiased") {
    const auto s = mcoce::is_unbiased_demo(a.reps ? a.reps : 2000, a.m ? a.m : 100, a.seed);
    csv << "reps,m,truth,mean,sd,bound,within_bound\n"
        << s.reps << ',' << s.m << ',' << format_real(s.truth) << ',' << format_real(s.mean) << ','
        << format_real(s.sd) << ',' << format_real(s.bound) << ',' << (s.within_bound ? 1 : 0) << '\n';
  } else if (a.demo == "bias_variance") {
    const std::size_t reps = a.reps ? a.reps : 1000;
    csv << "estimator,m,reps,mse,bias_sq,variance\n";
    for (const auto& r : mcoce::bias_variance_demo(reps, a.seed)) {
      if (a.m != 0 && r.m != a.m) continue;
      csv << r.estimator << ',' << r.m << ',' << reps << ',' << format_real(r.report.mse) << ','
          << format_real(r.report.bias_sq) << ',' << format_real(r.report.variance) << '\n';
    }
  } else if (a.demo == "naive_mco") {
    const auto s = mcoce::naive_mco_demo(a.m ? a.m : 2, a.reps ? a.reps : 500, a.seed);
    csv << "m,reps,true_argmin,misselections,misselection_frequency\n"
        << s.m << ',' << s.reps << ',' << format_real(s.true_argmin) << ',' << s.misselections << ','
        << format_real(s.misselection_frequency) << '\n';
  } else {
    throw UsageError("unknown demo '" + a.demo + "'; valid: is_unbiased bias_variance naive_mco");
  }
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    write_file(a.out, csv.str());
  }
  return kOk;
}

int cmd_list() {
  std::cout << "problems (name dim g_star):\n";
  for (const auto& name : mcoce::problem_names()) {
    const auto p = mcoce::make_problem(name);
    std::cout << "  " << p.name << ' ' << p.dim;
    if (p.g_star) {
      char buf[48];
      std::snprintf(buf, sizeof buf, "%.5f", *p.g_star);
      std::cout << ' ' << buf;
    }
    if (p.name == "rosenbrock") std::cout << "  (any dim >= 2 as rosenbrock:<dim>)";
    std::cout << '\n';
  }
  std::cout << "algorithms:\n";
  for (const auto& a : mcoce::algorithm_names()) std::cout << "  " << a << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-entropy optimization with cross-validated hyperparameters"};
  app.require_subcommand(1);

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "run a benchmark and write raw and aggregate CSVs");
  b->add_option("--config", bench.config, "JSON run configuration")->check(CLI::ExistingFile);
  b->add_option("--problem", bench.problems, "problem keys, comma separated (name or name:dim)");
  b->add_option("--algos", bench.algos, "algorithm names, comma separated");
  b->add_option("--trials", bench.trials, "trials per problem and algorithm");
  b->add_option("--seed", bench.seed, "master seed");
  b->add_option("--out", bench.out, "output directory");
  b->add_option("--budget", bench.budget, "evaluation budget per trial (0: 20000 * dim)");
  b->add_option("--pop", bench.pop, "population size (0: 50 * dim)");
  b->add_option("--checkpoints", bench.checkpoints, "number of checkpoints in the aggregate grid");

  std::string plot_input;
  std::string plot_style = "semilog_median";
  std::string plot_out = "plot.svg";
  auto* p = app.add_subcommand("plot", "draw an aggregate CSV as SVG");
  p->add_option("--input", plot_input, "aggregate CSV")->required();
  p->add_option("--style", plot_style, "mean_ci or semilog_median");
  p->add_option("--out", plot_out, "output SVG path");

  LabArgs lab;
  auto* l = app.add_subcommand("lab", "Monte Carlo integration demos");
  l->add_option("demo", lab.demo, "is_unbiased, bias_variance or naive_mco")->required();
  l->add_option("--reps", lab.reps, "repetitions");
  l->add_option("--m", lab.m, "samples per estimate");
  l->add_option("--seed", lab.seed, "seed");
  l->add_option("--out", lab.out, "CSV path (default: stdout)");

  auto* ls = app.add_subcommand("list", "print problems and algorithms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*b) return cmd_bench(bench);
    if (*p) return cmd_plot(plot_input, plot_style, plot_out);
    if (*l) return cmd_lab(lab);
    if (*ls) return cmd_list();
  } catch (const mcoce::ConfigError& e) {
    std::cerr << "invalid configuration:\n";
    for (const auto& v : e.violations()) std::cerr << "  - " << v << "\n";
    return kUsageError;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}
