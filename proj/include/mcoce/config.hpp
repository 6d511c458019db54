#pragma once

// Run configuration for `mco_ce bench`, stored as JSON.
//
// {
//   "problems": ["hartman6", "rosenbrock:10"],
//   "algorithms": ["CES10", "CEMX"],
//   "trials": 30,
//   "master_seed": 42,
//   "budget": 30000,              0 picks 20000 * dim
//   "pop_size": 300,              0 picks 50 * dim
//   "smoothing": {"alpha": 0.9, "beta": 0.9, "q": 5},
//   "cv": {"k": 4, "kappas": [0.05, 0.1, 0.15], "component_counts": [1, 2, 3]},
//   "mixture_components": 3,
//   "archive_window": 1,
//   "checkpoints": 50,
//   "threads": 0,                 0 = hardware concurrency
//   "output": {"dir": "results", "raw": "raw.csv", "aggregate": "aggregate.csv"}
// }
//
// Every key is optional; unknown keys are rejected.

#include <string>
#include <string_view>
#include <vector>

#include "mcoce/bench.hpp"

namespace mcoce {

struct OutputPaths {
  std::string dir = "results";
  std::string raw = "raw.csv";
  std::string aggregate = "aggregate.csv";

  std::string raw_path() const;
  std::string aggregate_path() const;
};

struct RunConfig {
  BenchSettings bench;
  OutputPaths output;

  RunConfig();
};

/// Parses JSON text. Throws ConfigError listing every structural problem
/// (bad types, unknown keys); range checks are left to validate_run_config.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::string& path);

/// Canonical JSON: fixed key order, two-space indent, trailing LF.
std::string serialize_run_config(const RunConfig& cfg);

/// Every violated constraint; empty when the configuration can run.
std::vector<std::string> validate_run_config(const RunConfig& cfg);

}  // namespace mcoce
