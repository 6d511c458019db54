#include "mcoce/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mcoce {

using nlohmann::json;

std::string OutputPaths::raw_path() const { return (std::filesystem::path(dir) / raw).string(); }

std::string OutputPaths::aggregate_path() const {
  return (std::filesystem::path(dir) / aggregate).string();
}

RunConfig::RunConfig() {
  bench.algorithms = algorithm_names();
  bench.threads = 0;
}

namespace {

class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  // Visits the members of `obj`, complaining about any key outside `known`.
  bool object(const json& obj, const std::string& where, std::initializer_list<std::string_view> known) {
    if (!obj.is_object()) {
      errors_.push_back(where + ": expected an object");
      return false;
    }
    for (const auto& [key, value] : obj.items()) {
      bool ok = false;
      for (auto k : known) ok = ok || k == key;
      if (!ok) errors_.push_back(where + ": unknown key '" + key + "'");
    }
    return true;
  }

  template <class T>
  void get(const json& obj, const char* key, const std::string& where, T& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    const std::string name = where.empty() ? key : where + "." + key;
    if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) return fail(name, "a string");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) return fail(name, "a number");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_unsigned()) return fail(name, "a non-negative integer");
    } else {
      if (!it->is_array()) return fail(name, "an array");
      using E = typename T::value_type;
      for (const auto& e : *it) {
        const bool good = std::is_same_v<E, std::string>  ? e.is_string()
                          : std::is_floating_point_v<E> ? e.is_number()
                                                        : e.is_number_unsigned();
        if (!good) return fail(name, "an array of matching elements");
      }
    }
    out = it->get<T>();
  }

 private:
  void fail(const std::string& name, const char* what) {
    errors_.push_back(name + ": expected " + what);
  }
  std::vector<std::string>& errors_;
};

}  // namespace

RunConfig parse_run_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
  }
  RunConfig cfg;
  std::vector<std::string> errors;
  Reader r(errors);
  if (!r.object(doc, "config",
                {"problems", "algorithms", "trials", "master_seed", "budget", "pop_size", "smoothing",
                 "cv", "mixture_components", "archive_window", "checkpoints", "threads", "output"})) {
    throw ConfigError(errors);
  }
  BenchSettings& b = cfg.bench;
  r.get(doc, "problems", "", b.problems);
  r.get(doc, "algorithms", "", b.algorithms);
  r.get(doc, "trials", "", b.trials);
  r.get(doc, "master_seed", "", b.master_seed);
  r.get(doc, "budget", "", b.budget);
  r.get(doc, "pop_size", "", b.pop_size);
  r.get(doc, "mixture_components", "", b.mixture_components);
  r.get(doc, "archive_window", "", b.archive_window);
  r.get(doc, "checkpoints", "", b.checkpoints);
  r.get(doc, "threads", "", b.threads);
  if (doc.contains("smoothing") && r.object(doc["smoothing"], "smoothing", {"alpha", "beta", "q"})) {
    r.get(doc["smoothing"], "alpha", "smoothing", b.smoothing.alpha);
    r.get(doc["smoothing"], "beta", "smoothing", b.smoothing.beta);
    r.get(doc["smoothing"], "q", "smoothing", b.smoothing.q);
  }
  if (doc.contains("cv") && r.object(doc["cv"], "cv", {"k", "kappas", "component_counts"})) {
    r.get(doc["cv"], "k", "cv", b.cv.folds);
    r.get(doc["cv"], "kappas", "cv", b.kappas);
    r.get(doc["cv"], "component_counts", "cv", b.component_counts);
  }
  if (doc.contains("output") && r.object(doc["output"], "output", {"dir", "raw", "aggregate"})) {
    r.get(doc["output"], "dir", "output", cfg.output.dir);
    r.get(doc["output"], "raw", "output", cfg.output.raw);
    r.get(doc["output"], "aggregate", "output", cfg.output.aggregate);
  }
  if (!errors.empty()) throw ConfigError(errors);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError({"cannot read config file '" + path + "'"});
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str());
}

std::string serialize_run_config(const RunConfig& cfg) {
  const BenchSettings& b = cfg.bench;
  // ordered_json keeps insertion order, so the output is canonical
  nlohmann::ordered_json doc;
  doc["problems"] = b.problems;
  doc["algorithms"] = b.algorithms;
  doc["trials"] = b.trials;
  doc["master_seed"] = b.master_seed;
  doc["budget"] = b.budget;
  doc["pop_size"] = b.pop_size;
  doc["smoothing"] = {{"alpha", b.smoothing.alpha}, {"beta", b.smoothing.beta}, {"q", b.smoothing.q}};
  doc["cv"] = {{"k", b.cv.folds}, {"kappas", b.kappas}, {"component_counts", b.component_counts}};
  doc["mixture_components"] = b.mixture_components;
  doc["archive_window"] = b.archive_window;
  doc["checkpoints"] = b.checkpoints;
  doc["threads"] = b.threads;
  doc["output"] = {{"dir", cfg.output.dir}, {"raw", cfg.output.raw}, {"aggregate", cfg.output.aggregate}};
  return doc.dump(2) + "\n";
}

std::vector<std::string> validate_run_config(const RunConfig& cfg) {
  const BenchSettings& b = cfg.bench;
  std::vector<std::string> v;
  if (b.problems.empty()) v.push_back("problems: at least one problem is required");
  for (const auto& p : b.problems) {
    try {
      make_problem_from_key(p);
    } catch (const std::exception& e) {
      v.push_back(std::string("problems: ") + e.what());
    }
  }
  if (b.algorithms.empty()) v.push_back("algorithms: at least one algorithm is required");
  std::set<std::string> seen;
  for (const auto& a : b.algorithms) {
    try {
      parse_algorithm(a);
    } catch (const std::exception& e) {
      v.push_back(std::string("algorithms: ") + e.what());
    }
    if (!seen.insert(a).second) v.push_back("algorithms: '" + a + "' listed twice");
  }
  if (b.trials < 1) v.push_back("trials: must be at least 1");
  if (!(b.smoothing.alpha >= 0.0 && b.smoothing.alpha <= 1.0)) v.push_back("smoothing.alpha: must lie in [0, 1]");
  if (!(b.smoothing.beta >= 0.0 && b.smoothing.beta <= 1.0)) v.push_back("smoothing.beta: must lie in [0, 1]");
  if (!(b.smoothing.q > 0.0)) v.push_back("smoothing.q: must be positive");
  if (b.cv.folds < 2) v.push_back("cv.k: must be at least 2");
  if (b.kappas.empty()) v.push_back("cv.kappas: must be nonempty");
  for (double k : b.kappas) {
    if (!(k > 0.0 && k < 1.0)) v.push_back("cv.kappas: " + std::to_string(k) + " is outside (0, 1)");
  }
  if (b.component_counts.empty()) v.push_back("cv.component_counts: must be nonempty");
  for (auto k : b.component_counts) {
    if (k < 1) v.push_back("cv.component_counts: entries must be at least 1");
  }
  if (b.mixture_components < 1) v.push_back("mixture_components: must be at least 1");
  if (b.archive_window < 1) v.push_back("archive_window: must be at least 1");
  if (b.checkpoints < 1) v.push_back("checkpoints: must be at least 1");
  if (b.budget != 0 && b.pop_size != 0 && b.budget < b.pop_size) {
    v.push_back("budget: must cover at least one population (pop_size " + std::to_string(b.pop_size) + ")");
  }
  if (cfg.output.dir.empty()) v.push_back("output.dir: must be nonempty");
  if (cfg.output.raw.empty()) v.push_back("output.raw: must be nonempty");
  if (cfg.output.aggregate.empty()) v.push_back("output.aggregate: must be nonempty");
  return v;
}

}  // namespace mcoce
