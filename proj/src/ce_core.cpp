#include "mcoce/ce_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "json.hpp"

namespace mcoce {

namespace {

std::string join_violations(const std::vector<std::string>& v) {
  std::string out = "invalid configuration:";
  for (const auto& s : v) out += "\n  - " + s;
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::invalid_argument(join_violations(violations)), violations_(std::move(violations)) {}

CEConfig resolve_defaults(CEConfig cfg, std::size_t dim) {
  if (cfg.pop_size == 0) cfg.pop_size = 50 * dim;
  if (cfg.max_evals == 0) cfg.max_evals = 20000 * static_cast<std::uint64_t>(dim);
  return cfg;
}

std::size_t elite_count(double kappa, std::size_t n) {
  const double raw = std::ceil(kappa * static_cast<double>(n) - 1e-9);
  const auto count = static_cast<std::size_t>(std::max(1.0, raw));
  return std::min(count, n);
}

std::vector<std::string> validate(const CEConfig& cfg_in, std::size_t dim) {
  const CEConfig cfg = resolve_defaults(cfg_in, dim);
  std::vector<std::string> v;
  if (cfg.pop_size < 2) v.push_back("pop_size must be >= 2");
  if (!(cfg.kappa > 0.0 && cfg.kappa < 1.0)) v.push_back("kappa must lie in (0, 1)");
  if (cfg.pop_size >= 2 && cfg.kappa > 0.0 && cfg.kappa < 1.0 &&
      elite_count(cfg.kappa, cfg.pop_size) < dim + 1) {
    v.push_back("ceil(kappa * pop_size) = " + std::to_string(elite_count(cfg.kappa, cfg.pop_size)) +
                " elites cannot support a covariance in dimension " + std::to_string(dim) +
                " (need >= " + std::to_string(dim + 1) + ")");
  }
  if (cfg.components < 1) v.push_back("components must be >= 1");
  if (!cfg.mixture && cfg.components != 1) v.push_back("single-Gaussian model needs components == 1");
  if (!(cfg.smoothing.alpha >= 0.0 && cfg.smoothing.alpha <= 1.0)) {
    v.push_back("smoothing alpha must lie in [0, 1]");
  }
  if (!(cfg.smoothing.beta >= 0.0 && cfg.smoothing.beta <= 1.0)) {
    v.push_back("smoothing beta must lie in [0, 1]");
  }
  if (!(cfg.smoothing.q > 0.0)) v.push_back("smoothing q must be > 0");
  if (cfg.max_evals < cfg.pop_size) v.push_back("max_evals must be >= pop_size");
  if (cfg.archive_window < 1) v.push_back("archive_window must be >= 1");
  return v;
}

DistributionId DistributionArchive::add(MixtureParams params) {
  const DistributionId id = next_++;
  table_.emplace(id, std::move(params));
  return id;
}

const MixtureParams& DistributionArchive::get(DistributionId id) const {
  const auto it = table_.find(id);
  if (it == table_.end()) throw std::out_of_range("unknown distribution id " + std::to_string(id));
  return it->second;
}

void DistributionArchive::retain(const std::vector<DistributionId>& keep) {
  const std::set<DistributionId> k(keep.begin(), keep.end());
  for (auto it = table_.begin(); it != table_.end();) {
    it = k.count(it->first) ? std::next(it) : table_.erase(it);
  }
}

void DistributionArchive::restore(std::map<DistributionId, MixtureParams> table,
                                  DistributionId next) {
  table_ = std::move(table);
  next_ = next;
}

std::vector<TaggedSample> CEState::pooled() const {
  std::vector<TaggedSample> out;
  for (const auto& gen : archive) out.insert(out.end(), gen.begin(), gen.end());
  return out;
}

CEState init_state(const Problem& problem, const CEConfig& cfg, std::uint64_t seed) {
  const auto d = static_cast<Eigen::Index>(problem.dim);
  Vector mean(d);
  Matrix cov = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const Interval& r = problem.init_region[static_cast<std::size_t>(j)];
    mean(j) = r.center();
    cov(j, j) = 0.25 * r.width() * r.width();
  }
  GaussianParams g = GaussianParams::from_spd(std::move(mean), std::move(cov));
  const std::size_t k = cfg.mixture ? std::max<std::size_t>(cfg.components, 1) : 1;
  MixtureParams theta0 =
      k == 1 ? MixtureParams(std::move(g))
             : MixtureParams(Vector::Constant(static_cast<Eigen::Index>(k), 1.0 / static_cast<double>(k)),
                             std::vector<GaussianParams>(k, g));
  CEState state(theta0);
  state.seed = seed;
  state.theta_id = state.generators.add(std::move(theta0));
  return state;
}

std::vector<TaggedSample> draw_population(CEState& state, EvalCounter& counter,
                                          const CEConfig& cfg) {
  if (state.evals_used + cfg.pop_size > cfg.max_evals) {
    throw BudgetExhausted("evaluation budget cannot cover another population");
  }
  Rng normals = substream(state.seed, state.t, StreamTag::Population);
  Rng components = substream(state.seed, state.t, StreamTag::Components);
  const PointMatrix x = sample_mixture(state.theta, cfg.pop_size, normals, components);
  const Vector logq = logpdf_mixture(state.theta, x);

  std::vector<TaggedSample> pop(cfg.pop_size);
  const std::uint64_t before = counter.calls();
  for (std::size_t i = 0; i < cfg.pop_size; ++i) {
    TaggedSample& s = pop[i];
    s.x = x.row(static_cast<Eigen::Index>(i)).transpose();
    s.g = counter({s.x.data(), static_cast<std::size_t>(s.x.size())});
    s.gen_id = state.theta_id;
    s.gen_logpdf = logq(static_cast<Eigen::Index>(i));
    if (s.g < state.best.g) {
      state.best.g = s.g;
      state.best.x = s.x;
    }
  }
  state.evals_used += counter.calls() - before;
  return pop;
}

EliteSelection select_elite(std::span<const TaggedSample> samples, double kappa) {
  if (samples.empty()) throw std::invalid_argument("select_elite needs samples");
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return samples[a].g < samples[b].g; });
  order.resize(elite_count(kappa, samples.size()));
  EliteSelection sel;
  sel.gamma = samples[order.back()].g;
  sel.indices = std::move(order);
  return sel;
}

WeightedPoints elite_weights(std::span<const TaggedSample> samples,
                             std::span<const std::size_t> elite, WeightMode mode,
                             std::size_t* capped) {
  if (elite.empty()) throw std::invalid_argument("elite_weights needs a nonempty elite set");
  constexpr double kCap = 1e12;
  const auto d = samples[elite.front()].x.size();
  WeightedPoints wp{PointMatrix(static_cast<Eigen::Index>(elite.size()), d),
                    Vector(static_cast<Eigen::Index>(elite.size()))};
  std::size_t caps = 0;
  for (std::size_t i = 0; i < elite.size(); ++i) {
    const TaggedSample& s = samples[elite[i]];
    const auto row = static_cast<Eigen::Index>(i);
    wp.points.row(row) = s.x.transpose();
    if (mode == WeightMode::CeUnity) {
      wp.weights(row) = 1.0;
    } else {
      double w = std::exp(-s.gen_logpdf);
      if (!(w <= kCap)) {
        w = kCap;
        ++caps;
      }
      wp.weights(row) = w;
    }
  }
  if (capped != nullptr) *capped = caps;
  return wp;
}

ModelFit fit_model(const WeightedPoints& elite, std::size_t components, bool mixture, Rng& rng,
                   const EmOptions& em) {
  if (!mixture && components == 1) return {MixtureParams(weighted_gaussian_mle(elite)), false};
  EmResult r = em_fit_mixture(elite, components, rng, em);
  return {std::move(r.params), r.degenerate};
}

MixtureParams update_params(CEState& state, const WeightedPoints& elite, std::size_t components,
                            bool mixture, const CEConfig& cfg) {
  Rng rng = substream(state.seed, state.t, StreamTag::FinalFit);
  ModelFit fit = fit_model(elite, components, mixture, rng, cfg.em);
  if (fit.degenerate) ++state.degenerate_fits;
  return smooth_update(state.theta, fit.params, state.t + 1, cfg.smoothing);
}

void push_generation(CEState& state, std::vector<TaggedSample> population, const CEConfig& cfg) {
  state.archive.push_back(std::move(population));
  const std::size_t window = std::max<std::size_t>(cfg.archive_window, 1);
  while (state.archive.size() > window) state.archive.erase(state.archive.begin());
}

void advance(CEState& state, MixtureParams next) {
  state.theta = next;
  state.theta_id = state.generators.add(std::move(next));
  ++state.t;
  std::vector<DistributionId> keep{state.theta_id};
  for (const auto& gen : state.archive) {
    for (const auto& s : gen) keep.push_back(s.gen_id);
  }
  state.generators.retain(keep);
}

void ce_step(CEState& state, EvalCounter& counter, const CEConfig& cfg) {
  push_generation(state, draw_population(state, counter, cfg), cfg);
  const std::vector<TaggedSample> pool = state.pooled();
  const EliteSelection sel = select_elite(pool, cfg.kappa);
  state.gamma = sel.gamma;
  const WeightedPoints elite = elite_weights(pool, sel.indices, cfg.weight_mode);
  MixtureParams next = update_params(state, elite, cfg.components, cfg.mixture, cfg);
  state.kappa_sel = cfg.kappa;
  state.k_sel = cfg.components;
  advance(state, std::move(next));
}

TrialResult run_ce(const Problem& problem, const CEConfig& cfg_in, std::uint64_t seed) {
  if (auto v = validate(cfg_in, problem.dim); !v.empty()) throw ConfigError(std::move(v));
  const CEConfig cfg = resolve_defaults(cfg_in, problem.dim);
  CEState state = init_state(problem, cfg, seed);
  EvalCounter counter(problem);
  TrialResult result;
  result.problem = problem.label;
  while (state.evals_used + cfg.pop_size <= cfg.max_evals) {
    ce_step(state, counter, cfg);
    result.series.push_back({state.evals_used, state.best.g, state.gamma, state.kappa_sel, state.k_sel});
  }
  return result;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

using nlohmann::json;

json vec_to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vec_from_json(const json& j) {
  const auto raw = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(raw.data(), static_cast<Eigen::Index>(raw.size()));
}

json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double real_from(const json& j, double fallback) { return j.is_null() ? fallback : j.get<double>(); }

json params_to_json(const MixtureParams& p) {
  json comps = json::array();
  for (const auto& c : p.components()) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < c.covariance().rows(); ++r) {
      rows.push_back(vec_to_json(c.covariance().row(r).transpose()));
    }
    comps.push_back({{"mean", vec_to_json(c.mean())}, {"cov", rows}});
  }
  return {{"weights", vec_to_json(p.weights())}, {"components", comps}};
}

MixtureParams params_from_json(const json& j) {
  std::vector<GaussianParams> comps;
  for (const auto& c : j.at("components")) {
    Vector mean = vec_from_json(c.at("mean"));
    Matrix cov(mean.size(), mean.size());
    Eigen::Index r = 0;
    for (const auto& row : c.at("cov")) cov.row(r++) = vec_from_json(row).transpose();
    comps.push_back(GaussianParams::from_spd(std::move(mean), std::move(cov)));
  }
  return MixtureParams(vec_from_json(j.at("weights")), std::move(comps));
}

}  // namespace

std::string serialize_state(const CEState& s) {
  json archive = json::array();
  for (const auto& gen : s.archive) {
    json g = json::array();
    for (const auto& t : gen) {
      g.push_back({{"x", vec_to_json(t.x)}, {"g", t.g}, {"gen_id", t.gen_id}, {"gen_logpdf", t.gen_logpdf}});
    }
    archive.push_back(std::move(g));
  }
  json gens = json::array();
  for (const auto& [id, p] : s.generators.entries()) gens.push_back({{"id", id}, {"params", params_to_json(p)}});
  json j = {
      {"seed", s.seed},
      {"t", s.t},
      {"theta", params_to_json(s.theta)},
      {"theta_id", s.theta_id},
      {"archive", archive},
      {"generators", {{"next", s.generators.next_id()}, {"entries", gens}}},
      {"best", {{"x", vec_to_json(s.best.x)}, {"g", real_or_null(s.best.g)}}},
      {"gamma", real_or_null(s.gamma)},
      {"evals_used", s.evals_used},
      {"degenerate_fits", s.degenerate_fits},
      {"kappa_sel", real_or_null(s.kappa_sel)},
      {"k_sel", s.k_sel},
  };
  return j.dump();
}

CEState deserialize_state(std::string_view text) {
  const json j = json::parse(text);
  CEState s(params_from_json(j.at("theta")));
  s.seed = j.at("seed").get<std::uint64_t>();
  s.t = j.at("t").get<std::size_t>();
  s.theta_id = j.at("theta_id").get<DistributionId>();
  for (const auto& gen : j.at("archive")) {
    std::vector<TaggedSample> g;
    for (const auto& t : gen) {
      g.push_back({vec_from_json(t.at("x")), t.at("g").get<double>(), t.at("gen_id").get<DistributionId>(),
                   t.at("gen_logpdf").get<double>()});
    }
    s.archive.push_back(std::move(g));
  }
  std::map<DistributionId, MixtureParams> table;
  for (const auto& e : j.at("generators").at("entries")) {
    table.emplace(e.at("id").get<DistributionId>(), params_from_json(e.at("params")));
  }
  s.generators.restore(std::move(table), j.at("generators").at("next").get<DistributionId>());
  s.best.x = vec_from_json(j.at("best").at("x"));
  s.best.g = real_from(j.at("best").at("g"), std::numeric_limits<double>::infinity());
  s.gamma = real_from(j.at("gamma"), std::numeric_limits<double>::quiet_NaN());
  s.evals_used = j.at("evals_used").get<std::uint64_t>();
  s.degenerate_fits = j.at("degenerate_fits").get<std::size_t>();
  s.kappa_sel = real_from(j.at("kappa_sel"), std::numeric_limits<double>::quiet_NaN());
  s.k_sel = j.at("k_sel").get<std::size_t>();
  return s;
}

}  // namespace mcoce
