#include <gtest/gtest.h>

#include <regex>
#include <set>

#include "mcoce/config.hpp"
#include "mcoce/svg_plot.hpp"

using namespace mcoce;

namespace {

AggregateStats constant_series(std::string problem, std::string algo, double v) {
  AggregateStats a;
  a.problem = std::move(problem);
  a.algorithm = std::move(algo);
  for (std::uint64_t e : {100u, 200u, 400u}) a.points.push_back({e, v, 0.0, v, v, v});
  return a;
}

}  // namespace

TEST(RunConfig, ParseOverridesDefaults) {
  const RunConfig c = parse_run_config(R"({
    "problems": ["hartman6", "rosenbrock:10"], "algorithms": ["CES10", "CEMX"], "trials": 30,
    "master_seed": 18446744073709551615, "smoothing": {"alpha": 0.7, "q": 3},
    "cv": {"k": 5, "kappas": [0.1, 0.2]}, "output": {"dir": "out"}})");
  EXPECT_EQ(c.bench.problems.size(), 2u);
  EXPECT_EQ(c.bench.trials, 30u);
  EXPECT_EQ(c.bench.master_seed, 18446744073709551615ULL);
  EXPECT_EQ(c.bench.smoothing.alpha, 0.7);
  EXPECT_EQ(c.bench.smoothing.beta, 0.9);
  EXPECT_EQ(c.bench.smoothing.q, 3.0);
  EXPECT_EQ(c.bench.cv.folds, 5u);
  EXPECT_EQ(c.bench.component_counts, (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(c.output.dir, "out");
  EXPECT_EQ(c.output.raw, "raw.csv");
  EXPECT_TRUE(validate_run_config(c).empty());
}

TEST(RunConfig, RoundTripIsIdempotent) {
  RunConfig c;
  c.bench.problems = {"woods"};
  c.bench.kappas = {0.05, 0.1, 0.15};
  c.bench.smoothing.alpha = 0.1 + 0.2;  // not exactly representable as typed
  const std::string once = serialize_run_config(c);
  const RunConfig back = parse_run_config(once);
  EXPECT_EQ(serialize_run_config(back), once);
  EXPECT_EQ(back.bench.smoothing.alpha, c.bench.smoothing.alpha);
  EXPECT_EQ(serialize_run_config(parse_run_config(serialize_run_config(back))), once);
  EXPECT_EQ(once.back(), '\n');
  EXPECT_EQ(once.find('\r'), std::string::npos);
}

TEST(RunConfig, StructuralErrorsAllListed) {
  try {
    parse_run_config(R"({"trials": "many", "bogus": 1, "cv": {"k": -2, "extra": true}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.violations().size(), 4u);
  }
  EXPECT_THROW(parse_run_config("{not json"), ConfigError);
  EXPECT_THROW(parse_run_config("[1, 2]"), ConfigError);
}

TEST(RunConfig, RangeViolationsAllListed) {
  RunConfig c;
  c.bench.problems = {"woods", "sphere"};
  c.bench.algorithms = {"CES10", "CEZ10"};
  c.bench.trials = 0;
  c.bench.kappas = {1.5};
  c.bench.cv.folds = 1;
  const auto v = validate_run_config(c);
  EXPECT_EQ(v.size(), 5u);
}

TEST(Svg, StylesParse) {
  EXPECT_EQ(parse_plot_style("mean_ci"), PlotStyle::MeanCi);
  EXPECT_EQ(parse_plot_style("semilog_median"), PlotStyle::SemilogMedian);
  EXPECT_THROW(parse_plot_style("bars"), std::invalid_argument);
}

TEST(Svg, ConstantSeriesIsHorizontal) {
  const std::vector<AggregateStats> stats = {constant_series("woods", "CES10", 0.5)};
  const std::string svg = render_svg(stats, PlotStyle::MeanCi);
  const std::regex poly("<polyline fill=\"none\" stroke=\"[^\"]+\" stroke-width=\"2\" points=\"([^\"]*)\"");
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, poly));
  const std::regex pt("[0-9.]+,([0-9.]+)");
  std::set<std::string> ys;
  const std::string pts = m[1];
  for (auto it = std::sregex_iterator(pts.begin(), pts.end(), pt); it != std::sregex_iterator(); ++it) {
    ys.insert((*it)[1]);
  }
  EXPECT_EQ(ys.size(), 1u);
  EXPECT_NE(svg.find(">CES10<"), std::string::npos);
}

TEST(Svg, FloorFootnoteAndDeterminism) {
  const std::vector<AggregateStats> stats = {constant_series("shekel5", "CESX", 0.0),
                                             constant_series("shekel5", "CES10", 1e-3)};
  const std::string a = render_svg(stats, PlotStyle::SemilogMedian);
  EXPECT_NE(a.find("class=\"footnote\""), std::string::npos);
  EXPECT_NE(a.find("1e-16 floor"), std::string::npos);
  EXPECT_NE(a.find(">-16<"), std::string::npos);  // axis reaches log10 of the floor
  EXPECT_EQ(a, render_svg(stats, PlotStyle::SemilogMedian));
  const std::string b = render_svg({constant_series("shekel5", "CES10", 1e-3)}, PlotStyle::SemilogMedian);
  EXPECT_EQ(b.find("1e-16 floor"), std::string::npos);
}

TEST(Svg, OnePanelPerProblemAndEmpiricalLabel) {
  const std::vector<AggregateStats> stats = {constant_series("woods", "CES10", 1.0),
                                             constant_series("hougen", "CES10", 1.0),
                                             constant_series("hougen", "CEMX", 2.0)};
  const std::string svg = render_svg(stats, PlotStyle::SemilogMedian);
  std::size_t panels = 0;
  for (std::size_t pos = 0; (pos = svg.find("<g class=\"panel\">", pos)) != std::string::npos; ++pos) ++panels;
  EXPECT_EQ(panels, 2u);
  EXPECT_NE(svg.find("hougen (empirical reference"), std::string::npos);
}
