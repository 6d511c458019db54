#pragma once

// Convergence plots from aggregate statistics, written as plain SVG.

#include <string>
#include <string_view>
#include <vector>

#include "mcoce/bench.hpp"

namespace mcoce {

enum class PlotStyle {
  MeanCi,         // mean with a shaded +-ci95 band, linear axes
  SemilogMedian,  // log10 of median, min and max
};

/// Throws std::invalid_argument for names other than mean_ci / semilog_median.
PlotStyle parse_plot_style(std::string_view name);

inline constexpr double kLogFloor = 1e-16;

/// One panel per problem, algorithms in first-appearance order. Output depends
/// only on the input values, so identical inputs give identical bytes.
std::string render_svg(const std::vector<AggregateStats>& stats, PlotStyle style);

}  // namespace mcoce
