#include "mcoce/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>

namespace mcoce {

PlotStyle parse_plot_style(std::string_view name) {
  if (name == "mean_ci") return PlotStyle::MeanCi;
  if (name == "semilog_median") return PlotStyle::SemilogMedian;
  throw std::invalid_argument("unknown plot style '" + std::string(name) +
                              "'; valid: mean_ci semilog_median");
}

namespace {

constexpr double kWidth = 760.0;
constexpr double kPanelHeight = 340.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 150.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 46.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-300 + 1e-12 * std::max(std::abs(lo), std::abs(hi))) {
      const double pad = lo == 0.0 ? 1.0 : 0.5 * std::abs(lo);
      lo -= pad;
      hi += pad;
    }
  }
};

struct Panel {
  double top;
  Range x;
  Range y;

  double px(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (kWidth - kLeft - kRight); }
  double py(double v) const {
    const double h = kPanelHeight - kTop - kBottom;
    return top + kTop + (y.hi - v) / (y.hi - y.lo) * h;
  }
};

struct Series {
  std::vector<double> x;
  std::vector<double> mid;
  std::vector<double> lower;
  std::vector<double> upper;
};

std::string points(const Panel& p, const std::vector<double>& xs, const std::vector<double>& ys) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(ys[i])) continue;
    if (!out.empty()) out += ' ';
    out += num(p.px(xs[i])) + "," + num(p.py(ys[i]));
  }
  return out;
}

bool empirical_reference(const std::string& problem) {
  try {
    return !make_problem_from_key(problem).g_star.has_value();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

std::string render_svg(const std::vector<AggregateStats>& stats, PlotStyle style) {
  std::vector<std::string> problems;
  std::vector<std::string> algorithms;
  for (const auto& s : stats) {
    if (std::find(problems.begin(), problems.end(), s.problem) == problems.end()) problems.push_back(s.problem);
    if (std::find(algorithms.begin(), algorithms.end(), s.algorithm) == algorithms.end()) {
      algorithms.push_back(s.algorithm);
    }
  }
  const bool semilog = style == PlotStyle::SemilogMedian;
  bool floored = false;
  const auto transform = [&](double v) {
    if (!semilog) return v;
    if (!(v > kLogFloor)) {
      floored = true;
      v = kLogFloor;
    }
    return std::log10(v);
  };

  const double height = kPanelHeight * static_cast<double>(std::max<std::size_t>(1, problems.size())) + 30.0;
  std::string body;
  for (std::size_t pi = 0; pi < problems.size(); ++pi) {
    Panel panel{kPanelHeight * static_cast<double>(pi), {}, {}};
    std::vector<std::pair<std::size_t, Series>> series;
    for (const auto& s : stats) {
      if (s.problem != problems[pi]) continue;
      Series sr;
      for (const auto& c : s.points) {
        sr.x.push_back(static_cast<double>(c.evals));
        if (semilog) {
          sr.mid.push_back(transform(c.median));
          sr.lower.push_back(transform(c.min));
          sr.upper.push_back(transform(c.max));
        } else {
          sr.mid.push_back(c.mean);
          sr.lower.push_back(c.mean - c.ci95);
          sr.upper.push_back(c.mean + c.ci95);
        }
      }
      for (double v : sr.x) panel.x.add(v);
      for (const auto* vs : {&sr.mid, &sr.lower, &sr.upper}) {
        for (double v : *vs) panel.y.add(v);
      }
      const auto ai = static_cast<std::size_t>(
          std::find(algorithms.begin(), algorithms.end(), s.algorithm) - algorithms.begin());
      series.emplace_back(ai, std::move(sr));
    }
    panel.x.finish();
    panel.y.finish();

    const double plot_bottom = panel.py(panel.y.lo);
    const double plot_top = panel.py(panel.y.hi);
    body += "<g class=\"panel\">\n";
    body += "<text x=\"" + num(kLeft) + "\" y=\"" + num(panel.top + 22.0) +
            "\" font-size=\"15\" font-weight=\"bold\">" + escape(problems[pi]) +
            (empirical_reference(problems[pi]) ? " (empirical reference: best value seen in any run)" : "") +
            "</text>\n";
    body += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(plot_top) + "\" width=\"" +
            num(kWidth - kLeft - kRight) + "\" height=\"" + num(plot_bottom - plot_top) +
            "\" fill=\"none\" stroke=\"#000\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = panel.x.lo + (panel.x.hi - panel.x.lo) * i / 4.0;
      const double yv = panel.y.lo + (panel.y.hi - panel.y.lo) * i / 4.0;
      body += "<text x=\"" + num(panel.px(xv)) + "\" y=\"" + num(plot_bottom + 16.0) +
              "\" font-size=\"11\" text-anchor=\"middle\">" + label_num(xv) + "</text>\n";
      body += "<text x=\"" + num(kLeft - 6.0) + "\" y=\"" + num(panel.py(yv) + 4.0) +
              "\" font-size=\"11\" text-anchor=\"end\">" + label_num(yv) + "</text>\n";
    }
    body += "<text x=\"" + num(kLeft + (kWidth - kLeft - kRight) / 2.0) + "\" y=\"" +
            num(plot_bottom + 34.0) + "\" font-size=\"12\" text-anchor=\"middle\">function evaluations</text>\n";
    const std::string ylabel = semilog ? "log10(best_g - g_star)" : "mean(best_g - g_star)";
    body += "<text x=\"16\" y=\"" + num((plot_top + plot_bottom) / 2.0) +
            "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
            num((plot_top + plot_bottom) / 2.0) + ")\">" + escape(ylabel) + "</text>\n";

    for (const auto& [ai, sr] : series) {
      const char* colour = kPalette[ai % std::size(kPalette)];
      if (semilog) {
        for (const auto* vs : {&sr.lower, &sr.upper}) {
          body += "<polyline fill=\"none\" stroke=\"" + std::string(colour) +
                  "\" stroke-width=\"1\" stroke-dasharray=\"4 3\" points=\"" + points(panel, sr.x, *vs) + "\"/>\n";
        }
      } else {
        std::vector<double> rx(sr.x.rbegin(), sr.x.rend());
        std::vector<double> rl(sr.lower.rbegin(), sr.lower.rend());
        body += "<polygon fill=\"" + std::string(colour) + "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"" +
                points(panel, sr.x, sr.upper) + " " + points(panel, rx, rl) + "\"/>\n";
      }
      body += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"2\" points=\"" +
              points(panel, sr.x, sr.mid) + "\"/>\n";
    }

    // legend
    double ly = plot_top + 8.0;
    for (const auto& [ai, sr] : series) {
      const char* colour = kPalette[ai % std::size(kPalette)];
      const double lx = kWidth - kRight + 12.0;
      body += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 22.0) + "\" y2=\"" +
              num(ly) + "\" stroke=\"" + colour + "\" stroke-width=\"2\"/>\n";
      body += "<text x=\"" + num(lx + 28.0) + "\" y=\"" + num(ly + 4.0) + "\" font-size=\"12\">" +
              escape(algorithms[ai]) + "</text>\n";
      ly += 18.0;
    }
    body += "</g>\n";
  }

  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(height) +
         "\" viewBox=\"0 0 " + num(kWidth) + " " + num(height) + "\" font-family=\"sans-serif\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(height) + "\" fill=\"#fff\"/>\n";
  out += body;
  std::string note = semilog ? "median solid, min and max dashed" : "mean with 95% confidence band";
  if (floored) note += "; values at or below 1e-16 are drawn at the 1e-16 floor";
  out += "<text class=\"footnote\" x=\"" + num(kLeft) + "\" y=\"" + num(height - 10.0) +
         "\" font-size=\"11\">" + escape(note) + "</text>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace mcoce
