#include "mcoce/objectives.hpp"

#include <cmath>
#include <string>

namespace mcoce {

double eval_rosenbrock(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = 1.0 - x[i];
    const double b = x[i] * x[i] - x[i + 1];
    s += a * a + 100.0 * b * b;
  }
  return s;
}

double eval_woods(std::span<const double> x) {
  const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3];
  return 100.0 * (x2 - x1) * (x2 - x1) + (1.0 - x1) * (1.0 - x1) +
         90.0 * (x4 - x3 * x3) * (x4 - x3 * x3) + (1.0 - x3) * (1.0 - x3) +
         10.1 * ((1.0 - x2) * (1.0 - x2) + (1.0 - x4) * (1.0 - x4)) +
         19.8 * (1.0 - x2) * (1.0 - x4);
}

double eval_classic_woods(std::span<const double> x) {
  const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3];
  return 100.0 * (x2 - x1 * x1) * (x2 - x1 * x1) + (1.0 - x1) * (1.0 - x1) +
         90.0 * (x4 - x3 * x3) * (x4 - x3 * x3) + (1.0 - x3) * (1.0 - x3) +
         10.1 * ((1.0 - x2) * (1.0 - x2) + (1.0 - x4) * (1.0 - x4)) +
         19.8 * (1.0 - x2) * (1.0 - x4);
}

double eval_shekel(std::span<const double> x, int m) {
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    double sq = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double diff = x[static_cast<std::size_t>(j)] - tables::kShekelA[i][j];
      sq += diff * diff;
    }
    s -= 1.0 / (sq + tables::kShekelC[i]);
  }
  return s;
}

double eval_hartman6(std::span<const double> x) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 6; ++j) {
      const double diff = x[static_cast<std::size_t>(j)] - tables::kHartmanP[i][j];
      inner += tables::kHartmanA[i][j] * diff * diff;
    }
    s -= tables::kHartmanAlpha[i] * std::exp(-inner);
  }
  return s;
}

double eval_hougen(std::span<const double> beta) {
  constexpr double kGuard = 1e-12;
  constexpr double kPenalty = 1e12;
  const double b5 = beta[4];
  if (!(std::abs(b5) >= kGuard)) {
    return kPenalty + kPenalty * (kGuard - std::abs(b5));
  }
  double s = 0.0;
  for (const auto& row : tables::kHougenData) {
    const double x1 = row[0], x2 = row[1], x3 = row[2], rate = row[3];
    const double den = 1.0 + beta[1] * x1 + beta[2] * x2 + beta[3] * x3;
    if (!(std::abs(den) >= kGuard)) {
      return kPenalty + kPenalty * (kGuard - std::abs(den));
    }
    const double r = rate - (beta[0] * x2 - x3 / b5) / den;
    s += r * r;
  }
  return std::isfinite(s) ? s : kPenalty;
}

namespace {

std::vector<Interval> box(std::size_t d, double lo, double hi) {
  return std::vector<Interval>(d, Interval{lo, hi});
}

Problem fixed(std::string name, std::size_t dim, std::size_t requested,
              std::function<double(std::span<const double>)> eval, std::optional<double> g_star,
              std::optional<Eigen::VectorXd> x_star, std::vector<Interval> region) {
  if (requested != 0 && requested != dim) {
    throw UnknownProblem(name + " is " + std::to_string(dim) + "-dimensional, got dim " +
                         std::to_string(requested));
  }
  Problem p;
  p.label = name;
  p.name = std::move(name);
  p.dim = dim;
  p.eval = std::move(eval);
  p.g_star = g_star;
  p.x_star = std::move(x_star);
  p.init_region = std::move(region);
  return p;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Minimizers located by local refinement from the tabulated basins.
const Eigen::VectorXd& shekel_x_star(int m) {
  static const Eigen::VectorXd s5 =
      vec({4.000037152376549, 4.000133278657566, 4.000037151057555, 4.000133277090425});
  static const Eigen::VectorXd s7 =
      vec({4.000572914277084, 4.000689366040889, 3.9994897107938447, 3.9996061600067923});
  static const Eigen::VectorXd s10 =
      vec({4.000746533201553, 4.000592934538832, 3.9996633972202558, 3.9995098012852255});
  return m == 5 ? s5 : (m == 7 ? s7 : s10);
}

Problem shekel(int m, std::size_t requested) {
  const Eigen::VectorXd& xs = shekel_x_star(m);
  const double g = eval_shekel({xs.data(), 4}, m);
  return fixed("shekel" + std::to_string(m), 4, requested,
               [m](std::span<const double> x) { return eval_shekel(x, m); }, g, xs,
               box(4, 0.0, 10.0));
}

}  // namespace

const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names = {"rosenbrock", "woods",   "classic_woods",
                                                 "shekel5",    "shekel7", "shekel10",
                                                 "hougen",     "hartman6"};
  return names;
}

Problem make_problem(std::string_view name, std::size_t dim) {
  if (name == "rosenbrock") {
    const std::size_t n = dim == 0 ? 4 : dim;
    if (n < 2) throw UnknownProblem("rosenbrock needs dim >= 2");
    Problem p;
    p.name = "rosenbrock";
    p.label = "rosenbrock:" + std::to_string(n);
    p.dim = n;
    p.eval = eval_rosenbrock;
    p.g_star = 0.0;
    p.x_star = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    p.init_region = box(n, -2.0, 2.0);
    return p;
  }
  if (name == "woods") {
    return fixed("woods", 4, dim, eval_woods, 0.0, Eigen::VectorXd::Ones(4), box(4, -3.0, 3.0));
  }
  if (name == "classic_woods") {
    return fixed("classic_woods", 4, dim, eval_classic_woods, 0.0, Eigen::VectorXd::Ones(4),
                 box(4, -3.0, 3.0));
  }
  if (name == "shekel5") return shekel(5, dim);
  if (name == "shekel7") return shekel(7, dim);
  if (name == "shekel10") return shekel(10, dim);
  if (name == "hartman6") {
    static const Eigen::VectorXd xs =
        vec({0.20168950909365746, 0.15001069354111374, 0.4768739729250998, 0.2753324275220782,
             0.3116516172395686, 0.6573005345536702});
    return fixed("hartman6", 6, dim, eval_hartman6, eval_hartman6({xs.data(), 6}), xs,
                 box(6, 0.0, 1.0));
  }
  if (name == "hougen") {
    return fixed("hougen", 5, dim, eval_hougen, std::nullopt, std::nullopt, box(5, 0.0, 3.0));
  }
  std::string msg = "unknown problem '" + std::string(name) + "'; known:";
  for (const auto& n : problem_names()) msg += " " + n;
  throw UnknownProblem(msg);
}

Problem make_problem_from_key(std::string_view key) {
  const auto colon = key.find(':');
  if (colon == std::string_view::npos) return make_problem(key, 0);
  const std::string dim_text(key.substr(colon + 1));
  std::size_t pos = 0;
  unsigned long dim = 0;
  try {
    dim = std::stoul(dim_text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != dim_text.size() || dim == 0) {
    throw UnknownProblem("bad dimension in problem key '" + std::string(key) + "'");
  }
  return make_problem(key.substr(0, colon), dim);
}

}  // namespace mcoce
