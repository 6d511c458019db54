#pragma once

// Black-box test problems (all minimizations) and an evaluation counter.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcoce {

class UnknownProblem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double center() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
};

struct Problem {
  std::string name;
  std::string label;  // name, or "name:dim" for variable-dimension problems
  std::size_t dim = 0;
  std::function<double(std::span<const double>)> eval;
  std::optional<double> g_star;
  std::optional<Eigen::VectorXd> x_star;
  std::vector<Interval> init_region;

  double operator()(std::span<const double> x) const { return eval(x); }
};

/// Counts every evaluation routed through it. Confined to one trial.
class EvalCounter {
 public:
  explicit EvalCounter(const Problem& problem) : problem_(&problem) {}

  double operator()(std::span<const double> x) {
    ++calls_;
    return problem_->eval(x);
  }
  std::uint64_t calls() const { return calls_; }
  const Problem& problem() const { return *problem_; }

 private:
  const Problem* problem_;
  std::uint64_t calls_ = 0;
};

/// sum_{i<n} (1 - x_i)^2 + 100 (x_i^2 - x_{i+1})^2
double eval_rosenbrock(std::span<const double> x);

/// Woods function in the variant with a linear 100 (x2 - x1)^2 first term.
double eval_woods(std::span<const double> x);

/// Classical Woods function: first term 100 (x2 - x1^2)^2.
double eval_classic_woods(std::span<const double> x);

/// Shekel S_{4,m}, m in {5, 7, 10}.
double eval_shekel(std::span<const double> x, int m);

double eval_hartman6(std::span<const double> x);

/// Residual sum of squares of the Hougen-Watson reaction-rate model on the
/// 13-run n-pentane isomerization dataset.
double eval_hougen(std::span<const double> beta);

// Constant tables, exposed for pinning tests.
namespace tables {
inline constexpr double kShekelA[10][4] = {
    {4, 4, 4, 4}, {1, 1, 1, 1}, {8, 8, 8, 8}, {6, 6, 6, 6}, {3, 7, 3, 7},
    {2, 9, 2, 9}, {5, 5, 3, 3}, {8, 1, 8, 1}, {6, 2, 6, 2}, {7, 3.6, 7, 3.6}};
inline constexpr double kShekelC[10] = {0.1, 0.2, 0.2, 0.4, 0.4, 0.6, 0.3, 0.7, 0.5, 0.5};

inline constexpr double kHartmanAlpha[4] = {1.0, 1.2, 3.0, 3.2};
inline constexpr double kHartmanA[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                                           {0.05, 10, 17, 0.1, 8, 14},
                                           {3, 3.5, 1.7, 10, 17, 8},
                                           {17, 8, 0.05, 10, 0.1, 14}};
inline constexpr double kHartmanP[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                                           {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                                           {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                                           {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};

// columns: hydrogen, n-pentane, isopentane partial pressures; observed rate
inline constexpr double kHougenData[13][4] = {
    {470, 300, 10, 8.55},  {285, 80, 10, 3.79},   {470, 300, 120, 4.82}, {470, 80, 120, 0.02},
    {470, 80, 10, 2.75},   {100, 190, 10, 14.39}, {100, 80, 65, 2.54},   {470, 190, 65, 4.35},
    {100, 300, 54, 13.00}, {100, 300, 120, 8.50}, {100, 80, 120, 0.05},  {285, 300, 10, 11.32},
    {285, 190, 120, 3.13}};
}  // namespace tables

/// Registry: rosenbrock (dim >= 2, default 4), woods, classic_woods, shekel5,
/// shekel7, shekel10, hougen, hartman6. dim = 0 selects the default; a
/// mismatching fixed dimension throws UnknownProblem.
Problem make_problem(std::string_view name, std::size_t dim = 0);

/// Accepts "name" or "name:dim".
Problem make_problem_from_key(std::string_view key);

const std::vector<std::string>& problem_names();

}  // namespace mcoce
