#include "mcoce/kernels.hpp"

#include <vector>

namespace mcoce::kernels::detail {
namespace {

void mahalanobis_sq_scalar(const double* chol, const double* mean, const double* points,
                           std::size_t n, std::size_t d, double* out) {
  std::vector<double> z(d);
  for (std::size_t i = 0; i < n; ++i) {
    double acc_sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      double r = points[j * n + i] - mean[j];
      for (std::size_t k = 0; k < j; ++k) r -= chol[k * d + j] * z[k];
      z[j] = r / chol[j * d + j];
      acc_sq += z[j] * z[j];
    }
    out[i] = acc_sq;
  }
}

double weighted_dot_scalar(const double* w, const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * a[i] * b[i];
  return s;
}

double weighted_sum_scalar(const double* w, const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * a[i];
  return s;
}

double sum_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

}  // namespace

KernelTable make_scalar_table() {
  return KernelTable{Isa::Scalar, "scalar", &mahalanobis_sq_scalar, &weighted_dot_scalar,
                     &weighted_sum_scalar, &sum_scalar};
}

}  // namespace mcoce::kernels::detail
