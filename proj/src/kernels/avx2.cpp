// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "mcoce/kernels.hpp"

#include <immintrin.h>

#include <vector>

namespace mcoce::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// Four points per iteration, one per lane; forward substitution runs in lockstep.
void mahalanobis_sq_avx2(const double* chol, const double* mean, const double* points,
                         std::size_t n, std::size_t d, double* out) {
  std::vector<__m256d> z(d);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc_sq = _mm256_setzero_pd();
    for (std::size_t j = 0; j < d; ++j) {
      __m256d r = _mm256_sub_pd(_mm256_loadu_pd(points + j * n + i), _mm256_set1_pd(mean[j]));
      for (std::size_t k = 0; k < j; ++k) {
        r = _mm256_fnmadd_pd(_mm256_set1_pd(chol[k * d + j]), z[k], r);
      }
      z[j] = _mm256_div_pd(r, _mm256_set1_pd(chol[j * d + j]));
      acc_sq = _mm256_fmadd_pd(z[j], z[j], acc_sq);
    }
    _mm256_storeu_pd(out + i, acc_sq);
  }
  std::vector<double> zs(d);
  for (; i < n; ++i) {
    double acc_sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      double r = points[j * n + i] - mean[j];
      for (std::size_t k = 0; k < j; ++k) r -= chol[k * d + j] * zs[k];
      zs[j] = r / chol[j * d + j];
      acc_sq += zs[j] * zs[j];
    }
    out[i] = acc_sq;
  }
}

double weighted_dot_avx2(const double* w, const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d wa0 = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i));
    __m256d wa1 = _mm256_mul_pd(_mm256_loadu_pd(w + i + 4), _mm256_loadu_pd(a + i + 4));
    acc0 = _mm256_fmadd_pd(wa0, _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(wa1, _mm256_loadu_pd(b + i + 4), acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += w[i] * a[i] * b[i];
  return s;
}

double weighted_sum_avx2(const double* w, const double* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i + 4), _mm256_loadu_pd(a + i + 4), acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += w[i] * a[i];
  return s;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(_mm256_loadu_pd(a + i), acc0);
    acc1 = _mm256_add_pd(_mm256_loadu_pd(a + i + 4), acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i];
  return s;
}

}  // namespace

KernelTable make_avx2_table() {
  return KernelTable{Isa::Avx2, "avx2", &mahalanobis_sq_avx2, &weighted_dot_avx2,
                     &weighted_sum_avx2, &sum_avx2};
}

}  // namespace mcoce::kernels::detail
