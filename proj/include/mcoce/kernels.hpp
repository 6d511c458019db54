#pragma once

// Data-parallel inner loops shared by the density, fitting and scoring code.
// Every kernel has a scalar reference implementation; an AVX2/FMA variant is
// selected at runtime when the CPU supports it. Variants agree to rounding,
// not bitwise (FMA and lane-wise reduction order differ).

#include <cstddef>
#include <span>
#include <string_view>

namespace mcoce::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  const char* name;

  // out[i] = |L^{-1} (x_i - mean)|^2 for the n points stored column-major in
  // X (n x d, leading dimension n). L is d x d lower-triangular, column-major.
  void (*mahalanobis_sq)(const double* chol, const double* mean, const double* points,
                         std::size_t n, std::size_t d, double* out);

  // sum_i w[i] * a[i] * b[i]
  double (*weighted_dot)(const double* w, const double* a, const double* b, std::size_t n);

  // sum_i w[i] * a[i]
  double (*weighted_sum)(const double* w, const double* a, std::size_t n);

  // sum_i a[i]
  double (*sum)(const double* a, std::size_t n);
};

const KernelTable& scalar_table();

// nullptr when the binary was built without the AVX2 translation unit or the
// running CPU lacks AVX2+FMA.
const KernelTable* avx2_table();

// The table used by the library. Chosen once per process: AVX2 when available,
// unless the environment variable MCO_CE_SIMD is set to "scalar".
const KernelTable& active();

std::string_view isa_name(Isa isa);

// Span conveniences over active().
void mahalanobis_sq(std::span<const double> chol, std::span<const double> mean,
                    std::span<const double> points, std::size_t n, std::span<double> out);
double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b);
double weighted_sum(std::span<const double> w, std::span<const double> a);
double sum(std::span<const double> a);

namespace detail {
KernelTable make_scalar_table();
#if defined(MCOCE_HAVE_AVX2_TU)
KernelTable make_avx2_table();
#endif
}  // namespace detail

}  // namespace mcoce::kernels
