#include <cassert>
#include <cstdlib>
#include <string>

#include "mcoce/kernels.hpp"

namespace mcoce::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(MCOCE_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table = detail::make_scalar_table();
  return table;
}

const KernelTable* avx2_table() {
#if defined(MCOCE_HAVE_AVX2_TU)
  static const KernelTable table = detail::make_avx2_table();
  static const bool ok = cpu_has_avx2();
  return ok ? &table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable* chosen = [] {
    const char* env = std::getenv("MCO_CE_SIMD");
    if (env != nullptr && std::string(env) == "scalar") return &scalar_table();
    if (const KernelTable* t = avx2_table()) return t;
    return &scalar_table();
  }();
  return *chosen;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

void mahalanobis_sq(std::span<const double> chol, std::span<const double> mean,
                    std::span<const double> points, std::size_t n, std::span<double> out) {
  const std::size_t d = mean.size();
  assert(chol.size() == d * d && points.size() == n * d && out.size() >= n);
  active().mahalanobis_sq(chol.data(), mean.data(), points.data(), n, d, out.data());
}

double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b) {
  assert(a.size() == w.size() && b.size() == w.size());
  return active().weighted_dot(w.data(), a.data(), b.data(), w.size());
}

double weighted_sum(std::span<const double> w, std::span<const double> a) {
  assert(a.size() == w.size());
  return active().weighted_sum(w.data(), a.data(), w.size());
}

double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }

}  // namespace mcoce::kernels
