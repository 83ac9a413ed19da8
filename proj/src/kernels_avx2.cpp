#include "geoflow/kernels.hpp"

#if defined(GEOFLOW_BUILD_AVX2)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace geoflow::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(a + r * cols, x, cols);
}

void gemv_t(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  std::fill(y, y + cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) axpy(x[r], a + r * cols, y, cols);
}

void lincomb(double* out, const double* base, double h, const double* coeff,
             const double* const* stage, std::size_t nstage, std::size_t n) {
  if (out != base) std::copy(base, base + n, out);
  for (std::size_t s = 0; s < nstage; ++s) {
    if (coeff[s] != 0.0) axpy(h * coeff[s], stage[s], out, n);
  }
}

double scaled_sq_norm(const double* err, const double* y0, const double* y1, double atol,
                      double rtol, std::size_t n) {
  const __m256d vat = _mm256_set1_pd(atol);
  const __m256d vrt = _mm256_set1_pd(rtol);
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d m = _mm256_max_pd(_mm256_and_pd(_mm256_loadu_pd(y0 + i), mask),
                              _mm256_and_pd(_mm256_loadu_pd(y1 + i), mask));
    __m256d sc = _mm256_fmadd_pd(vrt, m, vat);
    __m256d q = _mm256_div_pd(_mm256_loadu_pd(err + i), sc);
    acc = _mm256_fmadd_pd(q, q, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = err[i] / sc;
    s += q * q;
  }
  return s;
}

}  // namespace

const Table* avx2_table() {
  static const Table t{Isa::avx2, "avx2", dot, axpy, gemv, gemv_t, lincomb, scaled_sq_norm};
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok ? &t : nullptr;
}

}  // namespace geoflow::kernels

#else

namespace geoflow::kernels {
const Table* avx2_table() { return nullptr; }
}  // namespace geoflow::kernels

#endif
