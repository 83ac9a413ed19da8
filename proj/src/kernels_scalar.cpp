#include <algorithm>
#include <cmath>

#include "geoflow/kernels.hpp"

namespace geoflow::kernels {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
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
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = err[i] / sc;
    s += q * q;
  }
  return s;
}

}  // namespace

const Table& scalar_table() {
  static const Table t{Isa::scalar, "scalar", dot, axpy, gemv, gemv_t, lincomb, scaled_sq_norm};
  return t;
}

}  // namespace geoflow::kernels
