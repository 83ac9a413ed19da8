#pragma once

#include <cstddef>
#include <string_view>

// Dense inner loops used by the curvature contractions and the integrator.
// Every kernel has a portable scalar reference; an AVX2/FMA variant is used
// when the CPU supports it. GEOFLOW_KERNELS=scalar forces the reference path.
namespace geoflow::kernels {

enum class Isa { scalar, avx2 };

struct Table {
  Isa isa;
  const char* name;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = A x, A row-major rows x cols
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // y = A^T x, A row-major rows x cols, y has cols entries
  void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // out = base + h * sum_s coeff[s] * stage[s]
  void (*lincomb)(double* out, const double* base, double h, const double* coeff,
                  const double* const* stage, std::size_t nstage, std::size_t n);
  // sum_i (err[i] / (atol + rtol * max(|y0[i]|, |y1[i]|)))^2
  double (*scaled_sq_norm)(const double* err, const double* y0, const double* y1, double atol,
                           double rtol, std::size_t n);
};

const Table& scalar_table();
// nullptr when the build or the CPU lacks AVX2/FMA.
const Table* avx2_table();
// Table selected at first use.
const Table& active();
// Override the active table (tests and benchmarks).
void set_active(Isa isa);
Isa parse_isa(std::string_view name);

}  // namespace geoflow::kernels
