#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "geoflow/kernels.hpp"

using namespace geoflow::kernels;

namespace {

std::vector<double> randv(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// long double reference, independent of both tables
long double ref_dot(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return s;
}

}  // namespace

TEST_SUITE("kernels") {
TEST_CASE("scalar kernels match a long double reference") {
  std::mt19937_64 rng(7);
  const Table& t = scalar_table();
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u, 100u}) {
    auto a = randv(rng, n), b = randv(rng, n);
    CHECK(std::abs(t.dot(a.data(), b.data(), n) - static_cast<double>(ref_dot(a, b))) < 1e-12 * (n + 1));
    auto y = b;
    t.axpy(0.5, a.data(), y.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(b[i] + 0.5 * a[i]).epsilon(1e-15));
  }
}

TEST_CASE("gemv and gemv_t agree with explicit loops") {
  std::mt19937_64 rng(11);
  const Table& t = scalar_table();
  const std::size_t rows = 5, cols = 9;
  auto a = randv(rng, rows * cols), x = randv(rng, cols), z = randv(rng, rows);
  std::vector<double> y(rows), w(cols);
  t.gemv(a.data(), rows, cols, x.data(), y.data());
  t.gemv_t(a.data(), rows, cols, z.data(), w.data());
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < cols; ++j) s += a[i * cols + j] * x[j];
    CHECK(y[i] == doctest::Approx(s).epsilon(1e-14));
  }
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < rows; ++i) s += a[i * cols + j] * z[i];
    CHECK(w[j] == doctest::Approx(s).epsilon(1e-14));
  }
}

TEST_CASE("avx2 table is equivalent to the scalar table") {
  const Table* v = avx2_table();
  if (v == nullptr) {
    MESSAGE("AVX2 unavailable on this machine; equivalence test skipped");
    return;
  }
  const Table& s = scalar_table();
  std::mt19937_64 rng(3);
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 8u, 13u, 64u, 257u}) {
    auto a = randv(rng, n), b = randv(rng, n), c = randv(rng, n);
    const double scale = std::sqrt(static_cast<double>(n));
    CHECK(std::abs(v->dot(a.data(), b.data(), n) - s.dot(a.data(), b.data(), n)) < 1e-13 * scale);
    auto y1 = c, y2 = c;
    s.axpy(-1.25, a.data(), y1.data(), n);
    v->axpy(-1.25, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) < 1e-14);

    const double n1 = s.scaled_sq_norm(a.data(), b.data(), c.data(), 1e-8, 1e-6, n);
    const double n2 = v->scaled_sq_norm(a.data(), b.data(), c.data(), 1e-8, 1e-6, n);
    CHECK(std::abs(n1 - n2) <= 1e-13 * n1);

    std::vector<std::vector<double>> st(7);
    std::vector<const double*> sp(7);
    for (int k = 0; k < 7; ++k) {
      st[k] = randv(rng, n);
      sp[k] = st[k].data();
    }
    const double coeff[7] = {0.1, -0.2, 0.3, 0.0, 1.5, -0.7, 0.05};
    std::vector<double> o1(n), o2(n);
    s.lincomb(o1.data(), a.data(), 0.01, coeff, sp.data(), 7, n);
    v->lincomb(o2.data(), a.data(), 0.01, coeff, sp.data(), 7, n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(o1[i] - o2[i]) < 1e-14);
  }
  for (std::size_t rows : {1u, 3u, 7u}) {
    for (std::size_t cols : {1u, 4u, 6u, 11u}) {
      auto a = randv(rng, rows * cols), x = randv(rng, cols), z = randv(rng, rows);
      std::vector<double> y1(rows), y2(rows), w1(cols), w2(cols);
      s.gemv(a.data(), rows, cols, x.data(), y1.data());
      v->gemv(a.data(), rows, cols, x.data(), y2.data());
      s.gemv_t(a.data(), rows, cols, z.data(), w1.data());
      v->gemv_t(a.data(), rows, cols, z.data(), w2.data());
      for (std::size_t i = 0; i < rows; ++i) CHECK(std::abs(y1[i] - y2[i]) < 1e-13);
      for (std::size_t j = 0; j < cols; ++j) CHECK(std::abs(w1[j] - w2[j]) < 1e-13);
    }
  }
}

TEST_CASE("isa names parse") {
  CHECK(parse_isa("scalar") == Isa::scalar);
  CHECK(parse_isa("avx2") == Isa::avx2);
}
}
