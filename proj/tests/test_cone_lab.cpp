#include <cmath>

#include "doctest.h"
#include "geoflow/cone_lab.hpp"
#include "geoflow/deformation.hpp"
#include "geoflow/error.hpp"
#include "geoflow/model_spaces.hpp"

using namespace geoflow;

namespace {

PhasePoint axis_start(int n) {
  PhasePoint p;
  p.position.t = 0.0;
  p.position.x = Vec::Zero(n - 1);
  p.velocity = Vec::Zero(n);
  p.velocity[0] = 1.0;
  return p;
}

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

// Oracle for the symmetric model: Theta along the exact transition, central difference.
double dtheta_exact(const JacobiState& s, const ConeSpec& spec, double h) {
  Vec rho(3);
  rho << -1.0, -0.25, -0.25;
  const JacobiState p = JacobiState::from_stacked(jacobi_transition(rho, h) * s.stacked());
  const JacobiState m = JacobiState::from_stacked(jacobi_transition(rho, -h) * s.stacked());
  return (theta(p, spec) - theta(m, spec)) / (2 * h);
}

Mat ch2_k() {
  Mat k = Mat::Zero(3, 3);
  k.diagonal() << -1.0, -0.25, -0.25;
  return k;
}

}  // namespace

TEST_SUITE("cone_lab") {
TEST_CASE("theta examples") {
  const ConeSpec spec = make_cone(1, 1.5);
  CHECK(theta({v3(0.3, 0, 0), v3(0.3, 0, 0)}, spec) == doctest::Approx(2.0));
  CHECK(theta({v3(0, 1, 0), v3(0, 0, 0)}, spec) == 0.0);
  const double a = 1.0 / std::sqrt(3.0);
  const JacobiState s{v3(a, 0, 0), v3(a, 0, a)};
  CHECK(theta(s, spec) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  for (double k : {-2.0, -1.0, 0.5, 3.0}) {
    const JacobiState ks{k * s.xi, k * s.eta};
    CHECK(theta(ks, spec) == theta(s, spec));
  }
  // stable side uses xi - eta
  CHECK(theta({v3(0.3, 0, 0), v3(-0.3, 0, 0)}, make_cone(1, 1.5, ConeSide::stable)) == doctest::Approx(2.0));
  CHECK_THROWS_AS(theta({v3(0, 0, 0), v3(0, 0, 0)}, spec), DomainError);
  CHECK_THROWS_AS(theta(s, make_cone(1, 2.0)), ParameterError);
}

TEST_CASE("closed-form cone variation") {
  const ConeSpec spec = make_cone(1, 1.5);
  const double a = 1.0 / std::sqrt(3.0);
  CHECK(theta_derivative_symmetric({v3(a, 0, 0), v3(a, 0, a)}, spec) == doctest::Approx(8.0 / 9.0).epsilon(1e-14));
  const double h = 1.0 / std::sqrt(2.0);
  CHECK(theta_derivative_symmetric({v3(h, 0, 0), v3(h, 0, 0)}, spec) == doctest::Approx(0.0));
  CHECK_THROWS_AS(theta_derivative_symmetric({v3(1, 0, 0), v3(1, 0, 0)}, spec), NormalizationError);

  auto rng = task_rng(4, 0);
  for (int i = 0; i < 500; ++i) {
    const Vec z = random_unit(rng, 6);
    const JacobiState s = JacobiState::from_stacked(z);
    const double d = theta_derivative_symmetric(s, spec);
    CHECK(std::abs(d - dtheta_exact(s, spec, 1e-4)) < 1e-6);
    if (theta(s, spec) > 1e-6) CHECK(d > 0.0);
    const ConeSpec st = make_cone(1, 1.5, ConeSide::stable);
    CHECK(std::abs(theta_derivative_symmetric(s, st) - dtheta_exact(s, st, 1e-4)) < 1e-6);
  }
}

TEST_CASE("boundary minimum of the cone variation") {
  // min over the boundary Theta = c equals 3/8 c (2 - c)
  auto rng = task_rng(5, 0);
  for (double c : {1.1, 1.5, 1.9}) {
    const ConeSpec spec = make_cone(1, c);
    double mn = 1e9;
    for (int i = 0; i < 4000; ++i) {
      const JacobiState s = sample_boundary_state(rng, 3, spec);
      CHECK(theta(s, spec) == doctest::Approx(c).epsilon(1e-12));
      CHECK(s.stacked().norm() == doctest::Approx(1.0).epsilon(1e-12));
      mn = std::min(mn, theta_derivative_symmetric(s, spec));
    }
    const double bound = 0.375 * c * (2 - c);
    CHECK(mn >= bound - 1e-12);
    CHECK(mn < bound * 1.2);
  }
}

TEST_CASE("sampling") {
  auto rng = task_rng(6, 1);
  const ConeSpec spec = make_cone(3, 1.3, ConeSide::stable);
  for (int i = 0; i < 200; ++i) {
    const JacobiState s = sample_cone_state(rng, 7, spec);
    const double t = theta(s, spec);
    CHECK(t >= 1.3 - 1e-12);
    CHECK(t <= 2.0 + 1e-12);
  }
  auto a = task_rng(1, 7), b = task_rng(1, 7), c = task_rng(1, 8), d = task_rng(2, 7);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}

TEST_CASE("numeric cone variation matches the closed form") {
  const MetricChart c = symmetric_chart(SymmetricModel(4, 1), 2 * M_PI, 0.5);
  const ConeSpec spec = make_cone(1, 1.5);
  const Mat frame = Mat::Identity(4, 4).rightCols(3);
  auto rng = task_rng(7, 0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const JacobiState s = JacobiState::from_stacked(random_unit(rng, 6));
    const double num = theta_derivative_numeric(c, axis_start(4), frame, s, spec, 1e-3);
    worst = std::max(worst, std::abs(num - theta_derivative_symmetric(s, spec)));
  }
  CHECK(worst < 1e-5);
  // spectral projector equals the block projector on the axis
  const Mat p = spectral_projector(c, 1)(axis_start(4), frame);
  CHECK((p - spec.projector(3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("growth rates on constant cocycles") {
  const Mat pa = make_cone(1, 1.5).projector(3);
  const JacobiCocycle c = constant_cocycle(ch2_k(), pa, 10.0, 0.05);
  CHECK(c.times.size() == 201);
  CHECK(c.duration() == doctest::Approx(10.0));
  auto rng = task_rng(8, 0);
  for (int i = 0; i < 20; ++i) {
    const JacobiState s = sample_cone_state(rng, 3, make_cone(1, 1.5));
    const GrowthFit g = strong_growth_rate(c, s, ConeSide::unstable);
    CHECK(g.rate == doctest::Approx(1.0).epsilon(0.02));
    const JacobiState ss = sample_cone_state(rng, 3, make_cone(1, 1.5, ConeSide::stable));
    const GrowthFit gs = strong_growth_rate(reverse_cocycle(c), reversed(ss), ConeSide::unstable);
    CHECK(-gs.rate == doctest::Approx(-1.0).epsilon(0.02));
  }
  // flat central direction: norm grows linearly, rate ~ 0
  Mat k0 = Mat::Zero(3, 3);
  k0(0, 0) = -1.0;
  const JacobiCocycle f = constant_cocycle(k0, pa, 10.0, 0.05);
  const GrowthFit g0 = norm_growth_rate(f, {v3(0, 1, 0), v3(0, 0, 0)});
  CHECK(std::abs(g0.rate) < 1e-12);
  CHECK_THROWS_AS(strong_growth_rate(f, {v3(0, 1, 0), v3(0, 0, 0)}, ConeSide::unstable), ParameterError);
}

TEST_CASE("lyapunov spectrum and cocycle algebra") {
  const Mat pa = make_cone(1, 1.5).projector(3);
  const JacobiCocycle c = constant_cocycle(ch2_k(), pa, 40.0, 0.5);
  const auto sp = lyapunov_spectrum(c);
  const double want[] = {1.0, 0.5, 0.5, -0.5, -0.5, -1.0};
  for (int i = 0; i < 6; ++i) CHECK(sp[i] == doctest::Approx(want[i]).epsilon(0.02));
  const JacobiCocycle short_c = constant_cocycle(ch2_k(), pa, 4.0, 0.5);
  const JacobiCocycle r = reverse_cocycle(short_c);
  const Mat t = cocycle_transition(short_c), tr = cocycle_transition(r);
  Vec sd(6);
  sd << 1, 1, 1, -1, -1, -1;
  CHECK((sd.asDiagonal() * tr * sd.asDiagonal() * t - Mat::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-9);
  JacobiCocycle a = constant_cocycle(ch2_k(), pa, 1.0, 0.1);
  append_cocycle(a, constant_cocycle(ch2_k(), pa, 2.0, 0.1));
  CHECK(a.duration() == doctest::Approx(3.0));
  CHECK((cocycle_transition(a) - jacobi_transition(ch2_k(), 3.0)).cwiseAbs().maxCoeff() < 1e-10);
  // rotating the end frame by q conjugates the transition
  Mat q = Mat::Identity(3, 3);
  q.block(1, 1, 2, 2) << 0.0, -1.0, 1.0, 0.0;
  JacobiCocycle b = a;
  rotate_cocycle_end(b, q);
  CHECK((b.projectors.back() - pa).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(b.transitions.back() != a.transitions.back());
}

TEST_CASE("detector verdicts") {
  const Mat pa = make_cone(1, 1.5).projector(3);
  SplittingOptions o;
  o.boundary_samples = 4;
  o.rate_samples = 4;
  const SplittingVerdict sym = detect_splitting({constant_cocycle(ch2_k(), pa, 60.0, 0.5)}, o);
  CHECK(sym.label == "anosov-like");
  CHECK(sym.invariance_pass);
  CHECK(sym.min_dtheta > 0.0);
  for (double r : sym.unstable_rates) CHECK(r == doctest::Approx(1.0).epsilon(0.02));
  for (double r : sym.stable_rates) CHECK(r == doctest::Approx(-1.0).epsilon(0.02));

  Mat kc = Mat::Zero(3, 3);
  kc(0, 0) = -1.0;
  const SplittingVerdict ph = detect_splitting({constant_cocycle(kc, pa, 60.0, 0.5)}, o);
  CHECK(ph.label == "partially-hyperbolic");
  CHECK(ph.invariance_pass);
  CHECK(ph.max_central < 0.1);
  CHECK(ph.rates_consistent);

  // no gap below the strong direction
  const SplittingVerdict nd = detect_splitting({constant_cocycle(-Mat::Identity(3, 3), pa, 60.0, 0.5)}, o);
  CHECK(nd.label == "no-domination");

  CHECK_THROWS_AS(detect_splitting({}, o), ParameterError);
  const JacobiCocycle c4 = constant_cocycle(Mat::Identity(4, 4) * -1.0, Mat::Identity(4, 4), 4.0, 0.5);
  CHECK_THROWS_AS(detect_splitting({constant_cocycle(ch2_k(), pa, 4.0, 0.5), c4}, o), ConfigError);
}

TEST_CASE("reversal swaps the stable and unstable data") {
  // deformed-axis orbit, non-constant along its length
  const MetricChart base = symmetric_chart(SymmetricModel(4, 1), 2 * M_PI, 0.5);
  PhasePoint s = axis_start(4);
  s.position.x << 0.0, 0.004, -0.003;
  Vec v(4);
  v << 1.0, 0.0, 0.002, 0.001;
  s.velocity = normalize_velocity(base, s.position, v);
  const OrbitSegment seg = integrate_geodesic(base, s, 8.0);
  const JacobiCocycle c = cocycle_from_segment(seg, spectral_projector(base, 1));
  SplittingOptions o;
  o.boundary_samples = 2;
  o.rate_samples = 5;
  const SplittingVerdict f = detect_splitting({c}, o);
  const SplittingVerdict b = detect_splitting({reverse_cocycle(c)}, o);
  REQUIRE(f.unstable_rates.size() == b.stable_rates.size());
  for (std::size_t i = 0; i < f.stable_rates.size(); ++i) {
    CHECK(b.unstable_rates[i] == -f.stable_rates[i]);
    CHECK(std::abs(b.stable_rates[i] + f.unstable_rates[i]) < 1e-10);
  }
  CHECK(f.label == b.label);
}
}
