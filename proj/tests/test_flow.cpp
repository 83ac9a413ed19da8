#include <cmath>

#include "doctest.h"
#include "geoflow/deformation.hpp"
#include "geoflow/error.hpp"
#include "geoflow/flow.hpp"
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

Vec unit(int n, int i) {
  Vec e = Vec::Zero(n);
  e[i] = 1.0;
  return e;
}

MetricChart ch2_chart() { return symmetric_chart(SymmetricModel(4, 1), 2 * M_PI, 0.5); }

// scale sets the transverse offset; orbits leave the chart roughly like scale * e^t
PhasePoint off_axis_start(const MetricChart& c, double scale = 1.0) {
  PhasePoint p;
  p.position.t = 0.2;
  p.position.x = Vec(3);
  p.position.x << 0.05 * scale, -0.03 * scale, 0.02 * scale;
  Vec v(4);
  v << 1.0, 0.02 * scale, 0.01 * scale, -0.015 * scale;
  p.velocity = normalize_velocity(c, p.position, v);
  return p;
}

}  // namespace

TEST_SUITE("flow") {
TEST_CASE("euclidean straight line") {
  const MetricChart c = euclidean_chart(3, 10.0, 1.0);
  PhasePoint s = axis_start(3);
  s.position.x << 0.1, -0.2;
  const OrbitSegment seg = integrate_geodesic(c, s, 2.0);
  REQUIRE(!seg.exit);
  CHECK(seg.end_time() == 2.0);
  for (std::size_t i = 0; i < seg.points.size(); ++i) {
    CHECK(seg.points[i].position.t == doctest::Approx(seg.times[i]).epsilon(1e-13));
    CHECK((seg.points[i].position.x - s.position.x).norm() < 1e-13);
    CHECK((seg.points[i].velocity - s.velocity).norm() < 1e-13);
    CHECK((seg.frames[i] - seg.frames[0]).norm() < 1e-13);
  }
  CHECK(seg.times.size() == 41);
}

TEST_CASE("axis orbit of the Fermi chart") {
  const MetricChart c = ch2_chart();
  const OrbitSegment seg = integrate_geodesic(c, axis_start(4), 10.0);
  const Mat coord = Mat::Identity(4, 4).rightCols(3);
  Vec rho(3);
  rho << -1.0, -0.25, -0.25;
  for (std::size_t i = 0; i < seg.points.size(); ++i) {
    CHECK(seg.points[i].position.t == doctest::Approx(seg.times[i]).epsilon(1e-12));
    CHECK(seg.points[i].position.x.norm() < 1e-14);
    CHECK((seg.frames[i] - coord).cwiseAbs().maxCoeff() < 1e-12);
  }
  // componentwise agreement with the closed form up to t = 10
  for (std::size_t i = 0; i < seg.points.size(); i += 20) {
    const Mat phi = seg.transition_to(i);
    const Mat exact = jacobi_transition(rho, seg.times[i]);
    CHECK(((phi - exact).array() / (1.0 + exact.array().abs())).abs().maxCoeff() < 1e-6);
  }
  // (e_B, 0) -> cosh(t/2) e_B
  const JacobiState s{unit(3, 1), Vec::Zero(3)};
  const JacobiState e = propagate_jacobi(seg, s);
  CHECK(e.xi[1] == doctest::Approx(std::cosh(5.0)).epsilon(1e-8));
  CHECK(e.eta[1] == doctest::Approx(0.5 * std::sinh(5.0)).epsilon(1e-8));
}

TEST_CASE("constant curvature -1 gives e^t growth") {
  const MetricChart c = hyperbolic_plane_chart(2 * M_PI, 1.0);
  const OrbitSegment seg = integrate_geodesic(c, axis_start(2), 6.0);
  const auto states = propagate_jacobi_samples(seg, {Vec::Constant(1, 1.0), Vec::Constant(1, 1.0)});
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double et = std::exp(seg.times[i]);
    CHECK(std::abs(states[i].xi[0] / et - 1.0) < 1e-8);
    CHECK(std::abs(states[i].eta[0] / et - 1.0) < 1e-8);
  }
}

TEST_CASE("holonomy over one period") {
  const MetricChart c = ch2_chart();
  const OrbitSegment seg = integrate_geodesic(c, axis_start(4), c.period());
  CHECK((seg.frames.back() - seg.frames.front()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(seg.points.back().position.t == doctest::Approx(c.period()).epsilon(1e-12));
}

TEST_CASE("transitions are symplectic and the frame stays orthonormal") {
  const MetricChart c = ch2_chart();
  const OrbitSegment seg = integrate_geodesic(c, off_axis_start(c, 1e-4), 10.0);
  REQUIRE(!seg.exit);
  CHECK(seg.points.back().position.x.cwiseAbs().maxCoeff() > 0.05);
  double worst = 0.0;
  for (const Mat& t : seg.transitions) worst = std::max(worst, symplectic_defect(t));
  CHECK(worst < 1e-7);
  const Mat total = seg.transition_to(seg.transitions.size());
  CHECK(symplectic_defect(total) / total.cwiseAbs().maxCoeff() < 1e-7);
  for (std::size_t i = 0; i < seg.points.size(); i += 10) {
    const Mat g = c.metric(seg.points[i].position);
    const Mat& f = seg.frames[i];
    CHECK((f.transpose() * g * f - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((f.transpose() * g * seg.points[i].velocity).cwiseAbs().maxCoeff() < 1e-7);
  }
  // pairing of two solutions is conserved
  const JacobiState a{Vec::Constant(3, 0.3), unit(3, 0)}, b{unit(3, 2), Vec::Constant(3, -0.2)};
  const auto sa = propagate_jacobi_samples(seg, a), sb = propagate_jacobi_samples(seg, b);
  const double w0 = symplectic_pairing(a, b);
  for (std::size_t i = 0; i < sa.size(); ++i) CHECK(std::abs(symplectic_pairing(sa[i], sb[i]) - w0) < 1e-7);
  CHECK((symplectic_inverse(total) * total - Mat::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("energy drift") {
  const MetricChart c = ch2_chart();
  IntegrationOptions o;
  o.tol = 1e-9;
  const OrbitSegment seg = integrate_geodesic(c, off_axis_start(c, 1e-4), 10.0, o);
  REQUIRE(!seg.exit);
  CHECK(seg.max_speed_drift < 1e-7 * 10.0);
  CHECK(seg.max_speed_drift < 10 * o.tol);
}

TEST_CASE("reversibility") {
  const MetricChart c = ch2_chart();
  const PhasePoint s = off_axis_start(c, 0.2);
  const OrbitSegment fwd = integrate_geodesic(c, s, 3.0);
  REQUIRE(!fwd.exit);
  IntegrationOptions o;
  o.initial_frame = fwd.frames.back();
  const OrbitSegment back = integrate_geodesic(c, reversed(fwd.points.back()), 3.0, o);
  CHECK((back.points.back().position.coords() - s.position.coords()).norm() < 1e-8);
  CHECK((back.points.back().velocity + s.velocity).norm() < 1e-8);
  CHECK((back.frames.back() - fwd.frames.front()).norm() < 1e-8);
  const JacobiState j0{Vec::Constant(3, 0.5), Vec::Constant(3, -0.25)};
  const JacobiState j1 = propagate_jacobi(fwd, j0);
  const JacobiState j2 = reversed(propagate_jacobi(back, reversed(j1)));
  CHECK((j2.stacked() - j0.stacked()).norm() < 1e-6);
}

TEST_CASE("Jacobi propagation matches nearby geodesics") {
  const MetricChart c = ch2_chart();
  const PhasePoint s = off_axis_start(c, 0.2);
  IntegrationOptions o;
  o.tol = 1e-12;
  const double tend = 2.0;
  const OrbitSegment seg = integrate_geodesic(c, s, tend, o);
  o.jacobi = false;
  const Mat g0 = c.metric(s.position);
  const double d = 1e-5;
  for (int i = 0; i < 3; ++i) {
    auto shoot = [&](double sgn) {
      PhasePoint p = s;
      p.velocity = s.velocity + sgn * d * seg.frames[0].col(i);
      p.velocity /= std::sqrt(p.velocity.dot(g0 * p.velocity));
      return integrate_geodesic(c, p, tend, o).points.back().position.coords();
    };
    const Vec jf = (shoot(1.0) - shoot(-1.0)) / (2 * d);
    const Mat g = c.metric(seg.points.back().position);
    const Vec xi_fd = seg.frames.back().transpose() * g * jf;
    JacobiState s0{Vec::Zero(3), unit(3, i)};
    const JacobiState e = propagate_jacobi(seg, s0);
    CHECK((xi_fd - e.xi).norm() < 1e-5 * (1.0 + e.xi.norm()));
  }
}

TEST_CASE("central Jacobi fields on the deformed axis") {
  const MetricChart base = ch2_chart();
  const MetricChart g = deformed_chart(base, Deformation(DeformationSpec{}));
  const OrbitSegment seg = integrate_geodesic(g, axis_start(4), 10.0);
  const auto lin = propagate_jacobi_samples(seg, {Vec::Zero(3), unit(3, 1)});
  const auto con = propagate_jacobi_samples(seg, {unit(3, 2), Vec::Zero(3)});
  for (std::size_t i = 1; i < lin.size(); ++i) {
    const double t = seg.times[i];
    CHECK(std::abs(lin[i].xi[1] - t) / t < 1e-6);
    CHECK(std::abs(lin[i].eta[1] - 1.0) < 1e-6);
    CHECK(std::abs(lin[i].xi[0]) + std::abs(lin[i].xi[2]) < 1e-8);
    CHECK(std::abs(con[i].xi[2] - 1.0) < 1e-8);
    CHECK(std::abs(con[i].eta[2]) < 1e-8);
  }
}

TEST_CASE("exit event") {
  const MetricChart c = euclidean_chart(3, 10.0, 1.0);
  PhasePoint s = axis_start(3);
  s.velocity << std::sqrt(0.75), 0.5, 0.0;
  IntegrationOptions o;
  o.exit_halfwidth = 0.02;
  const OrbitSegment seg = integrate_geodesic(c, s, 5.0, o);
  REQUIRE(seg.exit);
  CHECK(std::abs(seg.exit->time - 0.04) < 1e-9);
  CHECK(seg.exit->point.position.x[0] <= 0.02);
  CHECK(seg.exit->point.position.x[0] > 0.02 - 1e-9);
  CHECK(seg.times.back() == seg.exit->time);
  CHECK(seg.transitions.size() == seg.times.size() - 1);
}

TEST_CASE("integration errors") {
  const MetricChart c = euclidean_chart(3, 10.0, 1.0);
  PhasePoint s = axis_start(3);
  s.velocity *= 2.0;
  CHECK_THROWS_AS(integrate_geodesic(c, s, 1.0), NormalizationError);
  s = axis_start(3);
  s.position.x << 2.0, 0.0;
  CHECK_THROWS_AS(integrate_geodesic(c, s, 1.0), DomainError);
  IntegrationOptions o;
  o.tol = 0.0;
  CHECK_THROWS_AS(integrate_geodesic(c, axis_start(3), 1.0, o), ParameterError);
}
}
