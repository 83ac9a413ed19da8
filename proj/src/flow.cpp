#include "geoflow/flow.hpp"

#include <algorithm>
#include <cmath>

#include "geoflow/error.hpp"
#include "geoflow/kernels.hpp"

namespace geoflow {

Vec JacobiState::stacked() const {
  Vec s(xi.size() + eta.size());
  s << xi, eta;
  return s;
}

JacobiState JacobiState::from_stacked(const Vec& s) {
  const Eigen::Index m = s.size() / 2;
  return {s.head(m), s.tail(m)};
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

class Rhs {
 public:
  Rhs(const MetricChart& chart, bool jacobi)
      : chart_(chart), n_(chart.dim()), m_(chart.dim() - 1), jacobi_(jacobi) {}

  std::size_t size() const {
    return static_cast<std::size_t>(2 * n_ + n_ * m_ + (jacobi_ ? 4 * m_ * m_ : 0));
  }

  void operator()(const double* y, double* dy) const {
    ChartPoint p;
    p.t = y[0];
    p.x = Eigen::Map<const Vec>(y + 1, m_);
    const Eigen::Map<const Vec> v(y + n_, n_);
    const Eigen::Map<const Mat> u(y + 2 * n_, n_, m_);
    const MetricJet jet = chart_.jet_unchecked(p, jacobi_ ? 2 : 1);
    const Mat frame = u;
    const AlongGeodesic ag = along_geodesic(jet, v, jacobi_ ? &frame : nullptr);
    Eigen::Map<Vec>(dy, n_) = v;
    Eigen::Map<Vec>(dy + n_, n_) = ag.accel;
    Eigen::Map<Mat>(dy + 2 * n_, n_, m_) = ag.frame_rate * frame;
    if (!jacobi_) return;
    const int q = 2 * m_;
    const Eigen::Map<const Mat> phi(y + 2 * n_ + n_ * m_, q, q);
    Eigen::Map<Mat> dphi(dy + 2 * n_ + n_ * m_, q, q);
    dphi.topRows(m_) = phi.bottomRows(m_);
    dphi.bottomRows(m_).noalias() = -ag.jacobi * phi.topRows(m_);
  }

  int n() const { return n_; }
  int m() const { return m_; }

 private:
  const MetricChart& chart_;
  int n_;
  int m_;
  bool jacobi_;
};

double exit_value(const double* y, int n, double w) {
  double mx = 0.0;
  for (int i = 1; i < n; ++i) mx = std::max(mx, std::abs(y[i]));
  return mx - w;
}

}  // namespace

Vec normalize_velocity(const MetricChart& chart, const ChartPoint& p, const Vec& v) {
  const Mat g = chart.metric(p);
  const double s = v.dot(g * v);
  if (!(s > 0.0)) throw DomainError("cannot normalize a zero velocity");
  return v / std::sqrt(s);
}

OrbitSegment integrate_geodesic(const MetricChart& chart, const PhasePoint& start, double t_end,
                                const IntegrationOptions& opts) {
  if (!(opts.tol > 0.0)) throw ParameterError("integration tolerance must be positive");
  if (!(t_end >= 0.0)) throw ParameterError("t_end must be non-negative");
  if (!(opts.sample_dt > 0.0) || !(opts.max_step > 0.0))
    throw ParameterError("sample spacing and step bound must be positive");
  chart.check_domain(start.position);
  const int n = chart.dim(), m = n - 1;
  if (start.velocity.size() != n) throw ParameterError("velocity has the wrong dimension");
  const Mat g0 = chart.metric(start.position);
  if (std::abs(start.velocity.dot(g0 * start.velocity) - 1.0) > 1e-8)
    throw NormalizationError("start velocity must be g-unit");
  const double w = opts.exit_halfwidth > 0.0 ? std::min(opts.exit_halfwidth, chart.radius())
                                             : chart.radius();

  Mat frame0 = opts.initial_frame;
  if (frame0.size() == 0) {
    frame0 = orthonormal_complement(g0, start.velocity);
  } else if (frame0.rows() != n || frame0.cols() != m) {
    throw ParameterError("initial frame must be n x (n-1)");
  }

  const Rhs f(chart, opts.jacobi);
  const std::size_t N = f.size();
  const std::size_t off_u = 2 * n, off_phi = 2 * n + n * m;
  const int q = 2 * m;
  std::vector<double> y(N, 0.0);
  y[0] = start.position.t;
  for (int i = 0; i < m; ++i) y[1 + i] = start.position.x[i];
  for (int i = 0; i < n; ++i) y[n + i] = start.velocity[i];
  Eigen::Map<Mat>(y.data() + off_u, n, m) = frame0;
  auto reset_phi = [&](std::vector<double>& s) {
    if (!opts.jacobi) return;
    Eigen::Map<Mat>(s.data() + off_phi, q, q) = Mat::Identity(q, q);
  };
  reset_phi(y);
  if (exit_value(y.data(), n, w) >= 0.0) throw DomainError("start lies outside the exit region");

  OrbitSegment seg;
  auto record = [&](double t, const std::vector<double>& s, bool with_transition) {
    PhasePoint pp;
    pp.position.t = s[0];
    pp.position.x = Eigen::Map<const Vec>(s.data() + 1, m);
    pp.velocity = Eigen::Map<const Vec>(s.data() + n, n);
    const Mat g = chart.jet_unchecked(pp.position, 0).g;
    seg.max_speed_drift = std::max(seg.max_speed_drift, std::abs(pp.velocity.dot(g * pp.velocity) - 1.0));
    seg.times.push_back(t);
    seg.points.push_back(pp);
    seg.frames.push_back(Eigen::Map<const Mat>(s.data() + off_u, n, m));
    if (with_transition && opts.jacobi)
      seg.transitions.push_back(Eigen::Map<const Mat>(s.data() + off_phi, q, q));
  };
  record(0.0, y, false);
  if (t_end == 0.0) return seg;

  const kernels::Table& kt = kernels::active();
  std::vector<double> k1(N), k2(N), k3(N), k4(N), k5(N), k6(N), k7(N), ys(N), ynew(N), err(N);
  f(y.data(), k1.data());
  double t = 0.0;
  double h = std::min(opts.max_step, 0.01);
  std::size_t sample_index = 1;
  auto sample_time = [&](std::size_t i) { return std::min(t_end, opts.sample_dt * static_cast<double>(i)); };

  while (true) {
    if (seg.steps + seg.rejected >= opts.max_steps) throw IntegrationError("step budget exhausted");
    const double target = sample_time(sample_index);
    const bool clipped = t + h >= target - 1e-14 * std::max(1.0, std::abs(target));
    const double hs = clipped ? target - t : h;
    if (!(hs > 0.0)) throw IntegrationError("non-positive step");

    {
      const double c[] = {a21};
      const double* st[] = {k1.data()};
      kt.lincomb(ys.data(), y.data(), hs, c, st, 1, N);
      f(ys.data(), k2.data());
    }
    {
      const double c[] = {a31, a32};
      const double* st[] = {k1.data(), k2.data()};
      kt.lincomb(ys.data(), y.data(), hs, c, st, 2, N);
      f(ys.data(), k3.data());
    }
    {
      const double c[] = {a41, a42, a43};
      const double* st[] = {k1.data(), k2.data(), k3.data()};
      kt.lincomb(ys.data(), y.data(), hs, c, st, 3, N);
      f(ys.data(), k4.data());
    }
    {
      const double c[] = {a51, a52, a53, a54};
      const double* st[] = {k1.data(), k2.data(), k3.data(), k4.data()};
      kt.lincomb(ys.data(), y.data(), hs, c, st, 4, N);
      f(ys.data(), k5.data());
    }
    {
      const double c[] = {a61, a62, a63, a64, a65};
      const double* st[] = {k1.data(), k2.data(), k3.data(), k4.data(), k5.data()};
      kt.lincomb(ys.data(), y.data(), hs, c, st, 5, N);
      f(ys.data(), k6.data());
    }
    {
      const double c[] = {b1, b3, b4, b5, b6};
      const double* st[] = {k1.data(), k3.data(), k4.data(), k5.data(), k6.data()};
      kt.lincomb(ynew.data(), y.data(), hs, c, st, 5, N);
      f(ynew.data(), k7.data());
    }
    {
      const double c[] = {e1, e3, e4, e5, e6, e7};
      const double* st[] = {k1.data(), k3.data(), k4.data(), k5.data(), k6.data(), k7.data()};
      std::fill(err.begin(), err.end(), 0.0);
      kt.lincomb(err.data(), err.data(), hs, c, st, 6, N);
    }
    const double en = std::sqrt(kt.scaled_sq_norm(err.data(), y.data(), ynew.data(), opts.tol,
                                                  opts.tol, N) / static_cast<double>(N));
    if (!std::isfinite(en)) throw IntegrationError("non-finite error estimate");
    const double fac = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 5.0;

    if (en > 1.0) {
      ++seg.rejected;
      h = hs * std::max(0.2, fac);
      if (h < 1e-14) throw IntegrationError("step size underflow");
      continue;
    }
    ++seg.steps;

    if (exit_value(ynew.data(), n, w) >= 0.0) {
      // Dense output on [t, t + hs]; bisect the exit condition.
      std::vector<double> r2(N), r3(N), r4(N), r5(N);
      for (std::size_t i = 0; i < N; ++i) {
        const double dy = ynew[i] - y[i];
        const double bspl = hs * k1[i] - dy;
        r2[i] = dy;
        r3[i] = bspl;
        r4[i] = dy - hs * k7[i] - bspl;
        r5[i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      auto interp = [&](double th, std::size_t i) {
        const double t1 = 1.0 - th;
        return y[i] + th * (r2[i] + t1 * (r3[i] + th * (r4[i] + t1 * r5[i])));
      };
      double lo = 0.0, hi = 1.0;
      std::vector<double> probe(static_cast<std::size_t>(n));
      while ((hi - lo) * hs > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        for (int i = 0; i < n; ++i) probe[i] = interp(mid, static_cast<std::size_t>(i));
        (exit_value(probe.data(), n, w) >= 0.0 ? hi : lo) = mid;
      }
      std::vector<double> yexit(N);
      for (std::size_t i = 0; i < N; ++i) yexit[i] = interp(lo, i);
      const double texit = t + lo * hs;
      record(texit, yexit, true);
      ExitEvent ev;
      ev.time = texit;
      ev.point = seg.points.back();
      seg.exit = ev;
      return seg;
    }

    t = clipped ? target : t + hs;
    y.swap(ynew);
    k1.swap(k7);
    if (!clipped) h = hs * std::min(5.0, std::max(0.2, fac));
    else h = std::max(h, hs * std::min(5.0, std::max(0.2, fac)));
    h = std::min(h, opts.max_step);

    if (clipped) {
      record(t, y, true);
      if (t >= t_end) return seg;
      ++sample_index;
      if (opts.jacobi) {
        reset_phi(y);
        f(y.data(), k1.data());
      }
    }
  }
}

const std::vector<Mat>& parallel_frame(const MetricChart& /*chart*/, const OrbitSegment& segment) {
  return segment.frames;
}

Mat OrbitSegment::transition_to(std::size_t i) const {
  if (transitions.empty()) throw ParameterError("segment carries no Jacobi transitions");
  const Eigen::Index q = transitions.front().rows();
  Mat p = Mat::Identity(q, q);
  for (std::size_t k = 0; k < i; ++k) p = transitions[k] * p;
  return p;
}

JacobiState propagate_jacobi(const OrbitSegment& segment, const JacobiState& s) {
  return JacobiState::from_stacked(segment.transition_to(segment.transitions.size()) * s.stacked());
}

std::vector<JacobiState> propagate_jacobi_samples(const OrbitSegment& segment,
                                                  const JacobiState& s) {
  std::vector<JacobiState> out{s};
  Vec cur = s.stacked();
  for (const Mat& t : segment.transitions) {
    cur = t * cur;
    out.push_back(JacobiState::from_stacked(cur));
  }
  return out;
}

double symplectic_pairing(const JacobiState& a, const JacobiState& b) {
  return a.xi.dot(b.eta) - a.eta.dot(b.xi);
}

namespace {
Mat canonical_j(Eigen::Index q) {
  const Eigen::Index m = q / 2;
  Mat j = Mat::Zero(q, q);
  j.topRightCorner(m, m) = Mat::Identity(m, m);
  j.bottomLeftCorner(m, m) = -Mat::Identity(m, m);
  return j;
}
}  // namespace

double symplectic_defect(const Mat& phi) {
  const Mat j = canonical_j(phi.rows());
  return (phi.transpose() * j * phi - j).cwiseAbs().maxCoeff();
}

Mat symplectic_inverse(const Mat& phi) {
  const Mat j = canonical_j(phi.rows());
  return -j * phi.transpose() * j;
}

PhasePoint reversed(const PhasePoint& p) { return {p.position, -p.velocity}; }

JacobiState reversed(const JacobiState& s) { return {s.xi, -s.eta}; }

}  // namespace geoflow
