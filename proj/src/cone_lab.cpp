#include "geoflow/cone_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geoflow/error.hpp"
#include "geoflow/model_spaces.hpp"
#include "geoflow/numerics.hpp"
#include "geoflow/parallel.hpp"

namespace geoflow {

void ConeSpec::validate(int m) const {
  if (!(opening > 1.0 && opening < 2.0)) throw ParameterError("cone opening must lie in (1, 2)");
  if (a_block.empty()) throw ParameterError("cone A-block is empty");
  std::vector<bool> seen(static_cast<std::size_t>(m), false);
  for (int i : a_block) {
    if (i < 0 || i >= m || seen[i]) throw ParameterError("cone A-block index out of range or repeated");
    seen[i] = true;
  }
}

Mat ConeSpec::projector(int m) const {
  Mat p = Mat::Zero(m, m);
  for (int i : a_block) p(i, i) = 1.0;
  return p;
}

ConeSpec make_cone(int r, double opening, ConeSide side) {
  ConeSpec s;
  for (int i = 0; i < r; ++i) s.a_block.push_back(i);
  s.opening = opening;
  s.side = side;
  return s;
}

double theta(const JacobiState& s, const Mat& projector, ConeSide side) {
  const double den = s.xi.squaredNorm() + s.eta.squaredNorm();
  if (!(den > 0.0)) throw DomainError("theta of the zero state");
  const Vec u = side == ConeSide::unstable ? Vec(s.xi + s.eta) : Vec(s.xi - s.eta);
  return (projector * u).squaredNorm() / den;
}

double theta(const JacobiState& s, const ConeSpec& spec) {
  const int m = static_cast<int>(s.xi.size());
  spec.validate(m);
  return theta(s, spec.projector(m), spec.side);
}

double theta_derivative_symmetric(const JacobiState& s, const ConeSpec& spec) {
  const int m = static_cast<int>(s.xi.size());
  spec.validate(m);
  const double norm = s.xi.squaredNorm() + s.eta.squaredNorm();
  if (std::abs(norm - 1.0) > 1e-9) throw NormalizationError("closed form needs a unit state");
  std::vector<bool> in_a(static_cast<std::size_t>(m), false);
  for (int i : spec.a_block) in_a[i] = true;
  const double sg = spec.side == ConeSide::unstable ? 1.0 : -1.0;
  double lead = 0.0, a_term = 0.0, b_term = 0.0, eta_b = 0.0;
  for (int i = 0; i < m; ++i) {
    const double x = s.xi[i], e = s.eta[i];
    if (in_a[i]) {
      lead += (x + sg * e) * (x + sg * e);
      a_term += (x - sg * e) * (x - sg * e);
    } else {
      b_term += (x - sg * 0.625 * e) * (x - sg * 0.625 * e);
      eta_b += e * e;
    }
  }
  return sg * 2.0 * lead * (a_term + b_term + (39.0 / 64.0) * eta_b);
}

ProjectorFn block_projector(const ConeSpec& spec) {
  return [spec](const PhasePoint&, const Mat& frame) {
    return spec.projector(static_cast<int>(frame.cols()));
  };
}

ProjectorFn spectral_projector(const MetricChart& base, int r) {
  return [base, r](const PhasePoint& p, const Mat& frame) {
    const MetricJet jet = base.jet_unchecked(p.position, 2);
    const AlongGeodesic ag = along_geodesic(jet, p.velocity, &frame);
    Eigen::SelfAdjointEigenSolver<Mat> es(ag.jacobi);
    const Mat qa = es.eigenvectors().leftCols(r);
    return Mat(qa * qa.transpose());
  };
}

double theta_derivative_numeric(const MetricChart& chart, const PhasePoint& start, const Mat& frame,
                                const JacobiState& s, ConeSide side, const ProjectorFn& proj,
                                double h, double tol) {
  if (!(h > 0.0)) throw ParameterError("difference step must be positive");
  IntegrationOptions o;
  o.tol = tol;
  o.sample_dt = h;
  o.max_step = h;
  o.initial_frame = frame;
  const OrbitSegment fwd = integrate_geodesic(chart, start, h, o);
  const OrbitSegment bwd = integrate_geodesic(chart, reversed(start), h, o);
  if (fwd.exit || bwd.exit) throw DomainError("difference stencil leaves the chart");
  const JacobiState sp = propagate_jacobi(fwd, s);
  const JacobiState sm = reversed(propagate_jacobi(bwd, reversed(s)));
  const double tp = theta(sp, proj(fwd.points.back(), fwd.frames.back()), side);
  const double tm = theta(sm, proj(bwd.points.back(), bwd.frames.back()), side);
  return (tp - tm) / (2.0 * h);
}

double theta_derivative_numeric(const MetricChart& chart, const PhasePoint& start, const Mat& frame,
                                const JacobiState& s, const ConeSpec& spec, double h, double tol) {
  spec.validate(static_cast<int>(s.xi.size()));
  return theta_derivative_numeric(chart, start, frame, s, spec.side, block_projector(spec), h, tol);
}

std::mt19937_64 task_rng(std::uint64_t seed, std::uint64_t task) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(task), static_cast<std::uint32_t>(task >> 32),
                    0x67656fu};
  return std::mt19937_64(seq);
}

Vec random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec v(dim);
  double nrm = 0.0;
  while (!(nrm > 1e-12)) {
    for (int i = 0; i < dim; ++i) v[i] = nd(rng);
    nrm = v.norm();
  }
  return v / nrm;
}

namespace {

JacobiState boundary_state_with(std::mt19937_64& rng, int m, const ConeSpec& spec, double c) {
  const int r = static_cast<int>(spec.a_block.size());
  std::vector<bool> in_a(static_cast<std::size_t>(m), false);
  for (int i : spec.a_block) in_a[i] = true;
  const Vec p = random_unit(rng, r) * std::sqrt(c / 2.0);
  const Vec rest = random_unit(rng, r + 2 * (m - r)) * std::sqrt(1.0 - c / 2.0);
  JacobiState s{Vec::Zero(m), Vec::Zero(m)};
  const double k = 1.0 / std::sqrt(2.0);
  const double sg = spec.side == ConeSide::unstable ? 1.0 : -1.0;
  int ia = 0, ib = 0;
  for (int i = 0; i < m; ++i) {
    if (in_a[i]) {
      // p = (xi + sg eta)/sqrt2, q = (xi - sg eta)/sqrt2
      const double q = rest[ia];
      s.xi[i] = k * (p[ia] + q);
      s.eta[i] = sg * k * (p[ia] - q);
      ++ia;
    } else {
      s.xi[i] = rest[r + ib];
      s.eta[i] = rest[r + (m - r) + ib];
      ++ib;
    }
  }
  return s;
}

}  // namespace

JacobiState sample_boundary_state(std::mt19937_64& rng, int m, const ConeSpec& spec) {
  spec.validate(m);
  return boundary_state_with(rng, m, spec, spec.opening);
}

JacobiState sample_cone_state(std::mt19937_64& rng, int m, const ConeSpec& spec) {
  spec.validate(m);
  std::uniform_real_distribution<double> ud(spec.opening, 2.0);
  return boundary_state_with(rng, m, spec, ud(rng));
}

JacobiCocycle cocycle_from_segment(const OrbitSegment& seg, const ProjectorFn& proj) {
  if (seg.transitions.size() + 1 != seg.times.size())
    throw ParameterError("segment has no Jacobi transitions");
  JacobiCocycle c;
  c.times = seg.times;
  c.transitions = seg.transitions;
  for (std::size_t i = 0; i < seg.points.size(); ++i) c.projectors.push_back(proj(seg.points[i], seg.frames[i]));
  return c;
}

JacobiCocycle constant_cocycle(const Mat& k, const Mat& projector, double length, double dt) {
  if (!(length > 0.0) || !(dt > 0.0)) throw ParameterError("cocycle length and step must be positive");
  JacobiCocycle c;
  c.times.push_back(0.0);
  c.projectors.push_back(projector);
  const Mat full = jacobi_transition(k, dt);
  for (std::size_t i = 1;; ++i) {
    const double t = std::min(length, dt * static_cast<double>(i));
    const double step = t - c.times.back();
    c.transitions.push_back(std::abs(step - dt) < 1e-14 ? full : jacobi_transition(k, step));
    c.times.push_back(t);
    c.projectors.push_back(projector);
    if (t >= length) break;
  }
  return c;
}

void append_cocycle(JacobiCocycle& a, const JacobiCocycle& b) {
  if (a.times.empty()) {
    a = b;
    return;
  }
  if (a.m() != b.m()) throw ParameterError("cocycle frame dimensions differ");
  const double shift = a.times.back() - b.times.front();
  for (std::size_t i = 1; i < b.times.size(); ++i) {
    a.times.push_back(b.times[i] + shift);
    a.projectors.push_back(b.projectors[i]);
  }
  a.transitions.insert(a.transitions.end(), b.transitions.begin(), b.transitions.end());
}

void rotate_cocycle_end(JacobiCocycle& a, const Mat& q) {
  const Eigen::Index m = q.rows();
  Mat big = Mat::Zero(2 * m, 2 * m);
  big.topLeftCorner(m, m) = q;
  big.bottomRightCorner(m, m) = q;
  if (a.transitions.empty()) throw ParameterError("cannot rotate an empty cocycle");
  a.transitions.back() = big.transpose() * a.transitions.back();
  a.projectors.back() = q.transpose() * a.projectors.back() * q;
}

JacobiCocycle reverse_cocycle(const JacobiCocycle& c) {
  JacobiCocycle r;
  const double end = c.times.back(), start = c.times.front();
  const int m = c.m();
  Vec sdiag(2 * m);
  sdiag << Vec::Ones(m), -Vec::Ones(m);
  for (std::size_t i = c.times.size(); i-- > 0;) {
    r.times.push_back(start + (end - c.times[i]));
    r.projectors.push_back(c.projectors[i]);
  }
  for (std::size_t i = c.transitions.size(); i-- > 0;)
    r.transitions.push_back(sdiag.asDiagonal() * symplectic_inverse(c.transitions[i]) * sdiag.asDiagonal());
  return r;
}

Mat cocycle_transition(const JacobiCocycle& c) {
  const int q = 2 * c.m();
  Mat p = Mat::Identity(q, q);
  for (const Mat& t : c.transitions) p = t * p;
  return p;
}

namespace {

GrowthFit fit_growth(const JacobiCocycle& c, const JacobiState& s,
                     const std::function<double(const Vec&, std::size_t)>& measure) {
  Vec z = s.stacked();
  double logscale = 0.0;
  std::vector<double> t, y;
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    if (i > 0) z = c.transitions[i - 1] * z;
    const double nz = z.norm();
    if (nz > 1e100 || (nz < 1e-100 && nz > 0.0)) {
      z /= nz;
      logscale += std::log(nz);
    }
    const double v = measure(z, i);
    if (!(v > 0.0)) continue;
    t.push_back(c.times[i]);
    y.push_back(std::log(v) + logscale);
  }
  if (t.size() < 3) throw ParameterError("degenerate growth fit window");
  const LinearFit f = linear_fit(t, y);
  return {f.slope, f.r_squared};
}

}  // namespace

GrowthFit strong_growth_rate(const JacobiCocycle& c, const JacobiState& s, ConeSide side) {
  const int m = c.m();
  const double sg = side == ConeSide::unstable ? 1.0 : -1.0;
  return fit_growth(c, s, [&](const Vec& z, std::size_t i) {
    return (c.projectors[i] * (z.head(m) + sg * z.tail(m))).norm();
  });
}

GrowthFit norm_growth_rate(const JacobiCocycle& c, const JacobiState& s) {
  return fit_growth(c, s, [](const Vec& z, std::size_t) { return z.norm(); });
}

std::vector<double> lyapunov_spectrum(const JacobiCocycle& c) {
  const int q = 2 * c.m();
  Mat basis = Mat::Identity(q, q);
  std::vector<double> sums(static_cast<std::size_t>(q), 0.0);
  for (const Mat& t : c.transitions) {
    Eigen::HouseholderQR<Mat> qr(t * basis);
    const Mat rr = qr.matrixQR().triangularView<Eigen::Upper>();
    Mat qq = qr.householderQ();
    for (int i = 0; i < q; ++i) {
      const double d = rr(i, i);
      sums[i] += std::log(std::abs(d));
      if (d < 0.0) qq.col(i) = -qq.col(i);
    }
    basis = qq;
  }
  const double dur = c.duration();
  for (double& s : sums) s /= dur;
  std::sort(sums.begin(), sums.end(), std::greater<>());
  return sums;
}

namespace {

// Boundary state for a general projector: sample in the eigenbasis of the projector.
JacobiState boundary_state_for(std::mt19937_64& rng, const Mat& proj, int r, double c, ConeSide side) {
  const int m = static_cast<int>(proj.rows());
  Eigen::SelfAdjointEigenSolver<Mat> es(proj);
  // eigenvalues ascending: the A-range is the last r columns; reorder A first
  Mat basis(m, m);
  basis.leftCols(r) = es.eigenvectors().rightCols(r);
  basis.rightCols(m - r) = es.eigenvectors().leftCols(m - r);
  ConeSpec spec = make_cone(r, c, side);
  JacobiState s = boundary_state_with(rng, m, spec, c);
  return {basis * s.xi, basis * s.eta};
}

struct OrbitResult {
  std::vector<double> spectrum;
  std::vector<double> unstable_rates;
  std::vector<double> stable_rates;
  bool invariance = true;
  double min_dtheta = std::numeric_limits<double>::infinity();
  double min_gain = std::numeric_limits<double>::infinity();
};

void check_windows(const JacobiCocycle& c, const SplittingOptions& opts, std::mt19937_64& rng,
                   OrbitResult& out) {
  const double end = c.times.back();
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i + 1 < c.times.size(); ++i)
    if (c.times[i] + opts.window_time <= end + 1e-9) starts.push_back(i);
  if (starts.empty()) throw ParameterError("orbit shorter than the invariance window");
  std::vector<std::size_t> chosen;
  const std::size_t nw = std::min<std::size_t>(starts.size(), static_cast<std::size_t>(opts.max_windows));
  for (std::size_t k = 0; k < nw; ++k) chosen.push_back(starts[(k * (starts.size() - 1)) / std::max<std::size_t>(1, nw - 1)]);
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  for (std::size_t i0 : chosen) {
    std::size_t i1 = i0;
    while (i1 + 1 < c.times.size() && c.times[i1] < c.times[i0] + opts.window_time - 1e-9) ++i1;
    for (double op : opts.openings) {
      for (int k = 0; k < opts.boundary_samples; ++k) {
        const JacobiState s0 = boundary_state_for(rng, c.projectors[i0], opts.r, op, ConeSide::unstable);
        const double th0 = theta(s0, c.projectors[i0], ConeSide::unstable);
        Vec z = s0.stacked();
        for (std::size_t i = i0; i < i1; ++i) {
          z = c.transitions[i] * z;
          if (i == i0) {
            const double th1 = theta(JacobiState::from_stacked(z), c.projectors[i + 1], ConeSide::unstable);
            out.min_dtheta = std::min(out.min_dtheta, (th1 - th0) / (c.times[i + 1] - c.times[i]));
          }
        }
        const double gain = theta(JacobiState::from_stacked(z), c.projectors[i1], ConeSide::unstable) - th0;
        out.min_gain = std::min(out.min_gain, gain);
        if (!(gain > 0.0)) out.invariance = false;
      }
    }
  }
}

}  // namespace

JacobiState sample_boundary_state(std::mt19937_64& rng, const Mat& projector, int r, double c,
                                  ConeSide side) {
  if (!(c > 1.0 && c < 2.0)) throw ParameterError("cone opening must lie in (1, 2)");
  if (r < 1 || r > projector.rows()) throw ParameterError("projector rank out of range");
  return boundary_state_for(rng, projector, r, c, side);
}

SplittingVerdict detect_splitting(const std::vector<JacobiCocycle>& orbits,
                                  const SplittingOptions& opts) {
  if (orbits.empty()) throw ParameterError("no orbits to analyze");
  const int m = orbits.front().m();
  for (const auto& o : orbits) {
    if (o.m() != m || o.transitions.size() + 1 != o.times.size() || o.projectors.size() != o.times.size())
      throw ConfigError("inconsistent cocycle dimensions");
  }
  if (opts.r < 1 || opts.r > m) throw ConfigError("strong dimension out of range");

  std::vector<OrbitResult> res(orbits.size());
  parallel_for(orbits.size(), opts.jobs, [&](std::size_t o) {
    const JacobiCocycle& c = orbits[o];
    const JacobiCocycle rev = reverse_cocycle(c);
    OrbitResult& r = res[o];
    r.spectrum = lyapunov_spectrum(c);
    // Both sides draw from the same stream so that reversing the input swaps them exactly.
    const ConeSpec cone = make_cone(opts.r, opts.rate_opening, ConeSide::unstable);
    std::uniform_real_distribution<double> opening(cone.opening, 2.0);
    std::mt19937_64 urng = task_rng(opts.seed, 1000 * o + 1);
    std::mt19937_64 srng = task_rng(opts.seed, 1000 * o + 1);
    for (int k = 0; k < opts.rate_samples; ++k) {
      const double cu = opening(urng);
      const JacobiState s = boundary_state_for(urng, c.projectors.front(), opts.r, cu, ConeSide::unstable);
      r.unstable_rates.push_back(strong_growth_rate(c, s, ConeSide::unstable).rate);
      const double cs = opening(srng);
      const JacobiState sr = boundary_state_for(srng, rev.projectors.front(), opts.r, cs, ConeSide::unstable);
      r.stable_rates.push_back(-strong_growth_rate(rev, sr, ConeSide::unstable).rate);
    }
    if (opts.check_invariance) {
      std::mt19937_64 wrng = task_rng(opts.seed, 1000 * o + 2);
      check_windows(c, opts, wrng, r);
      std::mt19937_64 wrev = task_rng(opts.seed, 1000 * o + 2);
      check_windows(rev, opts, wrev, r);
    }
  });

  SplittingVerdict v;
  v.min_dtheta = std::numeric_limits<double>::infinity();
  v.min_theta_gain = std::numeric_limits<double>::infinity();
  v.min_gap = std::numeric_limits<double>::infinity();
  v.min_central_abs = std::numeric_limits<double>::infinity();
  double max_central_top = -std::numeric_limits<double>::infinity();
  const int q = 2 * m, r = opts.r;
  for (const OrbitResult& o : res) {
    v.invariance_pass = v.invariance_pass && o.invariance;
    v.min_dtheta = std::min(v.min_dtheta, o.min_dtheta);
    v.min_theta_gain = std::min(v.min_theta_gain, o.min_gain);
    v.unstable_rates.insert(v.unstable_rates.end(), o.unstable_rates.begin(), o.unstable_rates.end());
    v.stable_rates.insert(v.stable_rates.end(), o.stable_rates.begin(), o.stable_rates.end());
    v.spectra.push_back(o.spectrum);
    const auto& s = o.spectrum;
    v.min_gap = std::min({v.min_gap, s[r - 1] - s[r], s[q - r - 1] - s[q - r]});
    for (int i = r; i < q - r; ++i) {
      v.min_central_abs = std::min(v.min_central_abs, std::abs(s[i]));
      v.max_central = std::max(v.max_central, std::abs(s[i]));
    }
    if (q - r > r) max_central_top = std::max(max_central_top, s[r]);
  }
  if (!opts.check_invariance) {
    v.min_dtheta = std::numeric_limits<double>::quiet_NaN();
    v.min_theta_gain = std::numeric_limits<double>::quiet_NaN();
  }
  const bool dominated = v.min_gap > opts.gap_tol && (!opts.check_invariance || v.invariance_pass);
  if (!dominated) {
    v.label = "no-domination";
  } else {
    v.label = v.min_central_abs < opts.central_tol ? "partially-hyperbolic" : "anosov-like";
    const double min_unstable = *std::min_element(v.unstable_rates.begin(), v.unstable_rates.end());
    v.rates_consistent = min_unstable >= max_central_top - 1e-9;
  }
  return v;
}

}  // namespace geoflow
