#include "geoflow/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <cstdio>

#include "geoflow/cone_lab.hpp"
#include "geoflow/deformation.hpp"
#include "geoflow/error.hpp"
#include "geoflow/flow.hpp"
#include "geoflow/model_spaces.hpp"
#include "geoflow/numerics.hpp"
#include "geoflow/parallel.hpp"

namespace geoflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// |dTheta/dt| <= 2 sqrt(2) sqrt(1 + k^2) + 2 |I - K| with |K| <= 1, rounded up
constexpr double kVariationBound = 8.0;

// Task-id blocks keep the random streams of different scenario parts apart.
constexpr std::uint64_t kStreamOracle = 1'000'000;
constexpr std::uint64_t kStreamBoundary = 2'000'000;
constexpr std::uint64_t kStreamStarts = 3'000'000;
constexpr std::uint64_t kStreamStates = 4'000'000;
constexpr std::uint64_t kStreamLarge = 5'000'000;

struct Context {
  const ScenarioConfig& cfg;
  int jobs;
  int n;
  int r;
  int m;
  SymmetricModel model;
  MetricChart base;

  Context(const ScenarioConfig& c, int j)
      : cfg(c),
        jobs(j),
        n(c.model_dimension),
        r(c.model_a_block),
        m(c.model_dimension - 1),
        model(c.model_dimension, c.model_a_block),
        base(symmetric_chart(model, c.period_time, c.epsilon_chart)) {}

  DeformationSpec spec(double eps) const {
    DeformationSpec s;
    s.n = n;
    s.r = r;
    s.epsilon = eps;
    s.tau = cfg.tau_ramp;
    s.amplitude = cfg.deformation_amplitude;
    return s;
  }

  MetricChart deformed(double eps) const { return deformed_chart(base, Deformation(spec(eps))); }

  IntegrationOptions options() const {
    IntegrationOptions o;
    o.tol = cfg.tolerance_integration;
    return o;
  }

  ConeSpec cone(double c, ConeSide side = ConeSide::unstable) const { return make_cone(r, c, side); }

  Mat block_projector_matrix() const { return make_cone(r, 1.5).projector(m); }
};

PhasePoint axis_start(int n, double t = 0.0) {
  PhasePoint p;
  p.position.t = t;
  p.position.x = Vec::Zero(n - 1);
  p.velocity = Vec::Zero(n);
  p.velocity[0] = 1.0;
  return p;
}

Mat axis_frame(int n) { return Mat::Identity(n, n).rightCols(n - 1); }

template <class F>
std::vector<double> parallel_values(std::size_t count, int jobs, F&& f) {
  std::vector<double> out(count, 0.0);
  parallel_for(count, jobs, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

double min_of(const std::vector<double>& v) {
  double m = kInf;
  for (double x : v) m = std::min(m, x);
  return m;
}

double max_of(const std::vector<double>& v) {
  double m = -kInf;
  for (double x : v) m = std::max(m, x);
  return m;
}

std::string tag(const std::string& base, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return base + "[" + buf + "]";
}

// Unit velocity with the given transverse coordinate components; solves for the axial one.
Vec velocity_with_transverse(const MetricChart& chart, const ChartPoint& p, const Vec& w) {
  const Mat g = chart.metric(p);
  const int n = chart.dim();
  // g00 v0^2 + 2 v0 (g0w . w) + w.gww.w = 1
  const double a = g(0, 0);
  const double b = 2.0 * g.block(0, 1, 1, n - 1).row(0).dot(w);
  const double c = w.dot(g.bottomRightCorner(n - 1, n - 1) * w) - 1.0;
  const double disc = b * b - 4.0 * a * c;
  if (!(c < 0.0) || !(disc > 0.0)) throw ParameterError("transverse velocity too large for a unit vector");
  Vec v(n);
  v[0] = (-b + std::sqrt(disc)) / (2.0 * a);
  v.tail(n - 1) = w;
  return v;
}

// Start inside the tube of half-width eps. Transversal starts have one component of
// magnitude theta; parallel ones keep every transverse component below theta.
// With core_half set, half of the B-coordinates are placed in the eps^2 core.
PhasePoint tube_start(std::mt19937_64& rng, const Context& ctx, const MetricChart& chart, double eps,
                      double theta, bool transversal, bool core_half) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> ut(0.0, ctx.cfg.period_time);
  PhasePoint p;
  p.position.t = ut(rng);
  p.position.x = Vec(ctx.m);
  for (int i = 0; i < ctx.m; ++i) p.position.x[i] = 0.9 * eps * u(rng);
  if (core_half) {
    for (int k = ctx.r; k < ctx.m; ++k)
      if ((k - ctx.r) % 2 == 0) p.position.x[k] = 0.9 * eps * eps * u(rng);
  }
  Vec w(ctx.m);
  if (transversal) {
    for (int i = 0; i < ctx.m; ++i) w[i] = 0.5 * theta * u(rng);
    std::uniform_int_distribution<int> pick(0, ctx.m - 1);
    const int j = pick(rng);
    w[j] = u(rng) < 0.0 ? -theta : theta;
  } else {
    for (int i = 0; i < ctx.m; ++i) w[i] = 0.999 * theta * u(rng);
  }
  p.velocity = velocity_with_transverse(chart, p.position, w);
  return p;
}

// ---------------------------------------------------------------- symmetric-cones
ScenarioReport symmetric_cones(const Context& ctx) {
  ScenarioReport rep;
  const auto& cfg = ctx.cfg;
  const double h = cfg.difference_step_time;
  const ConeSpec spec = ctx.cone(cfg.cone_opening);
  const Mat frame = axis_frame(ctx.n);
  const int q = 2 * ctx.m;

  // numeric vs closed-form variation on random unit states at random axis points
  const auto diffs = parallel_values(static_cast<std::size_t>(cfg.oracle_samples), ctx.jobs, [&](std::size_t i) {
    auto rng = task_rng(cfg.seed, kStreamOracle + i);
    const JacobiState s = JacobiState::from_stacked(random_unit(rng, q));
    std::uniform_real_distribution<double> ut(0.0, cfg.period_time);
    const PhasePoint start = axis_start(ctx.n, ut(rng));
    const double num = theta_derivative_numeric(ctx.base, start, frame, s, spec, h);
    return std::abs(num - theta_derivative_symmetric(s, spec));
  });
  rep.check_below("oracle_max_abs_difference", max_of(diffs), 1e-5, "oracle");

  // boundary minima per opening
  auto& bt = rep.table("boundary_minima", {"opening", "min_dtheta_numeric", "min_dtheta_closed", "closed_bound"});
  for (std::size_t ci = 0; ci < cfg.cone_opening_grid.size(); ++ci) {
    const double c = cfg.cone_opening_grid[ci];
    const ConeSpec sc = ctx.cone(c);
    std::vector<double> num(static_cast<std::size_t>(cfg.boundary_samples)), closed(num.size());
    parallel_for(num.size(), ctx.jobs, [&](std::size_t i) {
      auto rng = task_rng(cfg.seed, kStreamBoundary + 10'000 * ci + i);
      const JacobiState s = sample_boundary_state(rng, ctx.m, sc);
      num[i] = theta_derivative_numeric(ctx.base, axis_start(ctx.n), frame, s, sc, h);
      closed[i] = theta_derivative_symmetric(s, sc);
    });
    const double bound = 0.375 * c * (2.0 - c);
    rep.check_above(tag("boundary_min_dtheta_numeric", c), min_of(num), 0.0, "theory");
    rep.check_at_least(tag("boundary_min_dtheta_closed_vs_bound", c), min_of(closed), bound - 1e-12, "exact");
    bt.rows.push_back({c, min_of(num), min_of(closed), bound});
  }

  // monotonicity of Theta along the axis orbit
  IntegrationOptions o = ctx.options();
  const OrbitSegment seg = integrate_geodesic(ctx.base, axis_start(ctx.n), cfg.monotone_time, o);
  const JacobiCocycle coc = cocycle_from_segment(seg, block_projector(spec));
  auto& mt = rep.table("theta_series", {"opening", "sample", "time", "theta"});
  double worst_step = kInf;
  for (std::size_t ci = 0; ci < cfg.cone_opening_grid.size(); ++ci) {
    const double c = cfg.cone_opening_grid[ci];
    const ConeSpec sc = ctx.cone(c);
    std::vector<double> steps(static_cast<std::size_t>(cfg.boundary_samples));
    parallel_for(steps.size(), ctx.jobs, [&](std::size_t i) {
      auto rng = task_rng(cfg.seed, kStreamBoundary + 10'000 * ci + i);
      const JacobiState s = sample_boundary_state(rng, ctx.m, sc);
      Vec z = s.stacked();
      double prev = theta(s, sc), mn = kInf;
      for (const Mat& t : coc.transitions) {
        z = t * z;
        const double th = theta(JacobiState::from_stacked(z), sc);
        mn = std::min(mn, th - prev);
        prev = th;
      }
      steps[i] = mn;
    });
    worst_step = std::min(worst_step, min_of(steps));
    auto rng = task_rng(cfg.seed, kStreamBoundary + 10'000 * ci);
    const JacobiState s = sample_boundary_state(rng, ctx.m, sc);
    Vec z = s.stacked();
    for (std::size_t i = 0; i < coc.times.size(); ++i) {
      if (i > 0) z = coc.transitions[i - 1] * z;
      if (i % 10 == 0) mt.rows.push_back({c, 0LL, coc.times[i], theta(JacobiState::from_stacked(z), sc)});
    }
  }
  rep.check_at_least("theta_min_increment_along_orbit", worst_step, -1e-12, "theory");
  return rep;
}

// ---------------------------------------------------------------- eberlein-flat
ScenarioReport eberlein_flat(const Context& ctx) {
  ScenarioReport rep;
  const auto& cfg = ctx.cfg;
  const double eps = cfg.epsilon_tube;
  const MetricChart gs = ctx.deformed(eps);
  const Mat frame = axis_frame(ctx.n);
  Vec e0 = Vec::Zero(ctx.n);
  e0[0] = 1.0;
  const Mat kmodel = ctx.model.axis_jacobi_operator();

  double base_err = 0.0, weak = 0.0, strong = 0.0, gamma = 0.0, jet = 0.0, offdiag = 0.0;
  auto& at = rep.table("axis_curvature", {"t", "index", "R0k0k_base", "R0k0k_deformed"});
  for (int s = 0; s < cfg.axis_samples; ++s) {
    const double t = cfg.period_time * s / cfg.axis_samples;
    const PhasePoint p = axis_start(ctx.n, t);
    const Mat kb = curvature_operator_matrix(ctx.base, p.position, e0, frame);
    base_err = std::max(base_err, (kb - kmodel).cwiseAbs().maxCoeff());
    const Mat kd = curvature_operator_matrix(gs, p.position, e0, frame);
    for (int k = 0; k < ctx.m; ++k) {
      if (k < ctx.r) strong = std::max(strong, std::abs(kd(k, k) + 1.0));
      else weak = std::max(weak, std::abs(kd(k, k)));
      for (int l = 0; l < ctx.m; ++l)
        if (l != k) offdiag = std::max(offdiag, std::abs(kd(k, l)));
      at.rows.push_back({t, static_cast<long long>(k + 1), kb(k, k), kd(k, k)});
    }
    const CurvatureData cd = christoffel(gs, p.position);
    for (double v : cd.christoffel) gamma = std::max(gamma, std::abs(v));
    const MetricJet j = gs.jet(p.position, 1);
    jet = std::max(jet, (j.g - Mat::Identity(ctx.n, ctx.n)).cwiseAbs().maxCoeff());
    for (double v : j.dg) jet = std::max(jet, std::abs(v));
  }
  rep.check_below("base_axis_operator_max_error", base_err, 1e-8, "theory");
  rep.check_below("deformed_weak_R0k0k_max_abs", weak, 1e-8, "theory");
  rep.check_near("deformed_strong_R0j0j_max_dev", strong, 0.0, 1e-8, "theory");
  rep.check_below("deformed_axis_offdiagonal_max_abs", offdiag, 1e-8, "theory");
  rep.check_below("deformed_axis_christoffel_max_abs", gamma, 1e-10, "theory");
  rep.check_below("deformed_axis_one_jet_deviation", jet, 1e-10, "theory");

  // off-axis deviation in the weak directions stays within (1 + delta) / 2
  auto& ot = rep.table("offaxis_deviation", {"index", "x_scaled", "delta_R0k0k"});
  double dev = 0.0;
  const int grid = 200;
  for (int k = ctx.r; k < ctx.m; ++k) {
    for (int i = 0; i <= grid; ++i) {
      ChartPoint p;
      p.t = 0.0;
      p.x = Vec::Zero(ctx.m);
      const double s = static_cast<double>(i) / grid;
      p.x[k] = 0.999 * eps * eps * s;
      const double d =
          curvature_tensor(gs, p).R(0, k + 1, 0, k + 1) - curvature_tensor(ctx.base, p).R(0, k + 1, 0, k + 1);
      dev = std::max(dev, std::abs(d));
      if (i % 10 == 0) ot.rows.push_back({static_cast<long long>(k + 1), s, d});
    }
  }
  rep.check_at_most("offaxis_weak_deviation_max", dev, 0.5 * (1.0 + cfg.delta_slack), "theory");
  return rep;
}

// ---------------------------------------------------------------- central-bundle
ScenarioReport central_bundle(const Context& ctx) {
  ScenarioReport rep;
  const auto& cfg = ctx.cfg;
  const MetricChart gs = ctx.deformed(cfg.epsilon_tube);
  const OrbitSegment seg = integrate_geodesic(gs, axis_start(ctx.n), cfg.t_end_time, ctx.options());
  rep.check_below("axis_orbit_transverse_drift", seg.points.back().position.x.cwiseAbs().maxCoeff(), 1e-12,
                  "theory");
  const JacobiCocycle coc = cocycle_from_segment(seg, block_projector(ctx.cone(cfg.cone_opening)));

  auto& st = rep.table("central_fields", {"index", "time", "xi_k", "eta_k", "norm"});
  double lin_err = 0.0, const_err = 0.0, slope_min = kInf, slope_max = -kInf, const_rate = 0.0;
  for (int k = ctx.r; k < ctx.m; ++k) {
    JacobiState s{Vec::Zero(ctx.m), Vec::Zero(ctx.m)};
    s.eta[k] = 1.0;
    const auto states = propagate_jacobi_samples(seg, s);
    std::vector<double> lt, ln;
    for (std::size_t i = 0; i < states.size(); ++i) {
      const double t = seg.times[i];
      JacobiState want{Vec::Zero(ctx.m), Vec::Zero(ctx.m)};
      want.xi[k] = t;
      want.eta[k] = 1.0;
      lin_err = std::max(lin_err, (states[i].stacked() - want.stacked()).norm() / want.stacked().norm());
      const double nrm = states[i].stacked().norm();
      if (t >= 0.5 * cfg.t_end_time - 1e-12) {
        lt.push_back(t);
        ln.push_back(nrm);
      }
      if (i % 10 == 0) st.rows.push_back({static_cast<long long>(k + 1), t, states[i].xi[k], states[i].eta[k], nrm});
    }
    const double slope = loglog_slope(lt, ln);
    slope_min = std::min(slope_min, slope);
    slope_max = std::max(slope_max, slope);

    JacobiState c{Vec::Zero(ctx.m), Vec::Zero(ctx.m)};
    c.xi[k] = 1.0;
    const auto cs = propagate_jacobi_samples(seg, c);
    for (const auto& x : cs) const_err = std::max(const_err, (x.stacked() - c.stacked()).norm());
    const_rate = std::max(const_rate, std::abs(norm_growth_rate(coc, c).rate));
  }
  rep.check_below("linear_field_max_relative_error", lin_err, 1e-6, "theory");
  rep.check_near("linear_field_loglog_slope_min", slope_min, 1.0, 0.05, "theory");
  rep.check_near("linear_field_loglog_slope_max", slope_max, 1.0, 0.05, "theory");
  rep.check_below("constant_field_max_deviation", const_err, 1e-6, "theory");
  rep.check_near("constant_field_norm_rate", const_rate, 0.0, 0.05, "theory");

  // strong directions keep growing like e^t
  double strong = 0.0;
  for (int j = 0; j < ctx.r; ++j) {
    JacobiState s{Vec::Zero(ctx.m), Vec::Zero(ctx.m)};
    s.xi[j] = s.eta[j] = 1.0;
    const JacobiState e = propagate_jacobi(seg, s);
    strong = std::max(strong, std::abs(e.xi[j] / std::exp(seg.end_time()) - 1.0));
  }
  rep.check_below("strong_field_relative_error", strong, 1e-6, "exact");
  return rep;
}

// ---------------------------------------------------------------- parallel-cones
struct VariationSample {
  double dtheta = 0.0;
  double theta = 0.0;
};

// dTheta/dt on the deformed chart at a tube start, for a boundary state of the
// base chart's spectral A-projector.
VariationSample boundary_variation(const Context& ctx, const MetricChart& chart, const PhasePoint& start,
                                   std::mt19937_64& rng, double c) {
  const Mat g = chart.metric(start.position);
  const Mat frame = orthonormal_complement(g, start.velocity);
  const ProjectorFn proj = spectral_projector(ctx.base, ctx.r);
  const Mat p0 = proj(start, frame);
  const JacobiState s = sample_boundary_state(rng, p0, ctx.r, c, ConeSide::unstable);
  VariationSample out;
  out.theta = theta(s, p0, ConeSide::unstable);
  out.dtheta = theta_derivative_numeric(chart, start, frame, s, ConeSide::unstable, proj,
                                        ctx.cfg.difference_step_time);
  return out;
}

ScenarioReport parallel_cones(const Context& ctx) {
  ScenarioReport rep;
  const auto& cfg = ctx.cfg;
  const double theta_par = cfg.theta_transversal;
  const double eps = cfg.epsilon_tube;
  const MetricChart gs = ctx.deformed(eps);
  const std::size_t count = static_cast<std::size_t>(cfg.orbit_count);
  const int per = cfg.orbit_boundary_samples;

  auto& pt = rep.table("parallel_variation", {"orbit", "opening", "min_dtheta"});
  double par_min = kInf;
  for (std::size_t ci = 0; ci < cfg.cone_opening_grid.size(); ++ci) {
    const double c = cfg.cone_opening_grid[ci];
    const auto mins = parallel_values(count, ctx.jobs, [&](std::size_t i) {
      auto rng = task_rng(cfg.seed, kStreamStarts + 1000 * ci + i);
      const PhasePoint start = tube_start(rng, ctx, gs, eps, theta_par, false, true);
      double mn = kInf;
      for (int k = 0; k < per; ++k) mn = std::min(mn, boundary_variation(ctx, gs, start, rng, c).dtheta);
      return mn;
    });
    for (std::size_t i = 0; i < count; ++i) pt.rows.push_back({static_cast<long long>(i), c, mins[i]});
    par_min = std::min(par_min, min_of(mins));
  }
  rep.check_above("parallel_min_dtheta", par_min, 0.0, "theory");

  // transversal starts: the variation may be negative but stays bounded independently of eps
  const double bound = kVariationBound;
  auto& tt = rep.table("transversal_variation", {"epsilon", "min_dtheta", "max_dtheta"});
  std::vector<double> tmins;
  for (std::size_t ei = 0; ei < cfg.epsilon_transversal.size(); ++ei) {
    const double e = cfg.epsilon_transversal[ei];
    const MetricChart ge = ctx.deformed(e);
    std::vector<double> mn(count), mx(count);
    parallel_for(count, ctx.jobs, [&](std::size_t i) {
      auto rng = task_rng(cfg.seed, kStreamStates + 1000 * ei + i);
      const PhasePoint start = tube_start(rng, ctx, ge, e, cfg.theta_transversal, true, true);
      double lo = kInf, hi = -kInf;
      for (int k = 0; k < per; ++k) {
        const double d = boundary_variation(ctx, ge, start, rng, cfg.cone_opening).dtheta;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
      mn[i] = lo;
      mx[i] = hi;
    });
    tmins.push_back(min_of(mn));
    tt.rows.push_back({e, min_of(mn), max_of(mx)});
    rep.check_at_least(tag("transversal_min_dtheta", e), min_of(mn), -bound, "theory");
  }
  // the lower bound does not degrade as the tube shrinks
  const double spread = max_of(tmins) - min_of(tmins);
  rep.check_at_most("transversal_min_dtheta_spread", spread, 0.5 * bound, "oracle");
  return rep;
}

// ---------------------------------------------------------------- crossing-time
ScenarioReport crossing_time(const Context& ctx) {
  ScenarioReport rep;
  const auto& cfg = ctx.cfg;
  const double theta = cfg.theta_transversal;
  const std::size_t count = static_cast<std::size_t>(cfg.orbit_count);
  auto& tb = rep.table("exit_times", {"epsilon", "orbit", "t_exit", "t_exit_over_epsilon"});
  std::vector<double> eps_list, worst;
  double cmax = 0.0;
  for (std::size_t ei = 0; ei < cfg.epsilon_sweep.size(); ++ei) {
    const double e = cfg.epsilon_sweep[ei];
    const MetricChart ge = ctx.deformed(e);
    const auto times = parallel_values(count, ctx.jobs, [&](std::size_t i) {
      // identical scaled starts for every epsilon
      auto rng = task_rng(cfg.seed, kStreamStarts + i);
      const PhasePoint start = tube_start(rng, ctx, ge, e, theta, true, false);
      IntegrationOptions o = ctx.options();
      o.exit_halfwidth = e;
      o.jacobi = false;
      const OrbitSegment seg = integrate_geodesic(ge, start, 10.0 * e / theta, o);
      if (!seg.exit) throw IntegrationError("transversal orbit did not leave the tube");
      return seg.exit->time;
    });
    for (std::size_t i = 0; i < count; ++i) tb.rows.push_back({e, static_cast<long long>(i), times[i], times[i] / e});
    eps_list.push_back(e);
    worst.push_back(max_of(times));
    cmax = std::max(cmax, max_of(times) / e);
  }
  const double expo = loglog_slope(eps_list, worst);
  rep.check_near("exit_time_exponent", expo, 1.0, 0.1, "theory");
  rep.check_at_most("exit_time_constant", cmax, 2.0 / theta, "theory");
  return rep;
}

// ---------------------------------------------------------------- orbit ensembles with a model arc
// One tube crossing of the deformed chart followed by an exact model arc outside the tube.
struct Crossing {
  JacobiCocycle cocycle;
  double inside_time = 0.0;
  // tube part only, before the handoff
  Mat inside_transition;
  Mat exit_projector;
};

Crossing crossing_with_arc(const Context& ctx, const MetricChart& chart, double eps, double arc,
                           std::mt19937_64& rng) {
  const PhasePoint interior = tube_start(rng, ctx, chart, eps, ctx.cfg.theta_transversal, true, true);
  IntegrationOptions o = ctx.options();
  o.exit_halfwidth = eps;
  o.jacobi = false;
  const double horizon = 50.0 * eps / ctx.cfg.theta_transversal;
  const OrbitSegment back = integrate_geodesic(chart, reversed(interior), horizon, o);
  if (!back.exit) throw IntegrationError("backward orbit did not reach the tube boundary");
  // the bisected exit point is unit only to the integration tolerance
  PhasePoint entry = reversed(back.exit->point);
  entry.velocity = normalize_velocity(chart, entry.position, entry.velocity);
  o.jacobi = true;
  const OrbitSegment fwd = integrate_geodesic(chart, entry, horizon, o);
  if (!fwd.exit) throw IntegrationError("forward orbit did not leave the tube");

  const ProjectorFn proj = spectral_projector(ctx.base, ctx.r);
  Crossing out;
  out.inside_time = fwd.exit->time;
  out.cocycle = cocycle_from_segment(fwd, proj);
  out.inside_transition = cocycle_transition(out.cocycle);
  out.exit_projector = out.cocycle.projectors.back();
  // hand off into the eigenbasis of the base Jacobi operator at the exit (A-block first)
  const PhasePoint& xp = fwd.points.back();
  const Mat& xf = fwd.frames.back();
  const AlongGeodesic ag = along_geodesic(ctx.base.jet_unchecked(xp.position, 2), xp.velocity, &xf);
  Eigen::SelfAdjointEigenSolver<Mat> es(ag.jacobi);
  rotate_cocycle_end(out.cocycle, es.eigenvectors());
  append_cocycle(out.cocycle, constant_cocycle(ctx.model.axis_jacobi_operator(), ctx.block_projector_matrix(),
                                               arc, 0.05));
  return out;
}

struct NetResult {
  double min_gain = kInf;
  double min_inside_gain = kInf;
  double max_inside = 0.0;
};

NetResult net_gain(const Context& ctx, double eps, std::uint64_t stream, ScenarioReport* rep,
                   const std::string& table) {
  const auto& cfg = ctx.cfg;
  const MetricChart ge = ctx.deformed(eps);
  const std::size_t count = static_cast<std::size_t>(cfg.orbit_count);
  std::vector<double> gains(count), inside(count), tube_gains(count);
  parallel_for(count, ctx.jobs, [&](std::size_t i) {
    auto rng = task_rng(cfg.seed, stream + i);
    const Crossing cr = crossing_with_arc(ctx, ge, eps, cfg.outside_arc_time, rng);
    const JacobiCocycle& c = cr.cocycle;
    const Mat total = cocycle_transition(c);
    double g = kInf, gi = kInf;
    for (int k = 0; k < cfg.orbit_boundary_samples; ++k) {
      const JacobiState s = sample_boundary_state(rng, c.projectors.front(), ctx.r, cfg.cone_opening,
                                                  ConeSide::unstable);
      const double t0 = theta(s, c.projectors.front(), ConeSide::unstable);
      const JacobiState e = JacobiState::from_stacked(total * s.stacked());
      g = std::min(g, theta(e, c.projectors.back(), ConeSide::unstable) - t0);
      const JacobiState x = JacobiState::from_stacked(cr.inside_transition * s.stacked());
      gi = std::min(gi, theta(x, cr.exit_projector, ConeSide::unstable) - t0);
    }
    gains[i] = g;
    tube_gains[i] = gi;
    inside[i] = cr.inside_time;
  });
  if (rep != nullptr) {
    auto& t = rep->table(table, {"orbit", "inside_time", "min_theta_gain_tube", "min_theta_gain"});
    for (std::size_t i = 0; i < count; ++i)
      t.rows.push_back({static_cast<long long>(i), inside[i], tube_gains[i], gains[i]});
  }
  return {min_of(gains), min_of(tube_gains), max_of(inside)};
}

ScenarioReport net_invariance(const Context& ctx) {
  ScenarioReport rep;
  const auto& cfg = ctx.cfg;
  const NetResult small = net_gain(ctx, cfg.epsilon_tube, kStreamStarts, &rep, "net_gain");
  rep.check_above("net_theta_gain_min", small.min_gain, 0.0, "theory");
  // a full crossing is two exits from the midpoint, each within eps/theta to first order in eps
  rep.check_at_most("crossing_time_max", small.max_inside,
                    2.0 * cfg.epsilon_tube / cfg.theta_transversal * (1.0 + cfg.delta_slack), "theory");
  // inside the tube the loss is at most M * crossing time
  rep.check_at_least("tube_theta_gain_min", small.min_inside_gain, -kVariationBound * small.max_inside, "theory");
  // the same construction with a large tube; invariance is expected to break here
  const NetResult large = net_gain(ctx, cfg.epsilon_large, kStreamLarge, &rep, "net_gain_large_tube");
  rep.check_below(tag("large_tube_net_theta_gain_min", cfg.epsilon_large), large.min_gain, 0.0, "theory");
  return rep;
}

// ---------------------------------------------------------------- strong-rates
ScenarioReport strong_rates(const Context& ctx) {
  ScenarioReport rep;
  const auto& cfg = ctx.cfg;
  const ConeSpec cu = ctx.cone(cfg.cone_opening, ConeSide::unstable);
  const ConeSpec cs = ctx.cone(cfg.cone_opening, ConeSide::stable);
  const OrbitSegment seg = integrate_geodesic(ctx.base, axis_start(ctx.n), cfg.t_end_time, ctx.options());
  const JacobiCocycle coc = cocycle_from_segment(seg, block_projector(cu));
  const JacobiCocycle rev = reverse_cocycle(coc);

  const std::size_t count = static_cast<std::size_t>(cfg.rate_samples);
  std::vector<GrowthFit> up(count), down(count), back(count);
  parallel_for(count, ctx.jobs, [&](std::size_t i) {
    auto rng = task_rng(cfg.seed, kStreamStates + i);
    up[i] = strong_growth_rate(coc, sample_cone_state(rng, ctx.m, cu), ConeSide::unstable);
    const JacobiState s = sample_cone_state(rng, ctx.m, cs);
    down[i] = strong_growth_rate(coc, s, ConeSide::stable);
    // the same state seen by the reversed flow sits in the unstable cone
    back[i] = strong_growth_rate(rev, reversed(s), ConeSide::unstable);
  });
  auto& t = rep.table("growth_fits", {"orbit_id", "cone", "fitted_rate", "r_squared"});
  double umin = kInf, umax = -kInf, smin = kInf, smax = -kInf, rev_dev = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    t.rows.push_back({static_cast<long long>(i), std::string("unstable"), up[i].rate, up[i].r_squared});
    t.rows.push_back({static_cast<long long>(i), std::string("stable"), down[i].rate, down[i].r_squared});
    umin = std::min(umin, up[i].rate);
    umax = std::max(umax, up[i].rate);
    smin = std::min(smin, down[i].rate);
    smax = std::max(smax, down[i].rate);
    rev_dev = std::max(rev_dev, std::abs(back[i].rate + down[i].rate));
  }
  rep.check_near("unstable_rate_min", umin, 1.0, 0.02, "theory");
  rep.check_near("unstable_rate_max", umax, 1.0, 0.02, "theory");
  rep.check_near("stable_rate_min", smin, -1.0, 0.02, "theory");
  rep.check_near("stable_rate_max", smax, -1.0, 0.02, "theory");
  rep.check_below("reversal_rate_mismatch", rev_dev, 1e-6, "exact");

  // detector on the symmetric model and on the deformed metric
  SplittingOptions so;
  so.r = ctx.r;
  so.openings = cfg.cone_opening_grid;
  so.rate_opening = cfg.cone_opening;
  so.boundary_samples = cfg.orbit_boundary_samples;
  so.window_time = cfg.window_time;
  so.seed = cfg.seed;
  so.jobs = ctx.jobs;

  const OrbitSegment lsym = integrate_geodesic(ctx.base, axis_start(ctx.n), cfg.lyapunov_time, ctx.options());
  const SplittingVerdict vs = detect_splitting({cocycle_from_segment(lsym, block_projector(cu))}, so);

  const MetricChart gs = ctx.deformed(cfg.epsilon_tube);
  std::vector<JacobiCocycle> orbits;
  const OrbitSegment lg = integrate_geodesic(gs, axis_start(ctx.n), cfg.lyapunov_time, ctx.options());
  orbits.push_back(cocycle_from_segment(lg, spectral_projector(ctx.base, ctx.r)));
  const int crossings = 4;
  std::vector<JacobiCocycle> extra(crossings);
  parallel_for(crossings, ctx.jobs, [&](std::size_t i) {
    auto rng = task_rng(cfg.seed, kStreamStarts + 500 + i);
    extra[i] = crossing_with_arc(ctx, gs, cfg.epsilon_tube, cfg.lyapunov_time, rng).cocycle;
  });
  orbits.insert(orbits.end(), extra.begin(), extra.end());
  const SplittingVerdict vg = detect_splitting(orbits, so);

  auto& vt = rep.table("verdicts", {"model", "label", "invariance", "min_gap", "min_central_abs",
                                    "unstable_rate_min", "stable_rate_max"});
  for (const auto& [name, v] : {std::pair<std::string, const SplittingVerdict&>{"symmetric", vs},
                                std::pair<std::string, const SplittingVerdict&>{"deformed", vg}}) {
    vt.rows.push_back({name, v.label, static_cast<long long>(v.invariance_pass), v.min_gap, v.min_central_abs,
                       min_of(v.unstable_rates), max_of(v.stable_rates)});
  }
  auto& sp = rep.table("spectra", {"model", "orbit", "index", "exponent"});
  for (std::size_t o = 0; o < vs.spectra.size(); ++o)
    for (std::size_t i = 0; i < vs.spectra[o].size(); ++i)
      sp.rows.push_back({std::string("symmetric"), static_cast<long long>(o), static_cast<long long>(i), vs.spectra[o][i]});
  for (std::size_t o = 0; o < vg.spectra.size(); ++o)
    for (std::size_t i = 0; i < vg.spectra[o].size(); ++i)
      sp.rows.push_back({std::string("deformed"), static_cast<long long>(o), static_cast<long long>(i), vg.spectra[o][i]});

  rep.check_near("symmetric_verdict_anosov_like", vs.label == "anosov-like" ? 1.0 : 0.0, 1.0, 0.0, "theory");
  rep.check_near("deformed_verdict_partially_hyperbolic", vg.label == "partially-hyperbolic" ? 1.0 : 0.0, 1.0, 0.0,
                 "theory");
  rep.check_near("deformed_unstable_rate_min", min_of(vg.unstable_rates), 1.0, 0.05, "theory");
  rep.check_near("deformed_stable_rate_max", max_of(vg.stable_rates), -1.0, 0.05, "theory");
  // the axis orbit only carries flat B-directions, so some central exponent vanishes
  rep.check_below("deformed_min_central_exponent", vg.min_central_abs, 0.1, "theory");
  return rep;
}

// ---------------------------------------------------------------- product-gap
ProductModel product_of_planes(double alpha, bool mixed) {
  const SymmetricModel ch(4, 1);
  ProductModel p;
  p.k1 = ch.axis_jacobi_operator();
  p.k2 = ch.axis_jacobi_operator();
  p.alpha = alpha;
  p.beta = std::sqrt(1.0 - alpha * alpha);
  p.mixed_direction = mixed;
  return p;
}

JacobiCocycle product_cocycle(const ProductModel& p, double length) {
  const int m = p.dim();
  Mat proj = Mat::Zero(m, m);
  proj(0, 0) = 1.0;
  proj(p.k1.rows(), p.k1.rows()) = 1.0;
  return constant_cocycle(product_jacobi_operator(p), proj, length, 0.5);
}

std::vector<double> expected_product_multiset(double a, double b) {
  std::vector<double> v{a, 0.5 * a, 0.5 * a, b, 0.5 * b, 0.5 * b};
  std::vector<double> out = v;
  for (double x : v) out.push_back(-x);
  std::sort(out.rbegin(), out.rend());
  return out;
}

ScenarioReport product_gap(const Context& ctx) {
  ScenarioReport rep;
  const auto& cfg = ctx.cfg;
  const double a = cfg.product_alpha;
  const ProductModel p = product_of_planes(a, false);
  const std::vector<double> want = expected_product_multiset(p.alpha, p.beta);
  const std::vector<double> eig = product_exponents(p);
  const std::vector<double> qr = lyapunov_spectrum(product_cocycle(p, cfg.lyapunov_time));
  if (eig.size() != want.size() || qr.size() != want.size()) throw ParameterError("product exponent count mismatch");
  double de = 0.0, dq = 0.0;
  auto& mt = rep.table("exponents", {"index", "expected", "eigenvalue", "qr"});
  for (std::size_t i = 0; i < want.size(); ++i) {
    de = std::max(de, std::abs(eig[i] - want[i]));
    dq = std::max(dq, std::abs(qr[i] - want[i]));
    mt.rows.push_back({static_cast<long long>(i), want[i], eig[i], qr[i]});
  }
  rep.check_near("multiset_max_deviation_eigen", de, 0.0, 0.03, "theory");
  rep.check_near("multiset_max_deviation_qr", dq, 0.0, 0.03, "theory");

  ProductModel sw = p;
  std::swap(sw.alpha, sw.beta);
  const std::vector<double> es = product_exponents(sw);
  double ds = 0.0;
  for (std::size_t i = 0; i < es.size(); ++i) ds = std::max(ds, std::abs(es[i] - eig[i]));
  rep.check_below("swap_invariance", ds, 1e-12, "exact");

  SplittingOptions so;
  so.r = 2;
  so.openings = cfg.cone_opening_grid;
  so.rate_opening = cfg.cone_opening;
  so.window_time = cfg.window_time;
  so.check_invariance = false;
  so.seed = cfg.seed;
  so.jobs = ctx.jobs;
  auto verdict = [&](double alpha) {
    return detect_splitting({product_cocycle(product_of_planes(alpha, true), cfg.lyapunov_time)}, so);
  };
  const double balanced = 2.0 / std::sqrt(5.0);
  auto& vt = rep.table("alpha_sweep", {"alpha", "beta", "label", "min_gap"});
  for (int i = 1; i <= 19; ++i) {
    const double al = 0.05 * i;
    const SplittingVerdict v = verdict(al);
    vt.rows.push_back({al, std::sqrt(1.0 - al * al), v.label, v.min_gap});
  }
  const SplittingVerdict off = verdict(a);
  const SplittingVerdict on = verdict(balanced);
  vt.rows.push_back({balanced, std::sqrt(1.0 - balanced * balanced), on.label, on.min_gap});
  rep.check_near("gap_away_from_balance", off.min_gap, std::abs(std::max(a, p.beta) - std::max(0.5 * std::max(a, p.beta), std::min(a, p.beta))), 0.03, "theory");
  rep.check_near("verdict_partially_hyperbolic_away", off.label == "partially-hyperbolic" ? 1.0 : 0.0, 1.0, 0.0,
                 "theory");
  rep.check_near("gap_at_balance", on.min_gap, 0.0, 0.03, "theory");
  rep.check_near("verdict_no_domination_at_balance", on.label == "no-domination" ? 1.0 : 0.0, 1.0, 0.0, "theory");
  return rep;
}

// ---------------------------------------------------------------- bump-bounds
double slope_definition(double h, double tau, double s) {
  if (s < 0.0 || s >= 1.0) return 0.0;
  if (tau == 0.0) return s < 0.5 ? h : -h;
  if (s < tau) return h * s / tau;
  if (s < 0.5 - tau) return h;
  if (s < 0.5 + tau) return h * (0.5 - s) / tau;
  if (s < 1.0 - tau) return -h;
  return -h * (1.0 - s) / tau;
}

// phi(0) = -int_0^1 int_0^s slope, by composite Simpson inner and trapezoid outer sums.
double value_at_zero_quadrature(double h, double tau) {
  const int n = 100000;
  const double dx = 1.0 / n;
  double inner = 0.0, outer = 0.0, prev = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double a = (i - 1) * dx, b = i * dx;
    inner += dx / 6.0 *
             (slope_definition(h, tau, a) + 4 * slope_definition(h, tau, 0.5 * (a + b)) +
              slope_definition(h, tau, b - 1e-15));
    outer += 0.5 * dx * (prev + inner);
    prev = inner;
  }
  return -outer;
}

ScenarioReport bump_bounds(const Context& ctx) {
  ScenarioReport rep;
  const auto& cfg = ctx.cfg;
  SeriesTable ft{"F_profile", {"tau", "x", "F"}, {}};
  SeriesTable st{"F_summary", {"tau", "h_tau", "F0", "max_ratio", "argmax"}, {}};
  for (double tau : cfg.tau_list) {
    const double h = solve_h_tau(tau);
    rep.check_near(tag("h_tau_quadrature", tau), value_at_zero_quadrature(h, tau), -0.5, 1e-6, "oracle");
    const BumpProfile p = BumpProfile::calibrated(tau, 1.0, BumpProfile::default_sigma(tau, 1.0));
    const FBoundReport r = check_F_bound(p, cfg.delta_slack, cfg.grid_count);
    rep.check_near(tag("F0", tau), r.f_at_zero, -1.0, 1e-9, "theory");
    rep.check_at_most(tag("F_max_ratio", tau), r.max_ratio, 2.0 * (1.0 + cfg.delta_slack), "theory");
    st.rows.push_back({tau, h, r.f_at_zero, r.max_ratio, r.argmax});
    for (int i = 0; i <= 200; ++i) {
      const double x = i / 200.0;
      ft.rows.push_back({tau, x, p.F(x)});
    }
  }
  rep.table(st.name, st.columns).rows = st.rows;
  rep.table(ft.name, ft.columns).rows = ft.rows;
  const EstimatesReport e = check_estimates(ctx.spec(cfg.epsilon_tube), cfg.epsilon_estimates);
  const char* names[4] = {"alpha", "grad_alpha", "mixed_hess_alpha", "kk_hess_alpha"};
  auto& et = rep.table("estimates", {"quantity", "epsilon", "maximum"});
  for (int q = 0; q < 4; ++q) {
    rep.check_near(std::string("estimate_exponent_") + names[q], e.exponents[q], e.nominal[q], 0.2, "theory");
    for (std::size_t i = 0; i < e.epsilon.size(); ++i) et.rows.push_back({std::string(names[q]), e.epsilon[i], e.maxima[q][i]});
  }
  return rep;
}

using Runner = ScenarioReport (*)(const Context&);

const std::vector<std::pair<std::string, Runner>>& registry() {
  static const std::vector<std::pair<std::string, Runner>> r{
      {"symmetric-cones", symmetric_cones}, {"eberlein-flat", eberlein_flat},
      {"central-bundle", central_bundle},   {"parallel-cones", parallel_cones},
      {"crossing-time", crossing_time},     {"net-invariance", net_invariance},
      {"strong-rates", strong_rates},       {"product-gap", product_gap},
      {"bump-bounds", bump_bounds},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [n, f] : registry()) v.push_back(n);
    return v;
  }();
  return names;
}

ScenarioReport run_scenario(const std::string& name, const ScenarioConfig& config, int jobs) {
  for (const auto& [n, f] : registry()) {
    if (n != name) continue;
    config.validate();
    const Context ctx(config, std::max(1, jobs));
    ScenarioReport rep = f(ctx);
    rep.scenario = name;
    rep.config = config_entries(config);
    return rep;
  }
  throw UsageError("unknown scenario '" + name + "'");
}

}  // namespace geoflow
