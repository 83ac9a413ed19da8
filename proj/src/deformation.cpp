#include "geoflow/deformation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "geoflow/error.hpp"
#include "geoflow/numerics.hpp"

namespace geoflow {

namespace {

// Normalized bump exp(-1/(1-u^2)) on [-1, 1] and its cumulative moments.
class Mollifier {
 public:
  static const Mollifier& get() {
    static const Mollifier m;
    return m;
  }

  // M_j(z) = int_{-1}^{z} u^j rho(u) du for j = 0..3
  std::array<double, 4> cumulative(double z) const {
    if (z <= -1.0) return {0.0, 0.0, 0.0, 0.0};
    if (z >= 1.0) return full_;
    if (z <= 0.0) return partial(-1.0, z);
    std::array<double, 4> tail = partial(z, 1.0);
    return {full_[0] - tail[0], full_[1] - tail[1], full_[2] - tail[2], full_[3] - tail[3]};
  }

 private:
  Mollifier() : rule_(gauss_legendre(64)) {
    z_ = 1.0;
    const std::array<double, 4> raw = partial_raw(-1.0, 1.0);
    z_ = raw[0];
    full_ = {1.0, 0.0, raw[2] / z_, 0.0};
  }

  static double bump(double u) {
    const double q = 1.0 - u * u;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
  }

  std::array<double, 4> partial_raw(double a, double b) const {
    std::array<double, 4> s{0.0, 0.0, 0.0, 0.0};
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < rule_.nodes.size(); ++i) {
      const double u = mid + half * rule_.nodes[i];
      const double w = half * rule_.weights[i] * bump(u);
      s[0] += w;
      s[1] += w * u;
      s[2] += w * u * u;
      s[3] += w * u * u * u;
    }
    return s;
  }

  std::array<double, 4> partial(double a, double b) const {
    std::array<double, 4> s = partial_raw(a, b);
    for (double& v : s) v /= z_;
    return s;
  }

  GaussRule rule_;
  double z_;
  std::array<double, 4> full_;
};

using Poly = std::array<double, 4>;

double peval(const Poly& c, double s) { return ((c[3] * s + c[2]) * s + c[1]) * s + c[0]; }
Poly pderiv(const Poly& c) { return {c[1], 2.0 * c[2], 3.0 * c[3], 0.0}; }
Poly pint(const Poly& c) { return {0.0, c[0], c[1] / 2.0, c[2] / 3.0}; }  // drops the cubic term of c
Poly pmirror(const Poly& c) { return {c[0], -c[1], c[2], -c[3]}; }

// int p(X - S u) rho(u) du over u in [ulo, uhi]
double convolve_piece(const Poly& c, double X, double S, double ulo, double uhi) {
  static const double binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
  const auto& mol = Mollifier::get();
  const auto mhi = mol.cumulative(uhi);
  const auto mlo = mol.cumulative(ulo);
  double total = 0.0;
  double spow = 1.0;
  for (int i = 0; i < 4; ++i) {
    double d = 0.0;
    double xpow = 1.0;
    for (int j = i; j < 4; ++j) {
      d += c[j] * binom[j][i] * xpow;
      xpow *= X;
    }
    total += d * spow * (mhi[i] - mlo[i]);
    spow *= -S;
  }
  return total;
}

}  // namespace

double solve_h_tau(double tau) {
  if (!(tau >= 0.0) || tau >= 0.5) throw ParameterError("tau must satisfy 0 <= tau < 1/2");
  return 2.0 / (1.0 - 2.0 * tau);
}

double BumpProfile::default_sigma(double tau, double lambda) {
  return tau > 0.0 ? tau * lambda / 4.0 : lambda / 100.0;
}

BumpProfile::BumpProfile(double tau, double h, double lambda, double sigma)
    : tau_(tau), h_(h), lambda_(lambda), sigma_(sigma) {
  if (!(tau >= 0.0) || tau > 0.25) throw ParameterError("profile ramp width must satisfy 0 <= tau <= 1/4");
  if (!(lambda > 0.0)) throw ParameterError("profile scale must be positive");
  if (!(sigma >= 0.0) || sigma >= 0.5 * lambda) throw ParameterError("smoothing radius out of range");
  inner_ = lambda - sigma;

  // Slope pieces on [0, 1]: phi(s) = p + q s.
  std::vector<double> br;
  std::vector<Poly> slope;
  if (tau == 0.0) {
    br = {0.0, 0.5, 1.0};
    slope = {{h, 0, 0, 0}, {-h, 0, 0, 0}};
  } else {
    br = {0.0, tau, 0.5 - tau, 0.5 + tau, 1.0 - tau, 1.0};
    slope = {{0, h / tau, 0, 0},
             {h, 0, 0, 0},
             {h * 0.5 / tau, -h / tau, 0, 0},
             {-h, 0, 0, 0},
             {-h / tau, h / tau, 0, 0}};
  }
  // First antiderivative with P(0) = 0, continuous.
  const std::size_t np = slope.size();
  std::vector<Poly> prim(np);
  double acc = 0.0;
  for (std::size_t k = 0; k < np; ++k) {
    Poly p = pint(slope[k]);
    p[0] += acc - peval(p, br[k]);
    prim[k] = p;
    acc = peval(p, br[k + 1]);
  }
  // Value: phi(s) = -int_s^1 P, continuous with phi(1) = 0.
  std::vector<Poly> val(np);
  double tail = 0.0;
  for (std::size_t k = np; k-- > 0;) {
    Poly q = pint(prim[k]);
    // -(Q(b) - Q(s) + tail) = Q(s) - Q(b) - tail
    q[0] += -peval(q, br[k + 1]) - tail;
    val[k] = q;
    tail = -peval(q, br[k]);
  }
  for (std::size_t k = np; k-- > 0;) {
    if (br[k + 1] > br[k]) pieces_.push_back({-br[k + 1], -br[k], pmirror(val[k])});
  }
  for (std::size_t k = 0; k < np; ++k) {
    if (br[k + 1] > br[k]) pieces_.push_back({br[k], br[k + 1], val[k]});
  }
}

BumpProfile BumpProfile::calibrated(double tau, double lambda, double sigma) {
  BumpProfile p(tau, solve_h_tau(tau), lambda, sigma);
  if (sigma > 0.0) p.scale_ = -0.5 / p.eval(0.0).v;
  return p;
}

double BumpProfile::slope(double s) const {
  s = std::abs(s);
  if (s >= 1.0) return 0.0;
  for (const Piece& pc : pieces_) {
    if (pc.a >= 0.0 && s >= pc.a && s < pc.b) return peval(pderiv(pderiv(pc.c)), s) * scale_;
  }
  return 0.0;
}

BumpProfile::Value BumpProfile::eval(double x) const {
  Value out;
  const double ax = std::abs(x);
  if (ax >= lambda_) return out;
  const double X = ax / inner_;
  if (sigma_ == 0.0) {
    for (const Piece& pc : pieces_) {
      if (pc.a >= 0.0 && X >= pc.a && X < pc.b) {
        out.v = peval(pc.c, X);
        out.d1 = peval(pderiv(pc.c), X) / inner_;
        out.d2 = peval(pderiv(pderiv(pc.c)), X) / (inner_ * inner_);
        break;
      }
    }
  } else {
    const double S = sigma_ / inner_;
    for (const Piece& pc : pieces_) {
      if (pc.b <= X - S || pc.a >= X + S) continue;
      const double ulo = std::max(-1.0, (X - pc.b) / S);
      const double uhi = std::min(1.0, (X - pc.a) / S);
      if (uhi <= ulo) continue;
      out.v += convolve_piece(pc.c, X, S, ulo, uhi);
      out.d1 += convolve_piece(pderiv(pc.c), X, S, ulo, uhi);
      out.d2 += convolve_piece(pderiv(pderiv(pc.c)), X, S, ulo, uhi);
    }
    out.d1 /= inner_;
    out.d2 /= inner_ * inner_;
  }
  out.v *= scale_;
  out.d1 *= scale_;
  out.d2 *= scale_;
  if (x < 0.0) out.d1 = -out.d1;
  return out;
}

double BumpProfile::F(double x) const {
  const Value p = eval(x);
  return x * x * p.d2 + 4.0 * x * p.d1 + 2.0 * p.v;
}

FBoundReport check_F_bound(const BumpProfile& p, double delta, int grid) {
  if (grid < 2) throw ParameterError("grid needs at least two points");
  FBoundReport r;
  r.f_at_zero = p.F(0.0);
  r.bound = 2.0 * (1.0 + delta);
  for (int i = 0; i < grid; ++i) {
    const double x = p.lambda() * i / (grid - 1);
    const double ratio = std::abs(p.F(x)) / std::abs(r.f_at_zero);
    if (ratio > r.max_ratio) {
      r.max_ratio = ratio;
      r.argmax = x;
    }
  }
  r.pass = r.max_ratio <= r.bound;
  return r;
}

Deformation::Deformation(const DeformationSpec& spec)
    : spec_(spec),
      side_(BumpProfile::calibrated(spec.tau, spec.epsilon,
                                    BumpProfile::default_sigma(spec.tau, spec.epsilon))),
      core_(BumpProfile::calibrated(
          spec.tau, spec.epsilon * spec.epsilon,
          BumpProfile::default_sigma(spec.tau, spec.epsilon * spec.epsilon))) {
  if (spec.n < 2 || spec.r < 1 || spec.r > spec.n - 1) throw ParameterError("bad deformation dimensions");
  if (!(spec.epsilon > 0.0) || spec.epsilon >= 1.0) throw ParameterError("epsilon must lie in (0, 1)");
}

double Deformation::Phi(int k, const Vec& x) const {
  double p = spec_.amplitude;
  for (int j = 1; j < spec_.n; ++j) {
    p *= (j == k) ? 2.0 * core_.eval(x[j - 1]).v : -2.0 * side_.eval(x[j - 1]).v;
    if (p == 0.0) break;
  }
  return p;
}

Deformation::Value Deformation::eval(const Vec& x) const {
  const int m = spec_.n - 1;
  Value out;
  out.grad = Vec::Zero(m);
  out.hess = Mat::Zero(m, m);
  if (spec_.amplitude == 0.0) return out;

  std::vector<BumpProfile::Value> side(m);
  bool side_zero_any = false;
  for (int i = 0; i < m; ++i) {
    side[i] = side_.eval(x[i]);
    side[i].v *= -2.0;
    side[i].d1 *= -2.0;
    side[i].d2 *= -2.0;
  }
  std::vector<double> q(m), dq(m), d2q(m);
  for (int k = spec_.r + 1; k <= m; ++k) {
    const int kk = k - 1;
    const double xk = x[kk];
    if (std::abs(xk) >= core_.lambda()) continue;
    side_zero_any = false;
    for (int i = 0; i < m; ++i) {
      if (i == kk) {
        BumpProfile::Value c = core_.eval(xk);
        const double f = 2.0 * c.v, df = 2.0 * c.d1, d2f = 2.0 * c.d2;
        q[i] = xk * xk * f;
        dq[i] = 2.0 * xk * f + xk * xk * df;
        d2q[i] = 2.0 * f + 4.0 * xk * df + xk * xk * d2f;
      } else {
        q[i] = side[i].v;
        dq[i] = side[i].d1;
        d2q[i] = side[i].d2;
        if (std::abs(x[i]) >= side_.lambda()) side_zero_any = true;
      }
    }
    if (side_zero_any) continue;
    const double a = spec_.amplitude;
    // product of q over all indices except the listed ones
    auto prod_except = [&](int e1, int e2) {
      double p = a;
      for (int i = 0; i < m; ++i)
        if (i != e1 && i != e2) p *= q[i];
      return p;
    };
    out.alpha += prod_except(-1, -1);
    for (int i = 0; i < m; ++i) {
      const double pi = prod_except(i, -1);
      out.grad[i] += dq[i] * pi;
      out.hess(i, i) += d2q[i] * pi;
      for (int j = i + 1; j < m; ++j) {
        const double h = dq[i] * dq[j] * prod_except(i, j);
        out.hess(i, j) += h;
        out.hess(j, i) += h;
      }
    }
  }
  return out;
}

double Deformation::sup_bound() const {
  const int samples = 2001;
  double side_max = 0.0, core_max = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double s = side_.lambda() * i / (samples - 1);
    side_max = std::max(side_max, std::abs(2.0 * side_.eval(s).v));
    const double c = core_.lambda() * i / (samples - 1);
    core_max = std::max(core_max, std::abs(c * c * 2.0 * core_.eval(c).v));
  }
  const int terms = spec_.n - 1 - spec_.r;
  return std::abs(spec_.amplitude) * terms * core_max * std::pow(side_max, spec_.n - 2);
}

Deformation::Value alpha_eval(const Deformation& d, const ChartPoint& p) { return d.eval(p.x); }

namespace {

std::vector<double> scaled_axis(double eps, int per_side) {
  std::vector<double> pts;
  for (int j = -per_side; j <= per_side; ++j) {
    pts.push_back(eps * eps * j / per_side);
    pts.push_back(eps * j / per_side);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return linear_fit(lx, ly).slope;
}

EstimatesReport check_estimates(const DeformationSpec& spec, const std::vector<double>& eps_list,
                                int points_per_side) {
  if (eps_list.size() < 3) throw ParameterError("estimates need at least three epsilon values");
  EstimatesReport rep;
  rep.epsilon = eps_list;
  const int m = spec.n - 1;
  for (double eps : eps_list) {
    DeformationSpec s = spec;
    s.epsilon = eps;
    const Deformation d(s);
    const std::vector<double> axis = scaled_axis(eps, points_per_side);
    std::array<double, 4> mx{0.0, 0.0, 0.0, 0.0};
    std::vector<std::size_t> idx(m, 0);
    Vec x(m);
    while (true) {
      for (int i = 0; i < m; ++i) x[i] = axis[idx[i]];
      const Deformation::Value v = d.eval(x);
      mx[0] = std::max(mx[0], std::abs(v.alpha));
      mx[1] = std::max(mx[1], v.grad.norm());
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          if (i != j) mx[2] = std::max(mx[2], std::abs(v.hess(i, j)));
        }
      for (int k = spec.r; k < m; ++k) mx[3] = std::max(mx[3], std::abs(v.hess(k, k)));
      int c = 0;
      while (c < m && ++idx[c] == axis.size()) idx[c++] = 0;
      if (c == m) break;
    }
    for (int q = 0; q < 4; ++q) rep.maxima[q].push_back(mx[q]);
  }
  for (int q = 0; q < 4; ++q) {
    rep.exponents[q] = loglog_slope(eps_list, rep.maxima[q]);
    for (std::size_t i = 0; i < eps_list.size(); ++i)
      rep.m0 = std::max(rep.m0, rep.maxima[q][i] / std::pow(eps_list[i], rep.nominal[q]));
  }
  return rep;
}

MetricChart deformed_chart(const MetricChart& base, const Deformation& d) {
  const DeformationSpec& s = d.spec();
  if (s.n != base.dim()) throw ParameterError("deformation and chart dimensions differ");
  if (s.epsilon >= base.radius()) throw ParameterError("tube scale must be below the chart radius");
  // Smallest metric eigenvalue over a coarse sample of the tube.
  const int m = s.n - 1;
  double lmin = 1e300;
  std::vector<int> idx(m, 0);
  while (true) {
    ChartPoint p;
    p.x = Vec(m);
    for (int i = 0; i < m; ++i) p.x[i] = s.epsilon * (idx[i] - 1);
    Eigen::SelfAdjointEigenSolver<Mat> es(base.metric(p), Eigen::EigenvaluesOnly);
    lmin = std::min(lmin, es.eigenvalues()[0]);
    int c = 0;
    while (c < m && ++idx[c] == 3) idx[c++] = 0;
    if (c == m) break;
  }
  if (!(d.sup_bound() < 0.5 * lmin))
    throw DeformationTooLargeError("deformation amplitude too large for a positive definite metric");

  auto dd = std::make_shared<const Deformation>(d);
  auto metric = [base, dd](const ChartPoint& p) {
    Mat g = base.jet_unchecked(p, 0).g;
    g(0, 0) += dd->eval(p.x).alpha;
    return g;
  };
  auto jet = [base, dd](const ChartPoint& p, int order) {
    MetricJet j = base.jet_unchecked(p, order);
    const int n = j.n;
    const Deformation::Value a = dd->eval(p.x);
    j.g(0, 0) += a.alpha;
    if (order >= 1)
      for (int c = 1; c < n; ++c) j.dg[(c * n + 0) * n + 0] += a.grad[c - 1];
    if (order >= 2)
      for (int c = 1; c < n; ++c)
        for (int e = 1; e < n; ++e) j.d2g[((c * n + e) * n + 0) * n + 0] += a.hess(c - 1, e - 1);
    return j;
  };
  return MetricChart(base.dim(), base.period(), base.radius(), metric, jet, "deformed");
}

}  // namespace geoflow
