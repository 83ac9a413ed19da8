#include "geoflow/geom_core.hpp"

#include <cmath>
#include <sstream>

#include "geoflow/error.hpp"
#include "geoflow/kernels.hpp"

namespace geoflow {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Vec ChartPoint::coords() const {
  Vec c(x.size() + 1);
  c[0] = t;
  c.tail(x.size()) = x;
  return c;
}

ChartPoint ChartPoint::from_coords(const Vec& c) {
  ChartPoint p;
  p.t = c[0];
  p.x = c.tail(c.size() - 1);
  return p;
}

MetricChart::MetricChart(int dim, double period, double radius, MetricFn metric, JetFn jet,
                         std::string name)
    : dim_(dim),
      period_(period),
      radius_(radius),
      metric_(std::move(metric)),
      jet_(std::move(jet)),
      name_(std::move(name)) {
  if (dim < 2) throw ParameterError("chart dimension must be at least 2");
  if (!(period > 0.0)) throw ParameterError("chart period must be positive");
  if (!(radius > 0.0)) throw ParameterError("chart radius must be positive");
  if (!metric_) throw ParameterError("chart needs a metric function");
}

bool MetricChart::contains(const ChartPoint& p) const {
  if (p.dim() != dim_ || !std::isfinite(p.t)) return false;
  for (int i = 0; i < p.x.size(); ++i) {
    if (!(std::abs(p.x[i]) < radius_)) return false;
  }
  return true;
}

void MetricChart::check_domain(const ChartPoint& p) const {
  if (contains(p)) return;
  std::ostringstream os;
  os << "point outside chart '" << name_ << "' (radius " << radius_ << "): t=" << p.t;
  for (int i = 0; i < p.x.size(); ++i) os << (i == 0 ? " x=(" : ", ") << p.x[i];
  if (p.x.size() > 0) os << ")";
  throw DomainError(os.str());
}

Mat MetricChart::metric(const ChartPoint& p) const {
  check_domain(p);
  return metric_(p);
}

MetricJet MetricChart::jet(const ChartPoint& p, int order) const {
  check_domain(p);
  if (order < 0 || order > 2) throw ParameterError("jet order must be 0, 1 or 2");
  return jet_unchecked(p, order);
}

MetricJet MetricChart::jet_unchecked(const ChartPoint& p, int order) const {
  if (jet_) return jet_(p, order);
  return finite_difference_jet(p, order, default_fd_step(), true);
}

namespace {

Mat eval_shifted(const MetricChart::MetricFn& f, const Vec& c, int i, double hi, int j,
                 double hj) {
  Vec s = c;
  if (i >= 0) s[i] += hi;
  if (j >= 0) s[j] += hj;
  return f(ChartPoint::from_coords(s));
}

void fd_pass(const MetricChart::MetricFn& f, const Vec& c, int n, int order, double h,
             const Mat& g0, std::vector<double>& dg, std::vector<double>& d2g) {
  dg.assign(static_cast<std::size_t>(n * n * n), 0.0);
  if (order >= 2) d2g.assign(static_cast<std::size_t>(n * n * n * n), 0.0);
  for (int a = 0; a < n; ++a) {
    const Mat gp = eval_shifted(f, c, a, h, -1, 0.0);
    const Mat gm = eval_shifted(f, c, a, -h, -1, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dg[(a * n + i) * n + j] = (gp(i, j) - gm(i, j)) / (2.0 * h);
    if (order < 2) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        d2g[((a * n + a) * n + i) * n + j] = (gp(i, j) - 2.0 * g0(i, j) + gm(i, j)) / (h * h);
    for (int b = a + 1; b < n; ++b) {
      const Mat gpp = eval_shifted(f, c, a, h, b, h);
      const Mat gpm = eval_shifted(f, c, a, h, b, -h);
      const Mat gmp = eval_shifted(f, c, a, -h, b, h);
      const Mat gmm = eval_shifted(f, c, a, -h, b, -h);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double v = (gpp(i, j) - gpm(i, j) - gmp(i, j) + gmm(i, j)) / (4.0 * h * h);
          d2g[((a * n + b) * n + i) * n + j] = v;
          d2g[((b * n + a) * n + i) * n + j] = v;
        }
    }
  }
}

}  // namespace

MetricJet MetricChart::finite_difference_jet(const ChartPoint& p, int order, double step,
                                             bool richardson) const {
  if (!(step > 0.0)) throw ParameterError("finite-difference step must be positive");
  MetricJet jet;
  jet.n = dim_;
  jet.order = order;
  jet.g = metric_(p);
  if (order == 0) return jet;
  const Vec c = p.coords();
  // second differences lose all digits once h^2 is near the rounding level of the coordinates
  if (step < 1e-7 * (1.0 + c.cwiseAbs().maxCoeff()))
    throw ToleranceError("finite-difference step underflow");
  fd_pass(metric_, c, dim_, order, step, jet.g, jet.dg, jet.d2g);
  if (richardson) {
    std::vector<double> dg2, d2g2;
    fd_pass(metric_, c, dim_, order, step / 2.0, jet.g, dg2, d2g2);
    for (std::size_t i = 0; i < jet.dg.size(); ++i) jet.dg[i] = (4.0 * dg2[i] - jet.dg[i]) / 3.0;
    for (std::size_t i = 0; i < jet.d2g.size(); ++i)
      jet.d2g[i] = (4.0 * d2g2[i] - jet.d2g[i]) / 3.0;
  }
  return jet;
}

Mat metric_inverse(const Mat& g) {
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw DegenerateMetricError("metric is not positive definite");
  const Mat& l = llt.matrixLLT();
  double dmin = std::abs(l(0, 0)), dmax = dmin;
  for (int i = 1; i < l.rows(); ++i) {
    dmin = std::min(dmin, std::abs(l(i, i)));
    dmax = std::max(dmax, std::abs(l(i, i)));
  }
  if (!(dmin > 1e-8 * dmax)) throw DegenerateMetricError("metric is numerically singular");
  return llt.solve(Mat::Identity(g.rows(), g.cols()));
}

double CurvatureData::R(const Vec& x, const Vec& y, const Vec& z, const Vec& w) const {
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    if (x[i] == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      if (y[j] == 0.0) continue;
      const double xy = x[i] * y[j];
      for (int k = 0; k < n; ++k) {
        if (z[k] == 0.0) continue;
        const double* row = &riemann[((i * n + j) * n + k) * n];
        double sw = 0.0;
        for (int l = 0; l < n; ++l) sw += row[l] * w[l];
        s += xy * z[k] * sw;
      }
    }
  }
  return s;
}

CurvatureData christoffel_from_jet(const MetricJet& jet, const Mat& ginv) {
  if (jet.order < 1) throw ParameterError("christoffel symbols need a first-order jet");
  const int n = jet.n;
  CurvatureData c;
  c.n = n;
  c.christoffel_lower.assign(static_cast<std::size_t>(n * n * n), 0.0);
  c.christoffel.assign(static_cast<std::size_t>(n * n * n), 0.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        c.christoffel_lower[(j * n + i) * n + k] =
            0.5 * (jet.d1(i, j, k) + jet.d1(k, i, j) - jet.d1(j, i, k));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int m = 0; m < n; ++m) s += ginv(k, m) * c.christoffel_lower[(m * n + i) * n + j];
        c.christoffel[(k * n + i) * n + j] = s;
      }
  return c;
}

CurvatureData curvature_from_jet(const MetricJet& jet) {
  if (jet.order < 2) throw ParameterError("curvature needs a second-order jet");
  const int n = jet.n;
  const Mat ginv = metric_inverse(jet.g);
  CurvatureData c = christoffel_from_jet(jet, ginv);
  c.riemann.assign(static_cast<std::size_t>(n * n * n * n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double r = -0.5 * (jet.d2(i, k, j, l) + jet.d2(j, l, i, k) - jet.d2(i, l, j, k) -
                             jet.d2(j, k, i, l));
          for (int m = 0; m < n; ++m) {
            r -= c.gamma_lower(m, i, k) * c.gamma(m, j, l);
            r += c.gamma_lower(m, i, l) * c.gamma(m, j, k);
          }
          c.riemann[((i * n + j) * n + k) * n + l] = r;
        }
  return c;
}

CurvatureData christoffel(const MetricChart& chart, const ChartPoint& p) {
  const MetricJet jet = chart.jet(p, 1);
  return christoffel_from_jet(jet, metric_inverse(jet.g));
}

CurvatureData curvature_tensor(const MetricChart& chart, const ChartPoint& p) {
  return curvature_from_jet(chart.jet(p, 2));
}

double sectional_curvature(const CurvatureData& curv, const Mat& g, const Vec& v, const Vec& w,
                           double tol) {
  const double vv = v.dot(g * v), ww = w.dot(g * w), vw = v.dot(g * w);
  const double area2 = vv * ww - vw * vw;
  if (!(area2 > tol * std::max(vv * ww, 1e-300)))
    throw DegeneratePlaneError("vectors span a degenerate plane");
  return curv.R(v, w, v, w) / area2;
}

double sectional_curvature(const MetricChart& chart, const ChartPoint& p, const Vec& v,
                           const Vec& w, double tol) {
  const MetricJet jet = chart.jet(p, 2);
  return sectional_curvature(curvature_from_jet(jet), jet.g, v, w, tol);
}

Mat jacobi_operator(const CurvatureData& curv, const Vec& a, const Mat& frame) {
  const int m = static_cast<int>(frame.cols());
  Mat k(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      k(i, j) = curv.R(a, frame.col(i), a, frame.col(j));
      k(j, i) = k(i, j);
    }
  return k;
}

Mat curvature_operator_matrix(const MetricChart& chart, const ChartPoint& p, const Vec& v,
                              const Mat& frame, double unit_tol) {
  const MetricJet jet = chart.jet(p, 2);
  if (std::abs(v.dot(jet.g * v) - 1.0) > unit_tol)
    throw NormalizationError("curvature operator needs a unit vector");
  return jacobi_operator(curvature_from_jet(jet), v, frame);
}

Mat orthonormal_complement(const Mat& g, const Vec& v) {
  const int n = static_cast<int>(g.rows());
  const double vn = std::sqrt(v.dot(g * v));
  if (!(vn > 0.0)) throw DomainError("cannot complement a zero vector");
  std::vector<Vec> basis{v / vn};
  Mat out(n, n - 1);
  int found = 0;
  for (int step = 0; step < n && found < n - 1; ++step) {
    const int c = (step + 1) % n;  // transverse coordinates first, axis last
    Vec e = Vec::Zero(n);
    e[c] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& b : basis) e -= b.dot(g * e) * b;
    const double en = std::sqrt(std::max(0.0, e.dot(g * e)));
    if (en < 1e-8) continue;
    e /= en;
    basis.push_back(e);
    out.col(found++) = e;
  }
  if (found != n - 1) throw DegenerateMetricError("failed to build an orthonormal frame");
  return out;
}

AlongGeodesic along_geodesic(const MetricJet& jet, const Vec& v, const Mat* frame) {
  if (jet.order < 1) throw ParameterError("geodesic data needs a first-order jet");
  const kernels::Table& kt = kernels::active();
  const int n = jet.n;
  const auto nn = static_cast<std::size_t>(n);
  const Mat ginv = metric_inverse(jet.g);

  // E[c][a] = (d_c g v)_a ; Dv[a][b] = sum_c v_c d_c g_ab
  RowMat e(n, n), dv(n, n);
  kt.gemv(jet.dg.data(), nn * nn, nn, v.data(), e.data());
  kt.gemv_t(jet.dg.data(), nn, nn * nn, v.data(), dv.data());
  // Gv[m][k] = Gamma_{m,ik} v^i
  Mat gv(n, n);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) gv(m, k) = 0.5 * (dv(m, k) + e(k, m) - e(m, k));

  AlongGeodesic out;
  const Vec gvv = gv * v;
  const Vec a = ginv * gvv;
  out.accel = -a;
  out.frame_rate = -ginv * gv;
  if (frame == nullptr) return out;
  if (jet.order < 2) throw ParameterError("Jacobi operator needs a second-order jet");

  const Mat& u = *frame;
  RowMat ea(n, n), da(n, n);
  kt.gemv(jet.dg.data(), nn * nn, nn, a.data(), ea.data());
  kt.gemv_t(jet.dg.data(), nn, nn * nn, a.data(), da.data());
  Mat ga(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) ga(i, k) = 0.5 * (ea(i, k) + ea(k, i) - da(i, k));

  std::vector<double> t(nn * nn * nn), vv(nn * nn);
  kt.gemv(jet.d2g.data(), nn * nn * nn, nn, v.data(), t.data());
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) vv[p * nn + q] = v[p] * v[q];
  RowMat m1(n, n), m2(n, n), m3(n, n);
  kt.gemv_t(jet.d2g.data(), nn * nn, nn * nn, vv.data(), m1.data());
  kt.gemv(t.data(), nn * nn, nn, v.data(), m2.data());
  kt.gemv_t(t.data(), nn, nn * nn, v.data(), m3.data());
  const Mat s = m1 + m2 - m3 - m3.transpose();
  const Mat gvu = gv * u;
  Mat k = -0.5 * u.transpose() * s * u - u.transpose() * ga * u + gvu.transpose() * ginv * gvu;
  out.jacobi = 0.5 * (k + k.transpose());
  return out;
}

}  // namespace geoflow
