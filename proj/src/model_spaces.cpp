#include "geoflow/model_spaces.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

Mat kahler_structure(int n) {
  Mat j = Mat::Zero(n, n);
  for (int p = 0; p + 1 < n; p += 2) {
    j(p + 1, p) = 1.0;
    j(p, p + 1) = -1.0;
  }
  return j;
}

// Left multiplication by i, j, k on each quaternion factor with basis (1, i, j, k).
std::vector<Mat> quaternion_structures(int n) {
  // table[u][b] = (sign, target) for unit u in {i, j, k} applied to basis element b
  static const int target[3][4] = {{1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
  static const double sign[3][4] = {{1, -1, 1, -1}, {1, -1, -1, 1}, {1, 1, -1, -1}};
  std::vector<Mat> out;
  for (int u = 0; u < 3; ++u) {
    Mat j = Mat::Zero(n, n);
    for (int f = 0; f < n; f += 4)
      for (int b = 0; b < 4; ++b) j(f + target[u][b], f + b) = sign[u][b];
    out.push_back(j);
  }
  return out;
}

std::vector<Mat> rotation_structures(int n, int r) {
  std::vector<Mat> out;
  for (int m = 1; m <= r; ++m) {
    Mat j = Mat::Zero(n, n);
    j(m, 0) = 1.0;
    j(0, m) = -1.0;
    out.push_back(j);
  }
  return out;
}

}  // namespace

SymmetricModel::SymmetricModel(int n, int r) : n_(n), r_(r) {
  if (n < 2) throw ParameterError("model dimension must be at least 2");
  if (r < 1 || r > n - 1) throw ParameterError("A-block dimension must lie in [1, n-1]");
  if (r == n - 1) {
    kind_ = Kind::constant_curvature;
  } else if (r == 1 && n % 2 == 0) {
    kind_ = Kind::complex_hyperbolic;
    structures_.push_back(kahler_structure(n));
  } else if (r == 3 && n % 4 == 0) {
    kind_ = Kind::quaternionic_hyperbolic;
    structures_ = quaternion_structures(n);
  } else {
    kind_ = Kind::block_only;
    structures_ = rotation_structures(n, r);
  }

  const auto n4 = static_cast<std::size_t>(n) * n * n * n;
  tensor_.assign(n4, 0.0);
  const double scale = kind_ == Kind::constant_curvature ? -1.0 : -0.25;
  auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double v = d(i, k) * d(j, l) - d(j, k) * d(i, l);
          for (const Mat& s : structures_) {
            // <J e_a, e_b> = J(b, a)
            v += s(k, i) * s(l, j) - s(k, j) * s(l, i) + 2.0 * s(j, i) * s(l, k);
          }
          tensor_[((i * n + j) * n + k) * n + l] = scale * v;
        }
}

Vec SymmetricModel::axis_jacobi_eigenvalues() const {
  Vec e(n_ - 1);
  for (int i = 0; i < n_ - 1; ++i) e[i] = i < r_ ? -1.0 : -0.25;
  return e;
}

Mat SymmetricModel::axis_jacobi_operator() const {
  return axis_jacobi_eigenvalues().asDiagonal();
}

MetricChart quadratic_chart(int n, std::vector<double> coeff, double period, double radius,
                            std::string name) {
  const auto nn = static_cast<std::size_t>(n);
  if (coeff.size() != nn * nn * nn * nn) throw ParameterError("quadratic chart: bad coefficient size");
  auto c = std::make_shared<const std::vector<double>>(std::move(coeff));
  auto at = [n](int a, int b, int p, int q) {
    return ((static_cast<std::size_t>(a) * n + b) * n + p) * n + q;
  };
  auto metric = [n, c, at](const ChartPoint& pt) {
    Mat g = Mat::Identity(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        double s = 0.0;
        for (int p = 1; p < n; ++p)
          for (int q = 1; q < n; ++q) s += (*c)[at(a, b, p, q)] * pt.x[p - 1] * pt.x[q - 1];
        g(a, b) += s;
        if (a != b) g(b, a) = g(a, b);
      }
    return g;
  };
  auto jet = [n, c, at, metric](const ChartPoint& pt, int order) {
    MetricJet j;
    j.n = n;
    j.order = order;
    j.g = metric(pt);
    if (order == 0) return j;
    const auto nn = static_cast<std::size_t>(n);
    j.dg.assign(nn * nn * nn, 0.0);
    for (int p = 1; p < n; ++p)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double s = 0.0;
          for (int q = 1; q < n; ++q) s += 2.0 * (*c)[at(a, b, p, q)] * pt.x[q - 1];
          j.dg[(p * n + a) * n + b] = s;
        }
    if (order < 2) return j;
    j.d2g.assign(nn * nn * nn * nn, 0.0);
    for (int p = 1; p < n; ++p)
      for (int q = 1; q < n; ++q)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            j.d2g[((p * n + q) * n + a) * n + b] = 2.0 * (*c)[at(a, b, p, q)];
    return j;
  };
  return MetricChart(n, period, radius, metric, jet, std::move(name));
}

MetricChart symmetric_chart(const SymmetricModel& model, double period, double radius) {
  if (!(radius > 0.0)) throw ParameterError("chart radius must be positive");
  const int n = model.n();
  const auto nn = static_cast<std::size_t>(n);
  std::vector<double> c(nn * nn * nn * nn, 0.0);
  auto at = [n](int a, int b, int p, int q) {
    return ((static_cast<std::size_t>(a) * n + b) * n + p) * n + q;
  };
  for (int k = 1; k < n; ++k)
    for (int l = 1; l < n; ++l) {
      c[at(0, 0, k, l)] = -model.R(0, k, 0, l);
      for (int i = 1; i < n; ++i) {
        const double v = -(1.0 / 3.0) * (model.R(0, k, i, l) + model.R(0, l, i, k));
        c[at(0, i, k, l)] = v;
        c[at(i, 0, k, l)] = v;
        for (int j = 1; j < n; ++j)
          c[at(i, j, k, l)] = -(1.0 / 6.0) * (model.R(i, k, j, l) + model.R(i, l, j, k));
      }
    }
  return quadratic_chart(n, std::move(c), period, radius, "symmetric");
}

MetricChart euclidean_chart(int n, double period, double radius) {
  const auto nn = static_cast<std::size_t>(n);
  return quadratic_chart(n, std::vector<double>(nn * nn * nn * nn, 0.0), period, radius,
                         "euclidean");
}

MetricChart hyperbolic_plane_chart(double period, double radius) {
  auto metric = [](const ChartPoint& p) {
    Mat g = Mat::Identity(2, 2);
    const double ch = std::cosh(p.x[0]);
    g(0, 0) = ch * ch;
    return g;
  };
  auto jet = [metric](const ChartPoint& p, int order) {
    MetricJet j;
    j.n = 2;
    j.order = order;
    j.g = metric(p);
    if (order == 0) return j;
    j.dg.assign(8, 0.0);
    j.dg[(1 * 2 + 0) * 2 + 0] = std::sinh(2.0 * p.x[0]);
    if (order < 2) return j;
    j.d2g.assign(16, 0.0);
    j.d2g[((1 * 2 + 1) * 2 + 0) * 2 + 0] = 2.0 * std::cosh(2.0 * p.x[0]);
    return j;
  };
  return MetricChart(2, period, radius, metric, jet, "hyperbolic-plane");
}

std::pair<double, double> closed_form_jacobi(double rho, double a, double b, double t) {
  double c, s, dc, ds;
  if (rho < 0.0) {
    const double w = std::sqrt(-rho);
    c = std::cosh(w * t);
    s = std::sinh(w * t) / w;
    dc = w * std::sinh(w * t);
    ds = std::cosh(w * t);
  } else if (rho > 0.0) {
    const double w = std::sqrt(rho);
    c = std::cos(w * t);
    s = std::sin(w * t) / w;
    dc = -w * std::sin(w * t);
    ds = std::cos(w * t);
  } else {
    c = 1.0;
    s = t;
    dc = 0.0;
    ds = 1.0;
  }
  return {a * c + b * s, a * dc + b * ds};
}

Mat jacobi_transition(const Vec& rho, double t) {
  const int m = static_cast<int>(rho.size());
  Mat phi = Mat::Zero(2 * m, 2 * m);
  for (int i = 0; i < m; ++i) {
    const auto [c, dc] = closed_form_jacobi(rho[i], 1.0, 0.0, t);
    const auto [s, ds] = closed_form_jacobi(rho[i], 0.0, 1.0, t);
    phi(i, i) = c;
    phi(i, m + i) = s;
    phi(m + i, i) = dc;
    phi(m + i, m + i) = ds;
  }
  return phi;
}

Mat jacobi_transition(const Mat& k, double t) {
  const int m = static_cast<int>(k.rows());
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (k + k.transpose()));
  const Mat& q = es.eigenvectors();
  Mat big = Mat::Zero(2 * m, 2 * m);
  big.topLeftCorner(m, m) = q;
  big.bottomRightCorner(m, m) = q;
  return big * jacobi_transition(es.eigenvalues(), t) * big.transpose();
}

Mat product_jacobi_operator(const ProductModel& p) {
  if (std::abs(p.alpha * p.alpha + p.beta * p.beta - 1.0) > 1e-12)
    throw ParameterError("product weights must satisfy alpha^2 + beta^2 = 1");
  if (p.k1.rows() != p.k1.cols() || p.k2.rows() != p.k2.cols())
    throw ParameterError("product factors must be square");
  const int m1 = static_cast<int>(p.k1.rows()), m2 = static_cast<int>(p.k2.rows());
  Mat k = Mat::Zero(p.dim(), p.dim());
  k.block(0, 0, m1, m1) = p.alpha * p.alpha * p.k1;
  k.block(m1, m1, m2, m2) = p.beta * p.beta * p.k2;
  return k;
}

Mat product_jacobi_matrix(const ProductModel& p, double /*t*/) {
  const Mat k = product_jacobi_operator(p);
  const int m = static_cast<int>(k.rows());
  Mat a = Mat::Zero(2 * m, 2 * m);
  a.topRightCorner(m, m) = Mat::Identity(m, m);
  a.bottomLeftCorner(m, m) = -k;
  return a;
}

std::vector<double> product_exponents(const ProductModel& p) {
  Eigen::EigenSolver<Mat> es(product_jacobi_matrix(p, 0.0), false);
  std::vector<double> out;
  for (int i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()[i].real());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace geoflow
