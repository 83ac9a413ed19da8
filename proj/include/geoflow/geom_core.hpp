#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace geoflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Point of a tube chart: axis coordinate t and transverse coordinates x.
// The full coordinate vector is (t, x_1, ..., x_{n-1}).
struct ChartPoint {
  double t = 0.0;
  Vec x;

  int dim() const { return static_cast<int>(x.size()) + 1; }
  Vec coords() const;
  static ChartPoint from_coords(const Vec& c);
};

// Metric with first and second coordinate derivatives at one point.
// Index layout: dg[(c*n + a)*n + b] = d_c g_ab,
//               d2g[((c*n + d)*n + a)*n + b] = d_c d_d g_ab.
struct MetricJet {
  int n = 0;
  int order = 0;
  Mat g;
  std::vector<double> dg;
  std::vector<double> d2g;

  double d1(int c, int a, int b) const { return dg[(c * n + a) * n + b]; }
  double d2(int c, int d, int a, int b) const { return d2g[((c * n + d) * n + a) * n + b]; }
};

// Smooth metric on a tube [0, T) x {|x_i| < radius}.
class MetricChart {
 public:
  using MetricFn = std::function<Mat(const ChartPoint&)>;
  using JetFn = std::function<MetricJet(const ChartPoint&, int order)>;

  MetricChart(int dim, double period, double radius, MetricFn metric, JetFn jet = {},
              std::string name = "chart");

  int dim() const { return dim_; }
  double period() const { return period_; }
  double radius() const { return radius_; }
  const std::string& name() const { return name_; }
  bool has_analytic_jet() const { return static_cast<bool>(jet_); }

  bool contains(const ChartPoint& p) const;
  // Throws DomainError outside the chart.
  void check_domain(const ChartPoint& p) const;

  Mat metric(const ChartPoint& p) const;
  // Analytic jet when available, otherwise central differences with one
  // Richardson step.
  MetricJet jet(const ChartPoint& p, int order) const;
  // Same without the domain check; integrator stages may step slightly outside.
  MetricJet jet_unchecked(const ChartPoint& p, int order) const;
  MetricJet finite_difference_jet(const ChartPoint& p, int order, double step,
                                  bool richardson) const;
  double default_fd_step() const { return radius_ * 1e-3; }

 private:
  int dim_;
  double period_;
  double radius_;
  MetricFn metric_;
  JetFn jet_;
  std::string name_;
};

// Metric inverse through Cholesky; throws DegenerateMetricError when g is not
// positive definite.
Mat metric_inverse(const Mat& g);

struct CurvatureData {
  int n = 0;
  // Gamma_{j,ik} at [(j*n + i)*n + k]
  std::vector<double> christoffel_lower;
  // Gamma^k_{ij} at [(k*n + i)*n + j]
  std::vector<double> christoffel;
  // R_{ijkl} at [((i*n + j)*n + k)*n + l]; empty when only connection data was requested
  std::vector<double> riemann;

  double gamma_lower(int j, int i, int k) const { return christoffel_lower[(j * n + i) * n + k]; }
  double gamma(int k, int i, int j) const { return christoffel[(k * n + i) * n + j]; }
  double R(int i, int j, int k, int l) const { return riemann[((i * n + j) * n + k) * n + l]; }
  double R(const Vec& x, const Vec& y, const Vec& z, const Vec& w) const;
};

CurvatureData christoffel_from_jet(const MetricJet& jet, const Mat& ginv);
CurvatureData curvature_from_jet(const MetricJet& jet);

CurvatureData christoffel(const MetricChart& chart, const ChartPoint& p);
CurvatureData curvature_tensor(const MetricChart& chart, const ChartPoint& p);

// K(v, w) = R(v,w,v,w) / |v ^ w|^2. Throws DegeneratePlaneError when the Gram
// determinant is below tol.
double sectional_curvature(const MetricChart& chart, const ChartPoint& p, const Vec& v,
                           const Vec& w, double tol = 1e-12);
double sectional_curvature(const CurvatureData& curv, const Mat& g, const Vec& v, const Vec& w,
                           double tol = 1e-12);

// Matrix of the symmetric form (v, w) -> R(a, v, a, w) restricted to span(frame):
// K_ij = R(a, u_i, a, u_j).
Mat jacobi_operator(const CurvatureData& curv, const Vec& a, const Mat& frame);

// Jacobi operator for a g-unit vector v and a frame of v's orthogonal complement.
// Throws NormalizationError when |g(v, v) - 1| > unit_tol.
Mat curvature_operator_matrix(const MetricChart& chart, const ChartPoint& p, const Vec& v,
                              const Mat& frame, double unit_tol = 1e-9);

// g-orthonormal basis of the g-orthogonal complement of v, obtained by
// Gram-Schmidt on the coordinate vectors. Columns are the basis vectors.
Mat orthonormal_complement(const Mat& g, const Vec& v);

// Connection and Jacobi data along a velocity, computed without the full
// Riemann tensor. Used by the geodesic integrator.
struct AlongGeodesic {
  Vec accel;      // -Gamma^k(v, v)
  Mat frame_rate; // -Gamma(v, .) as n x n matrix: frame' = frame_rate * frame
  Mat jacobi;     // K_ij = R(v, u_i, v, u_j), present when a frame was passed
};
AlongGeodesic along_geodesic(const MetricJet& jet, const Vec& v, const Mat* frame);

}  // namespace geoflow
