#pragma once

#include <utility>
#include <vector>

#include "geoflow/geom_core.hpp"

namespace geoflow {

// Rank-one locally symmetric model along a geodesic: curvature -1 on an
// r-dimensional block A, -1/4 on the complement B. Frame order is
// (e0 = geodesic direction, A-block, B-block).
class SymmetricModel {
 public:
  enum class Kind { complex_hyperbolic, quaternionic_hyperbolic, constant_curvature, block_only };

  SymmetricModel(int n, int r);

  int n() const { return n_; }
  int r() const { return r_; }
  Kind kind() const { return kind_; }
  // Skew structures J with J e0 spanning A (empty for constant curvature).
  const std::vector<Mat>& structures() const { return structures_; }

  // Model curvature tensor in the orthonormal frame.
  double R(int i, int j, int k, int l) const { return tensor_[((i * n_ + j) * n_ + k) * n_ + l]; }
  const std::vector<double>& tensor() const { return tensor_; }

  // diag(-1 I_r, -1/4 I_{n-1-r})
  Mat axis_jacobi_operator() const;
  Vec axis_jacobi_eigenvalues() const;

 private:
  int n_;
  int r_;
  Kind kind_;
  std::vector<Mat> structures_;
  std::vector<double> tensor_;
};

// Second-order Fermi expansion of the model metric around a closed geodesic
// of period T, valid for |x_i| < radius.
MetricChart symmetric_chart(const SymmetricModel& model, double period, double radius);

// Metric with components g_ab(x) = delta_ab + sum_cd C[a][b][c][d] x_c x_d (coordinates
// indexed 0..n-1, axis coordinate 0 never enters). C must be symmetric in (a,b) and (c,d).
MetricChart quadratic_chart(int n, std::vector<double> coeff, double period, double radius,
                            std::string name);

MetricChart euclidean_chart(int n, double period, double radius);
// Exact hyperbolic plane around a closed geodesic: g = diag(cosh^2 x, 1).
MetricChart hyperbolic_plane_chart(double period, double radius);

// a c_rho(t) + b s_rho(t) and its time derivative.
std::pair<double, double> closed_form_jacobi(double rho, double a, double b, double t);

// Transition matrix of (xi, eta)' = (eta, -K xi) over time t, K constant.
// Layout: state vector (xi; eta), each of length m.
Mat jacobi_transition(const Vec& rho_diagonal, double t);
Mat jacobi_transition(const Mat& k, double t);

// Weighted product of two along-geodesic Jacobi systems.
struct ProductModel {
  Mat k1;
  Mat k2;
  double alpha = 1.0;
  double beta = 0.0;
  // Adds the flat frame direction (beta u, -alpha v) mixing the two factors.
  bool mixed_direction = false;

  int dim() const {
    return static_cast<int>(k1.rows() + k2.rows()) + (mixed_direction ? 1 : 0);
  }
};

// K of the product system in the frame (factor 1, factor 2, mixed).
Mat product_jacobi_operator(const ProductModel& p);
// [[0, I], [-K, 0]] acting on (xi; eta).
Mat product_jacobi_matrix(const ProductModel& p, double t);
// Real parts of the eigenvalues of the assembled matrix, sorted descending.
std::vector<double> product_exponents(const ProductModel& p);

}  // namespace geoflow
