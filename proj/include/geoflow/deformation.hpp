#pragma once

#include <array>
#include <vector>

#include "geoflow/geom_core.hpp"

namespace geoflow {

// Plateau height making the unsmoothed profile take the value -1/2 at 0.
double solve_h_tau(double tau);

// Profile x -> phi(x / lambda) built from the piecewise linear slope profile
// with ramps of width tau, integrated twice, extended evenly to x < 0 and
// optionally mollified with a C-infinity bump of radius sigma.
class BumpProfile {
 public:
  struct Value {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
  };

  // Raw profile with plateau h. Smoothing keeps the support inside [-lambda, lambda].
  BumpProfile(double tau, double h, double lambda, double sigma);

  // h = h_tau and, when smoothed, rescaled so that value(0) = -1/2 exactly.
  static BumpProfile calibrated(double tau, double lambda, double sigma);
  // sigma = tau * lambda / 4, or lambda / 100 when tau = 0.
  static double default_sigma(double tau, double lambda);

  double tau() const { return tau_; }
  double h() const { return h_ * scale_; }
  double lambda() const { return lambda_; }
  double sigma() const { return sigma_; }

  Value eval(double x) const;
  // x^2 phi'' + 4 x phi' + 2 phi
  double F(double x) const;

  // Unit-scale slope profile (before smoothing), for oracles.
  double slope(double s) const;

 private:
  struct Piece {
    double a, b;
    std::array<double, 4> c;  // value polynomial in s
  };
  double tau_, h_, lambda_, sigma_;
  double inner_;  // support scale of the unsmoothed profile
  double scale_ = 1.0;
  std::vector<Piece> pieces_;  // cover [-1, 1]
};

struct FBoundReport {
  double f_at_zero = 0.0;
  double max_ratio = 0.0;
  double argmax = 0.0;
  double bound = 0.0;
  bool pass = false;
};
FBoundReport check_F_bound(const BumpProfile& p, double delta, int grid);

struct DeformationSpec {
  int n = 4;
  int r = 1;
  double epsilon = 0.02;
  double tau = 0.05;
  double amplitude = 0.25;
};

// alpha(x) = sum_{k in B} x_k^2 Phi_k(x); all derivatives are in the transverse
// coordinates x_1..x_{n-1}.
class Deformation {
 public:
  explicit Deformation(const DeformationSpec& spec);

  struct Value {
    double alpha = 0.0;
    Vec grad;
    Mat hess;
  };
  const DeformationSpec& spec() const { return spec_; }
  const BumpProfile& side_profile() const { return side_; }
  const BumpProfile& core_profile() const { return core_; }

  Value eval(const Vec& x) const;
  double Phi(int k, const Vec& x) const;
  // Upper bound for |alpha| over the tube.
  double sup_bound() const;

 private:
  DeformationSpec spec_;
  BumpProfile side_;
  BumpProfile core_;
};

Deformation::Value alpha_eval(const Deformation& d, const ChartPoint& p);

struct EstimatesReport {
  std::vector<double> epsilon;
  // rows: |alpha|, |grad alpha|, mixed |d2 alpha|, |d2_kk alpha|; one column per epsilon
  std::array<std::vector<double>, 4> maxima;
  std::array<double, 4> exponents{};
  std::array<double, 4> nominal{4.0, 2.0, 1.0, 0.0};
  double m0 = 0.0;
};
// Maxima over a grid that is fixed in the natural scaled coordinates.
EstimatesReport check_estimates(const DeformationSpec& spec, const std::vector<double>& eps_list,
                                int points_per_side = 12);

// g*_00 = g_00 + alpha, other components untouched.
MetricChart deformed_chart(const MetricChart& base, const Deformation& d);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace geoflow
