#pragma once

#include <vector>

namespace geoflow {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
// Gauss-Legendre rule on [-1, 1].
GaussRule gauss_legendre(int n);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
// Ordinary least squares y ~ slope * x + intercept. Throws ParameterError
// when fewer than two distinct abscissae are given.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace geoflow
