#pragma once

#include <optional>
#include <vector>

#include "geoflow/geom_core.hpp"

namespace geoflow {

struct PhasePoint {
  ChartPoint position;
  Vec velocity;
};

// Jacobi field components in a parallel orthonormal frame: xi = field, eta = covariant derivative.
struct JacobiState {
  Vec xi;
  Vec eta;

  Vec stacked() const;
  static JacobiState from_stacked(const Vec& s);
};

struct ExitEvent {
  double time = 0.0;
  PhasePoint point;
};

struct IntegrationOptions {
  double tol = 1e-10;
  // Spacing of stored samples; steps are clipped to land on sample times.
  double sample_dt = 0.05;
  double max_step = 0.05;
  // Stop when max_i |x_i| reaches this value; <= 0 means the chart radius.
  double exit_halfwidth = 0.0;
  bool jacobi = true;
  // g-orthonormal frame of the velocity's complement; empty means the default frame.
  Mat initial_frame;
  std::size_t max_steps = 2'000'000;
};

struct OrbitSegment {
  std::vector<double> times;
  std::vector<PhasePoint> points;
  // n x (n-1) parallel frames at the samples
  std::vector<Mat> frames;
  // transitions[i] maps the Jacobi state at sample i to sample i+1 (2m x 2m, layout (xi; eta))
  std::vector<Mat> transitions;
  std::optional<ExitEvent> exit;
  std::size_t steps = 0;
  std::size_t rejected = 0;
  double max_speed_drift = 0.0;

  double end_time() const { return times.back(); }
  // Product of transitions from sample 0 to sample i.
  Mat transition_to(std::size_t i) const;
};

// Geodesic from start (velocity must be g-unit) up to time t_end or the exit event.
OrbitSegment integrate_geodesic(const MetricChart& chart, const PhasePoint& start, double t_end,
                                const IntegrationOptions& opts = {});

// Parallel frames stored along the segment.
const std::vector<Mat>& parallel_frame(const MetricChart& chart, const OrbitSegment& segment);

JacobiState propagate_jacobi(const OrbitSegment& segment, const JacobiState& s);
// States at every sample of the segment.
std::vector<JacobiState> propagate_jacobi_samples(const OrbitSegment& segment,
                                                  const JacobiState& s);

// Omega(a, b) = xi_a . eta_b - eta_a . xi_b
double symplectic_pairing(const JacobiState& a, const JacobiState& b);
// max |Phi^T J Phi - J|
double symplectic_defect(const Mat& phi);
// Phi^{-1} = -J Phi^T J for a symplectic Phi
Mat symplectic_inverse(const Mat& phi);

// Same geodesic run backwards: velocity negated, state (xi, eta) -> (xi, -eta).
PhasePoint reversed(const PhasePoint& p);
JacobiState reversed(const JacobiState& s);

// Unit vector along v for the metric at p.
Vec normalize_velocity(const MetricChart& chart, const ChartPoint& p, const Vec& v);

}  // namespace geoflow
