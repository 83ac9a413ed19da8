#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "geoflow/flow.hpp"

namespace geoflow {

enum class ConeSide { unstable, stable };

struct ConeSpec {
  // Frame indices of the A-block (0-based in the (n-1)-dimensional frame).
  std::vector<int> a_block;
  double opening = 1.5;
  ConeSide side = ConeSide::unstable;

  // Orthogonal projector onto the A-block in an m-dimensional frame.
  Mat projector(int m) const;
  void validate(int m) const;
};

ConeSpec make_cone(int r, double opening, ConeSide side = ConeSide::unstable);

// |Pr_A(xi +- eta)|^2 / (|xi|^2 + |eta|^2)
double theta(const JacobiState& s, const ConeSpec& spec);
double theta(const JacobiState& s, const Mat& projector, ConeSide side);

// Closed form of dTheta/dt on the symmetric model (curvature -1 on A, -1/4 on B)
// for a unit state.
double theta_derivative_symmetric(const JacobiState& s, const ConeSpec& spec);

// A-projector in frame coordinates at a phase point with frame (n x m).
using ProjectorFn = std::function<Mat(const PhasePoint&, const Mat& frame)>;
// Projector onto the frame indices of spec.a_block.
ProjectorFn block_projector(const ConeSpec& spec);
// Spectral projector onto the r most negative eigenvalues of the base chart's
// Jacobi operator at the point, expressed in the given frame.
ProjectorFn spectral_projector(const MetricChart& base, int r);

// Central difference of Theta along the flow of chart from start/frame.
double theta_derivative_numeric(const MetricChart& chart, const PhasePoint& start, const Mat& frame,
                                const JacobiState& s, ConeSide side, const ProjectorFn& proj,
                                double h, double tol = 1e-12);
double theta_derivative_numeric(const MetricChart& chart, const PhasePoint& start, const Mat& frame,
                                const JacobiState& s, const ConeSpec& spec, double h,
                                double tol = 1e-12);

// Deterministic generator for task `task` under `seed`.
std::mt19937_64 task_rng(std::uint64_t seed, std::uint64_t task);

// Unit state with Theta = c exactly: the normalized A-axis component is uniform on its
// sphere of radius sqrt(c/2), the remaining components uniform on the complementary sphere.
JacobiState sample_boundary_state(std::mt19937_64& rng, int m, const ConeSpec& spec);
// Same for an arbitrary rank-r orthogonal projector, sampled in its eigenbasis.
JacobiState sample_boundary_state(std::mt19937_64& rng, const Mat& projector, int r, double c,
                                  ConeSide side);
// Unit state with Theta uniform in [c, 2).
JacobiState sample_cone_state(std::mt19937_64& rng, int m, const ConeSpec& spec);
Vec random_unit(std::mt19937_64& rng, int dim);

// Linearized flow along one orbit: transitions between sample times and the
// A-projector at each sample, in the frame coordinates used by the transitions.
struct JacobiCocycle {
  std::vector<double> times;
  std::vector<Mat> transitions;
  std::vector<Mat> projectors;

  int m() const { return static_cast<int>(projectors.front().rows()); }
  double duration() const { return times.back() - times.front(); }
};

JacobiCocycle cocycle_from_segment(const OrbitSegment& seg, const ProjectorFn& proj);
// Constant curvature operator K over [0, length] sampled every dt.
JacobiCocycle constant_cocycle(const Mat& k, const Mat& projector, double length, double dt);
// Appends b after a. The last projector of a must agree with b's first.
void append_cocycle(JacobiCocycle& a, const JacobiCocycle& b);
// Changes the frame coordinates at the end of a by the orthogonal matrix q (new = q^T old).
void rotate_cocycle_end(JacobiCocycle& a, const Mat& q);
// Time-reversed cocycle: reversed order, inverted transitions, eta -> -eta.
JacobiCocycle reverse_cocycle(const JacobiCocycle& c);

// Transition over the whole cocycle.
Mat cocycle_transition(const JacobiCocycle& c);

struct GrowthFit {
  double rate = 0.0;
  double r_squared = 0.0;
};
// Least-squares slope of log |Pr_A(xi +- eta)| against time along the cocycle.
GrowthFit strong_growth_rate(const JacobiCocycle& c, const JacobiState& s, ConeSide side);
// Same for the full state norm.
GrowthFit norm_growth_rate(const JacobiCocycle& c, const JacobiState& s);

// Lyapunov exponents by QR reorthonormalization after each transition; sorted descending.
std::vector<double> lyapunov_spectrum(const JacobiCocycle& c);

struct SplittingOptions {
  int r = 1;
  std::vector<double> openings{1.1, 1.3, 1.5, 1.7, 1.9};
  double rate_opening = 1.5;
  int boundary_samples = 16;
  int rate_samples = 8;
  double window_time = 2.0;
  int max_windows = 4;
  double gap_tol = 0.1;
  double central_tol = 0.1;
  bool check_invariance = true;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct SplittingVerdict {
  bool invariance_pass = true;
  double min_dtheta = 0.0;
  double min_theta_gain = 0.0;
  std::vector<double> unstable_rates;
  std::vector<double> stable_rates;
  std::vector<std::vector<double>> spectra;
  double min_gap = 0.0;
  double min_central_abs = 0.0;
  double max_central = 0.0;
  bool rates_consistent = true;
  std::string label;
};

SplittingVerdict detect_splitting(const std::vector<JacobiCocycle>& orbits,
                                  const SplittingOptions& opts);

}  // namespace geoflow
