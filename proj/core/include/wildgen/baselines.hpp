#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "wildgen/geo.hpp"
#include "wildgen/random.hpp"

namespace wildgen {

// ---------------------------------------------------------------------------
// Levy walk / flight

struct LevyParams {
  double step_location = 0.0;  // Cauchy location of step lengths, degrees
  double step_scale = 1.0;     // Cauchy scale, degrees
  double angular_sd = 0.0;     // radians, turning-angle spread
  double linear_sd = 0.0;      // degrees, step-length jitter
  double alpha_estimate = 0.0; // tail exponent of the step-length density
  double rotation = 0.0;       // radians, applied counter-clockwise
  double max_step = 0.0;       // truncation for single steps; 0 disables

  void validate() const;
};

/// Pools per-day steps over the corpus and summarizes them.
LevyParams fit_levy(const TrajectorySet& real);

/// Clockwise-from-north planar bearing atan2(dlon, dlat).
double azimuth(const GeoPoint& from, const GeoPoint& to);

/// Walk with initial heading 0 (+lon); afterwards the whole path is rotated
/// counter-clockwise by params.rotation about `start`. Returns steps + 1 points.
Trajectory generate_levy(const LevyParams& params, int steps, const GeoPoint& start, Rng& rng);

/// Tail exponent from a log-log regression of the log-binned step-length
/// density over steps at or above the median. Returns 0 when fewer than two
/// occupied bins exist.
double estimate_tail_exponent(std::vector<double> steps);

// ---------------------------------------------------------------------------
// Heteroscedastic Gaussian-process regression over day index

struct KernelParams {
  double signal_variance = 1.0;
  double length_scale = 10.0;  // days
  double bias_variance = 1.0;

  double operator()(double a, double b) const;
};

struct GpDimension {
  KernelParams kernel;
  double offset = 0.0;           // constant mean removed before fitting
  Eigen::VectorXd targets;       // per-day mean of the subsample, offset removed
  Eigen::MatrixXd cholesky;      // lower factor of K + diag(noise / replicates)
  Eigen::VectorXd posterior_mean;
  double log_marginal_likelihood = 0.0;
};

struct HgprModel {
  std::vector<double> inputs;             // day indices 0..m-1
  std::vector<std::size_t> subsample;     // indices of trajectories used
  std::vector<double> noise;              // g(day), per-day noise variance
  GpDimension lon;
  GpDimension lat;

  std::size_t horizon() const { return inputs.size(); }
};

inline constexpr double kNoiseFloor = 1e-6;

/// Fits one GP per coordinate on a seeded subsample of trajectories; the
/// noise curve is the per-day variance of the point norms sqrt(lon^2+lat^2).
HgprModel fit_hgpr(const TrajectorySet& real, double subsample_fraction, std::uint64_t seed);

/// Log marginal likelihood of per-day means y under the kernel with
/// heteroscedastic noise `noise_diag`; -inf if the system is not PD.
double gp_log_marginal_likelihood(const std::vector<double>& inputs, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& noise_diag, const KernelParams& kernel);

/// Posterior mean plus independent N(0, g(day)) draws per day and coordinate.
TrajectorySet sample_hgpr(const HgprModel& model, int count, Rng& rng);

}  // namespace wildgen
