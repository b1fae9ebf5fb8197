#pragma once

#include <cstdint>

#include "wildgen/geo.hpp"

namespace wildgen {

struct Region {
  GeoPoint center;
  double radius = 1.0;  // degrees
};

/// Synthetic migration corpus: every individual leaves a start region, passes
/// the same chain of stopovers (dwelling at each) and settles in an end region.
struct SynthConfig {
  int n_trajectories = 60;
  int horizon_days = 185;
  Region start_region{{8.0, 52.5}, 1.5};
  Region end_region{{58.0, 68.5}, 2.5};
  int n_stopovers = 3;
  int stopover_dwell_days = 18;
  double noise_sd = 0.6;  // per-individual waypoint jitter, degrees
  // Per-individual spread of each dwell length; only matters with stopovers.
  double timing_jitter_days = 6.0;
  std::uint64_t seed = 7;
};

void validate(const SynthConfig& cfg);

/// Deterministic given cfg.seed.
TrajectorySet generate_corpus(const SynthConfig& cfg);

/// The shared stopover locations (no jitter), in visiting order.
std::vector<GeoPoint> stopover_sites(const SynthConfig& cfg);

}  // namespace wildgen
