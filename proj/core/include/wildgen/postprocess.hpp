#pragma once

#include <string>
#include <vector>

#include "wildgen/geo.hpp"

namespace wildgen {

struct SavgolSpec {
  int window = 21;  // 2n + 1
  int polyorder = 3;

  void validate() const;
  int half_width() const { return window / 2; }
};

/// Central row of the least-squares polynomial projection: convolving with
/// these weights evaluates the local degree-`polyorder` fit at the centre.
std::vector<double> savgol_coefficients(const SavgolSpec& spec);

/// Applies the filter to one sequence with mirror padding (x[-k] = x[k]).
std::vector<double> savgol_filter(const std::vector<double>& values, const SavgolSpec& spec);

/// lon and lat are filtered independently.
Trajectory smooth_trajectory(const Trajectory& traj, const SavgolSpec& spec);
TrajectorySet smooth_set(const TrajectorySet& set, const SavgolSpec& spec);

/// Counter-clockwise, strictly convex polygon.
struct ConvexRegion {
  std::vector<GeoPoint> vertices;
};

inline constexpr double kContainmentTolerance = 1e-12;

/// Andrew's monotone chain; collinear boundary points are dropped.
ConvexRegion convex_hull(std::vector<GeoPoint> points);

/// Inside or on the boundary.
bool contains(const ConvexRegion& region, const GeoPoint& p);
bool contains(const ConvexRegion& region, const Trajectory& t);

struct FilterResult {
  TrajectorySet kept;
  std::size_t discarded_count = 0;
};

FilterResult mbr_filter(const TrajectorySet& candidates, const ConvexRegion& region);

/// GeoJSON Feature with a closed Polygon ring.
std::string region_to_geojson(const ConvexRegion& region);
ConvexRegion region_from_geojson(const std::string& text);

}  // namespace wildgen
