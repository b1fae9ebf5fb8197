#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wildgen {

/// A position in degrees. Distances throughout the library are planar
/// Euclidean in (lon, lat) degree space.
struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

double distance(const GeoPoint& a, const GeoPoint& b);

/// True when both coordinates are finite and inside the valid lon/lat box.
bool is_valid(const GeoPoint& p);

/// One daily-resolution path; points[d] is the position on day d.
struct Trajectory {
  std::vector<GeoPoint> points;

  std::size_t size() const { return points.size(); }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

double path_length(const Trajectory& t);

/// A collection of trajectories sharing a common horizon.
class TrajectorySet {
 public:
  TrajectorySet() = default;
  explicit TrajectorySet(std::size_t horizon) : horizon_(horizon) {}
  TrajectorySet(std::size_t horizon, std::vector<Trajectory> trajectories);

  std::size_t horizon() const { return horizon_; }
  std::size_t size() const { return trajectories_.size(); }
  bool empty() const { return trajectories_.empty(); }

  const Trajectory& operator[](std::size_t i) const { return trajectories_[i]; }
  const std::vector<Trajectory>& trajectories() const { return trajectories_; }

  /// Throws if `t` does not have exactly horizon() points.
  void push_back(Trajectory t);

  /// First `n` trajectories (all of them when n >= size()).
  TrajectorySet head(std::size_t n) const;

  /// Every point of every trajectory, trajectory-major.
  std::vector<GeoPoint> pooled_points() const;

  auto begin() const { return trajectories_.begin(); }
  auto end() const { return trajectories_.end(); }

  friend bool operator==(const TrajectorySet&, const TrajectorySet&) = default;

 private:
  std::size_t horizon_ = 0;
  std::vector<Trajectory> trajectories_;
};

double mean_path_length(const TrajectorySet& set);

}  // namespace wildgen
