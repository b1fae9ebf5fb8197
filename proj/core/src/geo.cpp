#include "wildgen/geo.hpp"

#include <cmath>
#include <string>

#include "wildgen/error.hpp"

namespace wildgen {

double distance(const GeoPoint& a, const GeoPoint& b) {
  return std::hypot(a.lon - b.lon, a.lat - b.lat);
}

bool is_valid(const GeoPoint& p) {
  return std::isfinite(p.lon) && std::isfinite(p.lat) && p.lon >= -180.0 && p.lon <= 180.0 &&
         p.lat >= -90.0 && p.lat <= 90.0;
}

double path_length(const Trajectory& t) {
  double total = 0.0;
  for (std::size_t i = 1; i < t.points.size(); ++i) total += distance(t.points[i - 1], t.points[i]);
  return total;
}

TrajectorySet::TrajectorySet(std::size_t horizon, std::vector<Trajectory> trajectories)
    : horizon_(horizon) {
  trajectories_.reserve(trajectories.size());
  for (auto& t : trajectories) push_back(std::move(t));
}

void TrajectorySet::push_back(Trajectory t) {
  if (t.size() != horizon_) {
    fail(ErrorCode::kInvalidArgument, "trajectory has " + std::to_string(t.size()) +
                                          " points, expected horizon " + std::to_string(horizon_));
  }
  trajectories_.push_back(std::move(t));
}

TrajectorySet TrajectorySet::head(std::size_t n) const {
  TrajectorySet out(horizon_);
  const std::size_t count = std::min(n, trajectories_.size());
  out.trajectories_.assign(trajectories_.begin(), trajectories_.begin() + static_cast<std::ptrdiff_t>(count));
  return out;
}

std::vector<GeoPoint> TrajectorySet::pooled_points() const {
  std::vector<GeoPoint> out;
  out.reserve(trajectories_.size() * horizon_);
  for (const auto& t : trajectories_) out.insert(out.end(), t.points.begin(), t.points.end());
  return out;
}

double mean_path_length(const TrajectorySet& set) {
  if (set.empty()) return 0.0;
  double total = 0.0;
  for (const auto& t : set) total += path_length(t);
  return total / static_cast<double>(set.size());
}

}  // namespace wildgen
