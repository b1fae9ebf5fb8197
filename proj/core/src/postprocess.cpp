#include "wildgen/postprocess.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>
#include <json.hpp>

#include "wildgen/error.hpp"

namespace wildgen {
namespace {

double cross(const GeoPoint& o, const GeoPoint& a, const GeoPoint& b) {
  return (a.lon - o.lon) * (b.lat - o.lat) - (a.lat - o.lat) * (b.lon - o.lon);
}

}  // namespace

void SavgolSpec::validate() const {
  require(polyorder >= 0, "savgol polyorder must be >= 0");
  require(window % 2 == 1 && window > 0, "savgol window must be odd");
  require(window >= polyorder + 2, "savgol window must be >= polyorder + 2");
}

std::vector<double> savgol_coefficients(const SavgolSpec& spec) {
  spec.validate();
  const int n = spec.half_width();
  const int cols = spec.polyorder + 1;
  Eigen::MatrixXd vander(spec.window, cols);
  for (int j = -n; j <= n; ++j) {
    double v = 1.0;
    for (int p = 0; p < cols; ++p) {
      vander(j + n, p) = v;
      v *= j;
    }
  }
  // The fitted constant term is e0^T (A^T A)^-1 A^T y; its weights are the
  // least-squares solution against the identity.
  const Eigen::MatrixXd proj =
      vander.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(spec.window, spec.window));
  std::vector<double> c(static_cast<std::size_t>(spec.window));
  for (int j = 0; j < spec.window; ++j) c[static_cast<std::size_t>(j)] = proj(0, j);
  return c;
}

std::vector<double> savgol_filter(const std::vector<double>& values, const SavgolSpec& spec) {
  const auto coeffs = savgol_coefficients(spec);
  const int n = spec.half_width();
  const auto len = static_cast<int>(values.size());
  if (len < spec.window) {
    fail(ErrorCode::kInvalidArgument, "sequence of length " + std::to_string(len) + " is shorter than savgol window " +
                                          std::to_string(spec.window));
  }
  auto at = [&](int i) {
    if (i < 0) i = -i;
    if (i >= len) i = 2 * (len - 1) - i;
    return values[static_cast<std::size_t>(i)];
  };
  std::vector<double> out(values.size());
  for (int i = 0; i < len; ++i) {
    double acc = 0.0;
    for (int j = -n; j <= n; ++j) acc += coeffs[static_cast<std::size_t>(j + n)] * at(i + j);
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

Trajectory smooth_trajectory(const Trajectory& traj, const SavgolSpec& spec) {
  std::vector<double> lon(traj.size()), lat(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    lon[i] = traj.points[i].lon;
    lat[i] = traj.points[i].lat;
  }
  const auto slon = savgol_filter(lon, spec);
  const auto slat = savgol_filter(lat, spec);
  Trajectory out;
  out.points.resize(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) out.points[i] = {slon[i], slat[i]};
  return out;
}

TrajectorySet smooth_set(const TrajectorySet& set, const SavgolSpec& spec) {
  TrajectorySet out(set.horizon());
  for (const auto& t : set) out.push_back(smooth_trajectory(t, spec));
  return out;
}

ConvexRegion convex_hull(std::vector<GeoPoint> points) {
  for (const auto& p : points) require(std::isfinite(p.lon) && std::isfinite(p.lat), "hull points must be finite");
  std::sort(points.begin(), points.end(),
            [](const GeoPoint& a, const GeoPoint& b) { return a.lon < b.lon || (a.lon == b.lon && a.lat < b.lat); });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) fail(ErrorCode::kDomain, "degenerate hull");

  std::vector<GeoPoint> hull(2 * points.size());
  std::size_t k = 0;
  for (const auto& p : points) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    const auto& p = points[i];
    while (k >= lower && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  if (hull.size() < 3) fail(ErrorCode::kDomain, "degenerate hull");
  return {std::move(hull)};
}

bool contains(const ConvexRegion& region, const GeoPoint& p) {
  const auto& v = region.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (cross(v[i], v[(i + 1) % v.size()], p) < -kContainmentTolerance) return false;
  }
  return true;
}

bool contains(const ConvexRegion& region, const Trajectory& t) {
  return std::all_of(t.points.begin(), t.points.end(), [&](const GeoPoint& p) { return contains(region, p); });
}

FilterResult mbr_filter(const TrajectorySet& candidates, const ConvexRegion& region) {
  require(region.vertices.size() >= 3, "mbr_filter needs a region with at least 3 vertices");
  FilterResult r{TrajectorySet(candidates.horizon()), 0};
  for (const auto& t : candidates) {
    if (contains(region, t)) {
      r.kept.push_back(t);
    } else {
      ++r.discarded_count;
    }
  }
  return r;
}

std::string region_to_geojson(const ConvexRegion& region) {
  nlohmann::ordered_json ring = nlohmann::ordered_json::array();
  for (const auto& p : region.vertices) ring.push_back({p.lon, p.lat});
  if (!region.vertices.empty()) ring.push_back({region.vertices.front().lon, region.vertices.front().lat});
  nlohmann::ordered_json feature = {
      {"type", "Feature"},
      {"properties", {{"name", "mbr"}}},
      {"geometry", {{"type", "Polygon"}, {"coordinates", nlohmann::ordered_json::array({ring})}}},
  };
  return feature.dump(2) + "\n";
}

ConvexRegion region_from_geojson(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("region GeoJSON: ") + e.what());
  }
  const nlohmann::json* geometry = &doc;
  if (doc.value("type", "") == "Feature") geometry = &doc.at("geometry");
  if (geometry->value("type", "") != "Polygon") fail(ErrorCode::kParse, "region GeoJSON must be a Polygon");
  std::vector<GeoPoint> points;
  for (const auto& c : geometry->at("coordinates").at(0)) points.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
  return convex_hull(std::move(points));
}

}  // namespace wildgen
