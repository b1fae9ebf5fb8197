#include "wildgen/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wildgen/error.hpp"
#include "wildgen/random.hpp"

namespace wildgen {
namespace {

// Day-to-day positional jitter relative to noise_sd.
constexpr double kDailyNoiseFraction = 0.15;
// Fractions of the horizon at which the nominal migration departs and arrives.
constexpr double kDepartureFraction = 0.12;
constexpr double kArrivalFraction = 0.62;

GeoPoint jitter_in_region(const Region& r, double sd, Rng& rng) {
  GeoPoint p{r.center.lon + sd * standard_normal(rng), r.center.lat + sd * standard_normal(rng)};
  const double dx = p.lon - r.center.lon;
  const double dy = p.lat - r.center.lat;
  const double d = std::hypot(dx, dy);
  const double limit = 0.7 * r.radius;
  if (d > limit) {
    p.lon = r.center.lon + dx * limit / d;
    p.lat = r.center.lat + dy * limit / d;
  }
  return p;
}

GeoPoint clamp_to_region(GeoPoint p, const Region& r) {
  const double dx = p.lon - r.center.lon;
  const double dy = p.lat - r.center.lat;
  const double d = std::hypot(dx, dy);
  if (d > r.radius) {
    p.lon = r.center.lon + dx * r.radius / d;
    p.lat = r.center.lat + dy * r.radius / d;
  }
  return p;
}

double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

}  // namespace

void validate(const SynthConfig& cfg) {
  require(cfg.n_trajectories >= 1, "n_trajectories must be >= 1");
  require(cfg.horizon_days >= 2, "horizon_days must be >= 2");
  require(cfg.n_stopovers >= 0, "n_stopovers must be >= 0");
  require(cfg.stopover_dwell_days >= 0, "stopover_dwell_days must be >= 0");
  require(cfg.noise_sd >= 0.0 && std::isfinite(cfg.noise_sd), "noise_sd must be >= 0");
  require(cfg.timing_jitter_days >= 0.0, "timing_jitter_days must be >= 0");
  require(cfg.start_region.radius >= 0.0 && cfg.end_region.radius >= 0.0, "region radius must be >= 0");
  require(is_valid(cfg.start_region.center) && is_valid(cfg.end_region.center), "region centers must be valid coordinates");
  require(!(cfg.start_region.center == cfg.end_region.center), "start and end regions must be distinct");
}

std::vector<GeoPoint> stopover_sites(const SynthConfig& cfg) {
  const GeoPoint a = cfg.start_region.center;
  const GeoPoint b = cfg.end_region.center;
  const double dx = b.lon - a.lon;
  const double dy = b.lat - a.lat;
  // Unit normal to the corridor; stopovers bow to one side like a flyway.
  const double len = std::hypot(dx, dy);
  const double nx = -dy / len;
  const double ny = dx / len;
  std::vector<GeoPoint> sites;
  for (int i = 1; i <= cfg.n_stopovers; ++i) {
    const double f = static_cast<double>(i) / (cfg.n_stopovers + 1);
    const double bow = 0.15 * len * std::sin(std::numbers::pi * f);
    sites.push_back({a.lon + f * dx + bow * nx, a.lat + f * dy + bow * ny});
  }
  return sites;
}

TrajectorySet generate_corpus(const SynthConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  const int m = cfg.horizon_days;
  const auto sites = stopover_sites(cfg);
  const int s = cfg.n_stopovers;

  const double departure = kDepartureFraction * (m - 1);
  const double arrival = kArrivalFraction * (m - 1);
  // Dwell is squeezed if the horizon cannot fit it with some travel time.
  const double dwell = s > 0 ? std::min<double>(cfg.stopover_dwell_days, 0.6 * (arrival - departure) / s) : 0.0;
  const double travel = (arrival - departure - s * dwell) / (s + 1);

  TrajectorySet set(static_cast<std::size_t>(m));
  for (int n = 0; n < cfg.n_trajectories; ++n) {
    std::vector<GeoPoint> waypoints;
    waypoints.push_back(jitter_in_region(cfg.start_region, cfg.noise_sd, rng));
    for (const auto& site : sites) {
      waypoints.push_back({site.lon + cfg.noise_sd * standard_normal(rng), site.lat + cfg.noise_sd * standard_normal(rng)});
    }
    waypoints.push_back(jitter_in_region(cfg.end_region, cfg.noise_sd, rng));

    // Segment schedule: [leave_k, arrive_k] is the travel between waypoint k and k+1.
    std::vector<double> leave(static_cast<std::size_t>(s + 1));
    std::vector<double> reach(static_cast<std::size_t>(s + 1));
    double t = departure;
    for (int k = 0; k <= s; ++k) {
      leave[static_cast<std::size_t>(k)] = t;
      t += travel;
      reach[static_cast<std::size_t>(k)] = t;
      if (k < s) {
        const double jitter = cfg.timing_jitter_days * (2.0 * uniform01(rng) - 1.0);
        t += std::max(0.0, dwell + jitter);
      }
    }

    const double daily_sd = kDailyNoiseFraction * cfg.noise_sd;
    Trajectory traj;
    traj.points.reserve(static_cast<std::size_t>(m));
    for (int d = 0; d < m; ++d) {
      const double day = d;
      GeoPoint p = waypoints.back();
      if (day <= leave.front()) {
        p = waypoints.front();
      } else {
        for (int k = 0; k <= s; ++k) {
          const auto ku = static_cast<std::size_t>(k);
          if (day < reach[ku]) {
            if (day <= leave[ku]) {
              p = waypoints[ku];
            } else {
              const double u = smoothstep((day - leave[ku]) / (reach[ku] - leave[ku]));
              p = {waypoints[ku].lon + u * (waypoints[ku + 1].lon - waypoints[ku].lon),
                   waypoints[ku].lat + u * (waypoints[ku + 1].lat - waypoints[ku].lat)};
            }
            break;
          }
        }
      }
      if (daily_sd > 0.0) {
        p.lon += daily_sd * standard_normal(rng);
        p.lat += daily_sd * standard_normal(rng);
      }
      traj.points.push_back(p);
    }
    traj.points.front() = clamp_to_region(traj.points.front(), cfg.start_region);
    traj.points.back() = clamp_to_region(traj.points.back(), cfg.end_region);
    set.push_back(std::move(traj));
  }
  return set;
}

}  // namespace wildgen
