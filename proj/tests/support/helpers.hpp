#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "wildgen/geo.hpp"

namespace wildgen::testing {

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("wildgen_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<GeoPoint> random_cloud(std::mt19937_64& rng, std::size_t n, double spread = 10.0) {
  std::normal_distribution<double> g(0.0, spread);
  std::vector<GeoPoint> pts(n);
  for (auto& p : pts) p = {g(rng), g(rng)};
  return pts;
}

inline Trajectory line_trajectory(GeoPoint start, GeoPoint step, std::size_t n) {
  Trajectory t;
  for (std::size_t i = 0; i < n; ++i) {
    const double k = static_cast<double>(i);
    t.points.push_back({start.lon + k * step.lon, start.lat + k * step.lat});
  }
  return t;
}

/// Small corpus: n noisy copies of a straight path, for fast pipeline tests.
inline TrajectorySet noisy_lines(std::size_t n, std::size_t horizon, std::uint64_t seed, double sd = 0.2) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  TrajectorySet set(horizon);
  for (std::size_t i = 0; i < n; ++i) {
    const double off = g(rng);
    Trajectory t;
    for (std::size_t d = 0; d < horizon; ++d) {
      const double k = static_cast<double>(d);
      t.points.push_back({10.0 + 0.3 * k + g(rng), 50.0 + 0.1 * k + off + g(rng)});
    }
    set.push_back(std::move(t));
  }
  return set;
}

/// Fast end-to-end config: a short horizon, a narrow network and few epochs.
/// The region filter is off by default because Levy walks almost never fit
/// inside the hull of so small a corpus; generate modes set it explicitly.
inline std::string tiny_config_json(std::uint64_t seed = 5) {
  return R"({
  "seed": )" + std::to_string(seed) + R"(,
  "synth": {"n_trajectories": 16, "horizon_days": 30, "n_stopovers": 1, "stopover_dwell_days": 4},
  "preprocess": {"window_len_days": 30},
  "architecture": {
    "encoder_hidden": [{"units": 12, "activation": {"kind": "leaky", "pos_slope": 0.06, "neg_slope": 0.001}}],
    "latent_dim": 2,
    "decoder_hidden": [{"units": 12, "activation": {"kind": "leaky", "pos_slope": 0.06, "neg_slope": 0.001}}]
  },
  "train": {"epochs": 400},
  "gmm": {"k": 3},
  "savgol": {"window": 7, "polyorder": 2},
  "postprocess": {"mbr": false},
  "evaluation": {"k": 4},
  "generation": {"count": 8, "attempt_cap_factor": 200},
  "baselines": {"attempt_cap_factor": 5000}
})";
}

}  // namespace wildgen::testing
