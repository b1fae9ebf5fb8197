#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "wildgen/geo.hpp"

namespace wildgen {

enum class SetKind { kReal, kGenerated, kBaseline };

std::string to_string(SetKind kind);

struct PlotLayer {
  SetKind kind = SetKind::kReal;
  std::string label;  // file stem or method name
  TrajectorySet trajectories;
};

/// FeatureCollection with one LineString per trajectory; properties carry
/// `set` (real/generated/baseline), `label` and `traj_id`.
std::string plot_geojson(const std::vector<PlotLayer>& layers);

/// Overlay in equirectangular degree space: real green, generated blue,
/// baselines red. Output depends only on the inputs.
std::string plot_svg(const std::vector<PlotLayer>& layers, int width = 900, int height = 600);

/// Scatter of the first two latent coordinates: training codes and draws.
std::string latent_svg(const Eigen::MatrixXd& codes, const Eigen::MatrixXd& samples, int width = 600, int height = 600);

}  // namespace wildgen
