#include "wildgen/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include <json.hpp>

namespace wildgen {
namespace {

const char* colour(SetKind kind) {
  switch (kind) {
    case SetKind::kReal: return "#2ca02c";
    case SetKind::kGenerated: return "#1f77b4";
    case SetKind::kBaseline: return "#d62728";
  }
  return "#000000";
}

struct Box {
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  void finish() {
    if (!(x1 >= x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    if (x1 - x0 < 1e-9) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-9) y0 -= 0.5, y1 += 0.5;
  }
};

struct Mapper {
  Box box;
  double width, height, margin;
  double sx() const { return (width - 2 * margin) / (box.x1 - box.x0); }
  double sy() const { return (height - 2 * margin) / (box.y1 - box.y0); }
  double x(double v) const { return margin + (v - box.x0) * sx(); }
  double y(double v) const { return height - margin - (v - box.y0) * sy(); }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string header(int width, int height) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) + " " + std::to_string(height) +
         "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

std::string to_string(SetKind kind) {
  switch (kind) {
    case SetKind::kReal: return "real";
    case SetKind::kGenerated: return "generated";
    case SetKind::kBaseline: return "baseline";
  }
  return "unknown";
}

std::string plot_geojson(const std::vector<PlotLayer>& layers) {
  nlohmann::ordered_json features = nlohmann::ordered_json::array();
  for (const auto& layer : layers) {
    for (std::size_t i = 0; i < layer.trajectories.size(); ++i) {
      nlohmann::ordered_json coords = nlohmann::ordered_json::array();
      for (const auto& p : layer.trajectories[i].points) coords.push_back({p.lon, p.lat});
      features.push_back({{"type", "Feature"},
                          {"properties", {{"set", to_string(layer.kind)}, {"label", layer.label}, {"traj_id", i}}},
                          {"geometry", {{"type", "LineString"}, {"coordinates", std::move(coords)}}}});
    }
  }
  nlohmann::ordered_json fc = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
  return fc.dump() + "\n";
}

std::string plot_svg(const std::vector<PlotLayer>& layers, int width, int height) {
  Mapper map{{}, static_cast<double>(width), static_cast<double>(height), 30.0};
  for (const auto& layer : layers) {
    for (const auto& t : layer.trajectories) {
      for (const auto& p : t.points) map.box.add(p.lon, p.lat);
    }
  }
  map.box.finish();

  std::string out = header(width, height);
  int legend_y = 20;
  for (const auto& layer : layers) {
    out += "<g fill=\"none\" stroke=\"" + std::string(colour(layer.kind)) + "\" stroke-width=\"1\" stroke-opacity=\"0.55\">\n";
    for (const auto& t : layer.trajectories) {
      out += "<polyline points=\"";
      for (std::size_t i = 0; i < t.points.size(); ++i) {
        if (i) out += ' ';
        out += fmt(map.x(t.points[i].lon)) + "," + fmt(map.y(t.points[i].lat));
      }
      out += "\"/>\n";
    }
    out += "</g>\n";
    out += "<text x=\"" + std::to_string(width - 180) + "\" y=\"" + std::to_string(legend_y) +
           "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" + colour(layer.kind) + "\">" + to_string(layer.kind) +
           ": " + layer.label + "</text>\n";
    legend_y += 16;
  }
  out += "</svg>\n";
  return out;
}

std::string latent_svg(const Eigen::MatrixXd& codes, const Eigen::MatrixXd& samples, int width, int height) {
  Mapper map{{}, static_cast<double>(width), static_cast<double>(height), 30.0};
  auto y_of = [](const Eigen::MatrixXd& m, Eigen::Index r) { return m.cols() > 1 ? m(r, 1) : 0.0; };
  for (Eigen::Index r = 0; r < codes.rows(); ++r) map.box.add(codes(r, 0), y_of(codes, r));
  for (Eigen::Index r = 0; r < samples.rows(); ++r) map.box.add(samples(r, 0), y_of(samples, r));
  map.box.finish();

  std::string out = header(width, height);
  out += "<g fill=\"#1f77b4\" fill-opacity=\"0.35\">\n";
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    out += "<circle cx=\"" + fmt(map.x(samples(r, 0))) + "\" cy=\"" + fmt(map.y(y_of(samples, r))) + "\" r=\"2\"/>\n";
  }
  out += "</g>\n<g fill=\"#2ca02c\">\n";
  for (Eigen::Index r = 0; r < codes.rows(); ++r) {
    out += "<circle cx=\"" + fmt(map.x(codes(r, 0))) + "\" cy=\"" + fmt(map.y(y_of(codes, r))) + "\" r=\"4\"/>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace wildgen
