#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wildgen/geo.hpp"

namespace wildgen {

/// max over a in A of min over b in B of |a - b|.
double hausdorff_directed(std::span<const GeoPoint> a, std::span<const GeoPoint> b);

/// Symmetric Hausdorff distance.
double hausdorff(std::span<const GeoPoint> a, std::span<const GeoPoint> b);

struct HausdorffSummary {
  double min = 0.0;
  double max = 0.0;
  double avg = 0.0;
  std::vector<double> per_trajectory;  // distance to the closest real trajectory
};

HausdorffSummary nearest_real_summary(const TrajectorySet& generated, const TrajectorySet& real);

struct KMeansModel {
  int k = 0;
  Eigen::MatrixXd centroids;  // k x 2 (lon, lat)
  double distortion = 0.0;
  std::vector<int> assignments;
  std::vector<double> distortion_trace;  // after each Lloyd assignment step
};

/// k-means++ seeding followed by Lloyd iterations until the assignment is a
/// fixpoint or max_iters is reached.
KMeansModel kmeans_fit(std::span<const GeoPoint> points, int k, std::uint64_t seed, int max_iters = 300);

/// Index of the nearest centroid (ties to the lower index).
int nearest_centroid(const KMeansModel& model, const GeoPoint& p);

/// Mean silhouette; a point with a = b = 0 contributes 0.
double silhouette_score(std::span<const GeoPoint> points, const std::vector<int>& assignments);

struct KSelection {
  int k = 0;
  std::vector<int> candidates;
  std::vector<double> silhouette;
  std::vector<double> distortion;
};

/// argmax silhouette over [k_min, k_max] (ties to the smaller k).
KSelection choose_k(std::span<const GeoPoint> points, int k_min, int k_max, std::uint64_t seed);

std::vector<double> cluster_histogram(const KMeansModel& model, std::span<const GeoPoint> points);

/// Sample Pearson correlation; throws on zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

struct MetricsReport {
  double hausdorff_min = 0.0;
  double hausdorff_max = 0.0;
  double hausdorff_avg = 0.0;
  double pearson_r = 0.0;
  int k = 0;
  std::vector<double> cluster_counts_real;
  std::vector<double> cluster_counts_generated;
  std::vector<double> per_trajectory;
};

struct EvaluateOptions {
  int k = 13;        // fixed cluster count; 0 selects k by silhouette
  int k_min = 10;
  int k_max = 15;
  std::uint64_t seed = 0;
};

/// Truncates `generated` to the real count, clusters the pooled real points,
/// and compares cluster histograms and nearest-real Hausdorff distances.
MetricsReport evaluate(const TrajectorySet& real, const TrajectorySet& generated, const EvaluateOptions& options);

/// JSON with keys hausdorff_{min,max,avg}, pearson_r, k, cluster_counts_{real,generated}.
std::string report_to_json(const MetricsReport& report);

/// Aligned text table in Min / Max / Avg / Pearson layout.
struct NamedReport {
  std::string method;
  MetricsReport report;
};
std::string format_table(const std::vector<NamedReport>& rows);

}  // namespace wildgen
