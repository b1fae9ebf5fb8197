#include "wildgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "wildgen/error.hpp"
#include "wildgen/random.hpp"

namespace wildgen {
namespace {

double sq(const GeoPoint& a, const GeoPoint& b) {
  const double dx = a.lon - b.lon;
  const double dy = a.lat - b.lat;
  return dx * dx + dy * dy;
}

double sq(const GeoPoint& p, const Eigen::MatrixXd& c, int j) {
  const double dx = p.lon - c(j, 0);
  const double dy = p.lat - c(j, 1);
  return dx * dx + dy * dy;
}

// Directed squared Hausdorff with early abandoning of the inner scan once a
// point is known not to raise the running maximum.
double directed_squared(std::span<const GeoPoint> a, std::span<const GeoPoint> b) {
  double worst = 0.0;
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) {
      best = std::min(best, sq(p, q));
      if (best <= worst) break;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

std::vector<int> assign(std::span<const GeoPoint> points, const Eigen::MatrixXd& centroids, double* distortion) {
  std::vector<int> labels(points.size());
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    int arg = 0;
    double best = sq(points[i], centroids, 0);
    for (int j = 1; j < centroids.rows(); ++j) {
      const double d = sq(points[i], centroids, j);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    labels[i] = arg;
    total += best;
  }
  if (distortion) *distortion = total;
  return labels;
}

}  // namespace

double hausdorff_directed(std::span<const GeoPoint> a, std::span<const GeoPoint> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::kInvalidArgument, "hausdorff distance of an empty point set");
  return std::sqrt(directed_squared(a, b));
}

double hausdorff(std::span<const GeoPoint> a, std::span<const GeoPoint> b) {
  return std::max(hausdorff_directed(a, b), hausdorff_directed(b, a));
}

HausdorffSummary nearest_real_summary(const TrajectorySet& generated, const TrajectorySet& real) {
  require(!generated.empty() && !real.empty(), "nearest_real_summary needs nonempty sets");
  HausdorffSummary s;
  for (const auto& g : generated) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : real) best = std::min(best, hausdorff(g.points, r.points));
    s.per_trajectory.push_back(best);
  }
  s.min = *std::min_element(s.per_trajectory.begin(), s.per_trajectory.end());
  s.max = *std::max_element(s.per_trajectory.begin(), s.per_trajectory.end());
  double sum = 0.0;
  for (const double v : s.per_trajectory) sum += v;
  s.avg = sum / static_cast<double>(s.per_trajectory.size());
  // Keep min <= avg <= max exact under rounding.
  s.avg = std::clamp(s.avg, s.min, s.max);
  return s;
}

KMeansModel kmeans_fit(std::span<const GeoPoint> points, int k, std::uint64_t seed, int max_iters) {
  require(k >= 1, "kmeans k must be >= 1");
  require(points.size() >= static_cast<std::size_t>(k), "kmeans needs at least k points");
  require(max_iters >= 1, "kmeans max_iters must be >= 1");

  Rng rng(seed);
  const std::size_t n = points.size();
  Eigen::MatrixXd centroids(k, 2);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const auto& first = points[pick(rng)];
  centroids.row(0) << first.lon, first.lat;
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      best[i] = std::min(best[i], sq(points[i], centroids, c - 1));
      total += best[i];
    }
    std::size_t chosen = 0;
    if (total > 0.0) {
      double target = uniform01(rng) * total;
      for (chosen = 0; chosen + 1 < n; ++chosen) {
        target -= best[chosen];
        if (target < 0.0) break;
      }
    } else {
      chosen = pick(rng);
    }
    centroids.row(c) << points[chosen].lon, points[chosen].lat;
  }

  KMeansModel model;
  model.k = k;
  std::vector<int> labels;
  for (int iter = 0; iter < max_iters; ++iter) {
    double distortion = 0.0;
    auto next = assign(points, centroids, &distortion);
    model.distortion_trace.push_back(distortion);
    const bool fixpoint = next == labels;
    labels = std::move(next);
    if (fixpoint) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, 2);
    std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      sums(labels[i], 0) += points[i].lon;
      sums(labels[i], 1) += points[i].lat;
      counts[static_cast<std::size_t>(labels[i])] += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0.0) centroids.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
    }
  }
  model.centroids = centroids;
  model.assignments = assign(points, centroids, &model.distortion);
  return model;
}

int nearest_centroid(const KMeansModel& model, const GeoPoint& p) {
  int arg = 0;
  double best = sq(p, model.centroids, 0);
  for (int j = 1; j < model.centroids.rows(); ++j) {
    const double d = sq(p, model.centroids, j);
    if (d < best) {
      best = d;
      arg = j;
    }
  }
  return arg;
}

double silhouette_score(std::span<const GeoPoint> points, const std::vector<int>& assignments) {
  require(points.size() == assignments.size(), "silhouette: assignment count mismatch");
  require(!points.empty(), "silhouette: no points");
  const int k = *std::max_element(assignments.begin(), assignments.end()) + 1;
  std::vector<double> sizes(static_cast<std::size_t>(k), 0.0);
  for (const int a : assignments) {
    require(a >= 0, "silhouette: negative cluster label");
    sizes[static_cast<std::size_t>(a)] += 1.0;
  }
  require(k >= 2, "silhouette needs at least 2 clusters");
  for (const double s : sizes) {
    if (s == 0.0) fail(ErrorCode::kInvalidArgument, "silhouette: empty cluster");
  }

  double total = 0.0;
  std::vector<double> sums(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < points.size(); ++j) {
      sums[static_cast<std::size_t>(assignments[j])] += std::sqrt(sq(points[i], points[j]));
    }
    const auto own = static_cast<std::size_t>(assignments[i]);
    if (sizes[own] <= 1.0) continue;  // singleton clusters score 0
    const double a = sums[own] / (sizes[own] - 1.0);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (c != own) b = std::min(b, sums[c] / sizes[c]);
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(points.size());
}

KSelection choose_k(std::span<const GeoPoint> points, int k_min, int k_max, std::uint64_t seed) {
  require(k_min >= 2, "choose_k: k_min must be >= 2");
  require(k_max >= k_min, "choose_k: k_max must be >= k_min");
  KSelection sel;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = k_min; k <= k_max; ++k) {
    const auto model = kmeans_fit(points, k, seed);
    // Lloyd can leave a cluster empty; relabel densely so silhouette is defined.
    std::vector<int> remap(static_cast<std::size_t>(k), -1);
    std::vector<int> labels = model.assignments;
    int next = 0;
    for (auto& l : labels) {
      auto& r = remap[static_cast<std::size_t>(l)];
      if (r < 0) r = next++;
      l = r;
    }
    const double s = next >= 2 ? silhouette_score(points, labels) : -1.0;
    sel.candidates.push_back(k);
    sel.silhouette.push_back(s);
    sel.distortion.push_back(model.distortion);
    if (s > best) {
      best = s;
      sel.k = k;
    }
  }
  return sel;
}

std::vector<double> cluster_histogram(const KMeansModel& model, std::span<const GeoPoint> points) {
  std::vector<double> counts(static_cast<std::size_t>(model.k), 0.0);
  for (const auto& p : points) counts[static_cast<std::size_t>(nearest_centroid(model, p))] += 1.0;
  return counts;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "pearson: vectors differ in length");
  require(x.size() >= 2, "pearson: need at least 2 values");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorCode::kDomain, "zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

MetricsReport evaluate(const TrajectorySet& real, const TrajectorySet& generated, const EvaluateOptions& options) {
  require(!real.empty(), "evaluate: real set is empty");
  require(generated.size() >= real.size(), "evaluate: generated set has " + std::to_string(generated.size()) +
                                               " trajectories, need at least " + std::to_string(real.size()));
  if (generated.horizon() != real.horizon()) {
    fail(ErrorCode::kInvalidArgument, "horizon mismatch: real " + std::to_string(real.horizon()) + " vs generated " +
                                          std::to_string(generated.horizon()));
  }
  const TrajectorySet gen = generated.head(real.size());

  MetricsReport report;
  const auto summary = nearest_real_summary(gen, real);
  report.hausdorff_min = summary.min;
  report.hausdorff_max = summary.max;
  report.hausdorff_avg = summary.avg;
  report.per_trajectory = summary.per_trajectory;

  const auto real_points = real.pooled_points();
  const auto gen_points = gen.pooled_points();
  int k = options.k;
  if (k <= 0) k = choose_k(real_points, options.k_min, options.k_max, options.seed).k;
  const auto model = kmeans_fit(real_points, k, options.seed);
  report.k = k;
  report.cluster_counts_real = cluster_histogram(model, real_points);
  report.cluster_counts_generated = cluster_histogram(model, gen_points);
  report.pearson_r = pearson(report.cluster_counts_real, report.cluster_counts_generated);
  return report;
}

std::string report_to_json(const MetricsReport& report) {
  auto ints = [](const std::vector<double>& v) {
    std::vector<long long> out;
    for (const double x : v) out.push_back(std::llround(x));
    return out;
  };
  nlohmann::ordered_json j;
  j["hausdorff_min"] = report.hausdorff_min;
  j["hausdorff_max"] = report.hausdorff_max;
  j["hausdorff_avg"] = report.hausdorff_avg;
  j["pearson_r"] = report.pearson_r;
  j["k"] = report.k;
  j["cluster_counts_real"] = ints(report.cluster_counts_real);
  j["cluster_counts_generated"] = ints(report.cluster_counts_generated);
  return j.dump(2) + "\n";
}

std::string format_table(const std::vector<NamedReport>& rows) {
  std::size_t width = 6;
  for (const auto& r : rows) width = std::max(width, r.method.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-*s | %9s %9s %9s | %11s\n", static_cast<int>(width), "Method", "Min", "Max", "Avg",
                "Pearson (r)");
  out += buf;
  out += std::string(width, '-') + "-+-" + std::string(29, '-') + "-+-" + std::string(11, '-') + "\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-*s | %9.3f %9.3f %9.3f | %11.4f\n", static_cast<int>(width), r.method.c_str(),
                  r.report.hausdorff_min, r.report.hausdorff_max, r.report.hausdorff_avg, r.report.pearson_r);
    out += buf;
  }
  return out;
}

}  // namespace wildgen
