#include "wildgen/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>

#include <Eigen/Cholesky>

#include "wildgen/error.hpp"

namespace wildgen {
namespace {

constexpr double kPi = std::numbers::pi;

// Linear-interpolated quantile of sorted data (q in [0, 1]).
double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}

Eigen::MatrixXd kernel_matrix(const std::vector<double>& x, const KernelParams& k) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      K(i, j) = K(j, i) = k(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]);
    }
  }
  return K;
}

KernelParams from_log(const Eigen::Vector3d& v) {
  return {std::exp(v(0)), std::exp(v(1)), std::exp(v(2))};
}

// Coordinate search in log-hyperparameter space.
KernelParams optimize_kernel(const std::vector<double>& x, const Eigen::VectorXd& y, const Eigen::VectorXd& noise) {
  const double var = std::max(y.squaredNorm() / static_cast<double>(y.size()), 1e-6);
  const double span = std::max(x.back() - x.front(), 1.0);
  Eigen::Vector3d best(std::log(var), std::log(span / 10.0), std::log(0.1 * var + 1e-6));
  double best_ll = gp_log_marginal_likelihood(x, y, noise, from_log(best));

  const Eigen::Vector3d lower(std::log(1e-8), std::log(0.5), std::log(1e-8));
  const Eigen::Vector3d upper(std::log(1e8), std::log(10.0 * span), std::log(1e8));
  double step = 1.0;
  for (int iter = 0; iter < 400 && step > 1e-3; ++iter) {
    bool improved = false;
    for (int c = 0; c < 3; ++c) {
      for (const double dir : {1.0, -1.0}) {
        Eigen::Vector3d trial = best;
        trial(c) = std::clamp(trial(c) + dir * step, lower(c), upper(c));
        const double ll = gp_log_marginal_likelihood(x, y, noise, from_log(trial));
        if (ll > best_ll) {
          best_ll = ll;
          best = trial;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return from_log(best);
}

GpDimension fit_dimension(const std::vector<double>& x, const Eigen::VectorXd& means, const Eigen::VectorXd& noise_diag) {
  GpDimension g;
  g.offset = means.mean();
  g.targets = means.array() - g.offset;
  g.kernel = optimize_kernel(x, g.targets, noise_diag);
  g.log_marginal_likelihood = gp_log_marginal_likelihood(x, g.targets, noise_diag, g.kernel);

  const Eigen::MatrixXd K = kernel_matrix(x, g.kernel);
  Eigen::MatrixXd system = K;
  system.diagonal() += noise_diag;
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success || !std::isfinite(g.log_marginal_likelihood)) {
    fail(ErrorCode::kNumerical, "GP kernel system is not positive-definite");
  }
  g.cholesky = llt.matrixL();
  const Eigen::VectorXd alpha = llt.solve(g.targets);
  g.posterior_mean = (K * alpha).array() + g.offset;
  return g;
}

}  // namespace

void LevyParams::validate() const {
  require(step_scale > 0.0 && std::isfinite(step_scale), "levy step_scale must be > 0");
  require(angular_sd >= 0.0 && linear_sd >= 0.0, "levy spreads must be >= 0");
  require(max_step >= 0.0, "levy max_step must be >= 0");
}

double estimate_tail_exponent(std::vector<double> steps) {
  std::erase_if(steps, [](double s) { return !(s > 0.0) || !std::isfinite(s); });
  if (steps.size() < 4) return 0.0;
  std::sort(steps.begin(), steps.end());
  const double median = quantile(steps, 0.5);
  std::vector<double> tail(std::lower_bound(steps.begin(), steps.end(), median), steps.end());
  const double lo = std::log(tail.front());
  const double hi = std::log(tail.back());
  // Steps that differ only by rounding have no tail to speak of.
  if (!(hi - lo > 1e-9)) return 0.0;

  constexpr int kBins = 20;
  std::vector<double> counts(kBins, 0.0);
  for (const double s : tail) {
    const int b = std::min(kBins - 1, static_cast<int>((std::log(s) - lo) / (hi - lo) * kBins));
    counts[static_cast<std::size_t>(b)] += 1.0;
  }
  std::vector<double> xs, ys;
  const double width = (hi - lo) / kBins;
  for (int b = 0; b < kBins; ++b) {
    if (counts[static_cast<std::size_t>(b)] == 0.0) continue;
    const double left = std::exp(lo + b * width);
    const double right = std::exp(lo + (b + 1) * width);
    const double density = counts[static_cast<std::size_t>(b)] / (static_cast<double>(tail.size()) * (right - left));
    xs.push_back(lo + (b + 0.5) * width);
    ys.push_back(std::log(density));
  }
  if (xs.size() < 2) return 0.0;
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  // density ~ x^-(1 + alpha)
  const double alpha = -sxy / sxx - 1.0;
  return std::isfinite(alpha) ? alpha : 0.0;
}

double azimuth(const GeoPoint& from, const GeoPoint& to) {
  const double dlon = to.lon - from.lon;
  const double dlat = to.lat - from.lat;
  if (dlon == 0.0 && dlat == 0.0) fail(ErrorCode::kDomain, "azimuth of identical points is undefined");
  return std::atan2(dlon, dlat);
}

LevyParams fit_levy(const TrajectorySet& real) {
  require(!real.empty(), "fit_levy needs a nonempty corpus");
  require(real.horizon() >= 3, "fit_levy needs at least 3 points per trajectory");

  std::vector<double> steps;
  std::complex<double> resultant{0.0, 0.0};
  std::size_t turns = 0;
  GeoPoint mean_start{0.0, 0.0}, mean_end{0.0, 0.0};
  for (const auto& t : real) {
    std::optional<double> last_heading;
    for (std::size_t i = 1; i < t.points.size(); ++i) {
      const double dx = t.points[i].lon - t.points[i - 1].lon;
      const double dy = t.points[i].lat - t.points[i - 1].lat;
      const double len = std::hypot(dx, dy);
      steps.push_back(len);
      if (len == 0.0) continue;
      const double heading = std::atan2(dy, dx);
      if (last_heading) {
        resultant += std::polar(1.0, wrap_angle(heading - *last_heading));
        ++turns;
      }
      last_heading = heading;
    }
    mean_start.lon += t.points.front().lon;
    mean_start.lat += t.points.front().lat;
    mean_end.lon += t.points.back().lon;
    mean_end.lat += t.points.back().lat;
  }
  const auto n = static_cast<double>(real.size());
  mean_start = {mean_start.lon / n, mean_start.lat / n};
  mean_end = {mean_end.lon / n, mean_end.lat / n};

  std::vector<double> sorted = steps;
  std::sort(sorted.begin(), sorted.end());

  LevyParams p;
  p.step_location = quantile(sorted, 0.5);
  p.step_scale = std::max(0.5 * (quantile(sorted, 0.75) - quantile(sorted, 0.25)), 1e-12);

  if (turns > 0) {
    const double r = std::min(1.0, std::abs(resultant) / static_cast<double>(turns));
    p.angular_sd = r > 0.0 ? std::sqrt(std::max(0.0, -2.0 * std::log(r))) : kPi;
  }

  const double clip = quantile(sorted, 0.99);
  double mean = 0.0;
  for (const double s : steps) mean += std::min(s, clip);
  mean /= static_cast<double>(steps.size());
  double var = 0.0;
  for (const double s : steps) var += (std::min(s, clip) - mean) * (std::min(s, clip) - mean);
  p.linear_sd = std::sqrt(var / static_cast<double>(steps.size()));

  p.alpha_estimate = estimate_tail_exponent(steps);
  p.max_step = quantile(sorted, 0.999);
  p.rotation = azimuth(mean_start, mean_end);
  return p;
}

Trajectory generate_levy(const LevyParams& params, int steps, const GeoPoint& start, Rng& rng) {
  params.validate();
  require(steps >= 1, "levy steps must be >= 1");
  std::cauchy_distribution<double> cauchy(params.step_location, params.step_scale);

  std::vector<GeoPoint> local{{0.0, 0.0}};
  double heading = 0.0;
  for (int i = 0; i < steps; ++i) {
    double len = std::abs(cauchy(rng));
    if (params.linear_sd > 0.0) len += params.linear_sd * standard_normal(rng);
    len = std::max(0.0, len);
    if (params.max_step > 0.0) len = std::min(len, params.max_step);
    const GeoPoint& last = local.back();
    local.push_back({last.lon + len * std::cos(heading), last.lat + len * std::sin(heading)});
    if (params.angular_sd > 0.0) heading += params.angular_sd * standard_normal(rng);
  }

  const double c = std::cos(params.rotation);
  const double s = std::sin(params.rotation);
  Trajectory t;
  t.points.reserve(local.size());
  for (const auto& p : local) t.points.push_back({start.lon + c * p.lon - s * p.lat, start.lat + s * p.lon + c * p.lat});
  return t;
}

double KernelParams::operator()(double a, double b) const {
  const double d = a - b;
  return signal_variance * std::exp(-0.5 * d * d / (length_scale * length_scale)) + bias_variance;
}

double gp_log_marginal_likelihood(const std::vector<double>& inputs, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& noise_diag, const KernelParams& kernel) {
  Eigen::MatrixXd system = kernel_matrix(inputs, kernel);
  system.diagonal() += noise_diag;
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::VectorXd w = L.triangularView<Eigen::Lower>().solve(y);
  const double log_det = 2.0 * L.diagonal().array().log().sum();
  const double ll = -0.5 * w.squaredNorm() - 0.5 * log_det -
                    0.5 * static_cast<double>(y.size()) * std::log(2.0 * kPi);
  return std::isfinite(ll) ? ll : -std::numeric_limits<double>::infinity();
}

HgprModel fit_hgpr(const TrajectorySet& real, double subsample_fraction, std::uint64_t seed) {
  require(!real.empty(), "fit_hgpr needs a nonempty corpus");
  require(subsample_fraction > 0.0 && subsample_fraction <= 1.0, "subsample_fraction must be in (0, 1]");
  const std::size_t m = real.horizon();
  require(m >= 2, "fit_hgpr needs at least 2 days");

  HgprModel model;
  std::vector<std::size_t> order(real.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto take = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(subsample_fraction * static_cast<double>(real.size()))));
  model.subsample.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
  std::sort(model.subsample.begin(), model.subsample.end());

  const auto r = static_cast<double>(take);
  Eigen::VectorXd lon_mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  Eigen::VectorXd lat_mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  model.inputs.resize(m);
  model.noise.resize(m);
  for (std::size_t d = 0; d < m; ++d) {
    model.inputs[d] = static_cast<double>(d);
    double norm_sum = 0.0, norm_sq = 0.0;
    for (const std::size_t i : model.subsample) {
      const GeoPoint& p = real[i].points[d];
      lon_mean(static_cast<Eigen::Index>(d)) += p.lon / r;
      lat_mean(static_cast<Eigen::Index>(d)) += p.lat / r;
      const double norm = std::hypot(p.lon, p.lat);
      norm_sum += norm;
      norm_sq += norm * norm;
    }
    const double mean_norm = norm_sum / r;
    model.noise[d] = std::max(kNoiseFloor, norm_sq / r - mean_norm * mean_norm);
  }

  // Replicated observations at the same day enter the likelihood through
  // their mean with noise g / r.
  Eigen::VectorXd noise_diag(static_cast<Eigen::Index>(m));
  for (std::size_t d = 0; d < m; ++d) noise_diag(static_cast<Eigen::Index>(d)) = model.noise[d] / r;

  model.lon = fit_dimension(model.inputs, lon_mean, noise_diag);
  model.lat = fit_dimension(model.inputs, lat_mean, noise_diag);
  return model;
}

TrajectorySet sample_hgpr(const HgprModel& model, int count, Rng& rng) {
  require(count >= 1, "hgpr sample count must be >= 1");
  const std::size_t m = model.horizon();
  TrajectorySet out(m);
  for (int c = 0; c < count; ++c) {
    Trajectory t;
    t.points.resize(m);
    for (std::size_t d = 0; d < m; ++d) {
      const double sd = std::sqrt(model.noise[d]);
      const auto di = static_cast<Eigen::Index>(d);
      t.points[d] = {model.lon.posterior_mean(di) + sd * standard_normal(rng),
                     model.lat.posterior_mean(di) + sd * standard_normal(rng)};
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace wildgen
