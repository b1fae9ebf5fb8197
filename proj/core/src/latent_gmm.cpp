#include "wildgen/latent_gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>

#include "wildgen/error.hpp"

namespace wildgen {
namespace {

struct Factor {
  Eigen::MatrixXd lower;
  double log_det = 0.0;
};

Factor factorize(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) fail(ErrorCode::kNumerical, "covariance is not positive-definite");
  Factor f;
  f.lower = llt.matrixL();
  f.log_det = 2.0 * f.lower.diagonal().array().log().sum();
  return f;
}

double log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Factor& f) {
  const Eigen::VectorXd diff = x - mean;
  const Eigen::VectorXd y = f.lower.triangularView<Eigen::Lower>().solve(diff);
  const auto d = static_cast<double>(x.size());
  return -0.5 * (d * std::log(2.0 * std::numbers::pi) + f.log_det + y.squaredNorm());
}

// n x k matrix of log(w_j) + log N(x_i; ...) - (reg / 2) tr(cov_j^-1).
// The trace term is the expected log density of x_i + e with e ~ N(0, reg I);
// with it, the "add reg * I" M-step is an exact maximization step, so EM can
// only increase the sum of the row log-sum-exps. reg = 0 gives the plain model.
Eigen::MatrixXd weighted_log_densities(const GmmModel& model, const Eigen::MatrixXd& codes, double reg = 0.0) {
  const Eigen::Index n = codes.rows();
  Eigen::MatrixXd out(n, model.k);
  for (int j = 0; j < model.k; ++j) {
    const Factor f = factorize(model.covariances[static_cast<std::size_t>(j)]);
    double log_w = model.weights(j) > 0.0 ? std::log(model.weights(j)) : -std::numeric_limits<double>::infinity();
    if (reg > 0.0) {
      const Eigen::MatrixXd lower_inv =
          f.lower.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(f.lower.rows(), f.lower.cols()));
      log_w -= 0.5 * reg * lower_inv.squaredNorm();
    }
    const Eigen::VectorXd mean = model.means.row(j).transpose();
    for (Eigen::Index i = 0; i < n; ++i) out(i, j) = log_w + log_density(codes.row(i).transpose(), mean, f);
  }
  return out;
}


double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  const double m = row.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((row.array() - m).exp().sum());
}

double sum_log_sum_exp(const Eigen::MatrixXd& lw) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < lw.rows(); ++i) total += log_sum_exp(lw.row(i));
  return total;
}

Eigen::MatrixXd normalize_rows(Eigen::MatrixXd lw) {
  for (Eigen::Index i = 0; i < lw.rows(); ++i) {
    const double lse = log_sum_exp(lw.row(i));
    if (!std::isfinite(lse)) fail(ErrorCode::kNumerical, "non-finite responsibility");
    lw.row(i) = (lw.row(i).array() - lse).exp();
  }
  return lw;
}

// Seeded k-means++ followed by Lloyd iterations; returns hard labels.
std::vector<int> kmeans_labels(const Eigen::MatrixXd& codes, int k, std::uint64_t seed) {
  const Eigen::Index n = codes.rows();
  Rng rng(seed);
  Eigen::MatrixXd centers(k, codes.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.row(0) = codes.row(pick(rng));
  Eigen::VectorXd best = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) best(i) = std::min(best(i), (codes.row(i) - centers.row(c - 1)).squaredNorm());
    const double total = best.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      double target = uniform01(rng) * total;
      for (chosen = 0; chosen < n - 1; ++chosen) {
        target -= best(chosen);
        if (target < 0.0) break;
      }
    } else {
      chosen = pick(rng);
    }
    centers.row(c) = codes.row(chosen);
  }

  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int arg = 0;
      double d_best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (codes.row(i) - centers.row(c)).squaredNorm();
        if (d < d_best) {
          d_best = d;
          arg = c;
        }
      }
      if (labels[static_cast<std::size_t>(i)] != arg) {
        labels[static_cast<std::size_t>(i)] = arg;
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, codes.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += codes.row(i);
      counts(labels[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (counts(c) > 0.0) centers.row(c) = sums.row(c) / counts(c);
    }
  }
  return labels;
}

void m_step(const Eigen::MatrixXd& codes, const Eigen::MatrixXd& resp, double reg, GmmModel& model) {
  const Eigen::Index n = codes.rows();
  const Eigen::Index d = codes.cols();
  const Eigen::VectorXd nk = resp.colwise().sum().transpose();
  model.weights = nk / static_cast<double>(n);
  for (int j = 0; j < model.k; ++j) {
    Eigen::MatrixXd cov = reg * Eigen::MatrixXd::Identity(d, d);
    if (nk(j) > 0.0) {
      const Eigen::RowVectorXd mean = (resp.col(j).transpose() * codes) / nk(j);
      model.means.row(j) = mean;
      const Eigen::MatrixXd centered = codes.rowwise() - mean;
      cov += (centered.transpose() * resp.col(j).asDiagonal() * centered) / nk(j);
    }
    model.covariances[static_cast<std::size_t>(j)] = 0.5 * (cov + cov.transpose());
  }
}

}  // namespace

double gaussian_log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  return log_density(x, mean, factorize(cov));
}

double gmm_log_likelihood(const GmmModel& model, const Eigen::MatrixXd& codes) {
  require(codes.cols() == model.dim(), "gmm_log_likelihood: dimension mismatch");
  return sum_log_sum_exp(weighted_log_densities(model, codes));
}

double gmm_em_objective(const GmmModel& model, const Eigen::MatrixXd& codes, double reg) {
  require(codes.cols() == model.dim(), "gmm_em_objective: dimension mismatch");
  require(reg >= 0.0, "gmm reg must be >= 0");
  return sum_log_sum_exp(weighted_log_densities(model, codes, reg));
}

Eigen::MatrixXd gmm_responsibilities(const GmmModel& model, const Eigen::MatrixXd& codes) {
  require(codes.cols() == model.dim(), "gmm_responsibilities: dimension mismatch");
  return normalize_rows(weighted_log_densities(model, codes));
}

GmmModel fit_gmm(const Eigen::MatrixXd& codes, const GmmFitOptions& options) {
  const Eigen::Index n = codes.rows();
  require(options.k >= 1, "gmm k must be >= 1");
  require(n >= options.k, "gmm needs at least k codes (n=" + std::to_string(n) + ", k=" + std::to_string(options.k) + ")");
  require(options.reg > 0.0, "gmm reg must be > 0");
  require(options.max_iters >= 1, "gmm max_iters must be >= 1");
  require(codes.allFinite(), "gmm codes must be finite");

  GmmModel model;
  model.k = options.k;
  model.means = Eigen::MatrixXd::Zero(options.k, codes.cols());
  model.covariances.assign(static_cast<std::size_t>(options.k), Eigen::MatrixXd::Identity(codes.cols(), codes.cols()));

  const auto labels = kmeans_labels(codes, options.k, options.seed);
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, options.k);
  for (Eigen::Index i = 0; i < n; ++i) resp(i, labels[static_cast<std::size_t>(i)]) = 1.0;
  m_step(codes, resp, options.reg, model);

  double previous = gmm_em_objective(model, codes, options.reg);
  model.objective_trace.push_back(previous);
  for (int iter = 0; iter < options.max_iters; ++iter) {
    resp = normalize_rows(weighted_log_densities(model, codes, options.reg));
    m_step(codes, resp, options.reg, model);
    const double current = gmm_em_objective(model, codes, options.reg);
    if (!std::isfinite(current)) fail(ErrorCode::kNumerical, "gmm log-likelihood is not finite");
    model.objective_trace.push_back(current);
    const double improvement = current - previous;
    previous = current;
    if (std::abs(improvement) < options.tol) break;
  }
  model.fit_log_likelihood = gmm_log_likelihood(model, codes);
  return model;
}

Eigen::MatrixXd sample_gmm(const GmmModel& model, int count, Rng& rng) {
  require(count >= 1, "sample count must be >= 1");
  require(model.k >= 1, "gmm has no components");
  std::vector<Eigen::MatrixXd> lower;
  for (const auto& cov : model.covariances) lower.push_back(factorize(cov).lower);

  const Eigen::Index d = model.means.cols();
  Eigen::MatrixXd out(count, d);
  Eigen::VectorXd eps(d);
  for (int s = 0; s < count; ++s) {
    double u = uniform01(rng);
    int j = 0;
    for (; j < model.k - 1; ++j) {
      u -= model.weights(j);
      if (u < 0.0) break;
    }
    // Never land on a zero-weight tail component through rounding.
    while (model.weights(j) <= 0.0 && j > 0) --j;
    for (Eigen::Index c = 0; c < d; ++c) eps(c) = standard_normal(rng);
    out.row(s) = (model.means.row(j).transpose() + lower[static_cast<std::size_t>(j)] * eps).transpose();
  }
  return out;
}

}  // namespace wildgen
