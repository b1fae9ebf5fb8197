#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "wildgen/random.hpp"

namespace wildgen {

struct GmmModel {
  int k = 0;
  Eigen::VectorXd weights;                  // k
  Eigen::MatrixXd means;                    // k x d
  std::vector<Eigen::MatrixXd> covariances; // k of d x d
  double fit_log_likelihood = 0.0;   // plain log-likelihood of the fitted model
  std::vector<double> objective_trace; // gmm_em_objective after init and after each EM step

  int dim() const { return static_cast<int>(means.cols()); }
};

struct GmmFitOptions {
  int k = 15;
  double reg = 1e-4;
  int max_iters = 500;
  double tol = 1e-7;
  std::uint64_t seed = 0;
};

/// EM with full covariances; each M-step adds reg * I to every covariance.
/// Initialized from a seeded k-means pass over the codes. Responsibilities
/// and the stopping rule use gmm_em_objective, which EM never decreases.
GmmModel fit_gmm(const Eigen::MatrixXd& codes, const GmmFitOptions& options);

/// Sum over rows of log sum_j w_j N(x; mean_j, cov_j), via log-sum-exp.
double gmm_log_likelihood(const GmmModel& model, const Eigen::MatrixXd& codes);

/// Log-likelihood of the codes when each one is blurred by N(0, reg * I):
/// every component density gains a factor exp(-(reg / 2) tr(cov^-1)).
/// Equal to gmm_log_likelihood at reg = 0.
double gmm_em_objective(const GmmModel& model, const Eigen::MatrixXd& codes, double reg);

/// Posterior component probabilities, one row per code.
Eigen::MatrixXd gmm_responsibilities(const GmmModel& model, const Eigen::MatrixXd& codes);

/// count x d draws: pick a component by weight, then mean + L * N(0, I).
Eigen::MatrixXd sample_gmm(const GmmModel& model, int count, Rng& rng);

/// Log density of a single multivariate normal.
double gaussian_log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

}  // namespace wildgen
