#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "wildgen/ingest.hpp"
#include "wildgen/random.hpp"

namespace wildgen {

/// Piecewise-linear activation: leaky(a, b) is a*x for x >= 0 and b*x below.
struct Activation {
  enum class Kind { kLeaky, kLinear };

  Kind kind = Kind::kLinear;
  double pos_slope = 1.0;
  double neg_slope = 1.0;

  static Activation leaky(double pos_slope, double neg_slope) { return {Kind::kLeaky, pos_slope, neg_slope}; }
  static Activation linear() { return {Kind::kLinear, 1.0, 1.0}; }

  friend bool operator==(const Activation&, const Activation&) = default;
};

double activate(double x, const Activation& act);
double activate_derivative(double x, const Activation& act);

struct LayerSpec {
  int units = 0;
  Activation activation;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Encoder trunk -> (mu, logvar) linear heads -> decoder. The last decoder
/// layer is the output layer and must have input_dim units.
struct Architecture {
  int input_dim = 370;
  std::vector<LayerSpec> encoder;
  int latent_dim = 3;
  std::vector<LayerSpec> decoder;

  /// 370-300-100-(3)-100-100-300-370 with leaky(0.06, 0.001) on encoder
  /// hidden 1 and decoder hidden 1-2, linear elsewhere.
  static Architecture standard(int input_dim = 370, int latent_dim = 3);

  void validate() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
  Activation activation;

  friend bool operator==(const DenseLayer& a, const DenseLayer& b) {
    return a.activation == b.activation && a.weight.rows() == b.weight.rows() &&
           a.weight.cols() == b.weight.cols() && a.weight == b.weight && a.bias.size() == b.bias.size() &&
           a.bias == b.bias;
  }
};

struct VaeParams {
  Architecture arch;
  std::vector<DenseLayer> encoder;
  DenseLayer mu_head;
  DenseLayer logvar_head;
  std::vector<DenseLayer> decoder;
  /// Fixed vector subtracted from every encoder input (empty means none).
  /// Not trained; see TrainConfig::center_encoder_input.
  Eigen::VectorXd input_shift;

  /// Every layer in a fixed order: encoder, mu head, logvar head, decoder.
  std::vector<DenseLayer*> layers();
  std::vector<const DenseLayer*> layers() const;
  std::size_t parameter_count() const;
  bool all_finite() const;

  friend bool operator==(const VaeParams& a, const VaeParams& b) {
    return a.arch == b.arch && a.encoder == b.encoder && a.mu_head == b.mu_head &&
           a.logvar_head == b.logvar_head && a.decoder == b.decoder &&
           a.input_shift.size() == b.input_shift.size() && a.input_shift == b.input_shift;
  }
};

/// Weights ~ N(0, 1/fan_in), biases zero.
VaeParams init_params(const Architecture& arch, std::uint64_t seed);

/// Same shapes, every entry zero.
VaeParams zeros_like(const VaeParams& params);

struct Encoding {
  Eigen::VectorXd mu;
  Eigen::VectorXd logvar;
};

Encoding encode(const VaeParams& params, const Eigen::VectorXd& x);

/// z = mu + exp(logvar / 2) * eps with eps ~ N(0, I) drawn from rng.
Eigen::VectorXd reparameterize(const Eigen::VectorXd& mu, const Eigen::VectorXd& logvar, Rng& rng);

Eigen::VectorXd decode(const VaeParams& params, const Eigen::VectorXd& z);

/// Column-wise decode: z is latent_dim x count, result is input_dim x count.
Eigen::MatrixXd decode_batch(const VaeParams& params, const Eigen::MatrixXd& z);

struct LossTerms {
  double total = 0.0;
  double mse = 0.0;
  double kl = 0.0;
};

/// mse = mean (x - x_hat)^2, kl = -1/2 sum(1 + logvar - mu^2 - exp(logvar)),
/// total = mse + beta * kl.
LossTerms loss(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat, const Eigen::VectorXd& mu,
               const Eigen::VectorXd& logvar, double beta);

/// Mean loss over the rows of `batch` with the reparameterization noise fixed
/// to `noise` (latent_dim x rows).
LossTerms batch_loss(const VaeParams& params, const Eigen::MatrixXd& batch, double beta, const Eigen::MatrixXd& noise);

/// Same objective with z = mu (no sampling).
LossTerms reconstruction_loss(const VaeParams& params, const Eigen::MatrixXd& batch, double beta);

struct Gradients {
  VaeParams grad;
  LossTerms loss;            // stochastic objective at the noise used
  LossTerms deterministic;   // objective with z = mu
};

/// Analytic gradient of the mean total loss over the rows of `batch`.
Gradients backward(const VaeParams& params, const Eigen::MatrixXd& batch, double beta, const Eigen::MatrixXd& noise);
Gradients backward(const VaeParams& params, const Eigen::MatrixXd& batch, double beta, Rng& rng);

enum class OptimizerKind { kGradientDescent, kAdam };

struct TrainConfig {
  int epochs = 3000;
  double learning_rate = 1e-2;
  double kl_weight = 1e-5;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Set VaeParams::input_shift to the column mean of the training data
  /// before the first step. The encoder then sees the spread between
  /// trajectories instead of their large shared offset.
  bool center_encoder_input = true;

  void validate() const;
};

/// Deterministic (z = mu) loss evaluated at the parameters entering the epoch.
struct EpochLoss {
  double reconstruction_mse = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

using LossHistory = std::vector<EpochLoss>;

struct TrainResult {
  VaeParams params;
  LossHistory history;
};

/// Called after each epoch with its 1-based number and the history entry it appended.
using EpochCallback = std::function<void(int epoch, const EpochLoss&)>;

/// Full-batch training; deterministic given (params, data, cfg).
TrainResult train(VaeParams params, const NormalizedMatrix& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Encoder means for every row of data (n x latent_dim).
Eigen::MatrixXd latent_codes(const VaeParams& params, const NormalizedMatrix& data);

}  // namespace wildgen
