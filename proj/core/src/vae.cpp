#include "wildgen/vae.hpp"

#include <cmath>
#include <string>

#include "wildgen/error.hpp"

namespace wildgen {
namespace {

constexpr double kLeakyPositiveSlope = 0.06;
constexpr double kLeakyNegativeSlope = 0.001;

DenseLayer make_layer(int in, int out, const Activation& act) {
  DenseLayer l;
  l.weight = Eigen::MatrixXd::Zero(out, in);
  l.bias = Eigen::VectorXd::Zero(out);
  l.activation = act;
  return l;
}

Eigen::MatrixXd apply(const Eigen::MatrixXd& pre, const Activation& act) {
  if (act.kind == Activation::Kind::kLinear) return pre;
  return pre.unaryExpr([&](double v) { return v >= 0.0 ? act.pos_slope * v : act.neg_slope * v; });
}

Eigen::MatrixXd apply_derivative(const Eigen::MatrixXd& pre, const Activation& act) {
  if (act.kind == Activation::Kind::kLinear) return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
  return pre.unaryExpr([&](double v) { return v >= 0.0 ? act.pos_slope : act.neg_slope; });
}

void check_finite(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) fail(ErrorCode::kNumerical, "numerical overflow");
}

// Activations of one pass: inputs[i] feeds layer i, pre[i] is its pre-activation.
struct Tape {
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::MatrixXd> pre;
};

Eigen::MatrixXd run(const std::vector<DenseLayer>& layers, Eigen::MatrixXd h, Tape* tape) {
  for (const auto& layer : layers) {
    Eigen::MatrixXd a = layer.weight * h;
    a.colwise() += layer.bias;
    check_finite(a);
    Eigen::MatrixXd out = apply(a, layer.activation);
    if (tape) {
      tape->inputs.push_back(std::move(h));
      tape->pre.push_back(std::move(a));
    }
    h = std::move(out);
  }
  return h;
}

Eigen::MatrixXd head(const DenseLayer& layer, const Eigen::MatrixXd& h) {
  Eigen::MatrixXd a = layer.weight * h;
  a.colwise() += layer.bias;
  check_finite(a);
  return a;
}

// Backpropagates d(loss)/d(output) through `layers`, filling `grads`;
// returns d(loss)/d(input).
Eigen::MatrixXd backprop(const std::vector<DenseLayer>& layers, const Tape& tape, Eigen::MatrixXd upstream,
                         std::vector<DenseLayer>& grads) {
  for (std::size_t i = layers.size(); i-- > 0;) {
    const Eigen::MatrixXd d_pre = upstream.cwiseProduct(apply_derivative(tape.pre[i], layers[i].activation));
    grads[i].weight.noalias() = d_pre * tape.inputs[i].transpose();
    grads[i].bias = d_pre.rowwise().sum();
    upstream = layers[i].weight.transpose() * d_pre;
  }
  return upstream;
}

double kl_sum(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& logvar) {
  return -0.5 * (1.0 + logvar.array() - mu.array().square() - logvar.array().exp()).sum();
}

LossTerms mean_terms(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_hat, const Eigen::MatrixXd& mu,
                     const Eigen::MatrixXd& logvar, double beta) {
  const auto n = static_cast<double>(x.cols());
  LossTerms t;
  t.mse = (x - x_hat).squaredNorm() / (static_cast<double>(x.rows()) * n);
  t.kl = kl_sum(mu, logvar) / n;
  t.total = t.mse + beta * t.kl;
  return t;
}

void check_batch(const VaeParams& params, const Eigen::MatrixXd& batch) {
  require(batch.rows() >= 1, "batch must be nonempty");
  require(batch.cols() == params.arch.input_dim, "batch width " + std::to_string(batch.cols()) +
                                                     " does not match input_dim " +
                                                     std::to_string(params.arch.input_dim));
  require(params.input_shift.size() == 0 || params.input_shift.size() == params.arch.input_dim,
          "input_shift length does not match input_dim");
}

// Encoder input as columns, with the fixed shift removed.
Eigen::MatrixXd encoder_input(const VaeParams& params, const Eigen::MatrixXd& batch) {
  Eigen::MatrixXd x = batch.transpose();
  if (params.input_shift.size() > 0) x.colwise() -= params.input_shift;
  return x;
}

}  // namespace

double activate(double x, const Activation& act) {
  if (act.kind == Activation::Kind::kLinear) return x;
  return x >= 0.0 ? act.pos_slope * x : act.neg_slope * x;
}

double activate_derivative(double x, const Activation& act) {
  if (act.kind == Activation::Kind::kLinear) return 1.0;
  return x >= 0.0 ? act.pos_slope : act.neg_slope;
}

Architecture Architecture::standard(int input_dim, int latent_dim) {
  const auto leaky = Activation::leaky(kLeakyPositiveSlope, kLeakyNegativeSlope);
  Architecture a;
  a.input_dim = input_dim;
  a.encoder = {{300, leaky}, {100, Activation::linear()}};
  a.latent_dim = latent_dim;
  a.decoder = {{100, leaky}, {100, leaky}, {300, Activation::linear()}, {input_dim, Activation::linear()}};
  return a;
}

void Architecture::validate() const {
  require(input_dim >= 1, "input_dim must be >= 1");
  require(latent_dim >= 1, "latent_dim must be >= 1");
  require(!decoder.empty(), "decoder needs at least an output layer");
  require(decoder.back().units == input_dim, "decoder output must match input_dim");
  for (const auto* group : {&encoder, &decoder}) {
    for (const auto& l : *group) {
      require(l.units >= 1, "layer units must be >= 1");
      require(std::isfinite(l.activation.pos_slope) && std::isfinite(l.activation.neg_slope),
              "activation slopes must be finite");
    }
  }
}

std::vector<DenseLayer*> VaeParams::layers() {
  std::vector<DenseLayer*> out;
  for (auto& l : encoder) out.push_back(&l);
  out.push_back(&mu_head);
  out.push_back(&logvar_head);
  for (auto& l : decoder) out.push_back(&l);
  return out;
}

std::vector<const DenseLayer*> VaeParams::layers() const {
  std::vector<const DenseLayer*> out;
  for (const auto& l : encoder) out.push_back(&l);
  out.push_back(&mu_head);
  out.push_back(&logvar_head);
  for (const auto& l : decoder) out.push_back(&l);
  return out;
}

std::size_t VaeParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto* l : layers()) n += static_cast<std::size_t>(l->weight.size() + l->bias.size());
  return n;
}

bool VaeParams::all_finite() const {
  for (const auto* l : layers()) {
    if (!l->weight.allFinite() || !l->bias.allFinite()) return false;
  }
  return input_shift.allFinite();
}

VaeParams zeros_like(const VaeParams& params) {
  VaeParams z = params;
  for (auto* l : z.layers()) {
    l->weight.setZero();
    l->bias.setZero();
  }
  return z;
}

VaeParams init_params(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  VaeParams p;
  p.arch = arch;
  int in = arch.input_dim;
  for (const auto& spec : arch.encoder) {
    p.encoder.push_back(make_layer(in, spec.units, spec.activation));
    in = spec.units;
  }
  p.mu_head = make_layer(in, arch.latent_dim, Activation::linear());
  p.logvar_head = make_layer(in, arch.latent_dim, Activation::linear());
  in = arch.latent_dim;
  for (const auto& spec : arch.decoder) {
    p.decoder.push_back(make_layer(in, spec.units, spec.activation));
    in = spec.units;
  }

  Rng rng(seed);
  for (auto* l : p.layers()) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(l->weight.cols()));
    for (Eigen::Index c = 0; c < l->weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < l->weight.rows(); ++r) l->weight(r, c) = scale * standard_normal(rng);
    }
  }
  return p;
}

Encoding encode(const VaeParams& params, const Eigen::VectorXd& x) {
  require(x.size() == params.arch.input_dim, "encode: input length does not match input_dim");
  const Eigen::MatrixXd h = run(params.encoder, encoder_input(params, x.transpose()), nullptr);
  return {head(params.mu_head, h).col(0), head(params.logvar_head, h).col(0)};
}

Eigen::VectorXd reparameterize(const Eigen::VectorXd& mu, const Eigen::VectorXd& logvar, Rng& rng) {
  require(mu.size() == logvar.size(), "reparameterize: mu and logvar sizes differ");
  Eigen::VectorXd z(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) z(i) = mu(i) + std::exp(0.5 * logvar(i)) * standard_normal(rng);
  return z;
}

Eigen::MatrixXd decode_batch(const VaeParams& params, const Eigen::MatrixXd& z) {
  require(z.rows() == params.arch.latent_dim, "decode: latent length does not match latent_dim");
  return run(params.decoder, z, nullptr);
}

Eigen::VectorXd decode(const VaeParams& params, const Eigen::VectorXd& z) {
  return decode_batch(params, z).col(0);
}

LossTerms loss(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat, const Eigen::VectorXd& mu,
               const Eigen::VectorXd& logvar, double beta) {
  require(x.size() == x_hat.size() && x.size() > 0, "loss: x and x_hat sizes differ");
  require(mu.size() == logvar.size(), "loss: mu and logvar sizes differ");
  return mean_terms(x, x_hat, mu, logvar, beta);
}

LossTerms batch_loss(const VaeParams& params, const Eigen::MatrixXd& batch, double beta, const Eigen::MatrixXd& noise) {
  check_batch(params, batch);
  const Eigen::MatrixXd x = batch.transpose();
  const Eigen::MatrixXd h = run(params.encoder, encoder_input(params, batch), nullptr);
  const Eigen::MatrixXd mu = head(params.mu_head, h);
  const Eigen::MatrixXd logvar = head(params.logvar_head, h);
  const Eigen::MatrixXd z = mu + (0.5 * logvar.array()).exp().matrix().cwiseProduct(noise);
  return mean_terms(x, run(params.decoder, z, nullptr), mu, logvar, beta);
}

LossTerms reconstruction_loss(const VaeParams& params, const Eigen::MatrixXd& batch, double beta) {
  check_batch(params, batch);
  const Eigen::MatrixXd x = batch.transpose();
  const Eigen::MatrixXd h = run(params.encoder, encoder_input(params, batch), nullptr);
  const Eigen::MatrixXd mu = head(params.mu_head, h);
  const Eigen::MatrixXd logvar = head(params.logvar_head, h);
  return mean_terms(x, run(params.decoder, mu, nullptr), mu, logvar, beta);
}

Gradients backward(const VaeParams& params, const Eigen::MatrixXd& batch, double beta, const Eigen::MatrixXd& noise) {
  check_batch(params, batch);
  require(noise.rows() == params.arch.latent_dim && noise.cols() == batch.rows(), "noise must be latent_dim x batch rows");
  const auto n = static_cast<double>(batch.rows());
  const auto dim = static_cast<double>(batch.cols());

  const Eigen::MatrixXd x = batch.transpose();
  Tape enc_tape;
  const Eigen::MatrixXd h = run(params.encoder, encoder_input(params, batch), &enc_tape);
  const Eigen::MatrixXd mu = head(params.mu_head, h);
  const Eigen::MatrixXd logvar = head(params.logvar_head, h);
  const Eigen::MatrixXd sigma = (0.5 * logvar.array()).exp().matrix();
  const Eigen::MatrixXd z = mu + sigma.cwiseProduct(noise);

  Tape dec_tape;
  const Eigen::MatrixXd x_hat = run(params.decoder, z, &dec_tape);

  Gradients out;
  out.grad = zeros_like(params);
  out.loss = mean_terms(x, x_hat, mu, logvar, beta);
  out.deterministic = mean_terms(x, run(params.decoder, mu, nullptr), mu, logvar, beta);

  const Eigen::MatrixXd d_xhat = (2.0 / (dim * n)) * (x_hat - x);
  const Eigen::MatrixXd d_z = backprop(params.decoder, dec_tape, d_xhat, out.grad.decoder);

  const Eigen::MatrixXd d_mu = d_z + (beta / n) * mu;
  const Eigen::MatrixXd d_logvar =
      (0.5 * d_z.cwiseProduct(noise).cwiseProduct(sigma).array() + (0.5 * beta / n) * (logvar.array().exp() - 1.0))
          .matrix();

  out.grad.mu_head.weight.noalias() = d_mu * h.transpose();
  out.grad.mu_head.bias = d_mu.rowwise().sum();
  out.grad.logvar_head.weight.noalias() = d_logvar * h.transpose();
  out.grad.logvar_head.bias = d_logvar.rowwise().sum();
  const Eigen::MatrixXd d_h =
      params.mu_head.weight.transpose() * d_mu + params.logvar_head.weight.transpose() * d_logvar;
  backprop(params.encoder, enc_tape, d_h, out.grad.encoder);

  if (!out.grad.all_finite()) fail(ErrorCode::kNumerical, "non-finite gradient");
  return out;
}

Gradients backward(const VaeParams& params, const Eigen::MatrixXd& batch, double beta, Rng& rng) {
  Eigen::MatrixXd noise(params.arch.latent_dim, batch.rows());
  for (Eigen::Index c = 0; c < noise.cols(); ++c) {
    for (Eigen::Index r = 0; r < noise.rows(); ++r) noise(r, c) = standard_normal(rng);
  }
  return backward(params, batch, beta, noise);
}

void TrainConfig::validate() const {
  require(epochs >= 1, "epochs must be >= 1");
  require(learning_rate >= 0.0 && std::isfinite(learning_rate), "learning_rate must be >= 0");
  require(kl_weight >= 0.0 && std::isfinite(kl_weight), "kl_weight must be >= 0");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "moment decays must be in [0, 1)");
  require(epsilon > 0.0, "epsilon must be > 0");
}

TrainResult train(VaeParams params, const NormalizedMatrix& data, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  require(data.rows() >= 1, "training data must have at least one row");
  Rng rng(cfg.seed);
  if (cfg.center_encoder_input) params.input_shift = data.values.colwise().mean().transpose();

  VaeParams m1 = zeros_like(params);
  VaeParams m2 = zeros_like(params);
  double decay1 = 1.0;
  double decay2 = 1.0;

  TrainResult result;
  result.history.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Gradients g;
    try {
      g = backward(params, data.values, cfg.kl_weight, rng);
    } catch (const Error& e) {
      fail(ErrorCode::kNumerical, "training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
    const EpochLoss entry{g.deterministic.mse, g.deterministic.kl, g.deterministic.total};
    if (!std::isfinite(entry.total)) {
      fail(ErrorCode::kNumerical, "training diverged at epoch " + std::to_string(epoch) + ": loss is not finite");
    }
    result.history.push_back(entry);
    if (on_epoch) on_epoch(epoch, entry);

    const auto layers = params.layers();
    const auto grads = g.grad.layers();
    if (cfg.optimizer == OptimizerKind::kGradientDescent) {
      for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i]->weight -= cfg.learning_rate * grads[i]->weight;
        layers[i]->bias -= cfg.learning_rate * grads[i]->bias;
      }
      continue;
    }

    decay1 *= cfg.beta1;
    decay2 *= cfg.beta2;
    const double step = cfg.learning_rate * std::sqrt(1.0 - decay2) / (1.0 - decay1);
    const auto first = m1.layers();
    const auto second = m2.layers();
    auto adam = [&](auto& value, const auto& grad, auto& mom1, auto& mom2) {
      mom1 = cfg.beta1 * mom1 + (1.0 - cfg.beta1) * grad;
      mom2 = cfg.beta2 * mom2 + (1.0 - cfg.beta2) * grad.cwiseAbs2();
      value.array() -= step * mom1.array() / (mom2.array().sqrt() + cfg.epsilon);
    };
    for (std::size_t i = 0; i < layers.size(); ++i) {
      adam(layers[i]->weight, grads[i]->weight, first[i]->weight, second[i]->weight);
      adam(layers[i]->bias, grads[i]->bias, first[i]->bias, second[i]->bias);
    }
  }
  result.params = std::move(params);
  return result;
}

Eigen::MatrixXd latent_codes(const VaeParams& params, const NormalizedMatrix& data) {
  check_batch(params, data.values);
  const Eigen::MatrixXd h = run(params.encoder, encoder_input(params, data.values), nullptr);
  return head(params.mu_head, h).transpose();
}

}  // namespace wildgen
