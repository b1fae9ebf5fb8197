#include "wildgen/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wildgen/error.hpp"
#include "wildgen/plot.hpp"
#include "wildgen/random.hpp"
#include "wildgen/seed.hpp"
#include "wildgen/trajectory_io.hpp"

namespace wildgen {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kLeakyPositiveSlope = 0.06;
constexpr double kLeakyNegativeSlope = 0.001;
constexpr int kLatentBatch = 64;

// Walks a JSON object and rejects keys nobody asked for, so typos in a config
// file fail loudly instead of silently keeping a default.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : json_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(ErrorCode::kParse, "config: '" + display() + "' must be an object");
  }

  ~ObjectReader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : json_.items()) {
      if (!seen_.count(key)) fail(ErrorCode::kParse, "config: unknown key '" + join(key) + "'");
    }
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    auto it = json_.find(key);
    return it == json_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& target) {
    const Json* v = find(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, std::filesystem::path>) {
        target = v->get<std::string>();
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v->is_number_integer()) throw std::invalid_argument("not an integer");
        target = v->get<T>();
      } else {
        target = v->get<T>();
      }
    } catch (const std::exception&) {
      fail(ErrorCode::kParse, "config: '" + join(key) + "' has the wrong type");
    }
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string display() const { return path_.empty() ? "<root>" : path_; }

  const Json& json_;
  std::string path_;
  std::set<std::string> seen_;
};

Activation activation_from(const Json& j, const std::string& where) {
  ObjectReader r(j, where);
  std::string kind = "linear";
  r.read("kind", kind);
  if (kind == "linear") return Activation::linear();
  if (kind == "leaky") {
    double pos = kLeakyPositiveSlope;
    double neg = kLeakyNegativeSlope;
    r.read("pos_slope", pos);
    r.read("neg_slope", neg);
    return Activation::leaky(pos, neg);
  }
  fail(ErrorCode::kParse, "config: '" + where + ".kind' must be 'leaky' or 'linear'");
}

Json activation_json(const Activation& a) {
  if (a.kind == Activation::Kind::kLinear) return {{"kind", "linear"}};
  return {{"kind", "leaky"}, {"pos_slope", a.pos_slope}, {"neg_slope", a.neg_slope}};
}

std::vector<LayerSpec> layers_from(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(ErrorCode::kParse, "config: '" + where + "' must be an array");
  std::vector<LayerSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string item = where + "[" + std::to_string(i) + "]";
    ObjectReader r(j[i], item);
    LayerSpec spec;
    r.read("units", spec.units);
    if (const Json* a = r.find("activation")) spec.activation = activation_from(*a, item + ".activation");
    out.push_back(spec);
  }
  return out;
}

Json layers_json(const std::vector<LayerSpec>& layers) {
  Json out = Json::array();
  for (const auto& l : layers) out.push_back({{"units", l.units}, {"activation", activation_json(l.activation)}});
  return out;
}

void read_region(ObjectReader& parent, const std::string& key, Region& region) {
  const Json* j = parent.find(key);
  if (!j) return;
  ObjectReader r(*j, parent.join(key));
  r.read("lon", region.center.lon);
  r.read("lat", region.center.lat);
  r.read("radius", region.radius);
}

std::string month_day_text(const MonthDay& md) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02u-%02u", md.month, md.day);
  return buf;
}

std::string optimizer_text(OptimizerKind k) { return k == OptimizerKind::kAdam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(const std::string& text) {
  if (text == "adam") return OptimizerKind::kAdam;
  if (text == "sgd") return OptimizerKind::kGradientDescent;
  fail(ErrorCode::kParse, "config: 'train.optimizer' must be 'adam' or 'sgd'");
}

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

// Pulls candidates until `count` survive the enabled post-processing steps.
GenerationResult generate_until(std::size_t horizon, int count, const PostprocessToggles& toggles,
                                const SavgolSpec& savgol, const ConvexRegion* region, int attempt_cap_factor,
                                Rng& rng, const std::function<void(Rng&, std::vector<Trajectory>&)>& next_batch) {
  require(count >= 1, "generation count must be >= 1");
  require(attempt_cap_factor >= 1, "attempt cap factor must be >= 1");
  if (toggles.smoothing) {
    savgol.validate();
    require(static_cast<std::size_t>(savgol.window) <= horizon,
            "savgol window " + std::to_string(savgol.window) + " exceeds horizon " + std::to_string(horizon));
  }
  if (toggles.mbr) require(region && region->vertices.size() >= 3, "mbr filtering needs a stored region");

  const std::size_t cap = static_cast<std::size_t>(attempt_cap_factor) * static_cast<std::size_t>(count);
  GenerationResult result;
  result.trajectories = TrajectorySet(horizon);
  std::vector<Trajectory> batch;
  while (result.trajectories.size() < static_cast<std::size_t>(count)) {
    batch.clear();
    next_batch(rng, batch);
    for (auto& candidate : batch) {
      if (result.trajectories.size() == static_cast<std::size_t>(count)) break;
      if (result.attempts == cap) break;
      ++result.attempts;
      Trajectory t = toggles.smoothing ? smooth_trajectory(candidate, savgol) : std::move(candidate);
      if (toggles.mbr && !contains(*region, t)) {
        ++result.discarded;
        continue;
      }
      result.trajectories.push_back(std::move(t));
    }
    if (result.attempts == cap && result.trajectories.size() < static_cast<std::size_t>(count)) {
      fail(ErrorCode::kShortfall, "only " + std::to_string(result.trajectories.size()) + " of " +
                                      std::to_string(count) + " trajectories survived after " +
                                      std::to_string(result.attempts) + " attempts");
    }
  }
  return result;
}

std::function<void(Rng&, std::vector<Trajectory>&)> latent_source(const Checkpoint& ckpt) {
  return [&ckpt](Rng& rng, std::vector<Trajectory>& out) {
    const Eigen::MatrixXd z = sample_gmm(ckpt.gmm, kLatentBatch, rng);
    const Eigen::MatrixXd x = decode_batch(ckpt.vae, z.transpose());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      out.push_back(unflatten(x.col(c), ckpt.normalization.scale));
    }
  };
}

double discard_rate(const GenerationResult& g) {
  return g.attempts == 0 ? 0.0 : static_cast<double>(g.discarded) / static_cast<double>(g.attempts);
}

Json manifest_json(const std::string& method, const std::string& mode, int count, const GenerationResult& g,
                   const PostprocessToggles& toggles, const SavgolSpec& savgol, std::uint64_t master,
                   std::uint64_t stage) {
  Json j;
  j["method"] = method;
  j["mode"] = mode;
  j["requested"] = count;
  j["produced"] = g.trajectories.size();
  j["attempts"] = g.attempts;
  j["discarded"] = g.discarded;
  j["discard_rate"] = discard_rate(g);
  j["reference_discard_rate"] = kReferenceDiscardRate;
  j["postprocess"] = {{"smoothing", toggles.smoothing}, {"mbr", toggles.mbr}};
  j["savgol"] = {{"window", savgol.window}, {"polyorder", savgol.polyorder}};
  j["seeds"] = {{"master", master}, {"stage", stage}};
  return j;
}

TrajectorySet read_corpus(const PipelineConfig& cfg) {
  return load_corpus(cfg.corpus, cfg.preprocess);
}

std::string stem(const std::filesystem::path& p) { return p.stem().string(); }

}  // namespace

// ---------------------------------------------------------------------------

NetworkConfig NetworkConfig::standard() {
  const Architecture a = Architecture::standard();
  NetworkConfig n;
  n.encoder_hidden = a.encoder;
  n.latent_dim = a.latent_dim;
  n.decoder_hidden.assign(a.decoder.begin(), a.decoder.end() - 1);
  n.output_activation = a.decoder.back().activation;
  return n;
}

Architecture NetworkConfig::for_input(int input_dim) const {
  Architecture a;
  a.input_dim = input_dim;
  a.encoder = encoder_hidden;
  a.latent_dim = latent_dim;
  a.decoder = decoder_hidden;
  a.decoder.push_back({input_dim, output_activation});
  a.validate();
  return a;
}

PostprocessToggles toggles_for(GenerateMode mode) {
  switch (mode) {
    case GenerateMode::kRaw: return {false, false};
    case GenerateMode::kSmoothed: return {true, false};
    case GenerateMode::kMbr: return {false, true};
    case GenerateMode::kFull: return {true, true};
  }
  return {true, true};
}

GenerateMode mode_for(const PostprocessToggles& t) {
  if (t.smoothing) return t.mbr ? GenerateMode::kFull : GenerateMode::kSmoothed;
  return t.mbr ? GenerateMode::kMbr : GenerateMode::kRaw;
}

std::string to_string(GenerateMode mode) {
  switch (mode) {
    case GenerateMode::kRaw: return "raw";
    case GenerateMode::kSmoothed: return "smoothed";
    case GenerateMode::kMbr: return "mbr";
    case GenerateMode::kFull: return "full";
  }
  return "full";
}

GenerateMode parse_generate_mode(const std::string& text) {
  for (auto m : {GenerateMode::kRaw, GenerateMode::kSmoothed, GenerateMode::kMbr, GenerateMode::kFull}) {
    if (text == to_string(m)) return m;
  }
  fail(ErrorCode::kInvalidArgument, "unknown mode '" + text + "' (expected raw|smoothed|mbr|full)");
}

std::string to_string(BaselineKind kind) { return kind == BaselineKind::kLevy ? "levy" : "hgpr"; }

BaselineKind parse_baseline(const std::string& text) {
  if (text == "levy") return BaselineKind::kLevy;
  if (text == "hgpr") return BaselineKind::kHgpr;
  fail(ErrorCode::kInvalidArgument, "unknown baseline '" + text + "' (expected levy|hgpr)");
}

void PipelineConfig::validate() const {
  wildgen::validate(synth);
  require(preprocess.window_len_days >= 2, "preprocess.window_len_days must be >= 2");
  require(preprocess.max_gap_days >= 0, "preprocess.max_gap_days must be >= 0");
  require(preprocess.window_start.month >= 1 && preprocess.window_start.month <= 12 &&
              preprocess.window_start.day >= 1 && preprocess.window_start.day <= 31,
          "preprocess.window_start must be a valid MM-DD");
  require(std::isfinite(normalization_factor) && normalization_factor > 0.0, "normalization_factor must be > 0");
  network.for_input(2);  // checks every hidden layer
  train.validate();
  require(gmm.k >= 1, "gmm.k must be >= 1");
  require(std::isfinite(gmm.reg) && gmm.reg > 0.0, "gmm.reg must be > 0");
  require(gmm.max_iters >= 1, "gmm.max_iters must be >= 1");
  require(gmm.tol >= 0.0, "gmm.tol must be >= 0");
  savgol.validate();
  require(evaluation.k >= 0, "evaluation.k must be >= 0");
  if (evaluation.k == 0) {
    require(evaluation.k_min >= 2, "evaluation.k_min must be >= 2");
    require(evaluation.k_max >= evaluation.k_min, "evaluation.k_max must be >= evaluation.k_min");
  }
  require(generation_count >= 1, "generation.count must be >= 1");
  require(attempt_cap_factor >= 1, "generation.attempt_cap_factor must be >= 1");
  require(baseline_attempt_cap_factor >= 1, "baselines.attempt_cap_factor must be >= 1");
  require(hgpr_subsample > 0.0 && hgpr_subsample <= 1.0, "baselines.hgpr_subsample must be in (0, 1]");
}

PipelineConfig config_from_json(const std::string& text, PipelineConfig cfg) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  ObjectReader r(root, "");
  r.read("seed", cfg.seed);
  if (const Json* j = r.find("paths")) {
    ObjectReader p(*j, "paths");
    p.read("corpus", cfg.corpus);
    p.read("checkpoint", cfg.checkpoint);
    p.read("out_dir", cfg.out_dir);
  }
  if (const Json* j = r.find("synth")) {
    ObjectReader s(*j, "synth");
    s.read("n_trajectories", cfg.synth.n_trajectories);
    s.read("horizon_days", cfg.synth.horizon_days);
    read_region(s, "start_region", cfg.synth.start_region);
    read_region(s, "end_region", cfg.synth.end_region);
    s.read("n_stopovers", cfg.synth.n_stopovers);
    s.read("stopover_dwell_days", cfg.synth.stopover_dwell_days);
    s.read("noise_sd", cfg.synth.noise_sd);
    s.read("timing_jitter_days", cfg.synth.timing_jitter_days);
  }
  if (const Json* j = r.find("preprocess")) {
    ObjectReader p(*j, "preprocess");
    std::string start;
    p.read("window_start", start);
    if (!start.empty()) cfg.preprocess.window_start = parse_month_day(start);
    p.read("window_len_days", cfg.preprocess.window_len_days);
    p.read("max_gap_days", cfg.preprocess.max_gap_days);
  }
  r.read("normalization_factor", cfg.normalization_factor);
  if (const Json* j = r.find("architecture")) {
    ObjectReader a(*j, "architecture");
    if (const Json* e = a.find("encoder_hidden")) cfg.network.encoder_hidden = layers_from(*e, "architecture.encoder_hidden");
    a.read("latent_dim", cfg.network.latent_dim);
    if (const Json* d = a.find("decoder_hidden")) cfg.network.decoder_hidden = layers_from(*d, "architecture.decoder_hidden");
    if (const Json* o = a.find("output_activation")) {
      cfg.network.output_activation = activation_from(*o, "architecture.output_activation");
    }
  }
  if (const Json* j = r.find("train")) {
    ObjectReader t(*j, "train");
    t.read("epochs", cfg.train.epochs);
    t.read("learning_rate", cfg.train.learning_rate);
    t.read("kl_weight", cfg.train.kl_weight);
    std::string optimizer;
    t.read("optimizer", optimizer);
    if (!optimizer.empty()) cfg.train.optimizer = parse_optimizer(optimizer);
    t.read("beta1", cfg.train.beta1);
    t.read("beta2", cfg.train.beta2);
    t.read("epsilon", cfg.train.epsilon);
  }
  if (const Json* j = r.find("gmm")) {
    ObjectReader g(*j, "gmm");
    g.read("k", cfg.gmm.k);
    g.read("reg", cfg.gmm.reg);
    g.read("max_iters", cfg.gmm.max_iters);
    g.read("tol", cfg.gmm.tol);
  }
  if (const Json* j = r.find("savgol")) {
    ObjectReader s(*j, "savgol");
    s.read("window", cfg.savgol.window);
    s.read("polyorder", cfg.savgol.polyorder);
  }
  if (const Json* j = r.find("postprocess")) {
    ObjectReader p(*j, "postprocess");
    p.read("smoothing", cfg.postprocess.smoothing);
    p.read("mbr", cfg.postprocess.mbr);
  }
  if (const Json* j = r.find("evaluation")) {
    ObjectReader e(*j, "evaluation");
    e.read("k", cfg.evaluation.k);
    e.read("k_min", cfg.evaluation.k_min);
    e.read("k_max", cfg.evaluation.k_max);
  }
  if (const Json* j = r.find("generation")) {
    ObjectReader g(*j, "generation");
    g.read("count", cfg.generation_count);
    g.read("attempt_cap_factor", cfg.attempt_cap_factor);
  }
  if (const Json* j = r.find("baselines")) {
    ObjectReader b(*j, "baselines");
    b.read("hgpr_subsample", cfg.hgpr_subsample);
    b.read("attempt_cap_factor", cfg.baseline_attempt_cap_factor);
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_file(path));
}

std::string config_to_json(const PipelineConfig& cfg) {
  auto region = [](const Region& r) { return Json{{"lon", r.center.lon}, {"lat", r.center.lat}, {"radius", r.radius}}; };
  Json j;
  j["seed"] = cfg.seed;
  j["paths"] = {{"corpus", cfg.corpus.string()}, {"checkpoint", cfg.checkpoint.string()}, {"out_dir", cfg.out_dir.string()}};
  j["synth"] = {{"n_trajectories", cfg.synth.n_trajectories},
                {"horizon_days", cfg.synth.horizon_days},
                {"start_region", region(cfg.synth.start_region)},
                {"end_region", region(cfg.synth.end_region)},
                {"n_stopovers", cfg.synth.n_stopovers},
                {"stopover_dwell_days", cfg.synth.stopover_dwell_days},
                {"noise_sd", cfg.synth.noise_sd},
                {"timing_jitter_days", cfg.synth.timing_jitter_days}};
  j["preprocess"] = {{"window_start", month_day_text(cfg.preprocess.window_start)},
                     {"window_len_days", cfg.preprocess.window_len_days},
                     {"max_gap_days", cfg.preprocess.max_gap_days}};
  j["normalization_factor"] = cfg.normalization_factor;
  j["architecture"] = {{"encoder_hidden", layers_json(cfg.network.encoder_hidden)},
                       {"latent_dim", cfg.network.latent_dim},
                       {"decoder_hidden", layers_json(cfg.network.decoder_hidden)},
                       {"output_activation", activation_json(cfg.network.output_activation)}};
  j["train"] = {{"epochs", cfg.train.epochs},
                {"learning_rate", cfg.train.learning_rate},
                {"kl_weight", cfg.train.kl_weight},
                {"optimizer", optimizer_text(cfg.train.optimizer)},
                {"beta1", cfg.train.beta1},
                {"beta2", cfg.train.beta2},
                {"epsilon", cfg.train.epsilon}};
  j["gmm"] = {{"k", cfg.gmm.k}, {"reg", cfg.gmm.reg}, {"max_iters", cfg.gmm.max_iters}, {"tol", cfg.gmm.tol}};
  j["savgol"] = {{"window", cfg.savgol.window}, {"polyorder", cfg.savgol.polyorder}};
  j["postprocess"] = {{"smoothing", cfg.postprocess.smoothing}, {"mbr", cfg.postprocess.mbr}};
  j["evaluation"] = {{"k", cfg.evaluation.k}, {"k_min", cfg.evaluation.k_min}, {"k_max", cfg.evaluation.k_max}};
  j["generation"] = {{"count", cfg.generation_count}, {"attempt_cap_factor", cfg.attempt_cap_factor}};
  j["baselines"] = {{"hgpr_subsample", cfg.hgpr_subsample},
                    {"attempt_cap_factor", cfg.baseline_attempt_cap_factor}};
  return json_text(j);
}

std::uint64_t stage_seed(const PipelineConfig& cfg, const char* name) { return derive_seed(cfg.seed, name); }

// ---------------------------------------------------------------------------

TrajectorySet synthesize(const PipelineConfig& cfg) {
  SynthConfig s = cfg.synth;
  s.seed = stage_seed(cfg, stage::kSynth);
  return generate_corpus(s);
}

TrainOutcome train_model(const TrajectorySet& real, const PipelineConfig& cfg, const EpochCallback& on_epoch) {
  require(real.size() >= 1, "training corpus is empty");
  const Normalized normalized = normalize(real, cfg.normalization_factor);
  const Architecture arch = cfg.network.for_input(static_cast<int>(2 * real.horizon()));

  Checkpoint ckpt;
  ckpt.master_seed = cfg.seed;
  ckpt.init_seed = stage_seed(cfg, stage::kInit);
  ckpt.train_seed = stage_seed(cfg, stage::kTrain);
  ckpt.gmm_seed = stage_seed(cfg, stage::kGmm);
  ckpt.normalization = normalized.params;
  ckpt.normalization_factor = cfg.normalization_factor;
  ckpt.horizon = real.horizon();
  ckpt.epochs = cfg.train.epochs;

  TrainConfig tc = cfg.train;
  tc.seed = ckpt.train_seed;
  TrainResult trained = train(init_params(arch, ckpt.init_seed), normalized.matrix, tc, on_epoch);
  ckpt.vae = std::move(trained.params);
  ckpt.latent_codes = latent_codes(ckpt.vae, normalized.matrix);

  GmmFitOptions go = cfg.gmm;
  go.seed = ckpt.gmm_seed;
  ckpt.gmm = fit_gmm(ckpt.latent_codes, go);
  ckpt.region = convex_hull(real.pooled_points());
  return {std::move(ckpt), std::move(trained.history)};
}

GenerationResult generate(const Checkpoint& ckpt, int count, const PostprocessToggles& toggles,
                          const SavgolSpec& savgol, std::uint64_t seed, int attempt_cap_factor) {
  Rng rng(seed);
  return generate_until(ckpt.horizon, count, toggles, savgol, &ckpt.region, attempt_cap_factor, rng,
                        latent_source(ckpt));
}

TrajectorySet decode_samples(const Checkpoint& ckpt, int count, std::uint64_t seed) {
  return generate(ckpt, count, {false, false}, SavgolSpec{}, seed, 1).trajectories;
}

BaselineResult run_baseline(const TrajectorySet& real, BaselineKind kind, int count, const PipelineConfig& cfg) {
  require(!real.empty(), "baseline corpus is empty");
  const ConvexRegion region = convex_hull(real.pooled_points());
  BaselineResult out;
  Json params;
  if (kind == BaselineKind::kLevy) {
    const LevyParams p = fit_levy(real);
    params = {{"step_location", p.step_location}, {"step_scale", p.step_scale}, {"angular_sd", p.angular_sd},
              {"linear_sd", p.linear_sd},         {"alpha_estimate", p.alpha_estimate},
              {"rotation", p.rotation},           {"max_step", p.max_step}};
    Rng rng(stage_seed(cfg, stage::kLevy));
    const int steps = static_cast<int>(real.horizon()) - 1;
    out.generation = generate_until(
        real.horizon(), count, cfg.postprocess, cfg.savgol, &region, cfg.baseline_attempt_cap_factor, rng,
        [&](Rng& r, std::vector<Trajectory>& batch) {
          std::uniform_int_distribution<std::size_t> pick(0, real.size() - 1);
          const GeoPoint start = real[pick(r)].points.front();
          batch.push_back(generate_levy(p, steps, start, r));
        });
  } else {
    const HgprModel model = fit_hgpr(real, cfg.hgpr_subsample, stage_seed(cfg, stage::kHgpr));
    auto kernel = [](const GpDimension& d) {
      return Json{{"signal_variance", d.kernel.signal_variance},
                  {"length_scale", d.kernel.length_scale},
                  {"bias_variance", d.kernel.bias_variance},
                  {"offset", d.offset},
                  {"log_marginal_likelihood", d.log_marginal_likelihood}};
    };
    params = {{"subsample_size", model.subsample.size()}, {"lon", kernel(model.lon)}, {"lat", kernel(model.lat)}};
    Rng rng(derive_seed(stage_seed(cfg, stage::kHgpr), "sample"));
    out.generation = generate_until(real.horizon(), count, cfg.postprocess, cfg.savgol, &region,
                                    cfg.baseline_attempt_cap_factor, rng, [&](Rng& r, std::vector<Trajectory>& batch) {
                                      batch.push_back(sample_hgpr(model, 1, r)[0]);
                                    });
  }
  out.params_json = json_text(params);
  return out;
}

// ---------------------------------------------------------------------------

void cmd_synth(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  const TrajectorySet corpus = synthesize(cfg);
  const auto path = cfg.out_dir / "corpus.csv";
  write_trajectory_csv(path, corpus);
  log << "synth: " << corpus.size() << " trajectories x " << corpus.horizon() << " days -> " << path.string() << "\n";
}

void cmd_train(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  const TrajectorySet real = read_corpus(cfg);
  log << "train: " << real.size() << " trajectories x " << real.horizon() << " days from " << cfg.corpus.string()
      << "\n";
  const int every = std::max(1, cfg.train.epochs / 10);
  TrainOutcome outcome = train_model(real, cfg, [&](int epoch, const EpochLoss& l) {
    if (epoch % every == 0) log << "  epoch " << epoch << "  mse " << l.reconstruction_mse << "  kl " << l.kl << "\n";
  });

  save_checkpoint(cfg.checkpoint, outcome.checkpoint);
  std::ostringstream csv;
  csv << "epoch,reconstruction_mse,kl,total\n";
  for (std::size_t e = 0; e < outcome.history.size(); ++e) {
    const auto& l = outcome.history[e];
    csv << e << ',' << format_double(l.reconstruction_mse) << ',' << format_double(l.kl) << ','
        << format_double(l.total) << '\n';
  }
  write_file(cfg.out_dir / "loss_history.csv", csv.str());
  write_file(cfg.out_dir / "region.geojson", region_to_geojson(outcome.checkpoint.region));

  const auto& h = outcome.history;
  if (!h.empty()) {
    log << "train: mse " << h.front().reconstruction_mse << " -> " << h.back().reconstruction_mse << " ("
        << 100.0 * h.back().reconstruction_mse / h.front().reconstruction_mse << "% of initial)\n";
  }
  const auto& g = outcome.checkpoint.gmm;
  log << "train: gmm k=" << g.k << " after " << g.objective_trace.size() - 1
      << " EM steps, log-likelihood " << g.fit_log_likelihood << "\n";
  log << "train: checkpoint -> " << cfg.checkpoint.string() << "\n";
}

void cmd_generate(const PipelineConfig& cfg, GenerateMode mode, int count, std::ostream& log) {
  cfg.validate();
  require(count >= 1, "count must be >= 1");
  const Checkpoint ckpt = load_checkpoint(cfg.checkpoint);
  const auto toggles = toggles_for(mode);
  const std::uint64_t seed = stage_seed(cfg, stage::kGenerate);
  const GenerationResult g = generate(ckpt, count, toggles, cfg.savgol, seed, cfg.attempt_cap_factor);

  const std::string name = "generated_" + to_string(mode);
  write_trajectory_csv(cfg.out_dir / (name + ".csv"), g.trajectories);
  write_file(cfg.out_dir / (name + ".manifest.json"),
             json_text(manifest_json("wildgen", to_string(mode), count, g, toggles, cfg.savgol, cfg.seed, seed)));
  log << "generate: mode " << to_string(mode) << ", " << g.trajectories.size() << " kept of " << g.attempts
      << " attempts (discard rate " << discard_rate(g) << ", reference " << kReferenceDiscardRate << ")\n";
}

void cmd_baseline(const PipelineConfig& cfg, BaselineKind kind, int count, std::ostream& log) {
  cfg.validate();
  const TrajectorySet real = read_corpus(cfg);
  const BaselineResult b = run_baseline(real, kind, count, cfg);
  const std::string name = "baseline_" + to_string(kind);
  const std::uint64_t seed = stage_seed(cfg, kind == BaselineKind::kLevy ? stage::kLevy : stage::kHgpr);
  write_trajectory_csv(cfg.out_dir / (name + ".csv"), b.generation.trajectories);
  write_file(cfg.out_dir / (name + ".params.json"), b.params_json);
  write_file(cfg.out_dir / (name + ".manifest.json"),
             json_text(manifest_json(to_string(kind), to_string(mode_for(cfg.postprocess)), count, b.generation,
                                     cfg.postprocess, cfg.savgol, cfg.seed, seed)));
  log << "baseline: " << to_string(kind) << ", " << b.generation.trajectories.size() << " kept of "
      << b.generation.attempts << " attempts\n";
}

std::vector<NamedReport> cmd_evaluate(const PipelineConfig& cfg, const EvaluateInputs& inputs, std::ostream& log) {
  cfg.validate();
  require(!inputs.generated.empty(), "evaluate needs at least one generated file");
  const auto real_path = inputs.real.empty() ? cfg.corpus : inputs.real;
  const TrajectorySet real = load_corpus(real_path, cfg.preprocess);
  EvaluateOptions options = cfg.evaluation;
  options.seed = stage_seed(cfg, stage::kEvaluate);

  std::vector<NamedReport> rows;
  for (const auto& path : inputs.generated) {
    const TrajectorySet generated = read_trajectory_csv(path);
    NamedReport row{stem(path), evaluate(real, generated, options)};
    write_file(cfg.out_dir / ("metrics_" + row.method + ".json"), report_to_json(row.report) + "\n");
    rows.push_back(std::move(row));
  }
  const std::string table = format_table(rows);
  write_file(cfg.out_dir / "metrics_table.txt", table);
  log << table;
  return rows;
}

void cmd_plot(const PipelineConfig& cfg, const PlotInputs& inputs, std::ostream& log) {
  cfg.validate();
  std::vector<PlotLayer> layers;
  const auto real_path = inputs.real.empty() ? cfg.corpus : inputs.real;
  layers.push_back({SetKind::kReal, stem(real_path), load_corpus(real_path, cfg.preprocess)});
  for (const auto& p : inputs.generated) layers.push_back({SetKind::kGenerated, stem(p), read_trajectory_csv(p)});
  for (const auto& p : inputs.baselines) layers.push_back({SetKind::kBaseline, stem(p), read_trajectory_csv(p)});

  write_file(cfg.out_dir / "plot.geojson", plot_geojson(layers));
  write_file(cfg.out_dir / "plot.svg", plot_svg(layers));
  std::size_t n = 0;
  for (const auto& l : layers) n += l.trajectories.size();
  log << "plot: " << layers.size() << " layers, " << n << " trajectories -> " << (cfg.out_dir / "plot.svg").string()
      << "\n";

  if (inputs.checkpoint) {
    const Checkpoint ckpt = load_checkpoint(*inputs.checkpoint);
    Rng rng(stage_seed(cfg, stage::kGenerate));
    const auto samples = sample_gmm(ckpt.gmm, static_cast<int>(std::max<Eigen::Index>(1, ckpt.latent_codes.rows())), rng);
    write_file(cfg.out_dir / "latent.svg", latent_svg(ckpt.latent_codes, samples));
    log << "plot: latent scatter -> " << (cfg.out_dir / "latent.svg").string() << "\n";
  }
}

}  // namespace wildgen
