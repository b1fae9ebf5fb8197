#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wildgen/baselines.hpp"
#include "wildgen/checkpoint.hpp"
#include "wildgen/ingest.hpp"
#include "wildgen/latent_gmm.hpp"
#include "wildgen/metrics.hpp"
#include "wildgen/postprocess.hpp"
#include "wildgen/synthgen.hpp"
#include "wildgen/vae.hpp"

namespace wildgen {

/// Hidden layers only; the input and output widths follow the data (2m).
struct NetworkConfig {
  std::vector<LayerSpec> encoder_hidden;
  int latent_dim = 3;
  std::vector<LayerSpec> decoder_hidden;
  Activation output_activation = Activation::linear();

  static NetworkConfig standard();
  Architecture for_input(int input_dim) const;
};

struct PostprocessToggles {
  bool smoothing = true;
  bool mbr = true;
};

/// The four ablation settings; they differ only in the two toggles.
enum class GenerateMode { kRaw, kSmoothed, kMbr, kFull };

PostprocessToggles toggles_for(GenerateMode mode);
GenerateMode mode_for(const PostprocessToggles& toggles);
std::string to_string(GenerateMode mode);
GenerateMode parse_generate_mode(const std::string& text);

struct PipelineConfig {
  std::uint64_t seed = 42;
  std::filesystem::path corpus = "out/corpus.csv";
  std::filesystem::path checkpoint = "out/checkpoint.json";
  std::filesystem::path out_dir = "out";

  SynthConfig synth;
  PreprocessOptions preprocess;
  double normalization_factor = kDefaultNormalizationFactor;
  NetworkConfig network = NetworkConfig::standard();
  TrainConfig train;
  GmmFitOptions gmm;
  SavgolSpec savgol;
  PostprocessToggles postprocess;
  EvaluateOptions evaluation;
  int generation_count = 60;
  int attempt_cap_factor = 20;
  double hgpr_subsample = 0.5;
  // Baseline walks rarely stay inside a corridor-shaped hull, so they get a
  // much larger attempt budget than the VAE sampler.
  int baseline_attempt_cap_factor = 2000;

  /// Throws on any invariant violation; run before any work starts.
  void validate() const;
};

/// Overlays keys from a JSON config onto `base`; unknown keys are errors.
PipelineConfig config_from_json(const std::string& text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const PipelineConfig& cfg);

/// Stage seeds derived from the master seed (see derive_seed).
namespace stage {
inline constexpr const char* kSynth = "synth";
inline constexpr const char* kInit = "vae.init";
inline constexpr const char* kTrain = "vae.train";
inline constexpr const char* kGmm = "gmm";
inline constexpr const char* kGenerate = "generate";
inline constexpr const char* kLevy = "baseline.levy";
inline constexpr const char* kHgpr = "baseline.hgpr";
inline constexpr const char* kEvaluate = "evaluate";
}  // namespace stage

std::uint64_t stage_seed(const PipelineConfig& cfg, const char* name);

// ---------------------------------------------------------------------------
// Library-level stages (no file I/O)

TrajectorySet synthesize(const PipelineConfig& cfg);

struct TrainOutcome {
  Checkpoint checkpoint;
  LossHistory history;
};

/// normalize -> train VAE -> fit GMM on latent codes; also records the hull.
TrainOutcome train_model(const TrajectorySet& real, const PipelineConfig& cfg, const EpochCallback& on_epoch = {});

struct GenerationResult {
  TrajectorySet trajectories;   // survivors, in sampling order
  std::size_t attempts = 0;     // decoded candidates examined
  std::size_t discarded = 0;    // rejected by the region filter
};

/// Draws latent samples until `count` candidates survive post-processing
/// (or attempt_cap_factor * count attempts are spent, which throws).
GenerationResult generate(const Checkpoint& ckpt, int count, const PostprocessToggles& toggles,
                          const SavgolSpec& savgol, std::uint64_t seed, int attempt_cap_factor);

/// Raw decoded trajectories for the first `count` latent draws of `seed`.
TrajectorySet decode_samples(const Checkpoint& ckpt, int count, std::uint64_t seed);

enum class BaselineKind { kLevy, kHgpr };
std::string to_string(BaselineKind kind);
BaselineKind parse_baseline(const std::string& text);

struct BaselineResult {
  GenerationResult generation;
  std::string params_json;  // fitted parameters for inspection
};

BaselineResult run_baseline(const TrajectorySet& real, BaselineKind kind, int count, const PipelineConfig& cfg);

// ---------------------------------------------------------------------------
// Commands: read inputs, write outputs under cfg.out_dir, log a summary.

struct EvaluateInputs {
  std::filesystem::path real;
  std::vector<std::filesystem::path> generated;
};

struct PlotInputs {
  std::filesystem::path real;
  std::vector<std::filesystem::path> generated;
  std::vector<std::filesystem::path> baselines;
  std::optional<std::filesystem::path> checkpoint;
};

void cmd_synth(const PipelineConfig& cfg, std::ostream& log);
void cmd_train(const PipelineConfig& cfg, std::ostream& log);
void cmd_generate(const PipelineConfig& cfg, GenerateMode mode, int count, std::ostream& log);
void cmd_baseline(const PipelineConfig& cfg, BaselineKind kind, int count, std::ostream& log);
std::vector<NamedReport> cmd_evaluate(const PipelineConfig& cfg, const EvaluateInputs& inputs, std::ostream& log);
void cmd_plot(const PipelineConfig& cfg, const PlotInputs& inputs, std::ostream& log);

inline constexpr double kReferenceDiscardRate = 0.296;

}  // namespace wildgen
