#include <filesystem>
#include <set>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "helpers.hpp"
#include "wildgen/error.hpp"
#include "wildgen/pipeline.hpp"
#include "wildgen/seed.hpp"
#include "wildgen/trajectory_io.hpp"

namespace wildgen {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kIo;
}

TEST(ConfigTest, DefaultsRoundTripThroughJson) {
  const PipelineConfig defaults;
  const auto text = config_to_json(defaults);
  EXPECT_EQ(config_to_json(config_from_json(text)), text);
  defaults.validate();
  EXPECT_EQ(defaults.network.for_input(370), Architecture::standard());
}

TEST(ConfigTest, OverlaysOnlyTheGivenKeys) {
  const auto cfg = config_from_json(R"({"seed": 9, "train": {"epochs": 12}, "savgol": {"window": 11}})");
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.train.epochs, 12);
  EXPECT_EQ(cfg.savgol.window, 11);
  EXPECT_EQ(cfg.savgol.polyorder, 3);
  EXPECT_EQ(cfg.train.learning_rate, TrainConfig{}.learning_rate);
}

TEST(ConfigTest, TinyConfigParses) {
  const auto cfg = config_from_json(testing::tiny_config_json());
  cfg.validate();
  EXPECT_EQ(cfg.network.latent_dim, 2);
  EXPECT_EQ(cfg.network.for_input(60).decoder.back().units, 60);
}

TEST(ConfigTest, UnknownKeysAndWrongTypesAreParseErrors) {
  auto message = [](const std::string& text) {
    try {
      config_from_json(text);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParse);
      return std::string(e.what());
    }
    ADD_FAILURE() << text;
    return std::string();
  };
  EXPECT_NE(message(R"({"train": {"epoch": 3}})").find("train.epoch"), std::string::npos);
  EXPECT_NE(message(R"({"bogus": 1})").find("bogus"), std::string::npos);
  message(R"({"seed": "x"})");
  message(R"({"train": {"optimizer": "rmsprop"}})");
  message(R"({"architecture": {"encoder_hidden": [{"units": 3, "activation": {"kind": "tanh"}}]}})");
  message("[1, 2");
}

TEST(ConfigTest, ValidationRejectsOutOfRangeValues) {
  for (const char* text : {R"({"synth": {"horizon_days": 1}})", R"({"train": {"epochs": 0}})",
                           R"({"gmm": {"k": 0}})", R"({"savgol": {"window": 4}})",
                           R"({"generation": {"count": 0}})", R"({"baselines": {"hgpr_subsample": 0}})",
                           R"({"normalization_factor": -1})"}) {
    EXPECT_EQ(code_of([&] { config_from_json(text).validate(); }), ErrorCode::kInvalidArgument) << text;
  }
}

TEST(ConfigTest, LoadReportsMissingFiles) {
  EXPECT_EQ(code_of([] { load_config("/nonexistent/wildgen.json"); }), ErrorCode::kIo);
}

TEST(ModeTest, FourTogglesCombinations) {
  std::set<std::pair<bool, bool>> seen;
  for (auto mode : {GenerateMode::kRaw, GenerateMode::kSmoothed, GenerateMode::kMbr, GenerateMode::kFull}) {
    const auto t = toggles_for(mode);
    seen.insert({t.smoothing, t.mbr});
    EXPECT_EQ(mode_for(t), mode);
    EXPECT_EQ(parse_generate_mode(to_string(mode)), mode);
  }
  EXPECT_EQ(seen.size(), 4u);
  EXPECT_EQ(toggles_for(GenerateMode::kFull).smoothing, true);
  EXPECT_EQ(toggles_for(GenerateMode::kFull).mbr, true);
  EXPECT_THROW(parse_generate_mode("both"), Error);
  EXPECT_EQ(parse_baseline("hgpr"), BaselineKind::kHgpr);
  EXPECT_THROW(parse_baseline("gan"), Error);
}

TEST(SeedTest, StagesGetDistinctStreams) {
  const PipelineConfig cfg;
  std::set<std::uint64_t> seeds;
  for (const char* s : {stage::kSynth, stage::kInit, stage::kTrain, stage::kGmm, stage::kGenerate, stage::kLevy,
                        stage::kHgpr, stage::kEvaluate}) {
    seeds.insert(stage_seed(cfg, s));
    EXPECT_EQ(stage_seed(cfg, s), derive_seed(42, s));
  }
  EXPECT_EQ(seeds.size(), 8u);
  EXPECT_NE(derive_seed(1, "synth"), derive_seed(2, "synth"));
}

TEST(SeedTest, SplitMixReferenceValues) {
  // First outputs of the reference splitmix64 generator seeded with 0.
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafull);
  EXPECT_EQ(splitmix64(0x9e3779b97f4a7c15ull), 0x6e789e6aa1b965f4ull);
}

class TinyPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    cfg_ = new PipelineConfig(config_from_json(testing::tiny_config_json()));
    real_ = new TrajectorySet(synthesize(*cfg_));
    outcome_ = new TrainOutcome(train_model(*real_, *cfg_));
  }
  static void TearDownTestSuite() {
    delete outcome_;
    delete real_;
    delete cfg_;
  }
  static PipelineConfig* cfg_;
  static TrajectorySet* real_;
  static TrainOutcome* outcome_;
};

PipelineConfig* TinyPipeline::cfg_ = nullptr;
TrajectorySet* TinyPipeline::real_ = nullptr;
TrainOutcome* TinyPipeline::outcome_ = nullptr;

TEST_F(TinyPipeline, TrainingRecordsEverything) {
  const auto& c = outcome_->checkpoint;
  EXPECT_EQ(outcome_->history.size(), 400u);
  EXPECT_LT(outcome_->history.back().reconstruction_mse, outcome_->history.front().reconstruction_mse);
  EXPECT_EQ(c.horizon, 30u);
  EXPECT_EQ(c.latent_codes.rows(), 16);
  EXPECT_EQ(c.gmm.k, 3);
  EXPECT_EQ(c.master_seed, 5u);
  EXPECT_EQ(c.init_seed, derive_seed(5, stage::kInit));
  const auto again = train_model(*real_, *cfg_);
  EXPECT_EQ(again.checkpoint.vae, c.vae);
  EXPECT_EQ(again.checkpoint.gmm.means, c.gmm.means);
}

TEST_F(TinyPipeline, ModesShareTheDecodedSamples) {
  const auto& c = outcome_->checkpoint;
  const auto raw = generate(c, 10, toggles_for(GenerateMode::kRaw), cfg_->savgol, 77, 1);
  const auto smoothed = generate(c, 10, toggles_for(GenerateMode::kSmoothed), cfg_->savgol, 77, 1);
  ASSERT_EQ(raw.trajectories.size(), 10u);
  EXPECT_EQ(raw.attempts, 10u);
  EXPECT_EQ(raw.discarded, 0u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(smoothed.trajectories[i], smooth_trajectory(raw.trajectories[i], cfg_->savgol));
  }
  EXPECT_EQ(decode_samples(c, 10, 77), raw.trajectories);
  // Prefix stability: asking for more does not change the first draws.
  const auto longer = generate(c, 70, toggles_for(GenerateMode::kRaw), cfg_->savgol, 77, 1);
  EXPECT_EQ(longer.trajectories.head(10), raw.trajectories);
}

TEST_F(TinyPipeline, MbrModesKeepOnlyContainedTrajectories) {
  const auto& c = outcome_->checkpoint;
  for (auto mode : {GenerateMode::kMbr, GenerateMode::kFull}) {
    const auto g = generate(c, 8, toggles_for(mode), cfg_->savgol, 3, 500);
    ASSERT_EQ(g.trajectories.size(), 8u);
    EXPECT_EQ(g.attempts, 8u + g.discarded);
    for (const auto& t : g.trajectories) EXPECT_TRUE(contains(c.region, t));
  }
}

TEST_F(TinyPipeline, ShortfallWhenTheCapIsHit) {
  Checkpoint c = outcome_->checkpoint;
  // A sliver far from every trajectory rejects all candidates.
  c.region = convex_hull({{-170, -80}, {-169, -80}, {-169, -79}});
  try {
    generate(c, 5, toggles_for(GenerateMode::kMbr), cfg_->savgol, 1, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShortfall);
    EXPECT_NE(std::string(e.what()).find("only 0 of 5"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("15 attempts"), std::string::npos);
  }
}

TEST_F(TinyPipeline, SavgolWindowLongerThanHorizonIsRejected) {
  EXPECT_EQ(code_of([] { generate(outcome_->checkpoint, 2, toggles_for(GenerateMode::kSmoothed), {41, 2}, 1, 1); }),
            ErrorCode::kInvalidArgument);
}

TEST_F(TinyPipeline, BaselinesProduceTheRequestedCount) {
  for (auto kind : {BaselineKind::kLevy, BaselineKind::kHgpr}) {
    const auto b = run_baseline(*real_, kind, 8, *cfg_);
    EXPECT_EQ(b.generation.trajectories.size(), 8u) << to_string(kind);
    EXPECT_EQ(b.generation.trajectories.horizon(), 30u);
    EXPECT_FALSE(nlohmann::json::parse(b.params_json).empty());
  }
}

TEST_F(TinyPipeline, FilteredHgprStaysInTheHull) {
  PipelineConfig cfg = *cfg_;
  cfg.postprocess.mbr = true;
  const auto b = run_baseline(*real_, BaselineKind::kHgpr, 8, cfg);
  const auto hull = convex_hull(real_->pooled_points());
  ASSERT_EQ(b.generation.trajectories.size(), 8u);
  for (const auto& t : b.generation.trajectories) EXPECT_TRUE(contains(hull, t));
}

TEST_F(TinyPipeline, CommandsWriteTheirFiles) {
  PipelineConfig cfg = *cfg_;
  cfg.out_dir = testing::scratch_dir("pipeline_cmds");
  cfg.corpus = cfg.out_dir / "corpus.csv";
  cfg.checkpoint = cfg.out_dir / "checkpoint.json";
  std::ostringstream log;
  cmd_synth(cfg, log);
  EXPECT_EQ(read_trajectory_csv(cfg.corpus), *real_);
  cmd_train(cfg, log);
  for (const char* f : {"checkpoint.json", "loss_history.csv", "region.geojson"}) {
    EXPECT_TRUE(std::filesystem::exists(cfg.out_dir / f)) << f;
  }
  cmd_generate(cfg, GenerateMode::kFull, 8, log);
  const auto manifest = nlohmann::json::parse(read_file(cfg.out_dir / "generated_full.manifest.json"));
  EXPECT_EQ(manifest["produced"], 8);
  EXPECT_EQ(manifest["mode"], "full");
  EXPECT_DOUBLE_EQ(manifest["reference_discard_rate"].get<double>(), kReferenceDiscardRate);
  cmd_baseline(cfg, BaselineKind::kHgpr, 16, log);
  const auto rows = cmd_evaluate(cfg, {{}, {cfg.out_dir / "baseline_hgpr.csv"}}, log);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].method, "baseline_hgpr");
  EXPECT_TRUE(std::filesystem::exists(cfg.out_dir / "metrics_baseline_hgpr.json"));
  EXPECT_TRUE(std::filesystem::exists(cfg.out_dir / "metrics_table.txt"));
  cmd_plot(cfg, {{}, {cfg.out_dir / "generated_full.csv"}, {cfg.out_dir / "baseline_hgpr.csv"}, cfg.checkpoint}, log);
  for (const char* f : {"plot.geojson", "plot.svg", "latent.svg"}) {
    EXPECT_TRUE(std::filesystem::exists(cfg.out_dir / f)) << f;
  }
  // 8 generated trajectories cannot be compared against 16 real ones.
  EXPECT_EQ(code_of([&] { cmd_evaluate(cfg, {{}, {cfg.out_dir / "generated_full.csv"}}, log); }),
            ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace wildgen
