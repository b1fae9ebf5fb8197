// wildgen: command-line front end for the trajectory generation pipeline.
//
// Every subcommand accepts --config PATH, --seed N and --out DIR. Flags win
// over config keys. Failures print exactly one line on stderr:
//
//   error code=<category> message="<text>"
//
// and exit with a category-specific nonzero status.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wildgen/error.hpp"
#include "wildgen/pipeline.hpp"

namespace {

using wildgen::ErrorCode;

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return 2;
    case ErrorCode::kParse: return 3;
    case ErrorCode::kDomain: return 4;
    case ErrorCode::kNumerical: return 5;
    case ErrorCode::kIo: return 6;
    case ErrorCode::kShortfall: return 7;
  }
  return 1;
}

std::string one_line(std::string text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == '\n' || c == '\r') {
      out += ' ';
    } else if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else {
      out += c;
    }
  }
  return out;
}

int report(std::string_view code, const std::string& message, int status) {
  std::cerr << "error code=" << code << " message=\"" << one_line(message) << "\"\n";
  return status;
}

struct Common {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> checkpoint;
};

wildgen::PipelineConfig resolve(const Common& c) {
  const wildgen::PipelineConfig defaults;
  wildgen::PipelineConfig cfg = c.config ? wildgen::load_config(*c.config) : defaults;
  if (c.seed) cfg.seed = *c.seed;
  if (c.out) {
    // Paths still at their defaults follow the output directory.
    if (cfg.corpus == defaults.corpus) cfg.corpus = *c.out / defaults.corpus.filename();
    if (cfg.checkpoint == defaults.checkpoint) cfg.checkpoint = *c.out / defaults.checkpoint.filename();
    cfg.out_dir = *c.out;
  }
  if (c.corpus) cfg.corpus = *c.corpus;
  if (c.checkpoint) cfg.checkpoint = *c.checkpoint;
  return cfg;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON config file");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--out", c.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wildgen: wildlife trajectory generation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common common;

  auto* synth = app.add_subcommand("synth", "write a synthetic migration corpus");
  add_common(synth, common);
  std::optional<int> n_traj, horizon;
  synth->add_option("--n", n_traj, "number of trajectories");
  synth->add_option("--horizon", horizon, "days per trajectory");

  auto* train = app.add_subcommand("train", "train the VAE and latent mixture");
  add_common(train, common);
  std::optional<int> epochs;
  train->add_option("--corpus", common.corpus, "corpus CSV (trajectory or raw track format)");
  train->add_option("--checkpoint", common.checkpoint, "checkpoint path to write");
  train->add_option("--epochs", epochs, "training epochs");

  auto* generate = app.add_subcommand("generate", "sample trajectories from a checkpoint");
  add_common(generate, common);
  std::optional<std::string> mode;
  std::optional<int> count;
  generate->add_option("--checkpoint", common.checkpoint, "checkpoint to load");
  generate->add_option("--mode", mode, "raw|smoothed|mbr|full (default from config toggles)");
  generate->add_option("--count", count, "trajectories to keep");

  auto* baseline = app.add_subcommand("baseline", "fit and sample a baseline model");
  add_common(baseline, common);
  std::string method;
  baseline->add_option("method", method, "levy|hgpr")->required();
  baseline->add_option("--corpus", common.corpus, "real corpus");
  baseline->add_option("--count", count, "trajectories to keep");

  auto* evaluate = app.add_subcommand("evaluate", "compare generated sets with the real corpus");
  add_common(evaluate, common);
  wildgen::EvaluateInputs eval_inputs;
  std::optional<int> eval_k;
  evaluate->add_option("--real", eval_inputs.real, "real corpus (default: config corpus)");
  evaluate->add_option("--generated", eval_inputs.generated, "generated trajectory CSV(s)")->required();
  evaluate->add_option("--k", eval_k, "cluster count; 0 selects by silhouette");

  auto* plot = app.add_subcommand("plot", "export GeoJSON and SVG overlays");
  add_common(plot, common);
  wildgen::PlotInputs plot_inputs;
  std::filesystem::path latent_checkpoint;
  plot->add_option("--real", plot_inputs.real, "real corpus (default: config corpus)");
  plot->add_option("--generated", plot_inputs.generated, "generated trajectory CSV(s)");
  plot->add_option("--baseline", plot_inputs.baselines, "baseline trajectory CSV(s)");
  plot->add_option("--latent", latent_checkpoint, "checkpoint for the latent-space scatter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what(), 64);
  }

  try {
    wildgen::PipelineConfig cfg = resolve(common);
    if (*synth) {
      if (n_traj) cfg.synth.n_trajectories = *n_traj;
      if (horizon) cfg.synth.horizon_days = *horizon;
      wildgen::cmd_synth(cfg, std::cout);
    } else if (*train) {
      if (epochs) cfg.train.epochs = *epochs;
      wildgen::cmd_train(cfg, std::cout);
    } else if (*generate) {
      const auto m = mode ? wildgen::parse_generate_mode(*mode) : wildgen::mode_for(cfg.postprocess);
      wildgen::cmd_generate(cfg, m, count.value_or(cfg.generation_count), std::cout);
    } else if (*baseline) {
      wildgen::cmd_baseline(cfg, wildgen::parse_baseline(method), count.value_or(cfg.generation_count), std::cout);
    } else if (*evaluate) {
      if (eval_k) cfg.evaluation.k = *eval_k;
      wildgen::cmd_evaluate(cfg, eval_inputs, std::cout);
    } else if (*plot) {
      if (!latent_checkpoint.empty()) plot_inputs.checkpoint = latent_checkpoint;
      wildgen::cmd_plot(cfg, plot_inputs, std::cout);
    }
  } catch (const wildgen::Error& e) {
    return report(wildgen::to_string(e.code()), e.what(), exit_status(e.code()));
  } catch (const std::exception& e) {
    return report("internal", e.what(), 1);
  }
  return 0;
}
