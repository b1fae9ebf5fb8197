// Acceptance harness: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.
//
//   wildgen_acceptance [--workdir DIR] [--only N[,N...]]

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gradcheck.hpp"
#include "helpers.hpp"
#include "wildgen/checkpoint.hpp"
#include "wildgen/error.hpp"
#include "wildgen/latent_gmm.hpp"
#include "wildgen/metrics.hpp"
#include "wildgen/pipeline.hpp"
#include "wildgen/postprocess.hpp"
#include "wildgen/seed.hpp"
#include "wildgen/synthgen.hpp"
#include "wildgen/trajectory_io.hpp"
#include "wildgen/vae.hpp"

namespace fs = std::filesystem;
using namespace wildgen;

namespace {

// Pinned tolerances and budgets.
constexpr double kGradTolerance = 1e-4;
constexpr double kFdStep = 1e-5;
constexpr int kGradArchitectures = 24;
constexpr double kOverfitFraction = 0.01;
constexpr int kOverfitEpochs = 2000;
constexpr double kCorpusFraction = 0.10;
constexpr int kCorpusEpochs = 5000;
constexpr double kEmSlack = 1e-9;
constexpr int kEmRuns = 50;
constexpr double kBlobTolerance = 0.1;
constexpr double kPolyTolerance = 1e-9;
constexpr double kCoeffTolerance = 1e-12;
constexpr int kMetricTrials = 1000;
constexpr double kMetricSlack = 1e-12;
constexpr int kHullClouds = 1000;
constexpr double kLevyRatio = 2.0;
constexpr double kWildgenMinR = 0.9;
constexpr double kLevyMaxR = 0.5;
constexpr std::uint64_t kMasterSeed = 42;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

// Runs the CLI; stdout and stderr go to `log`.
int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + WILDGEN_CLI_PATH + "\" " + args + " >> \"" + log.string() + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

// ---------------------------------------------------------------------------

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::size_t params = 0;
  for (int s = 1; s <= kGradArchitectures; ++s) {
    const auto net = testing::random_small_network(static_cast<std::uint64_t>(s) * 101);
    std::mt19937_64 rng(static_cast<std::uint64_t>(s));
    const Eigen::Index rows = 1 + s % 5;
    const auto batch = testing::random_matrix(rows, net.arch.input_dim, rng);
    const auto noise = testing::random_matrix(net.arch.latent_dim, rows, rng);
    const double beta = (s % 3 == 0) ? 0.0 : (s % 3 == 1 ? 1e-3 : 1.0);
    const auto check = testing::check_gradients(net, batch, beta, noise, kFdStep);
    worst = std::max(worst, check.max_relative_error);
    params += check.parameters;
  }
  const double elapsed = seconds_since(t0);
  return {worst < kGradTolerance && elapsed < 30.0,
          std::to_string(kGradArchitectures) + " networks, " + std::to_string(params) + " parameters, max rel err " +
              fmt(worst, 3) + " < " + fmt(kGradTolerance) + ", " + fmt(elapsed, 3) + " s"};
}

Outcome training() {
  const auto t0 = std::chrono::steady_clock::now();
  const PipelineConfig cfg;
  SynthConfig sc = cfg.synth;
  sc.seed = derive_seed(kMasterSeed, stage::kSynth);
  const TrajectorySet corpus = generate_corpus(sc);
  const Normalized all = normalize(corpus, cfg.normalization_factor);
  const Architecture arch = cfg.network.for_input(static_cast<int>(all.matrix.cols()));

  TrainConfig tc = cfg.train;
  tc.seed = 1;
  tc.epochs = kOverfitEpochs;
  const NormalizedMatrix one{all.matrix.values.topRows(1)};
  const auto single = train(init_params(arch, 2), one, tc);
  const double one_initial = single.history.front().reconstruction_mse;
  const double one_final = reconstruction_loss(single.params, one.values, 0.0).mse;

  tc.epochs = kCorpusEpochs;
  const auto full = train(init_params(arch, derive_seed(kMasterSeed, stage::kInit)), all.matrix, tc);
  const double full_initial = full.history.front().reconstruction_mse;
  const double full_final = reconstruction_loss(full.params, all.matrix.values, 0.0).mse;

  const double r1 = one_final / one_initial;
  const double r2 = full_final / full_initial;
  const double elapsed = seconds_since(t0);
  return {r1 < kOverfitFraction && r2 <= kCorpusFraction && elapsed < 300.0,
          "overfit-one " + fmt(100 * r1, 3) + "% of initial after " + std::to_string(kOverfitEpochs) +
              " epochs (< 1%); " + std::to_string(corpus.size()) + "x" + std::to_string(all.matrix.cols()) +
              " corpus " + fmt(100 * r2, 3) + "% after " + std::to_string(kCorpusEpochs) + " epochs (<= 10%), " +
              fmt(elapsed, 3) + " s"};
}

Outcome em() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_drop = 0.0;
  std::size_t steps = 0;
  for (int run = 0; run < kEmRuns; ++run) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(run) + 1000);
    const int true_k = 1 + run % 4;
    const int n = 40 + 7 * run;
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd centres = testing::random_matrix(true_k, 3, rng, 3.0);
    Eigen::MatrixXd codes(n, 3);
    for (int i = 0; i < n; ++i) codes.row(i) = centres.row(i % true_k) + Eigen::RowVector3d(g(rng), g(rng), g(rng));
    GmmFitOptions opt;
    opt.k = 2 + run % 6;
    opt.tol = 0.0;
    opt.max_iters = 200;
    opt.seed = static_cast<std::uint64_t>(run);
    const auto model = fit_gmm(codes, opt);
    const auto& tr = model.objective_trace;
    for (std::size_t i = 1; i < tr.size(); ++i) worst_drop = std::max(worst_drop, tr[i - 1] - tr[i]);
    steps += tr.size();
  }

  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 0.5);
  const Eigen::RowVector3d a(-2.5, 1.0, 0.0), b(2.5, -1.0, 1.5);
  Eigen::MatrixXd codes(400, 3);
  for (int i = 0; i < 400; ++i) codes.row(i) = (i < 200 ? a : b) + Eigen::RowVector3d(g(rng), g(rng), g(rng));
  GmmFitOptions opt;
  opt.k = 2;
  opt.seed = 3;
  const auto model = fit_gmm(codes, opt);
  const int ia = (model.means.row(0) - a).norm() <= (model.means.row(1) - a).norm() ? 0 : 1;
  const double err = std::max((model.means.row(ia) - a).norm(), (model.means.row(1 - ia) - b).norm());

  const double elapsed = seconds_since(t0);
  return {worst_drop <= kEmSlack && err < kBlobTolerance && elapsed < 60.0,
          std::to_string(kEmRuns) + " fits, " + std::to_string(steps) + " EM steps, largest drop " +
              fmt(worst_drop, 3) + " (slack 1e-9); two-blob mean error " + fmt(err, 3) + " < 0.1, " +
              fmt(elapsed, 3) + " s"};
}

Outcome savgol() {
  // Oracle: least-squares solve of the local polynomial fit for each unit impulse.
  auto direct = [](int window, int order) {
    const int n = window / 2;
    Eigen::MatrixXd A(window, order + 1);
    for (int i = 0; i < window; ++i) {
      for (int p = 0; p <= order; ++p) A(i, p) = std::pow(static_cast<double>(i - n), p);
    }
    std::vector<double> c(static_cast<std::size_t>(window));
    for (int j = 0; j < window; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(window);
      e(j) = 1.0;
      c[static_cast<std::size_t>(j)] = A.householderQr().solve(e)(0);
    }
    return c;
  };
  const double expected[] = {-3.0 / 35, 12.0 / 35, 17.0 / 35, 12.0 / 35, -3.0 / 35};
  const auto c = savgol_coefficients({5, 2});
  const auto oracle = direct(5, 2);
  double coeff_err = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    coeff_err = std::max({coeff_err, std::abs(c[i] - expected[i]), std::abs(c[i] - oracle[i])});
  }

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double poly_err = 0.0;
  int cases = 0;
  for (int window : {5, 7, 9, 15, 21, 31}) {
    for (int order = 0; order <= std::min(6, window - 2); ++order) {
      for (int degree = 0; degree <= order; ++degree) {
        std::vector<double> coef(static_cast<std::size_t>(degree + 1));
        for (auto& v : coef) v = u(rng);
        std::vector<double> x(80);
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double t = 0.05 * static_cast<double>(i) - 2.0;
          double v = 0.0;
          for (auto it = coef.rbegin(); it != coef.rend(); ++it) v = v * t + *it;
          x[i] = v;
        }
        const auto y = savgol_filter(x, {window, order});
        const auto h = static_cast<std::size_t>(window / 2);
        for (std::size_t i = h; i + h < x.size(); ++i) poly_err = std::max(poly_err, std::abs(y[i] - x[i]));
        ++cases;
      }
    }
  }
  return {poly_err < kPolyTolerance && coeff_err < kCoeffTolerance,
          std::to_string(cases) + " polynomial cases, max interior error " + fmt(poly_err, 3) +
              " < 1e-9; window-5/order-2 coefficient error " + fmt(coeff_err, 3) + " < 1e-12"};
}

Outcome metric_axioms() {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> size(1, 25);
  std::size_t violations = 0;
  for (int t = 0; t < kMetricTrials; ++t) {
    const auto a = testing::random_cloud(rng, size(rng));
    const auto b = testing::random_cloud(rng, size(rng));
    const auto c = testing::random_cloud(rng, size(rng));
    const double ab = hausdorff(a, b);
    if (ab != hausdorff(b, a)) ++violations;
    if (hausdorff(a, a) != 0.0) ++violations;
    if (hausdorff(a, c) > ab + hausdorff(b, c) + kMetricSlack) ++violations;
  }

  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  double affine_err = 0.0;
  std::size_t out_of_bounds = 0;
  for (int t = 0; t < kMetricTrials; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(t % 40);
    std::vector<double> x(n), y(n), z(n);
    const double mix = g(rng);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = g(rng);
      y[i] = mix * x[i] + g(rng);
    }
    const double r = pearson(x, y);
    if (!(r >= -1.0 && r <= 1.0)) ++out_of_bounds;
    const double a = scale(rng), b = 100.0 * g(rng);
    for (std::size_t i = 0; i < n; ++i) z[i] = a * y[i] + b;
    affine_err = std::max(affine_err, std::abs(pearson(x, z) - r));
  }

  double worst_increase = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto pts = testing::random_cloud(rng, 300);
    const auto m = kmeans_fit(pts, 2 + t % 14, static_cast<std::uint64_t>(t));
    for (std::size_t i = 1; i < m.distortion_trace.size(); ++i) {
      worst_increase = std::max(worst_increase, m.distortion_trace[i] - m.distortion_trace[i - 1]);
    }
  }
  const bool pass = violations == 0 && out_of_bounds == 0 && affine_err < 1e-9 && worst_increase <= 1e-9;
  return {pass, std::to_string(kMetricTrials) + " Hausdorff triples with " + std::to_string(violations) +
                    " axiom violations; Pearson " + std::to_string(out_of_bounds) + " out of [-1,1], affine drift " +
                    fmt(affine_err, 3) + "; k-means largest distortion increase " + fmt(worst_increase, 3)};
}

Outcome geometry() {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::size_t> size(3, 400);
  std::uniform_real_distribution<double> spread(1e-3, 1e3);
  std::size_t outside = 0, total = 0;
  for (int t = 0; t < kHullClouds; ++t) {
    const auto pts = testing::random_cloud(rng, size(rng), spread(rng));
    const auto hull = convex_hull(pts);
    for (const auto& p : pts) outside += contains(hull, p) ? 0 : 1;
    total += pts.size();
  }
  SynthConfig sc;
  sc.seed = derive_seed(kMasterSeed, stage::kSynth);
  const auto real = generate_corpus(sc);
  const auto filtered = mbr_filter(real, convex_hull(real.pooled_points()));
  return {outside == 0 && filtered.discarded_count == 0,
          std::to_string(total) + " points in " + std::to_string(kHullClouds) + " clouds, " + std::to_string(outside) +
              " outside their hull; mbr_filter on the real corpus discarded " +
              std::to_string(filtered.discarded_count) + " of " + std::to_string(real.size())};
}

// ---------------------------------------------------------------------------

struct E2E {
  fs::path dir;
  fs::path log;
  bool ran = false;
  bool ok = false;
  double seconds = 0.0;
};

E2E run_default_pipeline(const fs::path& work) {
  E2E e;
  e.dir = work / "e2e";
  e.log = work / "e2e.log";
  fs::remove_all(e.dir);
  fs::create_directories(e.dir);
  fs::remove(e.log);
  const auto t0 = std::chrono::steady_clock::now();
  const std::string common = " --seed " + std::to_string(kMasterSeed) + " --out " + quoted(e.dir);
  const auto& d = e.dir;
  e.ok = cli("synth" + common, e.log) == 0 && cli("train" + common, e.log) == 0 &&
         cli("generate --mode full" + common, e.log) == 0 && cli("baseline levy" + common, e.log) == 0 &&
         cli("baseline hgpr" + common, e.log) == 0 &&
         cli("evaluate" + common + " --generated " + quoted(d / "generated_full.csv") + " " +
                 quoted(d / "baseline_levy.csv") + " " + quoted(d / "baseline_hgpr.csv"),
             e.log) == 0;
  e.seconds = seconds_since(t0);
  e.ran = true;
  return e;
}

Outcome end_to_end(const E2E& e) {
  if (!e.ok) return {false, "pipeline command failed; see " + e.log.string()};
  auto metrics = [&](const std::string& stem) {
    return nlohmann::json::parse(read_file(e.dir / ("metrics_" + stem + ".json")));
  };
  const auto w = metrics("generated_full");
  const auto l = metrics("baseline_levy");
  const auto h = metrics("baseline_hgpr");
  const double wh = w["hausdorff_avg"], lh = l["hausdorff_avg"];
  const double wr = w["pearson_r"], lr = l["pearson_r"], hr = h["pearson_r"];
  const bool a = lh >= kLevyRatio * wh;
  const bool b = wr >= kWildgenMinR && lr < kLevyMaxR;
  const bool c = wr > hr;
  return {a && b && c && e.seconds < 600.0,
          std::string("(a) ") + (a ? "ok" : "FAIL") + " avg Hausdorff WildGEN " + fmt(wh) + " vs Levy " + fmt(lh) +
              " (ratio " + fmt(lh / wh, 3) + " >= 2); (b) " + (b ? "ok" : "FAIL") + " r WildGEN " + fmt(wr) +
              " >= 0.9, Levy " + fmt(lr) + " < 0.5; (c) " + (c ? "ok" : "FAIL") + " HGPR r " + fmt(hr) + " < " +
              fmt(wr) + "; " + fmt(e.seconds, 3) + " s"};
}

Outcome ablation(const E2E& e, const fs::path& work) {
  if (!e.ok) return {false, "no checkpoint from the end-to-end run"};
  const fs::path dir = work / "ablation";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path log = work / "ablation.log";
  fs::remove(log);
  const std::string common =
      " --seed " + std::to_string(kMasterSeed) + " --checkpoint " + quoted(e.dir / "checkpoint.json") + " --out " + quoted(dir);
  for (const char* mode : {"raw", "smoothed", "mbr", "full"}) {
    if (cli(std::string("generate --mode ") + mode + common, log) != 0) {
      return {false, std::string("generate --mode ") + mode + " failed; see " + log.string()};
    }
  }
  const Checkpoint ckpt = load_checkpoint(e.dir / "checkpoint.json");
  const PipelineConfig cfg;
  auto load = [&](const char* mode) { return read_trajectory_csv(dir / ("generated_" + std::string(mode) + ".csv")); };
  const auto raw = load("raw"), smoothed = load("smoothed"), mbr = load("mbr"), full = load("full");

  std::size_t outside = 0;
  for (const auto* set : {&mbr, &full}) {
    for (const auto& t : *set) outside += contains(ckpt.region, t) ? 0 : 1;
  }
  bool same_samples = raw.size() == smoothed.size();
  for (std::size_t i = 0; same_samples && i < raw.size(); ++i) {
    same_samples = smooth_trajectory(raw[i], cfg.savgol) == smoothed[i];
  }
  const double lraw = mean_path_length(raw), lsm = mean_path_length(smoothed);
  const auto manifest = nlohmann::json::parse(read_file(dir / "generated_full.manifest.json"));
  return {outside == 0 && same_samples && lsm < lraw,
          "4 modes from one checkpoint and seed; " + std::to_string(outside) + " MBR-mode trajectories outside the hull; " +
              "smoothed output " + (same_samples ? "is" : "is NOT") + " the smoothed raw samples; mean path length " +
              fmt(lsm) + " (smoothed) < " + fmt(lraw) + " (raw); full-mode discard rate " +
              fmt(manifest["discard_rate"].get<double>(), 3) + " (reference 0.296)"};
}

Outcome determinism(const E2E& e, const fs::path& work) {
  const fs::path base = work / "determinism";
  fs::remove_all(base);
  fs::create_directories(base);
  const fs::path cfg_path = base / "tiny.json";
  write_file(cfg_path, testing::tiny_config_json(kMasterSeed));
  const fs::path log = work / "determinism.log";
  fs::remove(log);

  std::vector<std::string> mismatches;
  std::size_t compared = 0;
  auto compare_dirs = [&](const fs::path& a, const fs::path& b, const std::vector<std::string>& files) {
    for (const auto& f : files) {
      ++compared;
      if (!fs::exists(a / f) || !fs::exists(b / f) || read_file(a / f) != read_file(b / f)) mismatches.push_back(f);
    }
  };

  // Every command on a small config, run twice into separate directories.
  for (const char* rep : {"a", "b"}) {
    const fs::path d = base / rep;
    const std::string common = " --config " + quoted(cfg_path) + " --out " + quoted(d);
    bool ok = cli("synth" + common, log) == 0 && cli("train" + common, log) == 0;
    for (const char* mode : {"raw", "smoothed", "mbr", "full"}) ok = ok && cli(std::string("generate --mode ") + mode + common, log) == 0;
    ok = ok && cli("baseline levy --count 16" + common, log) == 0 && cli("baseline hgpr --count 16" + common, log) == 0;
    ok = ok && cli("evaluate" + common + " --generated " + quoted(d / "baseline_levy.csv") + " " +
                       quoted(d / "baseline_hgpr.csv"),
                   log) == 0;
    ok = ok && cli("plot" + common + " --generated " + quoted(d / "generated_full.csv") + " --baseline " +
                       quoted(d / "baseline_levy.csv") + " --latent " + quoted(d / "checkpoint.json"),
                   log) == 0;
    if (!ok) return {false, "a CLI command failed; see " + log.string()};
  }
  compare_dirs(base / "a", base / "b",
               {"corpus.csv", "checkpoint.json", "loss_history.csv", "region.geojson", "generated_raw.csv",
                "generated_smoothed.csv", "generated_mbr.csv", "generated_full.csv", "generated_full.manifest.json",
                "baseline_levy.csv", "baseline_levy.params.json", "baseline_hgpr.csv", "baseline_hgpr.params.json",
                "metrics_baseline_levy.json", "metrics_baseline_hgpr.json", "metrics_table.txt", "plot.geojson",
                "plot.svg", "latent.svg"});

  // Sampling commands repeated against the default-config checkpoint.
  if (e.ok) {
    const fs::path d = base / "default";
    const std::string common = " --seed " + std::to_string(kMasterSeed) + " --out " + quoted(d) + " --corpus " +
                               quoted(e.dir / "corpus.csv");
    const bool ok = cli("generate --mode full --checkpoint " + quoted(e.dir / "checkpoint.json") + " --out " +
                            quoted(d) + " --seed " + std::to_string(kMasterSeed),
                        log) == 0 &&
                    cli("baseline levy" + common, log) == 0 && cli("baseline hgpr" + common, log) == 0;
    if (!ok) return {false, "default-config rerun failed; see " + log.string()};
    compare_dirs(e.dir, d, {"generated_full.csv", "baseline_levy.csv", "baseline_hgpr.csv"});
  }

  std::string detail = std::to_string(compared) + " output files compared across repeated runs, " +
                       std::to_string(mismatches.size()) + " differ";
  for (const auto& m : mismatches) detail += " " + m;
  return {mismatches.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = "acceptance_work";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--workdir" && i + 1 < argc) {
      work = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      for (std::string item; std::getline(list, item, ',');) only.insert(std::stoi(item));
    } else {
      std::cerr << "usage: wildgen_acceptance [--workdir DIR] [--only N[,N...]]\n";
      return 64;
    }
  }
  fs::create_directories(work);

  E2E e2e;
  auto pipeline = [&]() -> const E2E& {
    if (!e2e.ran) e2e = run_default_pipeline(work);
    return e2e;
  };

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", gradients},
      {2, "training sanity", training},
      {3, "EM monotonicity", em},
      {4, "Savitzky-Golay exactness", savgol},
      {5, "metric axioms", metric_axioms},
      {6, "geometry", geometry},
      {7, "end-to-end ordering", [&] { return end_to_end(pipeline()); }},
      {8, "ablation harness", [&] { return ablation(pipeline(), work); }},
      {9, "determinism", [&] { return determinism(pipeline(), work); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    if (!o.pass) ++failures;
    std::cout << "criterion " << c.id << " " << (o.pass ? "PASS" : "FAIL") << " [" << c.name << "] " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
