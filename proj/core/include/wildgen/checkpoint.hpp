#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Core>

#include "wildgen/ingest.hpp"
#include "wildgen/latent_gmm.hpp"
#include "wildgen/postprocess.hpp"
#include "wildgen/vae.hpp"

namespace wildgen {

inline constexpr int kCheckpointVersion = 1;

/// Everything `generate` needs: the trained network, the latent mixture,
/// the scaling that maps model space back to degrees, and the real-data hull.
struct Checkpoint {
  VaeParams vae;
  NormalizationParams normalization;
  double normalization_factor = kDefaultNormalizationFactor;
  GmmModel gmm;
  ConvexRegion region;
  std::size_t horizon = 0;
  Eigen::MatrixXd latent_codes;  // n x latent_dim, training-set encoder means
  std::uint64_t master_seed = 0;
  std::uint64_t init_seed = 0;
  std::uint64_t train_seed = 0;
  std::uint64_t gmm_seed = 0;
  int epochs = 0;
};

/// JSON container; matrices are stored row-major and doubles in shortest
/// round-trip form, so write -> read reproduces every value bit for bit.
std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace wildgen
