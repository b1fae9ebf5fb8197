#pragma once

#include <cstdint>
#include <string_view>

namespace wildgen {

/// Stage seed = splitmix64(master ^ fnv1a64(stage)). Every stochastic stage
/// draws from its own stream, so adding a stage never shifts another.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace wildgen
