#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace hyper {

using Rng = std::mt19937_64;

/// Stable per-purpose seed derived from a global seed ("data", "init",
/// "rollout", "selection", ...). FNV-1a over the purpose, mixed by splitmix64.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view purpose);
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view purpose,
                          std::uint64_t index);

/// Uniform in the open interval (0, 1).
double uniform_open(Rng& rng);
double standard_normal(Rng& rng);
/// Standard Gumbel(0, 1) draw: -log(-log U).
double gumbel(Rng& rng);
/// Uniform integer in [0, n); n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

}  // namespace hyper
