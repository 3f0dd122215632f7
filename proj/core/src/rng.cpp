#include "hyper/rng.hpp"

#include <cmath>

namespace hyper {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view purpose) {
  return splitmix64(global_seed ^ splitmix64(fnv1a(purpose)));
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view purpose,
                          std::uint64_t index) {
  return splitmix64(derive_seed(global_seed, purpose) + splitmix64(index));
}

double uniform_open(Rng& rng) {
  // 53 random bits, shifted off zero.
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return u + 0x1.0p-54;
}

double standard_normal(Rng& rng) {
  // Box-Muller keeps draws identical across standard library implementations.
  const double u1 = uniform_open(rng);
  const double u2 = uniform_open(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double gumbel(Rng& rng) { return -std::log(-std::log(uniform_open(rng))); }

std::size_t uniform_index(Rng& rng, std::size_t n) {
  // Rejection sampling removes modulo bias.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = Rng::max() - Rng::max() % bound;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return static_cast<std::size_t>(x % bound);
}

}  // namespace hyper
