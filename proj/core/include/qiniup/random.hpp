#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace qiniup {

struct RandomSeed {
  std::uint64_t value = 0;

  /// Independent child seed for a labelled task; depends only on
  /// (value, label, index), never on execution order.
  RandomSeed derive(std::string_view label, std::uint64_t index = 0) const;

  friend bool operator==(RandomSeed, RandomSeed) = default;
};

using Rng = std::mt19937_64;

Rng make_rng(RandomSeed seed);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(Rng& rng);
/// Uniform integer in [0, bound).
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound);
bool bernoulli(Rng& rng, double prob);
/// Standard normal (Box-Muller; portable across standard libraries).
double standard_normal(Rng& rng);

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

std::vector<std::size_t> permutation(std::size_t n, Rng& rng);

/// FNV-1a 64-bit digest, used for input fingerprints and seed derivation.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace qiniup
