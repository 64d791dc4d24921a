#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qamem::util {

using Rng = std::mt19937_64;

// Derives a sub-seed from (seed, tag) so components can be reseeded
// independently without correlating their streams.
uint64_t mix_seed(uint64_t seed, std::string_view tag);

// Uniform integer in [0, n). Implemented directly on the raw generator so
// results are identical across standard libraries (uniform_int_distribution
// is implementation-defined).
uint64_t rand_index(Rng& rng, uint64_t n);

// Uniform double in [0, 1).
double rand_unit(Rng& rng);

// Standard normal via Box-Muller on rand_unit (portable determinism).
double rand_normal(Rng& rng);

// Normal(0, sigma) resampled until |z| <= 2*sigma.
double trunc_normal(Rng& rng, double sigma);

// In-place Fisher-Yates.
template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rand_index(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// Sample k distinct indices from [0, n), in random order.
std::vector<int> sample_indices(Rng& rng, int n, int k);

}  // namespace qamem::util
