#include "qamem/util/rng.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace qamem::util {

namespace {
constexpr uint64_t kFnvOffset = 14695981039346656037ull;
constexpr uint64_t kFnvPrime = 1099511628211ull;

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}
}  // namespace

uint64_t mix_seed(uint64_t seed, std::string_view tag) {
  uint64_t h = kFnvOffset;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return splitmix64(seed ^ h);
}

uint64_t rand_index(Rng& rng, uint64_t n) {
  // Modulo bias is ~n/2^64, irrelevant at the scales used here.
  return n == 0 ? 0 : rng() % n;
}

double rand_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double rand_normal(Rng& rng) {
  double u1 = rand_unit(rng);
  double u2 = rand_unit(rng);
  while (u1 <= 0.0) u1 = rand_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double trunc_normal(Rng& rng, double sigma) {
  for (;;) {
    double z = rand_normal(rng) * sigma;
    if (std::abs(z) <= 2.0 * sigma) return z;
  }
}

std::vector<int> sample_indices(Rng& rng, int n, int k) {
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  std::vector<int> out;
  out.reserve(k);
  for (int i = 0; i < k && i < n; ++i) {
    int j = i + static_cast<int>(rand_index(rng, n - i));
    std::swap(all[i], all[j]);
    out.push_back(all[i]);
  }
  return out;
}

}  // namespace qamem::util
