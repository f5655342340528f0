#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fedmix {

// All randomness flows through mt19937_64 seeded from explicit 64-bit seeds.
// The engine's output sequence is pinned by the standard, and every transform
// below is hand-rolled, so streams are bit-identical across platforms and
// compilers (std::uniform_real_distribution et al. are implementation-defined
// and must not be used anywhere in this library).
using Rng = std::mt19937_64;

// splitmix64 finalizer; good avalanche, cheap.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// FNV-1a over a string literal; used to label independent seed streams.
constexpr std::uint64_t stream_tag(const char* s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (; *s != '\0'; ++s) {
    h = (h ^ static_cast<unsigned char>(*s)) * 0x100000001b3ull;
  }
  return h;
}

// Derives an independent child seed from a base seed and any number of
// integer coordinates (stream tag, round, client id, epoch, ...).
template <typename... Parts>
constexpr std::uint64_t derive_seed(std::uint64_t base, Parts... parts) {
  std::uint64_t h = mix64(base);
  ((h = mix64(h ^ static_cast<std::uint64_t>(parts))), ...);
  return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(mix64(seed)); }

// Uniform double in [0, 1), 53-bit resolution.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in (0, 1]; safe as a log() argument.
inline double uniform_pos(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

double normal01(Rng& rng);

// Gamma(shape alpha, scale 1) via Marsaglia-Tsang squeeze; alpha < 1 handled
// with the usual boost Gamma(alpha) = Gamma(alpha + 1) * U^(1/alpha).
double gamma_sample(Rng& rng, double alpha);

// Uniform integer in [0, n); rejection sampled, no modulo bias.
int uniform_index(Rng& rng, int n);

// Fisher-Yates shuffle.
void shuffle_indices(Rng& rng, std::vector<int>& v);

// Draws `count` distinct values from 0..population-1, in random order.
std::vector<int> sample_without_replacement(Rng& rng, int population, int count);

}  // namespace fedmix
