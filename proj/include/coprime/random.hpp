#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace coprime {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; decorrelates consecutive seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream seed for (master, stream index).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return mix_seed(mix_seed(master) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

/// Circular complex normal draws: independent real and imaginary parts, each
/// with half the requested variance.
class ComplexGaussian {
 public:
  std::complex<double> operator()(Rng& rng, double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = normal_(rng);
    const double im = normal_(rng);
    return {s * re, s * im};
  }

 private:
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace coprime
