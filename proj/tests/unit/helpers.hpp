#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "coprime/numerics.hpp"
#include "coprime/random.hpp"
#include "coprime/simulation.hpp"

namespace testing {

using coprime::cplx;
using coprime::CMatrix;
using coprime::CVector;

inline CMatrix random_matrix(int rows, int cols, coprime::Rng& rng) {
  std::normal_distribution<double> n;
  CMatrix A(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) A(r, c) = {n(rng), n(rng)};
  return A;
}

inline double uniform(coprime::Rng& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

/// K DoAs in (-pi/2, pi/2), powers in [0.5, 5], noise in [0.2, 2].
inline coprime::SourceScene random_scene(int K, coprime::Rng& rng) {
  coprime::SourceScene s;
  for (int k = 0; k < K; ++k) {
    s.thetas.push_back(uniform(rng, -1.5, 1.5));
    s.powers.push_back(uniform(rng, 0.5, 5.0));
  }
  s.noise_power = uniform(rng, 0.2, 2.0);
  return s;
}

/// K DoAs in [a, b] with pairwise separation of at least `sep`.
inline std::vector<double> separated_doas(int K, double a, double b, double sep, coprime::Rng& rng) {
  for (;;) {
    std::vector<double> t;
    for (int k = 0; k < K; ++k) t.push_back(uniform(rng, a, b));
    std::sort(t.begin(), t.end());
    bool ok = true;
    for (int k = 1; k < K; ++k) ok = ok && t[k] - t[k - 1] >= sep;
    if (ok) return t;
  }
}

inline double deg(double rad) { return rad * 180.0 / std::numbers::pi; }
inline double rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace testing
