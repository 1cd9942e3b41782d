#pragma once

// Monte-Carlo estimates of the expectation matrices used by the MMSE design.
// They avoid the closed forms entirely:
//   E{r r^H}         from nominal autocorrelations at sampled DoAs,
//   E{V V^H}         via V V^H = conj(R) (x) R,
//   E{r_hat r_hat^H} from simulated snapshots (r_hat = V w in distribution).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>

#include "coprime/combining.hpp"
#include "coprime/distributions.hpp"
#include "coprime/geometry.hpp"
#include "coprime/numerics.hpp"
#include "coprime/random.hpp"
#include "coprime/simulation.hpp"

namespace oracle {

using coprime::CMatrix;

struct MatrixEstimate {
  CMatrix mean;
  Eigen::MatrixXd std_error;  // per entry, from E|X - mean|^2
  long draws = 0;
};

/// Mean and per-entry standard error of sample(t) over t = 0..draws-1.
inline MatrixEstimate average(long draws, const std::function<CMatrix(long)>& sample) {
  MatrixEstimate out;
  CMatrix first = sample(0);
  CMatrix sum = first;
  Eigen::MatrixXd sum_sq = first.cwiseAbs2();
  for (long t = 1; t < draws; ++t) {
    const CMatrix x = sample(t);
    sum += x;
    sum_sq += x.cwiseAbs2();
  }
  const double n = static_cast<double>(draws);
  out.mean = sum / n;
  const Eigen::MatrixXd var = ((sum_sq / n - out.mean.cwiseAbs2()) * (n / (n - 1))).cwiseMax(0.0);
  out.std_error = (var / n).cwiseSqrt();
  out.draws = draws;
  return out;
}

/// Scene with the given powers at DoAs drawn from the prior with seed (seed, t).
inline coprime::SourceScene draw_scene(const coprime::DoAPrior& prior, const coprime::PowerPrior& power,
                                       std::uint64_t seed, long t) {
  coprime::Rng rng(coprime::derive_seed(seed, static_cast<std::uint64_t>(t)));
  return power.scene(prior.sample(power.K(), rng));
}

inline MatrixEstimate mc_H(const coprime::ArrayGeometry& g, const coprime::DoAPrior& prior,
                           const coprime::PowerPrior& power, long draws, std::uint64_t seed) {
  return average(draws, [&](long t) {
    const auto r = coprime::nominal_autocorrelation(draw_scene(prior, power, seed, t), g).r;
    return CMatrix(r * r.adjoint());
  });
}

inline MatrixEstimate mc_Vtilde(const coprime::ArrayGeometry& g, const coprime::DoAPrior& prior,
                                const coprime::PowerPrior& power, long draws, std::uint64_t seed) {
  return average(draws, [&](long t) {
    const CMatrix R = coprime::nominal_autocorrelation(draw_scene(prior, power, seed, t), g).R;
    return coprime::kron(R.conjugate(), R);
  });
}

inline MatrixEstimate mc_G(const coprime::ArrayGeometry& g, const coprime::DoAPrior& prior,
                           const coprime::PowerPrior& power, int Q, long draws, std::uint64_t seed) {
  return average(draws, [&](long t) {
    const auto scene = draw_scene(prior, power, seed, t);
    const auto batch = coprime::generate_snapshots(scene, g, Q, coprime::derive_seed(seed ^ 0x5a5aULL, t));
    const auto r_hat = coprime::sample_autocorrelation(batch).r;
    return CMatrix(r_hat * r_hat.adjoint());
  });
}

struct Agreement {
  double worst_z = 0.0;  // largest |formula - mean| / tolerance scale
  long failures = 0;
  long entries = 0;
};

/// Entry (i, m) agrees when |formula - mean| <= k * se + 1e-9 (1 + |formula|).
inline Agreement compare(const CMatrix& formula, const MatrixEstimate& mc, double k = 5.0) {
  Agreement a;
  for (Eigen::Index c = 0; c < formula.cols(); ++c) {
    for (Eigen::Index r = 0; r < formula.rows(); ++r) {
      const double diff = std::abs(formula(r, c) - mc.mean(r, c));
      const double slack = 1e-9 * (1.0 + std::abs(formula(r, c)));
      const double se = mc.std_error(r, c);
      if (diff > k * se + slack) ++a.failures;
      if (se > 0) a.worst_z = std::max(a.worst_z, diff / se);
      ++a.entries;
    }
  }
  return a;
}

}  // namespace oracle
