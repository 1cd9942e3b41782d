#pragma once

// Received-signal snapshots and autocorrelation estimates.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "coprime/geometry.hpp"
#include "coprime/numerics.hpp"

namespace coprime {

/// Ground truth of one simulation: DoAs, linear source powers and noise power.
struct SourceScene {
  std::vector<double> thetas;
  std::vector<double> powers;
  double noise_power = 1.0;

  int K() const noexcept { return static_cast<int>(thetas.size()); }
  double total_power() const noexcept;         // 1^T d
  double squared_power_norm() const noexcept;  // ||d||^2

  /// Throws InvalidArgument unless K < L', powers > 0 and DoAs in (-pi/2, pi/2].
  void validate(const ArrayGeometry& g) const;
};

/// Equal-power scene from SNR and noise level in dB: d_k = 10^((snr+noise)/10).
SourceScene equal_power_scene(std::vector<double> thetas, double snr_db, double noise_db);

struct Autocorrelation {
  CMatrix R;  // L x L
  CVector r;  // vec(R), length L^2
};

/// R = S diag(d) S^H + sigma^2 I.
Autocorrelation nominal_autocorrelation(const SourceScene& scene, const ArrayGeometry& g);

struct SnapshotBatch {
  CMatrix Y;  // L x Q
  std::uint64_t seed = 0;
  int Q() const noexcept { return static_cast<int>(Y.cols()); }
};

/// Q snapshots y_q = S xi_q + n_q; symbols CN(0, d_k), noise CN(0, sigma^2 I).
SnapshotBatch generate_snapshots(const SourceScene& scene, const ArrayGeometry& g, int Q,
                                 std::uint64_t seed);

/// R_hat = (1/Q) Y Y^H and r_hat = vec(R_hat).
Autocorrelation sample_autocorrelation(const SnapshotBatch& batch);

/// r_hat via (1/Q) sum_q conj(y_q) (x) y_q.
CVector sample_autocorrelation_kron(const SnapshotBatch& batch);

/// Text dump: one row per element, columns are snapshots as "re,im" pairs.
void write_snapshots(std::ostream& os, const SnapshotBatch& batch);

}  // namespace coprime
