#include "coprime/simulation.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "coprime/errors.hpp"
#include "coprime/random.hpp"

namespace coprime {

double SourceScene::total_power() const noexcept {
  double s = 0.0;
  for (double d : powers) s += d;
  return s;
}

double SourceScene::squared_power_norm() const noexcept {
  double s = 0.0;
  for (double d : powers) s += d * d;
  return s;
}

void SourceScene::validate(const ArrayGeometry& g) const {
  if (thetas.size() != powers.size()) {
    throw InvalidArgument("scene has " + std::to_string(thetas.size()) + " DoAs but " +
                          std::to_string(powers.size()) + " powers");
  }
  if (K() >= g.virtual_size()) {
    throw InvalidArgument("K = " + std::to_string(K()) + " must be below L' = " +
                          std::to_string(g.virtual_size()));
  }
  for (double d : powers) {
    if (!(d > 0.0) || !std::isfinite(d)) throw InvalidArgument("source powers must be positive");
  }
  if (!(noise_power > 0.0) || !std::isfinite(noise_power)) {
    throw InvalidArgument("noise power must be positive");
  }
  for (double t : thetas) {
    if (!(t > -std::numbers::pi / 2 && t <= std::numbers::pi / 2)) {
      throw InvalidArgument("DoA outside (-pi/2, pi/2]");
    }
  }
}

SourceScene equal_power_scene(std::vector<double> thetas, double snr_db, double noise_db) {
  SourceScene s;
  s.noise_power = std::pow(10.0, noise_db / 10.0);
  s.powers.assign(thetas.size(), std::pow(10.0, (snr_db + noise_db) / 10.0));
  s.thetas = std::move(thetas);
  return s;
}

Autocorrelation nominal_autocorrelation(const SourceScene& scene, const ArrayGeometry& g) {
  const CMatrix S = steering_matrix(g, scene.thetas);
  RVector d(scene.K());
  for (int k = 0; k < scene.K(); ++k) d(k) = scene.powers[static_cast<std::size_t>(k)];
  CMatrix R = S * d.asDiagonal() * S.adjoint();
  R.diagonal().array() += scene.noise_power;
  CVector r = vec(R);
  return {std::move(R), std::move(r)};
}

SnapshotBatch generate_snapshots(const SourceScene& scene, const ArrayGeometry& g, int Q,
                                 std::uint64_t seed) {
  if (Q < 1) throw InvalidArgument("sample support Q must be at least 1");
  const int L = g.size();
  const int K = scene.K();
  const CMatrix S = steering_matrix(g, scene.thetas);
  Rng rng(seed);
  ComplexGaussian gauss;
  CMatrix xi(K, Q);
  CMatrix noise(L, Q);
  // Column-major fill: per snapshot, the K symbols then the L noise samples.
  for (int q = 0; q < Q; ++q) {
    for (int k = 0; k < K; ++k) xi(k, q) = gauss(rng, scene.powers[static_cast<std::size_t>(k)]);
    for (int l = 0; l < L; ++l) noise(l, q) = gauss(rng, scene.noise_power);
  }
  SnapshotBatch batch;
  batch.seed = seed;
  batch.Y = noise;
  if (K > 0) batch.Y.noalias() += S * xi;
  return batch;
}

Autocorrelation sample_autocorrelation(const SnapshotBatch& batch) {
  if (batch.Q() < 1) throw InvalidArgument("empty snapshot batch");
  CMatrix R = (batch.Y * batch.Y.adjoint()) / static_cast<double>(batch.Q());
  CVector r = vec(R);
  return {std::move(R), std::move(r)};
}

CVector sample_autocorrelation_kron(const SnapshotBatch& batch) {
  const auto L = batch.Y.rows();
  CVector r = CVector::Zero(L * L);
  for (int q = 0; q < batch.Q(); ++q) {
    r += kron(batch.Y.col(q).conjugate(), batch.Y.col(q));
  }
  return r / static_cast<double>(batch.Q());
}

void write_snapshots(std::ostream& os, const SnapshotBatch& batch) {
  const auto old = os.precision(17);
  for (Eigen::Index l = 0; l < batch.Y.rows(); ++l) {
    for (Eigen::Index q = 0; q < batch.Y.cols(); ++q) {
      if (q > 0) os << ' ';
      os << batch.Y(l, q).real() << ',' << batch.Y(l, q).imag();
    }
    os << '\n';
  }
  os.precision(old);
}

}  // namespace coprime
