#include "coprime/oracles.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "coprime/coarray.hpp"
#include "coprime/combining.hpp"
#include "coprime/errors.hpp"
#include "coprime/parallel.hpp"

namespace coprime {

namespace {

void check_q(int Q) {
  if (Q < 1) throw InvalidArgument("Q must be at least 1");
}

// |sum_k d_k v(theta_k)^w|^2
double power_weighted_phase_sq(const SourceScene& scene, int w) {
  cplx s{0.0, 0.0};
  for (int k = 0; k < scene.K(); ++k) s += scene.powers[k] * phase_power(scene.thetas[k], w);
  return std::norm(s);
}

double averaged_entry(const SourceScene& scene, const ArrayGeometry& g, std::span<const int> set, int Q) {
  const double sigma2 = scene.noise_power;
  const double td = scene.total_power();
  const double J = static_cast<double>(set.size());
  double cross = 0.0;
  for (int i : set)
    for (int j : set) cross += power_weighted_phase_sq(scene, g.outer_position(i) - g.outer_position(j));
  return ((2.0 * sigma2 * td + sigma2 * sigma2) / J + cross / (J * J)) / Q;
}

}  // namespace

double mse_entry_selection(const SourceScene& scene, int Q) {
  check_q(Q);
  const double s = scene.total_power() + scene.noise_power;
  return s * s / Q;
}

double mse_vector_selection(const SourceScene& scene, const ArrayGeometry& g, int Q) {
  return g.num_lags() * mse_entry_selection(scene, Q);
}

double mse_matrix_selection(const SourceScene& scene, const ArrayGeometry& g, int Q) {
  const double Lv = g.virtual_size();
  return Lv * Lv * mse_entry_selection(scene, Q);
}

double mse_entry_averaging(const SourceScene& scene, const ArrayGeometry& g, const LagIndexMap& lags,
                           int lag, int Q) {
  check_q(Q);
  return averaged_entry(scene, g, lags.indices(lag), Q);
}

double mse_vector_averaging(const SourceScene& scene, const ArrayGeometry& g, int Q) {
  return closed_form_mse(scene, g, Q).e_r_avg;
}

double mse_matrix_averaging(const SourceScene& scene, const ArrayGeometry& g, int Q) {
  return closed_form_mse(scene, g, Q).e_Z_avg;
}

double beta_bound(const SourceScene& scene, const LagIndexMap& lags, int lag, int Q) {
  check_q(Q);
  const double J = lags.cardinality(lag);
  const double sigma2 = scene.noise_power;
  return (J - 1.0) / (J * Q) * (2.0 * sigma2 * scene.total_power() + sigma2 * sigma2);
}

MseReport closed_form_mse(const SourceScene& scene, const ArrayGeometry& g, int Q) {
  check_q(Q);
  const LagIndexMap lags = coarray_lag_sets(g);
  const int Lv = g.virtual_size();
  MseReport rep;
  rep.e_entry = mse_entry_selection(scene, Q);
  rep.e_r_sel = mse_vector_selection(scene, g, Q);
  rep.e_Z_sel = mse_matrix_selection(scene, g, Q);
  rep.e_n.resize(static_cast<std::size_t>(g.num_lags()));
  rep.beta.resize(rep.e_n.size());
  for (int n = -g.max_lag(); n <= g.max_lag(); ++n) {
    const auto c = static_cast<std::size_t>(lags.column(n));
    const double weight = Lv - std::abs(n);
    rep.e_n[c] = mse_entry_averaging(scene, g, lags, n, Q);
    rep.beta[c] = beta_bound(scene, lags, n, Q);
    rep.e_r_avg += rep.e_n[c];
    rep.e_Z_avg += weight * rep.e_n[c];
    rep.beta_vector_sum += rep.beta[c];
    rep.beta_matrix_sum += weight * rep.beta[c];
  }
  return rep;
}

EmpiricalMse summarize(std::span<const double> values) {
  EmpiricalMse out;
  out.trials = static_cast<long>(values.size());
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / values.size();
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std_error = std::sqrt(ss / (values.size() - 1) / values.size());
  return out;
}

std::vector<EmpiricalMseReport> empirical_mse_reports(std::span<const Combiner> combiners,
                                                      const SourceScene& scene, const ArrayGeometry& g,
                                                      int Q, long trials, std::uint64_t seed,
                                                      int workers) {
  check_q(Q);
  if (trials < 2) throw InvalidArgument("at least two trials are needed for a standard error");
  scene.validate(g);
  const auto nt = static_cast<std::size_t>(trials);
  const auto ncomb = combiners.size();
  const auto nlags = static_cast<std::size_t>(g.num_lags());
  const std::size_t stride = nlags + 2;  // per-lag errors, vector, matrix

  const CVector r = nominal_autocorrelation(scene, g).r;
  std::vector<CVector> r_co(ncomb);
  std::vector<CMatrix> Z(ncomb);
  for (std::size_t c = 0; c < ncomb; ++c) {
    r_co[c] = apply_combiner(combiners[c], r);
    Z[c] = spatial_smooth(r_co[c]).Z;
  }

  std::vector<double> values(nt * ncomb * stride);
  parallel_for(nt, workers, [&](std::size_t t) {
    const SnapshotBatch batch = generate_snapshots(scene, g, Q, derive_seed(seed, t));
    const CVector r_hat = sample_autocorrelation(batch).r;
    for (std::size_t c = 0; c < ncomb; ++c) {
      double* out = &values[(t * ncomb + c) * stride];
      const CVector est = apply_combiner(combiners[c], r_hat);
      double total = 0.0;
      for (std::size_t n = 0; n < nlags; ++n) {
        out[n] = std::norm(est[static_cast<Eigen::Index>(n)] - r_co[c][static_cast<Eigen::Index>(n)]);
        total += out[n];
      }
      out[nlags] = total;
      out[nlags + 1] = (spatial_smooth(est).Z - Z[c]).squaredNorm();
    }
  });

  std::vector<EmpiricalMseReport> reports(ncomb);
  std::vector<double> column(nt);
  for (std::size_t c = 0; c < ncomb; ++c) {
    auto gather = [&](std::size_t k) {
      for (std::size_t t = 0; t < nt; ++t) column[t] = values[(t * ncomb + c) * stride + k];
      return summarize(column);
    };
    reports[c].per_lag.resize(nlags);
    for (std::size_t n = 0; n < nlags; ++n) reports[c].per_lag[n] = gather(n);
    reports[c].vector = gather(nlags);
    reports[c].matrix = gather(nlags + 1);
  }
  return reports;
}

EmpiricalMse empirical_mse(MseTarget target, const Combiner& E, const SourceScene& scene,
                           const ArrayGeometry& g, int Q, long trials, std::uint64_t seed, int lag,
                           int workers) {
  const auto reports = empirical_mse_reports(std::span<const Combiner>(&E, 1), scene, g, Q, trials, seed, workers);
  switch (target) {
    case MseTarget::Entry: {
      if (lag < -g.max_lag() || lag > g.max_lag()) throw LagOutOfRange("lag " + std::to_string(lag) + " outside the coarray");
      return reports[0].per_lag[static_cast<std::size_t>(lag + g.max_lag())];
    }
    case MseTarget::Vector:
      return reports[0].vector;
    case MseTarget::Matrix:
      return reports[0].matrix;
  }
  return {};
}

}  // namespace coprime
