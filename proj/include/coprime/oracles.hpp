#pragma once

// Closed-form MSE of selection and averaging combining, the averaging gap
// bound beta_n, and Monte-Carlo estimators used to validate them.

#include <cstdint>
#include <span>
#include <vector>

#include "coprime/geometry.hpp"
#include "coprime/simulation.hpp"

namespace coprime {

/// e = (1^T d + sigma^2)^2 / Q: MSE of any single entry of r_hat.
double mse_entry_selection(const SourceScene& scene, int Q);
/// (2L' - 1) e.
double mse_vector_selection(const SourceScene& scene, const ArrayGeometry& g, int Q);
/// L'^2 e.
double mse_matrix_selection(const SourceScene& scene, const ArrayGeometry& g, int Q);

/// e_n for the averaged estimate at `lag`. Throws LagOutOfRange.
double mse_entry_averaging(const SourceScene& scene, const ArrayGeometry& g, const LagIndexMap& lags,
                           int lag, int Q);
/// sum_n e_n.
double mse_vector_averaging(const SourceScene& scene, const ArrayGeometry& g, int Q);
/// sum_m sum_{n=1-m}^{L'-m} e_n = sum_n (L' - |n|) e_n.
double mse_matrix_averaging(const SourceScene& scene, const ArrayGeometry& g, int Q);

/// beta_n = (|J_n| - 1) / (|J_n| Q) (2 sigma^2 1^T d + sigma^4); e - e_n >= beta_n.
double beta_bound(const SourceScene& scene, const LagIndexMap& lags, int lag, int Q);

struct MseReport {
  double e_entry = 0.0;
  std::vector<double> e_n;   // by combiner column (lag + L' - 1)
  std::vector<double> beta;  // by combiner column
  double e_r_sel = 0.0;
  double e_r_avg = 0.0;
  double e_Z_sel = 0.0;
  double e_Z_avg = 0.0;
  double beta_vector_sum = 0.0;  // sum_n beta_n
  double beta_matrix_sum = 0.0;  // sum_n (L' - |n|) beta_n
};

MseReport closed_form_mse(const SourceScene& scene, const ArrayGeometry& g, int Q);

struct EmpiricalMse {
  double mean = 0.0;
  double std_error = 0.0;
  long trials = 0;
};

/// Mean and standard error of per-trial values.
EmpiricalMse summarize(std::span<const double> values);

struct EmpiricalMseReport {
  std::vector<EmpiricalMse> per_lag;  // |[r_co]_n - [E^H r_hat]_n|^2, by column
  EmpiricalMse vector;                // ||r_co - E^H r_hat||^2
  EmpiricalMse matrix;                // ||Z - Z_hat||_F^2
};

/// Monte-Carlo squared errors of several combiners over the same seeded
/// snapshot draws for a fixed scene. Requires trials >= 2.
std::vector<EmpiricalMseReport> empirical_mse_reports(std::span<const Combiner> combiners,
                                                      const SourceScene& scene, const ArrayGeometry& g,
                                                      int Q, long trials, std::uint64_t seed,
                                                      int workers = 0);

enum class MseTarget { Entry, Vector, Matrix };

/// Single-target convenience wrapper; `lag` is used for MseTarget::Entry.
EmpiricalMse empirical_mse(MseTarget target, const Combiner& E, const SourceScene& scene,
                           const ArrayGeometry& g, int Q, long trials, std::uint64_t seed,
                           int lag = 0, int workers = 0);

}  // namespace coprime
