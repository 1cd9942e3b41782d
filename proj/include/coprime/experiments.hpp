#pragma once

// Seeded Monte-Carlo runners behind the CLI subcommands.
//
// Trial t draws its DoAs from a stream seeded by derive_seed(seed, t) and its
// snapshots at sample support Q from derive_seed(that seed, Q), so a trial
// sees the same DoAs at every Q. Results are stored by trial index and
// reduced in order, which keeps every output independent of the worker count.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coprime/combining.hpp"
#include "coprime/config.hpp"
#include "coprime/geometry.hpp"
#include "coprime/oracles.hpp"
#include "coprime/simulation.hpp"

namespace coprime {

struct CombinerOutcome {
  CombinerKind kind = CombinerKind::Selection;
  double nmse = 0.0;             // ||Z - Z_hat||_F^2 / ||Z||_F^2
  std::vector<double> doas;      // ascending; empty when DoAs were not estimated
  double squared_error = 0.0;    // sum_k (theta_k - theta_hat_k)^2 with sorted pairing
  bool flagged = false;          // MUSIC found fewer than K minima
};

struct TrialRecord {
  long trial = 0;
  std::uint64_t seed = 0;
  int Q = 0;
  std::vector<double> thetas;  // ascending
  double z_norm_sq = 0.0;      // ||Z||_F^2
  std::vector<CombinerOutcome> outcomes;  // in config combiner order

  const CombinerOutcome& outcome(CombinerKind kind) const;
};

/// Everything shared by the trials of one configuration: geometry, lag sets,
/// fixed combiners, the I(x) table and any MMSE designs that do not depend on
/// the trial.
class ExperimentContext {
 public:
  explicit ExperimentContext(ExperimentConfig cfg);
  ~ExperimentContext();
  ExperimentContext(const ExperimentContext&) = delete;
  ExperimentContext& operator=(const ExperimentContext&) = delete;

  const ExperimentConfig& config() const noexcept { return cfg_; }
  const ArrayGeometry& geometry() const noexcept { return geometry_; }
  const LagIndexMap& lags() const noexcept { return lags_; }
  const Combiner& selection() const noexcept { return selection_; }
  const Combiner& averaging() const noexcept { return averaging_; }
  /// MUSIC grid over the prior support.
  const std::vector<double>& grid() const noexcept { return grid_; }

  /// The trial-independent MMSE combiner for Q (oracle or ratios mode, or an
  /// imported file). Designed on first use. Not for estimated mode.
  const Combiner& fixed_mmse(int Q) const;
  /// Pre-builds fixed MMSE designs for the given supports (no-op in estimated mode).
  void prepare(std::span<const int> qs) const;

  /// DoAs of trial t.
  std::vector<double> trial_doas(long t) const;
  SourceScene trial_scene(long t) const;

  TrialRecord run_trial(long t, int Q, bool estimate_doas) const;

 private:
  struct Cache;
  ExperimentConfig cfg_;
  ArrayGeometry geometry_;
  LagIndexMap lags_;
  Combiner selection_;
  Combiner averaging_;
  DoAPrior prior_;
  std::vector<double> grid_;
  std::unique_ptr<Cache> cache_;
};

/// records[q][t] for each Q in qs.
std::vector<std::vector<TrialRecord>> run_trials(const ExperimentContext& ctx, std::span<const int> qs,
                                                 bool estimate_doas);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Percentile bootstrap interval for the mean of `values`.
Interval bootstrap_mean_interval(std::span<const double> values, double level, int resamples,
                                 std::uint64_t seed);

/// The CSV metadata header: command, config hash, seed, pairing and power mode.
std::string csv_header(const std::string& command, const ExperimentConfig& cfg);

/// Shortest round-trip text of a double ("nan" and "inf" spelled out).
std::string format_double(double x);

/// combiner,nmse,cdf at cfg.Q.
std::string run_cdf_experiment(const ExperimentConfig& cfg);
/// Q,combiner,mean_nmse,stderr,closed_form_nmse over cfg.q_list.
std::string run_nmse_vs_q(const ExperimentConfig& cfg);
/// Q,combiner,rmse_deg,flagged,trials over cfg.q_list.
std::string run_rmse_vs_q(const ExperimentConfig& cfg);
/// theta_rad,p_music for trial 0 at cfg.Q with cfg.spectrum_combiner.
/// Optionally dumps that trial's snapshots.
std::string run_spectrum(const ExperimentConfig& cfg, std::ostream* snapshot_dump = nullptr);

struct OracleCheckRow {
  std::string name;
  double closed_form = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
  bool pass = false;
};

struct OracleCheckResult {
  std::vector<OracleCheckRow> rows;
  bool all_pass = false;
  std::string csv;
};

/// Test hook: scale applied to the single-entry selection MSE before it is
/// compared, so a corrupted formula can be shown to fail.
struct OracleCheckOptions {
  double entry_scale = 1.0;
};

/// Every closed-form MSE against its Monte-Carlo estimate on one seeded scene
/// at cfg.Q with cfg.oracle_trials trials. A row passes when the difference is
/// within 5 standard errors.
OracleCheckResult run_oracle_check(const ExperimentConfig& cfg, const OracleCheckOptions& options = {});

/// Designs the MMSE combiner at cfg.Q for the configured powers and writes it.
void export_mmse_combiner(const ExperimentConfig& cfg, std::ostream& os);

}  // namespace coprime
