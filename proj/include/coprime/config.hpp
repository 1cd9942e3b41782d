#pragma once

// Experiment configuration: JSON-compatible file plus command-line overrides.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "coprime/combining.hpp"
#include "coprime/distributions.hpp"
#include "coprime/geometry.hpp"

namespace coprime {

enum class PowerMode { Oracle, Estimated, Ratios };

std::string to_string(PowerMode mode);
/// Throws InvalidArgument.
PowerMode power_mode_from_string(const std::string& name);

std::string to_string(NoiseEstimator e);
NoiseEstimator noise_estimator_from_string(const std::string& name);

struct PriorSpec {
  std::string kind = "uniform";  // "uniform" or "truncated_normal"
  double a = -1.5707963267948966;
  double b = 1.5707963267948966;
  double mu = 0.0;
  double sigma2 = 1.0;

  DoAPrior build() const;
};

struct ExperimentConfig {
  int M = 2;
  int N = 3;
  int K = 5;
  double snr_db = 10.0;
  double sigma2_db = 0.0;
  int Q = 10;
  std::vector<int> q_list{1, 10, 100, 1000, 10000};
  long trials = 500;
  PriorSpec prior;
  std::vector<CombinerKind> combiners{CombinerKind::Selection, CombinerKind::Averaging, CombinerKind::Mmse};
  PowerMode power_mode = PowerMode::Oracle;
  NoiseEstimator noise_estimator = NoiseEstimator::SmallestSingularValue;
  int grid_points = 2001;
  std::uint64_t seed = 1;
  std::string output;  // empty: stdout
  int workers = 0;     // 0: hardware concurrency
  long oracle_trials = 100000;
  CombinerKind spectrum_combiner = CombinerKind::Mmse;
  std::string import_combiner;  // MMSE combiner file used instead of designing one
  std::string export_combiner;  // where to write the MMSE combiner designed at Q

  /// Throws ConfigError naming the offending field.
  void validate() const;
  ArrayGeometry geometry() const { return ArrayGeometry(M, N); }
};

/// Throws ConfigError on unknown keys, wrong types or invalid values.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Parses config text; parse errors carry the line and column.
nlohmann::json parse_config_text(const std::string& text, const std::string& origin = "config");
nlohmann::json load_config_file(const std::string& path);

/// Angle in radians from a number or strings such as "-pi/2", "pi/6", "3*pi/8", "0.25".
double parse_angle(const nlohmann::json& value, const std::string& field);

/// "uniform:A:B" or "truncated_normal:A:B:MU:SIGMA2" (also "tn:...").
PriorSpec parse_prior_spec(const std::string& text);

/// config_to_json without the fields that cannot change results (output
/// path, worker count, combiner export path).
nlohmann::json canonical_config(const ExperimentConfig& cfg);

/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace coprime
