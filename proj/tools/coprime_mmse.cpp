// coprime-mmse: Monte-Carlo studies of autocorrelation combining on coprime arrays.
//
// Exit codes: 0 success, 1 configuration error, 2 oracle-check failure,
// 3 numerical failure during a run.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "coprime/config.hpp"
#include "coprime/errors.hpp"
#include "coprime/experiments.hpp"

using nlohmann::json;

namespace {

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw coprime::ConfigError("output", "cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coprime-array DoA simulator with selection, averaging and MMSE autocorrelation combining"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> trials, oracle_trials;
  std::optional<std::string> out, prior, power_mode, noise_estimator, spectrum_combiner, import_combiner,
      export_combiner;
  std::optional<int> M, N, K, Q, grid_points, workers;
  std::optional<double> snr_db, sigma2_db;
  std::vector<int> q_list;
  std::vector<std::string> combiners;
  std::string dump_snapshots;
  bool print_config = false;

  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed");
  app.add_option("--trials", trials, "Monte-Carlo trials per sample support");
  app.add_option("--out", out, "output CSV path (default stdout)");
  app.add_option("--M", M, "coprime pair, M < N");
  app.add_option("--N", N, "coprime pair, M < N");
  app.add_option("--K", K, "number of sources");
  app.add_option("--snr-db", snr_db, "per-source SNR in dB");
  app.add_option("--sigma2-db", sigma2_db, "noise power in dB");
  app.add_option("--Q", Q, "sample support for cdf, spectrum and oracle-check");
  app.add_option("--q-list", q_list, "sample supports for the *-vs-q studies")->delimiter(',');
  app.add_option("--prior", prior, "uniform:A:B or truncated_normal:A:B:MU:SIGMA2 (angles may use pi)");
  app.add_option("--combiners", combiners, "selection,averaging,mmse")->delimiter(',');
  app.add_option("--power-mode", power_mode, "oracle, ratios or estimated");
  app.add_option("--noise-estimator", noise_estimator, "singular_value or eigenvalue");
  app.add_option("--grid-points", grid_points, "MUSIC grid size over the prior support");
  app.add_option("--workers", workers, "worker threads (0 = all cores)");
  app.add_option("--oracle-trials", oracle_trials, "Monte-Carlo trials for oracle-check");
  app.add_option("--spectrum-combiner", spectrum_combiner, "combiner used by the spectrum command");
  app.add_option("--import-combiner", import_combiner, "use this MMSE combiner file instead of designing one");
  app.add_option("--export-combiner", export_combiner, "write the MMSE combiner designed at Q to this file");
  app.add_flag("--print-config", print_config, "print the effective config as JSON and exit");

  auto* cdf = app.add_subcommand("cdf", "NMSE of Z per trial and its empirical CDF");
  auto* nmse = app.add_subcommand("nmse-vs-q", "mean NMSE of Z versus sample support");
  auto* rmse = app.add_subcommand("rmse-vs-q", "MUSIC DoA RMSE in degrees versus sample support");
  auto* oracle = app.add_subcommand("oracle-check", "closed-form MSE formulas against Monte Carlo");
  auto* spectrum = app.add_subcommand("spectrum", "MUSIC spectrum of one trial");
  spectrum->add_option("--dump-snapshots", dump_snapshots, "write the trial's snapshots to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  coprime::ExperimentConfig cfg;
  try {
    json j = config_path.empty() ? json::object() : coprime::load_config_file(config_path);
    if (!j.is_object()) throw coprime::ConfigError(config_path, "expected a JSON object");
    json patch = json::object();
    if (seed) patch["seed"] = *seed;
    if (trials) patch["trials"] = *trials;
    if (out) patch["output"] = *out;
    if (M) patch["geometry"]["M"] = *M;
    if (N) patch["geometry"]["N"] = *N;
    if (K) patch["K"] = *K;
    if (snr_db) patch["snr_db"] = *snr_db;
    if (sigma2_db) patch["sigma2_db"] = *sigma2_db;
    if (Q) patch["Q"] = *Q;
    if (!q_list.empty()) patch["q_list"] = q_list;
    if (prior) {
      const coprime::PriorSpec p = coprime::parse_prior_spec(*prior);
      patch["prior"] = {{"kind", p.kind}, {"a", p.a}, {"b", p.b}, {"mu", p.mu}, {"sigma2", p.sigma2}};
    }
    if (!combiners.empty()) patch["combiners"] = combiners;
    if (power_mode) patch["power_mode"] = *power_mode;
    if (noise_estimator) patch["noise_estimator"] = *noise_estimator;
    if (grid_points) patch["grid_points"] = *grid_points;
    if (workers) patch["workers"] = *workers;
    if (oracle_trials) patch["oracle_trials"] = *oracle_trials;
    if (spectrum_combiner) patch["spectrum_combiner"] = *spectrum_combiner;
    if (import_combiner) patch["import_combiner"] = *import_combiner;
    if (export_combiner) patch["export_combiner"] = *export_combiner;
    // The prior is replaced as a whole so stale keys from the file do not leak in.
    if (patch.contains("prior")) j.erase("prior");
    j.merge_patch(patch);
    cfg = coprime::config_from_json(j);
  } catch (const coprime::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }

  if (print_config) {
    std::cout << coprime::config_to_json(cfg).dump(2) << '\n';
    return 0;
  }

  try {
    if (!cfg.export_combiner.empty()) {
      std::ofstream os(cfg.export_combiner);
      if (!os) throw coprime::ConfigError("export_combiner", "cannot write '" + cfg.export_combiner + "'");
      coprime::export_mmse_combiner(cfg, os);
    }
    if (cdf->parsed()) {
      emit(coprime::run_cdf_experiment(cfg), cfg.output);
    } else if (nmse->parsed()) {
      emit(coprime::run_nmse_vs_q(cfg), cfg.output);
    } else if (rmse->parsed()) {
      emit(coprime::run_rmse_vs_q(cfg), cfg.output);
    } else if (spectrum->parsed()) {
      std::ofstream dump;
      if (!dump_snapshots.empty()) {
        dump.open(dump_snapshots);
        if (!dump) throw coprime::ConfigError("dump-snapshots", "cannot write '" + dump_snapshots + "'");
      }
      emit(coprime::run_spectrum(cfg, dump_snapshots.empty() ? nullptr : &dump), cfg.output);
    } else if (oracle->parsed()) {
      const auto result = coprime::run_oracle_check(cfg);
      emit(result.csv, cfg.output);
      std::size_t failed = 0;
      for (const auto& r : result.rows) failed += r.pass ? 0 : 1;
      std::cerr << "oracle-check: " << result.rows.size() - failed << '/' << result.rows.size() << " passed\n";
      if (!result.all_pass) return 2;
    }
  } catch (const coprime::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const coprime::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
