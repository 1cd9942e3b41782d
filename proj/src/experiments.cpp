#include "coprime/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

#include "coprime/coarray.hpp"
#include "coprime/errors.hpp"
#include "coprime/parallel.hpp"
#include "coprime/random.hpp"

namespace coprime {

const CombinerOutcome& TrialRecord::outcome(CombinerKind kind) const {
  for (const auto& o : outcomes)
    if (o.kind == kind) return o;
  throw InvalidArgument("trial has no outcome for combiner " + to_string(kind));
}

struct ExperimentContext::Cache {
  explicit Cache(const DoAPrior& prior) : table(prior) {}
  CharacteristicIntegralTable table;
  std::mutex mutex;
  std::map<int, Combiner> fixed;
  std::optional<Combiner> imported;
};

ExperimentContext::ExperimentContext(ExperimentConfig cfg)
    : cfg_((cfg.validate(), std::move(cfg))),
      geometry_(cfg_.M, cfg_.N),
      lags_(coarray_lag_sets(geometry_)),
      selection_(selection_combiner(lags_, geometry_.size() * geometry_.size())),
      averaging_(averaging_combiner(lags_, geometry_.size() * geometry_.size())),
      prior_(cfg_.prior.build()),
      grid_(uniform_grid(prior_.lower(), prior_.upper(), cfg_.grid_points)),
      cache_(std::make_unique<Cache>(prior_)) {
  const bool wants_mmse = std::ranges::find(cfg_.combiners, CombinerKind::Mmse) != cfg_.combiners.end() ||
                          cfg_.spectrum_combiner == CombinerKind::Mmse;
  if (wants_mmse) {
    const int bound = 2 * geometry_.positions().back();
    cache_->table.precompute(-bound, bound);
  }
  if (!cfg_.import_combiner.empty()) {
    std::ifstream in(cfg_.import_combiner);
    if (!in) throw ConfigError("import_combiner", "cannot open '" + cfg_.import_combiner + "'");
    Combiner E;
    try {
      E = read_combiner(in);
    } catch (const Error& e) {
      throw ConfigError("import_combiner", e.what());
    }
    const int L = geometry_.size();
    if (E.matrix.rows() != L * L || E.matrix.cols() != geometry_.num_lags()) {
      throw ConfigError("import_combiner", "combiner shape does not match the geometry");
    }
    E.kind = CombinerKind::Mmse;
    cache_->imported = std::move(E);
  }
}

ExperimentContext::~ExperimentContext() = default;

namespace {

PowerPrior fixed_power_prior(const ExperimentConfig& cfg) {
  const SourceScene s = equal_power_scene(std::vector<double>(static_cast<std::size_t>(cfg.K), 0.0),
                                          cfg.snr_db, cfg.sigma2_db);
  if (cfg.power_mode == PowerMode::Ratios) {
    const double d1 = s.powers.front();
    std::vector<double> ratios;
    for (std::size_t k = 1; k < s.powers.size(); ++k) ratios.push_back(s.powers[k] / d1);
    return PowerPrior::known_ratios(std::move(ratios), s.noise_power / d1);
  }
  return PowerPrior::known_powers(s.powers, s.noise_power);
}

}  // namespace

const Combiner& ExperimentContext::fixed_mmse(int Q) const {
  if (cache_->imported) return *cache_->imported;
  if (cfg_.power_mode == PowerMode::Estimated) {
    throw InvalidArgument("estimated power mode designs the MMSE combiner per trial");
  }
  std::lock_guard lock(cache_->mutex);
  auto it = cache_->fixed.find(Q);
  if (it == cache_->fixed.end()) {
    MmseDesignInputs in{geometry_, cfg_.K, prior_, fixed_power_prior(cfg_), Q, selection_};
    it = cache_->fixed.emplace(Q, design_mmse_combiner(in, cache_->table).solution.combiner).first;
  }
  return it->second;
}

void ExperimentContext::prepare(std::span<const int> qs) const {
  if (cfg_.power_mode == PowerMode::Estimated && !cache_->imported) return;
  for (int Q : qs) (void)fixed_mmse(Q);
}

std::vector<double> ExperimentContext::trial_doas(long t) const {
  Rng rng(derive_seed(cfg_.seed, static_cast<std::uint64_t>(t)));
  return prior_.sample(cfg_.K, rng);
}

SourceScene ExperimentContext::trial_scene(long t) const {
  return equal_power_scene(trial_doas(t), cfg_.snr_db, cfg_.sigma2_db);
}

TrialRecord ExperimentContext::run_trial(long t, int Q, bool estimate) const {
  TrialRecord rec;
  rec.trial = t;
  rec.seed = derive_seed(cfg_.seed, static_cast<std::uint64_t>(t));
  rec.Q = Q;
  const SourceScene scene = trial_scene(t);
  rec.thetas = scene.thetas;
  std::ranges::sort(rec.thetas);

  const int Lv = geometry_.virtual_size();
  const CMatrix Z = nominal_coarray_matrix(scene, Lv);
  rec.z_norm_sq = Z.squaredNorm();

  const SnapshotBatch batch = generate_snapshots(scene, geometry_, Q, derive_seed(rec.seed, static_cast<std::uint64_t>(Q)));
  const CVector r_hat = sample_autocorrelation(batch).r;

  std::optional<CMatrix> Z_avg;
  auto averaged = [&]() -> const CMatrix& {
    if (!Z_avg) Z_avg = spatial_smooth(apply_combiner(averaging_, r_hat), CombinerKind::Averaging).Z;
    return *Z_avg;
  };

  for (CombinerKind kind : cfg_.combiners) {
    CombinerOutcome out;
    out.kind = kind;
    CMatrix Z_hat;
    switch (kind) {
      case CombinerKind::Selection:
        Z_hat = spatial_smooth(apply_combiner(selection_, r_hat), kind).Z;
        break;
      case CombinerKind::Averaging:
        Z_hat = averaged();
        break;
      case CombinerKind::Mmse:
        if (cfg_.power_mode == PowerMode::Estimated && !cache_->imported) {
          const DoaEstimate pilot = estimate_doas(averaged(), cfg_.K, grid_);
          MmseDesignInputs in{geometry_, cfg_.K, prior_,
                              estimate_powers_capon(averaged(), pilot.thetas, cfg_.noise_estimator), Q,
                              selection_};
          const Combiner E = design_mmse_combiner(in, cache_->table).solution.combiner;
          Z_hat = spatial_smooth(apply_combiner(E, r_hat), kind).Z;
        } else {
          Z_hat = spatial_smooth(apply_combiner(fixed_mmse(Q), r_hat), kind).Z;
        }
        break;
    }
    out.nmse = (Z - Z_hat).squaredNorm() / rec.z_norm_sq;
    if (estimate) {
      const DoaEstimate est = estimate_doas(Z_hat, cfg_.K, grid_);
      out.doas = est.thetas;
      out.flagged = est.padded;
      for (std::size_t k = 0; k < rec.thetas.size(); ++k) {
        const double e = rec.thetas[k] - est.thetas[k];
        out.squared_error += e * e;
      }
    }
    rec.outcomes.push_back(std::move(out));
  }
  return rec;
}

std::vector<std::vector<TrialRecord>> run_trials(const ExperimentContext& ctx, std::span<const int> qs,
                                                 bool estimate_doas) {
  ctx.prepare(qs);
  const auto T = static_cast<std::size_t>(ctx.config().trials);
  std::vector<std::vector<TrialRecord>> records(qs.size(), std::vector<TrialRecord>(T));
  parallel_for(T * qs.size(), ctx.config().workers, [&](std::size_t job) {
    const std::size_t qi = job / T;
    const std::size_t t = job % T;
    records[qi][t] = ctx.run_trial(static_cast<long>(t), qs[qi], estimate_doas);
  });
  return records;
}

Interval bootstrap_mean_interval(std::span<const double> values, double level, int resamples,
                                 std::uint64_t seed) {
  if (values.empty() || resamples < 1 || !(level > 0.0 && level < 1.0)) {
    throw InvalidArgument("bootstrap needs values, resamples >= 1 and 0 < level < 1");
  }
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[pick(rng)];
    m = s / values.size();
  }
  std::ranges::sort(means);
  const double tail = (1.0 - level) / 2.0;
  auto at = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::floor(q * (means.size() - 1)));
    return means[std::min(idx, means.size() - 1)];
  };
  return {at(tail), at(1.0 - tail)};
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_header(const std::string& command, const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "# command: " << command << '\n'
     << "# config_hash: " << config_hash(cfg) << '\n'
     << "# seed: " << cfg.seed << '\n'
     << "# pairing: sorted-ascending\n"
     << "# power_mode: " << to_string(cfg.power_mode) << '\n'
     << "# noise_estimator: " << to_string(cfg.noise_estimator) << '\n'
     << "# config: " << canonical_config(cfg).dump() << '\n';
  return os.str();
}

namespace {

std::vector<double> column_of(const std::vector<TrialRecord>& recs, CombinerKind kind, double CombinerOutcome::*field) {
  std::vector<double> v;
  v.reserve(recs.size());
  for (const auto& r : recs) v.push_back(r.outcome(kind).*field);
  return v;
}

}  // namespace

std::string run_cdf_experiment(const ExperimentConfig& cfg) {
  ExperimentContext ctx(cfg);
  const int qs[] = {cfg.Q};
  const auto records = run_trials(ctx, qs, false);
  std::ostringstream os;
  os << csv_header("cdf", cfg) << "# Q: " << cfg.Q << '\n' << "combiner,nmse,cdf\n";
  for (CombinerKind kind : cfg.combiners) {
    auto v = column_of(records[0], kind, &CombinerOutcome::nmse);
    std::ranges::sort(v);
    for (std::size_t i = 0; i < v.size(); ++i) {
      os << to_string(kind) << ',' << format_double(v[i]) << ','
         << format_double(static_cast<double>(i + 1) / v.size()) << '\n';
    }
  }
  return os.str();
}

std::string run_nmse_vs_q(const ExperimentConfig& cfg) {
  ExperimentContext ctx(cfg);
  const auto records = run_trials(ctx, cfg.q_list, false);
  const ArrayGeometry& g = ctx.geometry();
  std::ostringstream os;
  os << csv_header("nmse-vs-q", cfg) << "Q,combiner,mean_nmse,stderr,closed_form_nmse\n";
  for (std::size_t qi = 0; qi < cfg.q_list.size(); ++qi) {
    const int Q = cfg.q_list[qi];
    for (CombinerKind kind : cfg.combiners) {
      const auto v = column_of(records[qi], kind, &CombinerOutcome::nmse);
      const EmpiricalMse s = summarize(v);
      double closed = std::numeric_limits<double>::quiet_NaN();
      if (kind != CombinerKind::Mmse) {
        closed = 0.0;
        for (const auto& rec : records[qi]) {
          const SourceScene scene = ctx.trial_scene(rec.trial);
          const double e = kind == CombinerKind::Selection ? mse_matrix_selection(scene, g, Q)
                                                           : mse_matrix_averaging(scene, g, Q);
          closed += e / rec.z_norm_sq;
        }
        closed /= static_cast<double>(records[qi].size());
      }
      os << Q << ',' << to_string(kind) << ',' << format_double(s.mean) << ',' << format_double(s.std_error)
         << ',' << format_double(closed) << '\n';
    }
  }
  return os.str();
}

std::string run_rmse_vs_q(const ExperimentConfig& cfg) {
  ExperimentContext ctx(cfg);
  const auto records = run_trials(ctx, cfg.q_list, true);
  std::ostringstream os;
  os << csv_header("rmse-vs-q", cfg) << "Q,combiner,rmse_deg,flagged,trials\n";
  for (std::size_t qi = 0; qi < cfg.q_list.size(); ++qi) {
    for (CombinerKind kind : cfg.combiners) {
      double sum = 0.0;
      int flagged = 0;
      for (const auto& rec : records[qi]) {
        const auto& o = rec.outcome(kind);
        sum += o.squared_error;
        flagged += o.flagged ? 1 : 0;
      }
      const double rmse = std::sqrt(sum / (static_cast<double>(records[qi].size()) * cfg.K)) * 180.0 / std::numbers::pi;
      os << cfg.q_list[qi] << ',' << to_string(kind) << ',' << format_double(rmse) << ',' << flagged << ','
         << records[qi].size() << '\n';
    }
  }
  return os.str();
}

std::string run_spectrum(const ExperimentConfig& cfg, std::ostream* snapshot_dump) {
  ExperimentContext ctx(cfg);
  const ArrayGeometry& g = ctx.geometry();
  const SourceScene scene = ctx.trial_scene(0);
  const SnapshotBatch batch =
      generate_snapshots(scene, g, cfg.Q, derive_seed(derive_seed(cfg.seed, 0), static_cast<std::uint64_t>(cfg.Q)));
  if (snapshot_dump) write_snapshots(*snapshot_dump, batch);
  const CVector r_hat = sample_autocorrelation(batch).r;

  const CMatrix Z_avg = spatial_smooth(apply_combiner(ctx.averaging(), r_hat)).Z;
  Combiner E;
  switch (cfg.spectrum_combiner) {
    case CombinerKind::Selection:
      E = ctx.selection();
      break;
    case CombinerKind::Averaging:
      E = ctx.averaging();
      break;
    case CombinerKind::Mmse:
      if (cfg.power_mode == PowerMode::Estimated && cfg.import_combiner.empty()) {
        const DoaEstimate pilot = estimate_doas(Z_avg, cfg.K, ctx.grid());
        MmseDesignInputs in{g, cfg.K, cfg.prior.build(),
                            estimate_powers_capon(Z_avg, pilot.thetas, cfg.noise_estimator), cfg.Q,
                            ctx.selection()};
        CharacteristicIntegralTable table(cfg.prior.build());
        E = design_mmse_combiner(in, table).solution.combiner;
      } else {
        E = ctx.fixed_mmse(cfg.Q);
      }
      break;
  }
  const CMatrix Z_hat = spatial_smooth(apply_combiner(E, r_hat)).Z;
  const MusicResult music = music_spectrum(Z_hat, cfg.K, ctx.grid());

  auto join = [](std::vector<double> v) {
    std::ranges::sort(v);
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
    return s;
  };
  std::ostringstream os;
  os << csv_header("spectrum", cfg) << "# Q: " << cfg.Q << '\n'
     << "# combiner: " << to_string(cfg.spectrum_combiner) << '\n'
     << "# true_doas_rad: " << join(scene.thetas) << '\n'
     << "# estimated_doas_rad: " << join(music.estimates) << '\n'
     << "# minima_found: " << music.minima_found << (music.too_few_minima ? " (fewer than K)" : "") << '\n'
     << "theta_rad,p_music\n";
  for (std::size_t i = 0; i < music.grid.size(); ++i) {
    os << format_double(music.grid[i]) << ',' << format_double(music.spectrum[i]) << '\n';
  }
  return os.str();
}

OracleCheckResult run_oracle_check(const ExperimentConfig& cfg, const OracleCheckOptions& options) {
  cfg.validate();
  const ArrayGeometry g = cfg.geometry();
  const LagIndexMap lags = coarray_lag_sets(g);
  const int L2 = g.size() * g.size();
  const Combiner combiners[] = {selection_combiner(lags, L2), averaging_combiner(lags, L2),
                                selection_combiner(lags, L2, SelectionPicker::Largest)};

  Rng rng(derive_seed(cfg.seed, 0));
  const SourceScene scene = equal_power_scene(cfg.prior.build().sample(cfg.K, rng), cfg.snr_db, cfg.sigma2_db);
  const MseReport closed = closed_form_mse(scene, g, cfg.Q);
  const auto emp = empirical_mse_reports(combiners, scene, g, cfg.Q, cfg.oracle_trials,
                                         derive_seed(cfg.seed, 0x6f7261636c65ULL), cfg.workers);

  OracleCheckResult result;
  auto add = [&](std::string name, double formula, const EmpiricalMse& e) {
    OracleCheckRow row{std::move(name), formula, e.mean, e.std_error, false};
    row.pass = std::abs(formula - e.mean) <= 5.0 * e.std_error + 1e-12 * (1.0 + std::abs(formula));
    result.rows.push_back(std::move(row));
  };
  const double e = closed.e_entry * options.entry_scale;
  const double Lv = g.virtual_size();
  for (int n = -g.max_lag(); n <= g.max_lag(); ++n)
    add("selection_entry_lag_" + std::to_string(n), e, emp[0].per_lag[static_cast<std::size_t>(lags.column(n))]);
  add("selection_vector", g.num_lags() * e, emp[0].vector);
  add("selection_matrix", Lv * Lv * e, emp[0].matrix);
  add("selection_largest_index_vector", g.num_lags() * e, emp[2].vector);
  for (int n = -g.max_lag(); n <= g.max_lag(); ++n) {
    const auto c = static_cast<std::size_t>(lags.column(n));
    add("averaging_entry_lag_" + std::to_string(n), closed.e_n[c], emp[1].per_lag[c]);
  }
  add("averaging_vector", closed.e_r_avg, emp[1].vector);
  add("averaging_matrix", closed.e_Z_avg, emp[1].matrix);

  result.all_pass = std::ranges::all_of(result.rows, [](const auto& r) { return r.pass; });
  std::ostringstream os;
  os << csv_header("oracle-check", cfg) << "# Q: " << cfg.Q << '\n'
     << "# trials: " << cfg.oracle_trials << '\n'
     << "# doas_rad:";
  for (double th : scene.thetas) os << ' ' << format_double(th);
  os << '\n' << "check,closed_form,empirical,std_error,z_score,pass\n";
  for (const auto& r : result.rows) {
    const double z = r.std_error > 0 ? (r.empirical - r.closed_form) / r.std_error
                                     : std::numeric_limits<double>::quiet_NaN();
    os << r.name << ',' << format_double(r.closed_form) << ',' << format_double(r.empirical) << ','
       << format_double(r.std_error) << ',' << format_double(z) << ',' << (r.pass ? "pass" : "fail") << '\n';
  }
  result.csv = os.str();
  return result;
}

void export_mmse_combiner(const ExperimentConfig& cfg, std::ostream& os) {
  if (cfg.power_mode == PowerMode::Estimated) {
    throw ConfigError("power_mode", "combiner export needs oracle or ratios power mode");
  }
  ExperimentContext ctx(cfg);
  write_combiner(os, ctx.fixed_mmse(cfg.Q));
}

}  // namespace coprime
