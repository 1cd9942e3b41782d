#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "coprime/config.hpp"
#include "coprime/errors.hpp"
#include "coprime/experiments.hpp"

using namespace coprime;
using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream is(csv);
  std::string line;
  while (std::getline(is, line))
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.trials = 40;
  cfg.q_list = {10, 1000};
  cfg.grid_points = 801;
  return cfg;
}

}  // namespace

TEST_CASE("config defaults") {
  const ExperimentConfig cfg = config_from_json(json::object());
  CHECK(cfg.M == 2);
  CHECK(cfg.N == 3);
  CHECK(cfg.K == 5);
  CHECK(cfg.snr_db == 10.0);
  CHECK(cfg.sigma2_db == 0.0);
  CHECK(cfg.Q == 10);
  CHECK(cfg.q_list == std::vector<int>{1, 10, 100, 1000, 10000});
  CHECK(cfg.trials == 500);
  CHECK(cfg.prior.kind == "uniform");
  CHECK(cfg.power_mode == PowerMode::Oracle);
  CHECK(cfg.grid_points == 2001);
  CHECK(cfg.combiners.size() == 3);
}

TEST_CASE("config parsing") {
  const json j = parse_config_text(R"({
    // comments are allowed
    "geometry": {"M": 2, "N": 5}, "K": 7, "q_list": [10, 100],
    "prior": {"kind": "truncated_normal", "a": "-pi/8", "b": "pi/8", "mu": 0, "sigma2": 1},
    "combiners": ["avg", "mmse"], "power_mode": "estimated", "noise_estimator": "eigenvalue", "seed": 42
  })");
  const ExperimentConfig cfg = config_from_json(j);
  CHECK(cfg.N == 5);
  CHECK(cfg.K == 7);
  CHECK(cfg.prior.a == doctest::Approx(-pi / 8));
  CHECK(cfg.combiners == std::vector<CombinerKind>{CombinerKind::Averaging, CombinerKind::Mmse});
  CHECK(cfg.power_mode == PowerMode::Estimated);
  CHECK(cfg.noise_estimator == NoiseEstimator::SmallestEigenvalue);
  CHECK(cfg.seed == 42);
  // Round trip through JSON.
  CHECK(config_to_json(config_from_json(config_to_json(cfg))) == config_to_json(cfg));
}

TEST_CASE("config errors name the field") {
  auto field_of = [](const std::string& text) {
    try {
      config_from_json(parse_config_text(text));
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  CHECK(field_of(R"({"Kay": 3})") == "Kay");
  CHECK(field_of(R"({"K": "five"})") == "K");
  CHECK(field_of(R"({"K": 8})") == "K");
  CHECK(field_of(R"({"geometry": {"M": 2, "N": 4}})") == "geometry");
  CHECK(field_of(R"({"prior": {"kind": "uniform", "a": 1, "b": 0}})") == "prior");
  CHECK(field_of(R"({"prior": {"kind": "cauchy"}})") == "prior");
  CHECK(field_of(R"({"power_mode": "guess"})") == "power_mode");
  CHECK(field_of(R"({"q_list": [10, 0]})") == "q_list");
  CHECK(field_of(R"({"combiners": ["median"]})") == "combiners");
  try {
    parse_config_text("{\n  \"K\": 3,\n  oops\n}", "cfg.json");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "cfg.json");
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("angles and prior specs") {
  CHECK(parse_angle("pi/2", "x") == doctest::Approx(pi / 2));
  CHECK(parse_angle("-pi/4", "x") == doctest::Approx(-pi / 4));
  CHECK(parse_angle("3*pi/8", "x") == doctest::Approx(3 * pi / 8));
  CHECK(parse_angle(0.25, "x") == 0.25);
  CHECK(parse_angle("0.5", "x") == 0.5);
  CHECK_THROWS_AS(parse_angle("pie", "x"), ConfigError);
  const PriorSpec u = parse_prior_spec("uniform:-pi/4:pi/6");
  CHECK(u.kind == "uniform");
  CHECK(u.b == doctest::Approx(pi / 6));
  const PriorSpec tn = parse_prior_spec("tn:-pi/8:pi/8:0:1");
  CHECK(tn.kind == "truncated_normal");
  CHECK(tn.sigma2 == 1.0);
  CHECK_THROWS_AS(parse_prior_spec("uniform:0"), ConfigError);
}

TEST_CASE("config hash ignores fields that cannot change results") {
  ExperimentConfig a;
  ExperimentConfig b = a;
  b.workers = 7;
  b.output = "elsewhere.csv";
  CHECK(config_hash(a) == config_hash(b));
  b.seed = 2;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("trial records") {
  ExperimentContext ctx(small_config());
  const TrialRecord r = ctx.run_trial(3, 10, true);
  CHECK(r.outcomes.size() == 3);
  CHECK(r.thetas.size() == 5);
  CHECK(std::is_sorted(r.thetas.begin(), r.thetas.end()));
  for (const auto& o : r.outcomes) {
    CHECK(o.nmse >= 0.0);
    CHECK(o.doas.size() == 5);
    CHECK(o.squared_error >= 0.0);
  }
  // Same DoAs at every Q.
  CHECK(ctx.run_trial(3, 1000, false).thetas == r.thetas);

  ExperimentConfig only_sel = small_config();
  only_sel.combiners = {CombinerKind::Selection};
  const TrialRecord s = ExperimentContext(only_sel).run_trial(3, 10, false);
  CHECK(s.outcomes.size() == 1);
  CHECK_THROWS_AS(s.outcome(CombinerKind::Mmse), InvalidArgument);
}

TEST_CASE("cdf experiment") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 1;
  const auto lines = data_lines(run_cdf_experiment(cfg));
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "combiner,nmse,cdf");
  for (std::size_t i = 1; i < lines.size(); ++i) CHECK(split(lines[i])[2] == "1");

  cfg.trials = 60;
  const std::string csv = run_cdf_experiment(cfg);
  CHECK(csv.find("# config_hash: " + config_hash(cfg)) != std::string::npos);
  CHECK(csv.find("# seed: 1") != std::string::npos);
  CHECK(csv.find("# pairing: sorted-ascending") != std::string::npos);
  CHECK(csv.find("# power_mode: oracle") != std::string::npos);
  std::map<std::string, double> sum;
  for (std::size_t i = 1; i < data_lines(csv).size(); ++i) {
    const auto f = split(data_lines(csv)[i]);
    sum[f[0]] += std::stod(f[1]);
  }
  CHECK(sum["mmse"] < sum["averaging"]);
  CHECK(sum["averaging"] < sum["selection"]);
}

TEST_CASE("outputs are byte-identical across reruns and worker counts") {
  ExperimentConfig cfg = small_config();
  cfg.workers = 1;
  const std::string a = run_nmse_vs_q(cfg);
  cfg.workers = 3;
  const std::string b = run_nmse_vs_q(cfg);
  CHECK(a == b);
  CHECK(run_cdf_experiment(cfg) == run_cdf_experiment(cfg));
  cfg.seed = 2;
  CHECK(run_nmse_vs_q(cfg) != a);
}

TEST_CASE("nmse-vs-q overlay and trend") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 200;
  const auto lines = data_lines(run_nmse_vs_q(cfg));
  CHECK(lines[0] == "Q,combiner,mean_nmse,stderr,closed_form_nmse");
  REQUIRE(lines.size() == 1 + 2 * 3);
  std::map<std::pair<int, std::string>, std::vector<std::string>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i]);
    rows[{std::stoi(f[0]), f[1]}] = f;
  }
  for (int Q : {10, 1000}) {
    for (std::string c : {"selection", "averaging"}) {
      const auto& f = rows[{Q, c}];
      CHECK(std::abs(std::stod(f[2]) - std::stod(f[4])) < 5 * std::stod(f[3]));
    }
    CHECK(rows[{Q, "mmse"}][4] == "nan");
  }
  for (std::string c : {"selection", "averaging", "mmse"})
    CHECK(std::stod(rows[{1000, c}][2]) < std::stod(rows[{10, c}][2]));
  const double gap10 = std::stod(rows[{10, "averaging"}][2]) - std::stod(rows[{10, "mmse"}][2]);
  const double gap1000 = std::stod(rows[{1000, "averaging"}][2]) - std::stod(rows[{1000, "mmse"}][2]);
  CHECK(gap10 > gap1000);
}

TEST_CASE("rmse-vs-q at high sample support") {
  ExperimentConfig cfg;
  cfg.K = 1;
  cfg.trials = 50;
  // Away from endfire, where a fixed error in sin(theta) becomes a large angle error.
  cfg.prior = parse_prior_spec("uniform:-pi/3:pi/3");
  cfg.q_list = {10000};
  const std::string csv = run_rmse_vs_q(cfg);
  const auto lines = data_lines(csv);
  CHECK(lines[0] == "Q,combiner,rmse_deg,flagged,trials");
  const double step_deg = 180.0 / (cfg.grid_points - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) CHECK(std::stod(split(lines[i])[2]) < step_deg);

  // Degrees conversion applied once: recompute from the trial records.
  ExperimentContext ctx(cfg);
  const int qs[] = {10000};
  const auto recs = run_trials(ctx, qs, true);
  double sum = 0.0;
  for (const auto& r : recs[0]) sum += r.outcome(CombinerKind::Averaging).squared_error;
  const double expected = std::sqrt(sum / recs[0].size()) * 180.0 / pi;
  CHECK(std::stod(split(lines[2])[2]) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("estimated power mode") {
  ExperimentConfig cfg = small_config();
  cfg.power_mode = PowerMode::Estimated;
  cfg.trials = 20;
  const auto lines = data_lines(run_nmse_vs_q(cfg));
  for (std::size_t i = 1; i < lines.size(); ++i) CHECK(std::isfinite(std::stod(split(lines[i])[2])));
  CHECK(run_cdf_experiment(cfg).find("# power_mode: estimated") != std::string::npos);
}

TEST_CASE("spectrum dump") {
  ExperimentConfig cfg = small_config();
  std::ostringstream snaps;
  const auto lines = data_lines(run_spectrum(cfg, &snaps));
  CHECK(lines[0] == "theta_rad,p_music");
  CHECK(lines.size() == static_cast<std::size_t>(cfg.grid_points) + 1);
  for (std::size_t i = 1; i < lines.size(); ++i) CHECK(std::stod(split(lines[i])[1]) >= 0.0);
  CHECK(data_lines(snaps.str()).size() == 6);
}

TEST_CASE("oracle check") {
  ExperimentConfig cfg;
  cfg.oracle_trials = 4000;
  const OracleCheckResult ok = run_oracle_check(cfg);
  CHECK(ok.all_pass);
  CHECK(ok.rows.size() == 35);
  CHECK(data_lines(ok.csv).size() == ok.rows.size() + 1);
  const OracleCheckResult bad = run_oracle_check(cfg, OracleCheckOptions{1.3});
  CHECK_FALSE(bad.all_pass);
  CHECK(bad.csv.find(",fail") != std::string::npos);
}

TEST_CASE("exported combiners can be imported") {
  ExperimentConfig cfg = small_config();
  cfg.q_list = {10};
  const std::string path = "coprime_test_combiner.txt";
  {
    std::ofstream os(path);
    export_mmse_combiner(cfg, os);
  }
  ExperimentConfig imported = cfg;
  imported.import_combiner = path;
  const std::string a = data_lines(run_nmse_vs_q(cfg)).back();
  const std::string b = data_lines(run_nmse_vs_q(imported)).back();
  CHECK(a == b);
  std::remove(path.c_str());

  imported.import_combiner = "does-not-exist.txt";
  CHECK_THROWS_AS(run_nmse_vs_q(imported), ConfigError);
}

TEST_CASE("bootstrap interval") {
  std::vector<double> v;
  for (int i = 0; i < 200; ++i) v.push_back(1.0 + 0.01 * (i % 7));
  const Interval a = bootstrap_mean_interval(v, 0.95, 1000, 3);
  const Interval b = bootstrap_mean_interval(v, 0.95, 1000, 3);
  CHECK(a.lower == b.lower);
  CHECK(a.lower <= a.upper);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= v.size();
  CHECK(a.lower < mean);
  CHECK(a.upper > mean);
  CHECK_THROWS_AS(bootstrap_mean_interval({}, 0.95, 10, 1), InvalidArgument);
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
