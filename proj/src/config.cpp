#include "coprime/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "coprime/errors.hpp"

namespace coprime {

using nlohmann::json;

std::string to_string(PowerMode mode) {
  switch (mode) {
    case PowerMode::Oracle:
      return "oracle";
    case PowerMode::Estimated:
      return "estimated";
    case PowerMode::Ratios:
      return "ratios";
  }
  return "oracle";
}

PowerMode power_mode_from_string(const std::string& name) {
  if (name == "oracle") return PowerMode::Oracle;
  if (name == "estimated") return PowerMode::Estimated;
  if (name == "ratios") return PowerMode::Ratios;
  throw InvalidArgument("unknown power mode '" + name + "' (oracle, estimated, ratios)");
}

std::string to_string(NoiseEstimator e) {
  return e == NoiseEstimator::SmallestSingularValue ? "singular_value" : "eigenvalue";
}

NoiseEstimator noise_estimator_from_string(const std::string& name) {
  if (name == "singular_value") return NoiseEstimator::SmallestSingularValue;
  if (name == "eigenvalue") return NoiseEstimator::SmallestEigenvalue;
  throw InvalidArgument("unknown noise estimator '" + name + "' (singular_value, eigenvalue)");
}

DoAPrior PriorSpec::build() const {
  if (kind == "uniform") return DoAPrior::uniform(a, b);
  if (kind == "truncated_normal") return DoAPrior::truncated_normal(a, b, mu, sigma2);
  throw InvalidArgument("unknown prior kind '" + kind + "' (uniform, truncated_normal)");
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_number(const std::string& s, const std::string& field) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(field, "not a number: '" + s + "'");
  }
  if (used != s.size()) throw ConfigError(field, "not a number: '" + s + "'");
  return v;
}

// [sign][coef*]pi[/den] or a plain number.
double parse_angle_text(std::string s, const std::string& field) {
  s = trim(s);
  const auto pos = s.find("pi");
  if (pos == std::string::npos) return parse_number(s, field);
  std::string head = trim(s.substr(0, pos));
  std::string tail = trim(s.substr(pos + 2));
  double sign = 1.0;
  if (!head.empty() && (head[0] == '-' || head[0] == '+')) {
    if (head[0] == '-') sign = -1.0;
    head = trim(head.substr(1));
  }
  double coef = 1.0;
  if (!head.empty()) {
    if (head.back() != '*') throw ConfigError(field, "bad angle '" + s + "'");
    coef = parse_number(trim(head.substr(0, head.size() - 1)), field);
  }
  double den = 1.0;
  if (!tail.empty()) {
    if (tail[0] != '/') throw ConfigError(field, "bad angle '" + s + "'");
    den = parse_number(trim(tail.substr(1)), field);
    if (den == 0.0) throw ConfigError(field, "division by zero in '" + s + "'");
  }
  return sign * coef * std::numbers::pi / den;
}

template <class T>
T get_as(const json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(field, std::string("wrong type: ") + e.what());
  }
}

int get_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
  return get_as<int>(j, field);
}

long get_long(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
  return get_as<long>(j, field);
}

double get_double(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  return get_as<double>(j, field);
}

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected a string");
  return j.get<std::string>();
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& prefix) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) throw ConfigError(prefix + it.key(), "unknown key");
  }
}

PriorSpec prior_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("prior", "expected an object");
  reject_unknown(j, {"kind", "a", "b", "mu", "sigma2"}, "prior.");
  PriorSpec p;
  if (j.contains("kind")) p.kind = get_string(j["kind"], "prior.kind");
  if (p.kind == "tn") p.kind = "truncated_normal";
  if (j.contains("a")) p.a = parse_angle(j["a"], "prior.a");
  if (j.contains("b")) p.b = parse_angle(j["b"], "prior.b");
  if (j.contains("mu")) p.mu = parse_angle(j["mu"], "prior.mu");
  if (j.contains("sigma2")) p.sigma2 = parse_angle(j["sigma2"], "prior.sigma2");
  return p;
}

}  // namespace

double parse_angle(const json& value, const std::string& field) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) return parse_angle_text(value.get<std::string>(), field);
  throw ConfigError(field, "expected a number or an angle string");
}

PriorSpec parse_prior_spec(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(trim(item));
  if (parts.empty()) throw ConfigError("prior", "empty prior spec");
  PriorSpec p;
  p.kind = parts[0] == "tn" ? "truncated_normal" : parts[0];
  const std::size_t want = p.kind == "uniform" ? 3 : 5;
  if (p.kind != "uniform" && p.kind != "truncated_normal") {
    throw ConfigError("prior", "unknown prior kind '" + parts[0] + "'");
  }
  if (parts.size() != want) {
    throw ConfigError("prior", "expected uniform:A:B or truncated_normal:A:B:MU:SIGMA2");
  }
  p.a = parse_angle_text(parts[1], "prior.a");
  p.b = parse_angle_text(parts[2], "prior.b");
  if (want == 5) {
    p.mu = parse_angle_text(parts[3], "prior.mu");
    p.sigma2 = parse_angle_text(parts[4], "prior.sigma2");
  }
  return p;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  reject_unknown(j,
                 {"geometry", "K", "snr_db", "sigma2_db", "Q", "q_list", "trials", "prior", "combiners",
                  "power_mode", "noise_estimator", "grid_points", "seed", "output", "workers",
                  "oracle_trials", "spectrum_combiner", "import_combiner", "export_combiner"},
                 "");
  ExperimentConfig cfg;
  if (j.contains("geometry")) {
    const json& g = j["geometry"];
    if (!g.is_object()) throw ConfigError("geometry", "expected {\"M\": .., \"N\": ..}");
    reject_unknown(g, {"M", "N"}, "geometry.");
    if (g.contains("M")) cfg.M = get_int(g["M"], "geometry.M");
    if (g.contains("N")) cfg.N = get_int(g["N"], "geometry.N");
  }
  if (j.contains("K")) cfg.K = get_int(j["K"], "K");
  if (j.contains("snr_db")) cfg.snr_db = get_double(j["snr_db"], "snr_db");
  if (j.contains("sigma2_db")) cfg.sigma2_db = get_double(j["sigma2_db"], "sigma2_db");
  if (j.contains("Q")) cfg.Q = get_int(j["Q"], "Q");
  if (j.contains("q_list")) {
    if (!j["q_list"].is_array()) throw ConfigError("q_list", "expected an array of integers");
    cfg.q_list.clear();
    for (const auto& q : j["q_list"]) cfg.q_list.push_back(get_int(q, "q_list"));
  }
  if (j.contains("trials")) cfg.trials = get_long(j["trials"], "trials");
  if (j.contains("prior")) cfg.prior = prior_from_json(j["prior"]);
  if (j.contains("combiners")) {
    if (!j["combiners"].is_array()) throw ConfigError("combiners", "expected an array of names");
    cfg.combiners.clear();
    for (const auto& c : j["combiners"]) {
      try {
        cfg.combiners.push_back(combiner_kind_from_string(get_string(c, "combiners")));
      } catch (const InvalidArgument& e) {
        throw ConfigError("combiners", e.what());
      }
    }
  }
  try {
    if (j.contains("power_mode")) cfg.power_mode = power_mode_from_string(get_string(j["power_mode"], "power_mode"));
  } catch (const InvalidArgument& e) {
    throw ConfigError("power_mode", e.what());
  }
  try {
    if (j.contains("noise_estimator"))
      cfg.noise_estimator = noise_estimator_from_string(get_string(j["noise_estimator"], "noise_estimator"));
  } catch (const InvalidArgument& e) {
    throw ConfigError("noise_estimator", e.what());
  }
  try {
    if (j.contains("spectrum_combiner"))
      cfg.spectrum_combiner = combiner_kind_from_string(get_string(j["spectrum_combiner"], "spectrum_combiner"));
  } catch (const InvalidArgument& e) {
    throw ConfigError("spectrum_combiner", e.what());
  }
  if (j.contains("grid_points")) cfg.grid_points = get_int(j["grid_points"], "grid_points");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output")) cfg.output = get_string(j["output"], "output");
  if (j.contains("workers")) cfg.workers = get_int(j["workers"], "workers");
  if (j.contains("oracle_trials")) cfg.oracle_trials = get_long(j["oracle_trials"], "oracle_trials");
  if (j.contains("import_combiner")) cfg.import_combiner = get_string(j["import_combiner"], "import_combiner");
  if (j.contains("export_combiner")) cfg.export_combiner = get_string(j["export_combiner"], "export_combiner");
  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  try {
    ArrayGeometry g(M, N);
    if (K < 1 || K >= g.virtual_size()) {
      throw ConfigError("K", "need 1 <= K < L' = " + std::to_string(g.virtual_size()));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("geometry", e.what());
  }
  if (!std::isfinite(snr_db)) throw ConfigError("snr_db", "must be finite");
  if (!std::isfinite(sigma2_db)) throw ConfigError("sigma2_db", "must be finite");
  if (Q < 1) throw ConfigError("Q", "must be at least 1");
  if (q_list.empty()) throw ConfigError("q_list", "must not be empty");
  for (int q : q_list)
    if (q < 1) throw ConfigError("q_list", "every entry must be at least 1");
  if (trials < 1) throw ConfigError("trials", "must be at least 1");
  try {
    (void)prior.build();
  } catch (const Error& e) {
    throw ConfigError("prior", e.what());
  }
  if (combiners.empty()) throw ConfigError("combiners", "must not be empty");
  if (grid_points < 3) throw ConfigError("grid_points", "must be at least 3");
  if (workers < 0) throw ConfigError("workers", "must be non-negative");
  if (oracle_trials < 2) throw ConfigError("oracle_trials", "must be at least 2");
}

json config_to_json(const ExperimentConfig& cfg) {
  json j = canonical_config(cfg);
  j["output"] = cfg.output;
  j["workers"] = cfg.workers;
  j["export_combiner"] = cfg.export_combiner;
  return j;
}

json canonical_config(const ExperimentConfig& cfg) {
  json j;
  j["geometry"] = {{"M", cfg.M}, {"N", cfg.N}};
  j["K"] = cfg.K;
  j["snr_db"] = cfg.snr_db;
  j["sigma2_db"] = cfg.sigma2_db;
  j["Q"] = cfg.Q;
  j["q_list"] = cfg.q_list;
  j["trials"] = cfg.trials;
  json prior = {{"kind", cfg.prior.kind}, {"a", cfg.prior.a}, {"b", cfg.prior.b}};
  if (cfg.prior.kind == "truncated_normal") {
    prior["mu"] = cfg.prior.mu;
    prior["sigma2"] = cfg.prior.sigma2;
  }
  j["prior"] = prior;
  json combiners = json::array();
  for (auto c : cfg.combiners) combiners.push_back(to_string(c));
  j["combiners"] = combiners;
  j["power_mode"] = to_string(cfg.power_mode);
  j["noise_estimator"] = to_string(cfg.noise_estimator);
  j["grid_points"] = cfg.grid_points;
  j["seed"] = cfg.seed;
  j["oracle_trials"] = cfg.oracle_trials;
  j["spectrum_combiner"] = to_string(cfg.spectrum_combiner);
  j["import_combiner"] = cfg.import_combiner;
  return j;
}

json parse_config_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin, e.what());
  }
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = canonical_config(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace coprime
