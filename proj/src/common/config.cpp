#include "pcad/config.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "pcad/error.hpp"

namespace pcad {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    fail_usage("config key '" + key + "' expects a non-negative integer, got '" + v + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    fail_usage("config key '" + key + "' expects a real number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail_usage("config key '" + key + "' expects true/false, got '" + v + "'");
}

std::string fmt_double(double d) {
  std::ostringstream os;
  os << std::setprecision(17) << d;
  return os.str();
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += f(xs[i]);
  }
  return out;
}

}  // namespace

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(text);
  while (std::getline(is, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::identity: return "identity";
    case Strategy::random: return "random";
    case Strategy::greedy: return "greedy";
    case Strategy::greedy_projected: return "greedy-proj";
    case Strategy::correspondence: return "correspondence";
  }
  return "?";
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::M6: return "M6";
    case Stage::M7: return "M7";
    case Stage::M8: return "M8";
    case Stage::M9: return "M9";
  }
  return "?";
}

std::string to_string(FeatureNorm n) { return n == FeatureNorm::none ? "none" : "block_l2"; }
std::string to_string(Propagation p) { return p == Propagation::nearest ? "nearest" : "idw3"; }

Strategy parse_strategy(const std::string& t) {
  if (t == "identity") return Strategy::identity;
  if (t == "random") return Strategy::random;
  if (t == "greedy") return Strategy::greedy;
  if (t == "greedy-proj" || t == "greedy_projected") return Strategy::greedy_projected;
  if (t == "correspondence") return Strategy::correspondence;
  fail_usage("unknown strategy '" + t + "' (identity, random, greedy, greedy-proj, correspondence)");
}

Stage parse_stage(const std::string& t) {
  if (t == "M6") return Stage::M6;
  if (t == "M7") return Stage::M7;
  if (t == "M8") return Stage::M8;
  if (t == "M9") return Stage::M9;
  fail_usage("unknown stage '" + t + "' (M6, M7, M8, M9)");
}

void RunConfig::validate() const {
  if (N < 1) fail_usage("N must be >= 1");
  if (K < 1) fail_usage("K must be >= 1");
  if (!(gamma >= 0.0)) fail_usage("gamma must be >= 0");
  if (scales.empty()) fail_usage("scales must be non-empty");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (scales[i] < 1) fail_usage("scales must be positive");
    if (i > 0 && scales[i] <= scales[i - 1]) fail_usage("scales must be strictly ascending");
  }
  if (aggregation_m < 1) fail_usage("aggregation_m must be >= 1");
  if (centers_G < 1) fail_usage("centers_G must be >= 1");
  if (normal_k < 3) fail_usage("normal_k must be >= 3");
  if (proj_dim < 1) fail_usage("proj_dim must be >= 1");
  if (!(sim_ratio_min > 0.0 && sim_ratio_min <= sim_ratio_max && sim_ratio_max <= 0.05))
    fail_usage("simulated anomaly ratios must satisfy 0 < min <= max <= 0.05");
  if (!(sim_magnitude > 0.0)) fail_usage("sim_magnitude must be > 0");
  if (sim_kinds.empty()) fail_usage("sim_kinds must be non-empty");
  if (shots < 1) fail_usage("shots must be >= 1");
  if (folds < 1) fail_usage("folds must be >= 1");
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "N") N = parse_size(key, v);
  else if (key == "K") K = parse_size(key, v);
  else if (key == "gamma") gamma = parse_double(key, v);
  else if (key == "scales") {
    scales.clear();
    for (const auto& s : split_list(v)) scales.push_back(parse_size(key, s));
  }
  else if (key == "m" || key == "aggregation_m") aggregation_m = parse_size(key, v);
  else if (key == "G" || key == "centers_G") centers_G = parse_size(key, v);
  else if (key == "normal_k") normal_k = parse_size(key, v);
  else if (key == "strategy") strategy = parse_strategy(v);
  else if (key == "stage") stage = parse_stage(v);
  else if (key == "use_simulated") use_simulated = parse_bool(key, v);
  else if (key == "seed") seed = parse_size(key, v);
  else if (key == "proj_dim") proj_dim = parse_size(key, v);
  else if (key == "feature_norm") {
    if (v == "none") feature_norm = FeatureNorm::none;
    else if (v == "block_l2") feature_norm = FeatureNorm::block_l2;
    else fail_usage("feature_norm must be none or block_l2");
  }
  else if (key == "propagation") {
    if (v == "nearest") propagation = Propagation::nearest;
    else if (v == "idw3") propagation = Propagation::idw3;
    else fail_usage("propagation must be nearest or idw3");
  }
  else if (key == "clamp_alpha") clamp_alpha = parse_bool(key, v);
  else if (key == "label_masked") label_masked = parse_bool(key, v);
  else if (key == "sims_per_normal") sims_per_normal = parse_size(key, v);
  else if (key == "sim_kinds") sim_kinds = split_list(v);
  else if (key == "sim_magnitude") sim_magnitude = parse_double(key, v);
  else if (key == "sim_ratio_min") sim_ratio_min = parse_double(key, v);
  else if (key == "sim_ratio_max") sim_ratio_max = parse_double(key, v);
  else if (key == "seen_kinds") seen_kinds = split_list(v);
  else if (key == "shots") shots = parse_size(key, v);
  else if (key == "folds") folds = parse_size(key, v);
  else fail_usage("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::to_pairs() const {
  auto id = [](const std::string& s) { return s; };
  auto num = [](std::size_t s) { return std::to_string(s); };
  return {
      {"N", num(N)},
      {"K", num(K)},
      {"gamma", fmt_double(gamma)},
      {"scales", join(scales, num)},
      {"m", num(aggregation_m)},
      {"G", num(centers_G)},
      {"normal_k", num(normal_k)},
      {"strategy", to_string(strategy)},
      {"stage", to_string(stage)},
      {"use_simulated", use_simulated ? "true" : "false"},
      {"seed", std::to_string(seed)},
      {"proj_dim", num(proj_dim)},
      {"feature_norm", to_string(feature_norm)},
      {"propagation", to_string(propagation)},
      {"clamp_alpha", clamp_alpha ? "true" : "false"},
      {"label_masked", label_masked ? "true" : "false"},
      {"sims_per_normal", num(sims_per_normal)},
      {"sim_kinds", join(sim_kinds, id)},
      {"sim_magnitude", fmt_double(sim_magnitude)},
      {"sim_ratio_min", fmt_double(sim_ratio_min)},
      {"sim_ratio_max", fmt_double(sim_ratio_max)},
      {"seen_kinds", join(seen_kinds, id)},
      {"shots", num(shots)},
      {"folds", num(folds)},
  };
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : to_pairs()) out += k + "=" + v + "\n";
  return out;
}

void apply_pairs(RunConfig& cfg, const std::vector<std::pair<std::string, std::string>>& pairs) {
  for (const auto& [k, v] : pairs) cfg.set(k, v);
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) fail_data("cannot open config file '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      fail_usage(path + ":" + std::to_string(lineno) + ": expected key=value");
    base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

}  // namespace pcad
