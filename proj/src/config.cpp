#include "kpe/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <set>
#include <sstream>

#include "kpe/errors.hpp"

namespace kpe {

std::string to_string(Architecture arch) {
  return arch == Architecture::Opi ? "opi" : "actor-critic";
}

std::string to_string(EnvKind kind) { return kind == EnvKind::Chain ? "chain" : "nav2d"; }

ControlConfig ExperimentConfig::control() const {
  ControlConfig c;
  c.learner.method = method;
  c.learner.hyper.gamma = gamma;
  c.learner.hyper.lambda = lambda;
  c.learner.hyper.sigma2 = sigma2;
  c.learner.hyper.step.eta = eta;
  c.learner.hyper.step.harmonic_c = eta_harmonic_c;
  c.learner.kernel = KernelSpec{h, KernelKind::GaussianRbfProduct};
  c.learner.tol1 = tol1;
  c.learner.tol2 = tol2;
  c.learner.max_dictionary = max_dictionary;
  c.learner.screen_current = screen_current;
  c.epsilon = epsilon;
  c.batch_size = batch_size;
  c.max_transitions = max_transitions;
  c.window = window;
  c.record_timing = record_timing;
  return c;
}

std::unique_ptr<Environment> ExperimentConfig::make_env(std::uint64_t seed) const {
  // Decorrelate the simulator stream from the action-selection stream.
  const std::uint64_t env_seed = seed ^ 0x9e3779b97f4a7c15ULL;
  if (env == EnvKind::Chain) return std::make_unique<ChainEnv>(chain, env_seed);
  return std::make_unique<NoisyNav2D>(nav, env_seed);
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("expected a number");
  return out;
}

std::uint64_t parse_count(const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw std::invalid_argument("expected a non-negative integer");
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("expected true or false");
}

std::vector<std::uint64_t> parse_seeds(const std::string& v) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_count(trim(item)));
  if (out.empty()) throw std::invalid_argument("expected a comma-separated seed list");
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"method", [](auto& c, const auto& v) { c.method = method_from_string(v); }},
      {"architecture",
       [](auto& c, const auto& v) {
         if (v == "opi") {
           c.architecture = Architecture::Opi;
         } else if (v == "actor-critic") {
           c.architecture = Architecture::ActorCritic;
         } else {
           throw std::invalid_argument("expected opi or actor-critic");
         }
       }},
      {"env",
       [](auto& c, const auto& v) {
         if (v == "chain") {
           c.env = EnvKind::Chain;
         } else if (v == "nav2d") {
           c.env = EnvKind::Nav2D;
         } else {
           throw std::invalid_argument("expected chain or nav2d");
         }
       }},
      {"chain_states", [](auto& c, const auto& v) { c.chain.n = static_cast<int>(parse_count(v)); }},
      {"chain_slip", [](auto& c, const auto& v) { c.chain.slip = parse_real(v); }},
      {"chain_random_start", [](auto& c, const auto& v) { c.chain.random_start = parse_bool(v); }},
      {"nav_noise", [](auto& c, const auto& v) { c.nav.noise_std = parse_real(v); }},
      {"nav_step_length", [](auto& c, const auto& v) { c.nav.step_length = parse_real(v); }},
      {"nav_goal_radius", [](auto& c, const auto& v) { c.nav.goal_radius = parse_real(v); }},
      {"nav_max_steps", [](auto& c, const auto& v) { c.nav.max_steps = static_cast<int>(parse_count(v)); }},
      {"nav_random_start", [](auto& c, const auto& v) { c.nav.random_start = parse_bool(v); }},
      {"gamma", [](auto& c, const auto& v) { c.gamma = parse_real(v); }},
      {"lambda", [](auto& c, const auto& v) { c.lambda = parse_real(v); }},
      {"sigma2", [](auto& c, const auto& v) { c.sigma2 = parse_real(v); }},
      {"eta", [](auto& c, const auto& v) { c.eta = parse_real(v); }},
      {"eta_harmonic_c", [](auto& c, const auto& v) { c.eta_harmonic_c = parse_real(v); }},
      {"epsilon", [](auto& c, const auto& v) { c.epsilon = parse_real(v); }},
      {"h", [](auto& c, const auto& v) { c.h = parse_real(v); }},
      {"tol1", [](auto& c, const auto& v) { c.tol1 = parse_real(v); }},
      {"tol2", [](auto& c, const auto& v) { c.tol2 = parse_real(v); }},
      {"max_dictionary", [](auto& c, const auto& v) { c.max_dictionary = parse_count(v); }},
      {"screen_current", [](auto& c, const auto& v) { c.screen_current = parse_bool(v); }},
      {"batch_size", [](auto& c, const auto& v) { c.batch_size = parse_count(v); }},
      {"max_transitions", [](auto& c, const auto& v) { c.max_transitions = parse_count(v); }},
      {"window", [](auto& c, const auto& v) { c.window = parse_count(v); }},
      {"bucket", [](auto& c, const auto& v) { c.bucket = parse_count(v); }},
      {"seeds", [](auto& c, const auto& v) { c.seeds = parse_seeds(v); }},
      {"output", [](auto& c, const auto& v) { c.output = v; }},
      {"record_timing", [](auto& c, const auto& v) { c.record_timing = parse_bool(v); }},
  };
  return table;
}

}  // namespace

void validate(const ExperimentConfig& c, const std::string& source,
              const std::map<std::string, int>& lines) {
  auto fail = [&](const std::string& key, const std::string& msg) {
    const auto it = lines.find(key);
    const std::string where = it == lines.end() ? source : source + ":" + std::to_string(it->second);
    throw ConfigError(where + ": " + msg);
  };
  if (!(c.gamma > 0.0 && c.gamma < 1.0)) fail("gamma", "gamma must lie in (0, 1)");
  if (!(c.lambda >= 0.0 && c.lambda <= 1.0)) fail("lambda", "lambda must lie in [0, 1]");
  if (!(c.sigma2 > 0.0)) fail("sigma2", "sigma2 must be positive");
  if (!(c.eta > 0.0)) fail("eta", "eta must be positive");
  if (!(c.eta_harmonic_c >= 0.0)) fail("eta_harmonic_c", "eta_harmonic_c must be non-negative");
  if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0)) fail("epsilon", "epsilon must lie in [0, 1]");
  if (!(c.h > 0.0)) fail("h", "h must be positive");
  if (!(c.tol1 >= 0.0)) fail("tol1", "tol1 must be non-negative");
  if (!(c.tol2 >= 0.0)) fail("tol2", "tol2 must be non-negative");
  if (c.window == 0) fail("window", "window must be positive");
  if (c.bucket == 0) fail("bucket", "bucket must be positive");
  if (c.seeds.empty()) fail("seeds", "at least one seed is required");
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size()) {
    fail("seeds", "seeds must be distinct");
  }
  if (c.chain.n < 2) fail("chain_states", "the chain needs at least 2 states");
  if (!(c.chain.slip >= 0.0 && c.chain.slip < 0.5)) fail("chain_slip", "chain_slip must lie in [0, 0.5)");
  if (!(c.nav.noise_std > 0.0)) fail("nav_noise", "nav_noise must be positive");
  if (!(c.nav.step_length > 0.0)) fail("nav_step_length", "nav_step_length must be positive");
  if (!(c.nav.goal_radius > 0.0)) fail("nav_goal_radius", "nav_goal_radius must be positive");
  if (c.nav.max_steps <= 0) fail("nav_max_steps", "nav_max_steps must be positive");

  const bool deterministic = c.env == EnvKind::Chain && c.chain.slip == 0.0;
  if (c.method == Method::Brm && !deterministic) {
    fail("method", "brm requires a deterministic environment (chain with chain_slip = 0)");
  }
  if (c.architecture == Architecture::Opi && c.method == Method::Lstd) {
    fail("architecture", "opi requires method lspe or brm");
  }
  if (c.architecture == Architecture::ActorCritic && c.method == Method::Lspe) {
    fail("architecture", "actor-critic requires method lstd or brm");
  }
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ExperimentConfig config;
  std::map<std::string, int> lines;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (lines.count(key) != 0) throw ConfigError(where + "duplicate key '" + key + "'");
    if (value.empty()) throw ConfigError(where + "missing value for '" + key + "'");
    try {
      it->second(config, value);
    } catch (const std::exception& e) {
      throw ConfigError(where + "bad value '" + value + "' for '" + key + "': " + e.what());
    }
    lines[key] = line_no;
  }
  validate(config, source, lines);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  return parse_config(in, path.string());
}

}  // namespace kpe
