#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "kpe/control.hpp"
#include "kpe/envs.hpp"
#include "kpe/evaluator.hpp"

namespace kpe {

enum class Architecture { Opi, ActorCritic };
enum class EnvKind { Chain, Nav2D };

std::string to_string(Architecture arch);
std::string to_string(EnvKind kind);

/// Every experiment parameter. An empty config file yields these defaults.
struct ExperimentConfig {
  Method method = Method::Lstd;
  Architecture architecture = Architecture::ActorCritic;
  EnvKind env = EnvKind::Chain;
  ChainParams chain{5, 0.2, false, 0};
  NavParams nav;

  double gamma = 0.99;
  double lambda = 0.5;
  double sigma2 = 0.1;
  double eta = 0.5;
  /// LSPE step size eta * c / (c + t) when positive; constant eta otherwise.
  double eta_harmonic_c = 0.0;
  double epsilon = 0.01;
  /// Inverse kernel lengthscale.
  double h = 5.0;
  double tol1 = 0.1;
  double tol2 = 0.01;
  std::size_t max_dictionary = 0;
  /// Offer executed state-actions as growth candidates too.
  bool screen_current = true;

  std::size_t batch_size = 20;
  std::size_t max_transitions = 20000;
  std::size_t window = 20;
  /// Width, in transitions, of the aggregate CSV buckets.
  std::size_t bucket = 1000;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::filesystem::path output = "kpe_out";
  bool record_timing = false;

  ControlConfig control() const;
  std::unique_ptr<Environment> make_env(std::uint64_t seed) const;
};

/// Parses `key = value` lines; `#` starts a comment. Throws ConfigError with
/// a "<source>:<line>: " prefix on unknown keys, malformed values and
/// failed validation.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError when the combination of settings is invalid. `lines`
/// maps keys to the line that set them, for anchoring messages.
void validate(const ExperimentConfig& config, const std::string& source = "<config>",
              const std::map<std::string, int>& lines = {});

}  // namespace kpe
