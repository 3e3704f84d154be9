#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mkv/criteria.hpp"
#include "mkv/grid.hpp"
#include "mkv/kernels.hpp"
#include "mkv/particles.hpp"
#include "mkv/solver.hpp"
#include "mkv/stable_noise.hpp"

namespace mkv {

enum class ValueType { Real, Integer, Text, Bool, List };

using ConfigValue = std::variant<double, std::int64_t, std::string, bool, std::vector<double>>;

/// Configuration diagnostic naming the section, the key and the reason.
struct ConfigError : ParameterError {
  enum class Kind { Parse, UnknownKey, TypeMismatch, UnresolvedReference, Invalid };

  ConfigError(Kind kind, std::string section, std::string key, int line, const std::string& reason);

  Kind kind;
  std::string section;
  std::string key;
  int line;  // 0 when the error is not tied to a line
};

const char* to_string(ConfigError::Kind kind);

/// Line-oriented experiment description:
///
///   [section]
///   key = value   # comment
///
/// Sections: model, noise, grid, initial, solver, particles, output. Every
/// key has a fixed type; lists are comma-separated reals and `inf` is a real.
class ExperimentConfig {
 public:
  using Section = std::map<std::string, ConfigValue>;

  std::map<std::string, Section> sections;
  std::vector<std::string> warnings;
  std::filesystem::path base_dir;  // relative file references resolve here

  bool has(const std::string& section, const std::string& key) const;
  double real(const std::string& section, const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& section, const std::string& key, std::int64_t fallback) const;
  std::string text(const std::string& section, const std::string& key, const std::string& fallback) const;
  bool flag(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> list(const std::string& section, const std::string& key) const;
  std::filesystem::path path(const std::string& section, const std::string& key) const;

  /// Type-checked assignment; throws ConfigError for unknown keys or a wrong type.
  void set(const std::string& section, const std::string& key, ConfigValue value);

  /// Equality of the key/value content only.
  bool operator==(const ExperimentConfig& other) const { return sections == other.sections; }
};

/// Declared type of a key, throwing ConfigError (UnknownKey) when it has none.
ValueType key_type(const std::string& section, const std::string& key);

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize(const ExperimentConfig& config);

/// Range checks and cross-section references; attaches warnings. Called by parse_config.
void validate(ExperimentConfig& config);

GridSpec grid_from(const ExperimentConfig& config);
StableParams noise_from(const ExperimentConfig& config);
LebesgueBesovIndices indices_from(const ExperimentConfig& config);
KernelSpec kernel_from(const ExperimentConfig& config);
ScalarField initial_from(const ExperimentConfig& config);
SolverConfig solver_from(const ExperimentConfig& config);
ParticleConfig particles_from(const ExperimentConfig& config);
std::uint64_t seed_from(const ExperimentConfig& config);

}  // namespace mkv
