#pragma once

// Resolved run configuration of the annulus-dyn tool and its JSON form.

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "annulus/bodies.hpp"
#include "annulus/errors.hpp"

namespace annulus::cli {

/// Malformed configuration file or flag value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct AnnulusSpec {
  double a = 1.0;
  double b = 0.75;
  double mu = 1.0;
  friend bool operator==(const AnnulusSpec&, const AnnulusSpec&) = default;
};

enum class BodyKind { Wire, Disk, Annulus, Stack };
std::string_view to_string(BodyKind k);
BodyKind parse_body_kind(std::string_view s);

struct BodySpec {
  BodyKind kind = BodyKind::Annulus;
  /// Used by wire, disk (a, mu) and annulus (a, b, mu).
  AnnulusSpec single{};
  /// Used by stack.
  std::vector<AnnulusSpec> members;
  friend bool operator==(const BodySpec&, const BodySpec&) = default;
};

/// n points from lo to hi inclusive; n = 1 means the single value lo.
struct AxisSpec {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 1;
  double at(std::size_t i) const;
  friend bool operator==(const AxisSpec&, const AxisSpec&) = default;
};

/// "lo:hi:n" or a single value.
AxisSpec parse_axis(std::string_view text);
std::string format_axis(const AxisSpec& ax);

struct EvalConfig {
  std::array<AxisSpec, 3> grid{};
  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

struct PortraitConfig {
  std::string mode = "axial";
  std::vector<double> lambda{0.0};
  /// Explicit energies; when empty, level_count levels are chosen.
  std::vector<double> levels;
  std::size_t level_count = 8;
  std::optional<std::array<double, 2>> range;
  std::size_t samples = 401;
  bool emit_wprime = false;
  friend bool operator==(const PortraitConfig&, const PortraitConfig&) = default;
};

struct EquilibriaConfig {
  std::vector<double> lambda{2.5};
  std::optional<double> r_max;
  bool monodromy = false;
  friend bool operator==(const EquilibriaConfig&, const EquilibriaConfig&) = default;
};

struct BifurcationConfig {
  std::array<double, 2> bracket{0.1, 2.5};
  double tol = 1e-8;
  friend bool operator==(const BifurcationConfig&, const BifurcationConfig&) = default;
};

struct OrbitConfig {
  std::array<double, 6> state{2.0, 0.0, 0.0, 0.0, 1.25, 0.0};
  double t_max = 100.0;
  double dt = 0.1;
  friend bool operator==(const OrbitConfig&, const OrbitConfig&) = default;
};

struct Tolerances {
  double rtol = 1e-12;
  double atol = 1e-12;
  /// Integrator step budget (accepted plus rejected steps).
  std::size_t max_steps = 10'000'000;
  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

struct RunConfig {
  std::string command;
  BodySpec body;
  EvalConfig eval;
  PortraitConfig portrait;
  EquilibriaConfig equilibria;
  BifurcationConfig bifurcation;
  OrbitConfig orbit;
  Tolerances tolerances;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Overlays the keys present in j onto cfg. Unknown keys raise ConfigError.
void merge_json(RunConfig& cfg, const nlohmann::json& j);
RunConfig from_json(const nlohmann::json& j);

/// Reads and merges a configuration file.
void load_file(RunConfig& cfg, const std::filesystem::path& path);

/// Environment variable naming the default configuration directory.
inline constexpr const char* kConfigDirEnv = "ANNULUS_DYN_CONFIG_DIR";
/// Name of the file picked up from that directory when present.
inline constexpr const char* kDefaultConfigName = "annulus-dyn.json";

/// A relative path that does not exist is looked up in the configuration
/// directory.
std::filesystem::path resolve_config_path(const std::filesystem::path& p);

/// Checks ranges and fills the optional fields that depend on the body.
void resolve(RunConfig& cfg);

Body make_body(const BodySpec& spec);
/// Raises ConfigError for wire and disk bodies.
BodyStack make_stack(const BodySpec& spec);

}  // namespace annulus::cli
