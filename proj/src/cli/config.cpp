#include "annulus/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include "annulus/cli/format.hpp"
#include "annulus/ode.hpp"

namespace annulus::cli {

using nlohmann::json;

std::string_view to_string(BodyKind k) {
  switch (k) {
    case BodyKind::Wire:
      return "wire";
    case BodyKind::Disk:
      return "disk";
    case BodyKind::Annulus:
      return "annulus";
    case BodyKind::Stack:
      return "stack";
  }
  return "unknown";
}

BodyKind parse_body_kind(std::string_view s) {
  if (s == "wire") return BodyKind::Wire;
  if (s == "disk") return BodyKind::Disk;
  if (s == "annulus") return BodyKind::Annulus;
  if (s == "stack") return BodyKind::Stack;
  throw ConfigError("unknown body kind '" + std::string(s) + "'");
}

double AxisSpec::at(std::size_t i) const {
  if (n <= 1) return lo;
  if (i + 1 == n) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

AxisSpec parse_axis(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto colon = text.find(':', start);
    parts.push_back(text.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  AxisSpec ax;
  if (parts.size() == 1) {
    ax.lo = ax.hi = parse_double(parts[0]);
    return ax;
  }
  if (parts.size() != 3) throw ConfigError("axis must be 'value' or 'lo:hi:n', got '" + std::string(text) + "'");
  ax.lo = parse_double(parts[0]);
  ax.hi = parse_double(parts[1]);
  std::size_t n = 0;
  const auto* end = parts[2].data() + parts[2].size();
  auto [ptr, ec] = std::from_chars(parts[2].data(), end, n);
  if (ec != std::errc{} || ptr != end || n == 0)
    throw ConfigError("axis point count must be a positive integer, got '" + std::string(parts[2]) + "'");
  ax.n = n;
  return ax;
}

std::string format_axis(const AxisSpec& ax) {
  if (ax.n == 1 && ax.lo == ax.hi) return format_double(ax.lo);
  return format_double(ax.lo) + ":" + format_double(ax.hi) + ":" + std::to_string(ax.n);
}

namespace {

json annulus_json(const AnnulusSpec& s) { return {{"a", s.a}, {"b", s.b}, {"mu", s.mu}}; }

void check_keys(const json& j, std::string_view where, std::set<std::string> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.contains(key))
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

// A single number is accepted where a list is expected.
void read_list(const json& j, const char* key, std::vector<double>& out) {
  if (j.contains(key) && j.at(key).is_number()) {
    out = {j.at(key).get<double>()};
    return;
  }
  read(j, key, out);
}

AnnulusSpec read_annulus(const json& j, AnnulusSpec base) {
  check_keys(j, "annulus", {"a", "b", "mu"});
  read(j, "a", base.a);
  read(j, "b", base.b);
  read(j, "mu", base.mu);
  return base;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
}

}  // namespace

json to_json(const RunConfig& cfg) {
  json body = {{"kind", std::string(to_string(cfg.body.kind))}};
  if (cfg.body.kind == BodyKind::Stack) {
    body["annuli"] = json::array();
    for (const auto& m : cfg.body.members) body["annuli"].push_back(annulus_json(m));
  } else {
    body["a"] = cfg.body.single.a;
    body["mu"] = cfg.body.single.mu;
    if (cfg.body.kind == BodyKind::Annulus) body["b"] = cfg.body.single.b;
  }

  json portrait = {{"mode", cfg.portrait.mode},
                   {"lambda", cfg.portrait.lambda},
                   {"levels", cfg.portrait.levels},
                   {"level_count", cfg.portrait.level_count},
                   {"samples", cfg.portrait.samples},
                   {"emit_wprime", cfg.portrait.emit_wprime}};
  portrait["range"] = cfg.portrait.range ? json(*cfg.portrait.range) : json(nullptr);
  json equilibria = {{"lambda", cfg.equilibria.lambda}, {"monodromy", cfg.equilibria.monodromy}};
  equilibria["r_max"] = cfg.equilibria.r_max ? json(*cfg.equilibria.r_max) : json(nullptr);

  return {{"command", cfg.command},
          {"body", body},
          {"eval",
           {{"x", format_axis(cfg.eval.grid[0])},
            {"y", format_axis(cfg.eval.grid[1])},
            {"z", format_axis(cfg.eval.grid[2])}}},
          {"portrait", portrait},
          {"equilibria", equilibria},
          {"bifurcation", {{"bracket", cfg.bifurcation.bracket}, {"tol", cfg.bifurcation.tol}}},
          {"orbit",
           {{"state", cfg.orbit.state}, {"t_max", cfg.orbit.t_max}, {"dt", cfg.orbit.dt}}},
          {"tolerances",
           {{"rtol", cfg.tolerances.rtol},
            {"atol", cfg.tolerances.atol},
            {"max_steps", cfg.tolerances.max_steps}}}};
}

void merge_json(RunConfig& cfg, const json& j) {
  check_keys(j, "configuration",
             {"command", "body", "eval", "portrait", "equilibria", "bifurcation", "orbit",
              "tolerances"});
  read(j, "command", cfg.command);

  if (j.contains("body")) {
    const json& b = j.at("body");
    check_keys(b, "body", {"kind", "a", "b", "mu", "annuli"});
    if (b.contains("kind")) {
      std::string kind;
      read(b, "kind", kind);
      cfg.body.kind = parse_body_kind(kind);
    }
    cfg.body.single = read_annulus(
        [&] {
          json s = json::object();
          for (const char* k : {"a", "b", "mu"})
            if (b.contains(k)) s[k] = b.at(k);
          return s;
        }(),
        cfg.body.single);
    if (b.contains("annuli")) {
      if (!b.at("annuli").is_array()) throw ConfigError("body.annuli must be an array");
      cfg.body.members.clear();
      for (const auto& m : b.at("annuli")) cfg.body.members.push_back(read_annulus(m, {}));
    }
  }

  if (j.contains("eval")) {
    const json& e = j.at("eval");
    check_keys(e, "eval", {"x", "y", "z"});
    const char* names[] = {"x", "y", "z"};
    for (int i = 0; i < 3; ++i) {
      if (!e.contains(names[i])) continue;
      const json& v = e.at(names[i]);
      if (v.is_number())
        cfg.eval.grid[i] = {v.get<double>(), v.get<double>(), 1};
      else if (v.is_string())
        cfg.eval.grid[i] = parse_axis(v.get<std::string>());
      else
        throw ConfigError(std::string("eval.") + names[i] + " must be a number or 'lo:hi:n'");
    }
  }

  if (j.contains("portrait")) {
    const json& p = j.at("portrait");
    check_keys(p, "portrait",
               {"mode", "lambda", "levels", "level_count", "range", "samples", "emit_wprime"});
    read(p, "mode", cfg.portrait.mode);
    read_list(p, "lambda", cfg.portrait.lambda);
    read_list(p, "levels", cfg.portrait.levels);
    read(p, "level_count", cfg.portrait.level_count);
    read(p, "samples", cfg.portrait.samples);
    read(p, "emit_wprime", cfg.portrait.emit_wprime);
    if (p.contains("range")) {
      if (p.at("range").is_null()) {
        cfg.portrait.range.reset();
      } else {
        std::array<double, 2> r{};
        read(p, "range", r);
        cfg.portrait.range = r;
      }
    }
  }

  if (j.contains("equilibria")) {
    const json& q = j.at("equilibria");
    check_keys(q, "equilibria", {"lambda", "r_max", "monodromy"});
    read_list(q, "lambda", cfg.equilibria.lambda);
    read(q, "monodromy", cfg.equilibria.monodromy);
    if (q.contains("r_max")) {
      if (q.at("r_max").is_null()) {
        cfg.equilibria.r_max.reset();
      } else {
        double r = 0.0;
        read(q, "r_max", r);
        cfg.equilibria.r_max = r;
      }
    }
  }

  if (j.contains("bifurcation")) {
    const json& q = j.at("bifurcation");
    check_keys(q, "bifurcation", {"bracket", "tol"});
    read(q, "bracket", cfg.bifurcation.bracket);
    read(q, "tol", cfg.bifurcation.tol);
  }

  if (j.contains("orbit")) {
    const json& q = j.at("orbit");
    check_keys(q, "orbit", {"state", "t_max", "dt"});
    read(q, "state", cfg.orbit.state);
    read(q, "t_max", cfg.orbit.t_max);
    read(q, "dt", cfg.orbit.dt);
  }

  if (j.contains("tolerances")) {
    const json& q = j.at("tolerances");
    check_keys(q, "tolerances", {"rtol", "atol", "max_steps"});
    read(q, "rtol", cfg.tolerances.rtol);
    read(q, "atol", cfg.tolerances.atol);
    read(q, "max_steps", cfg.tolerances.max_steps);
  }
}

RunConfig from_json(const json& j) {
  RunConfig cfg;
  merge_json(cfg, j);
  return cfg;
}

void load_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  merge_json(cfg, j);
}

std::filesystem::path resolve_config_path(const std::filesystem::path& p) {
  if (p.is_absolute() || std::filesystem::exists(p)) return p;
  if (const char* dir = std::getenv(kConfigDirEnv); dir != nullptr && *dir != '\0') {
    auto candidate = std::filesystem::path(dir) / p;
    if (std::filesystem::exists(candidate)) return candidate;
  }
  return p;
}

Body make_body(const BodySpec& spec) {
  try {
    switch (spec.kind) {
      case BodyKind::Wire:
        return WireBody(spec.single.a, spec.single.mu);
      case BodyKind::Disk:
        return DiskBody(spec.single.a, spec.single.mu);
      case BodyKind::Annulus:
        return AnnulusBody(spec.single.a, spec.single.b, spec.single.mu);
      case BodyKind::Stack: {
        std::vector<AnnulusBody> members;
        for (const auto& m : spec.members) members.emplace_back(m.a, m.b, m.mu);
        return BodyStack(std::move(members));
      }
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid body: ") + e.what());
  }
  throw ConfigError("unknown body kind");
}

BodyStack make_stack(const BodySpec& spec) {
  Body body = make_body(spec);
  if (auto* s = std::get_if<BodyStack>(&body)) return *s;
  if (auto* a = std::get_if<AnnulusBody>(&body)) return BodyStack(*a);
  throw ConfigError("this command needs an annulus or a stack of annuli");
}

void resolve(RunConfig& cfg) {
  static const std::set<std::string> commands = {"eval", "portrait", "equilibria", "bifurcation",
                                                 "orbit"};
  if (!commands.contains(cfg.command)) throw ConfigError("unknown command '" + cfg.command + "'");
  require_positive(cfg.tolerances.rtol, "rtol");
  require_positive(cfg.tolerances.atol, "atol");
  if (cfg.tolerances.rtol <= ode::kMinRelativeTolerance)
    throw ConfigError("rtol must exceed " + format_double(ode::kMinRelativeTolerance));
  if (cfg.tolerances.max_steps == 0) throw ConfigError("max_steps must be positive");
  (void)make_body(cfg.body);

  if (cfg.command == "eval") {
    for (const auto& ax : cfg.eval.grid)
      if (!std::isfinite(ax.lo) || !std::isfinite(ax.hi) || ax.n == 0)
        throw ConfigError("grid axes need finite bounds and at least one point");
  }

  if (cfg.command == "portrait") {
    auto& p = cfg.portrait;
    if (p.mode != "axial" && p.mode != "planar")
      throw ConfigError("portrait mode must be 'axial' or 'planar'");
    if (p.lambda.empty()) throw ConfigError("portrait needs at least one lambda");
    for (double L : p.lambda)
      if (!(L >= 0.0) || !std::isfinite(L)) throw ConfigError("lambda must be non-negative");
    if (p.samples < 2) throw ConfigError("portrait needs at least two samples");
    if (p.levels.empty() && p.level_count == 0) throw ConfigError("portrait needs energy levels");
    const BodyStack stack = make_stack(cfg.body);
    if (!p.range) {
      const double a = stack.outer_radius();
      p.range = p.mode == "axial" ? std::array{-2.0 * a, 2.0 * a} : std::array{0.05 * a, 3.0 * a};
    }
    if (!((*p.range)[0] < (*p.range)[1])) throw ConfigError("portrait range needs lo < hi");
    if (p.mode == "planar" && !((*p.range)[0] > 0.0))
      throw ConfigError("planar portrait range must start at r > 0");
  }

  if (cfg.command == "equilibria") {
    auto& q = cfg.equilibria;
    if (q.lambda.empty()) throw ConfigError("equilibria needs at least one lambda");
    const BodyStack stack = make_stack(cfg.body);
    double lmax = 0.0;
    for (double L : q.lambda) {
      if (!(L >= 0.0) || !std::isfinite(L)) throw ConfigError("lambda must be non-negative");
      lmax = std::max(lmax, L);
    }
    if (!q.r_max)
      q.r_max = std::max(50.0 * stack.outer_radius(), 20.0 * lmax * lmax / stack.total_mu());
    if (!(*q.r_max > stack.outer_radius()))
      throw ConfigError("r_max must exceed the outermost plate radius");
  }

  if (cfg.command == "bifurcation") {
    (void)make_stack(cfg.body);
    const auto& [lo, hi] = cfg.bifurcation.bracket;
    if (!(lo >= 0.0) || !(hi > lo) || !std::isfinite(hi))
      throw ConfigError("bifurcation bracket needs 0 <= lo < hi");
    require_positive(cfg.bifurcation.tol, "tol");
  }

  if (cfg.command == "orbit") {
    (void)make_stack(cfg.body);
    for (double v : cfg.orbit.state)
      if (!std::isfinite(v)) throw ConfigError("orbit state must be finite");
    if (!std::isfinite(cfg.orbit.t_max) || cfg.orbit.t_max == 0.0)
      throw ConfigError("t_max must be finite and non-zero");
    if (!(cfg.orbit.dt >= 0.0) || !std::isfinite(cfg.orbit.dt))
      throw ConfigError("dt must be non-negative");
  }
}

}  // namespace annulus::cli
