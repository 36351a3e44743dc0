// annulus-dyn: field tables, phase portraits, equilibria, bifurcation
// search and orbits for annular disks.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "annulus/cli/commands.hpp"
#include "annulus/cli/config.hpp"
#include "annulus/cli/format.hpp"

namespace fs = std::filesystem;
using namespace annulus;
using namespace annulus::cli;

namespace {

struct Flags {
  std::string config;
  std::string out;
  unsigned threads = 1;
  std::string body;
  std::optional<double> a, b, mu, rtol, atol;
  std::optional<std::size_t> max_steps;
  std::vector<std::string> annuli;
  // eval
  std::vector<std::string> grid;
  // portrait, equilibria
  std::string mode;
  std::vector<std::string> lambda;
  std::vector<std::string> levels;
  std::optional<std::size_t> level_count, samples;
  std::string range;
  bool emit_wprime = false;
  std::optional<double> r_max;
  bool monodromy = false;
  // bifurcation
  std::vector<double> bracket;
  std::optional<double> tol;
  // orbit
  std::string state;
  std::optional<double> t_max, dt;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "Configuration file (JSON)");
  sub->add_option("--out", f.out, "Output path; stdout when omitted");
  sub->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--body", f.body, "wire | disk | annulus | stack");
  sub->add_option("--a", f.a, "Outer radius");
  sub->add_option("--b", f.b, "Inner radius");
  sub->add_option("--mu", f.mu, "G times mass");
  sub->add_option("--annulus", f.annuli, "Stack member 'a,b,mu' (repeatable)")->take_all();
  sub->add_option("--rtol", f.rtol, "Relative integration tolerance");
  sub->add_option("--atol", f.atol, "Absolute integration tolerance");
  sub->add_option("--max-steps", f.max_steps, "Integrator step budget");
}

std::vector<double> parse_lists(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items)
    for (double v : parse_double_list(s)) out.push_back(v);
  return out;
}

void apply_flags(RunConfig& cfg, const Flags& f, const std::string& command) {
  cfg.command = command;
  if (!f.body.empty()) cfg.body.kind = parse_body_kind(f.body);
  if (f.a) cfg.body.single.a = *f.a;
  if (f.b) cfg.body.single.b = *f.b;
  if (f.mu) cfg.body.single.mu = *f.mu;
  if (!f.annuli.empty()) {
    cfg.body.kind = BodyKind::Stack;
    cfg.body.members.clear();
    for (const auto& s : f.annuli) {
      const auto v = parse_double_list(s);
      if (v.size() != 3) throw ConfigError("--annulus expects 'a,b,mu', got '" + s + "'");
      cfg.body.members.push_back({v[0], v[1], v[2]});
    }
  }
  if (f.rtol) cfg.tolerances.rtol = *f.rtol;
  if (f.atol) cfg.tolerances.atol = *f.atol;
  if (f.max_steps) cfg.tolerances.max_steps = *f.max_steps;

  for (const auto& item : f.grid) {
    const auto eq = item.find('=');
    const std::string name = eq == std::string::npos ? "" : item.substr(0, eq);
    const int axis = name == "x" ? 0 : name == "y" ? 1 : name == "z" ? 2 : -1;
    if (axis < 0) throw ConfigError("grid items look like x=lo:hi:n, got '" + item + "'");
    cfg.eval.grid[axis] = parse_axis(item.substr(eq + 1));
  }

  if (!f.mode.empty()) cfg.portrait.mode = f.mode;
  if (!f.lambda.empty()) {
    const auto values = parse_lists(f.lambda);
    cfg.portrait.lambda = values;
    cfg.equilibria.lambda = values;
  }
  if (!f.levels.empty()) cfg.portrait.levels = parse_lists(f.levels);
  if (f.level_count) cfg.portrait.level_count = *f.level_count;
  if (f.samples) cfg.portrait.samples = *f.samples;
  if (!f.range.empty()) {
    const auto ax = f.range.find(':');
    if (ax == std::string::npos) throw ConfigError("--range expects lo:hi");
    cfg.portrait.range = std::array{parse_double(f.range.substr(0, ax)),
                                    parse_double(f.range.substr(ax + 1))};
  }
  if (f.emit_wprime) cfg.portrait.emit_wprime = true;
  if (f.r_max) cfg.equilibria.r_max = *f.r_max;
  if (f.monodromy) cfg.equilibria.monodromy = true;

  if (!f.bracket.empty()) cfg.bifurcation.bracket = {f.bracket[0], f.bracket[1]};
  if (f.tol) cfg.bifurcation.tol = *f.tol;

  if (!f.state.empty()) {
    const auto v = parse_double_list(f.state);
    if (v.size() != 6) throw ConfigError("--state expects x,y,z,vx,vy,vz");
    std::copy(v.begin(), v.end(), cfg.orbit.state.begin());
  }
  if (f.t_max) cfg.orbit.t_max = *f.t_max;
  if (f.dt) cfg.orbit.dt = *f.dt;
}

// The recorded command line leaves out flags that do not affect the data.
std::string recorded_command_line(int argc, char** argv) {
  std::string out;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--out" || arg == "--threads") {
      ++i;
      continue;
    }
    if (arg.starts_with("--out=") || arg.starts_with("--threads=")) continue;
    if (!out.empty()) out += ' ';
    out += arg;
  }
  return out;
}

int fail(int code, std::string_view kind, const std::string& message,
         nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json rec = {{"exit_code", code}, {"kind", kind}, {"message", message}};
  rec.update(extra);
  std::cerr << nlohmann::json{{"error", rec}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Potential and dynamics of homogeneous annular disks", "annulus-dyn"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  Flags f;

  auto* eval = app.add_subcommand("eval", "Tabulate U and its gradient on a grid");
  auto* portrait = app.add_subcommand("portrait", "Phase-portrait level curves");
  auto* equilibria = app.add_subcommand("equilibria", "Critical points of the effective potential");
  auto* bifurcation = app.add_subcommand("bifurcation", "Circular-orbit bifurcation value");
  auto* orbit = app.add_subcommand("orbit", "Propagate a test particle");
  for (auto* sub : {eval, portrait, equilibria, bifurcation, orbit}) add_common(sub, f);

  eval->add_option("--grid,--line", f.grid, "Axis specs x=lo:hi:n y=... z=...")->expected(1, 3);

  portrait->add_option("--mode", f.mode, "axial | planar");
  portrait->add_option("--lambda", f.lambda, "Angular momenta (comma list)");
  portrait->add_option("--levels", f.levels, "Energy levels (comma list)");
  portrait->add_option("--level-count", f.level_count, "Number of automatic levels");
  portrait->add_option("--range", f.range, "Coordinate range lo:hi");
  portrait->add_option("--samples", f.samples, "Points per curve");
  portrait->add_flag("--emit-wprime", f.emit_wprime, "Also write W and W' curves");

  equilibria->add_option("--lambda", f.lambda, "Angular momenta (comma list)");
  equilibria->add_option("--rmax", f.r_max, "Outer scan radius");
  equilibria->add_flag("--monodromy", f.monodromy, "Monodromy verdict for each circular orbit");

  bifurcation->add_option("--bracket", f.bracket, "Lambda bracket lo hi")->expected(2);
  bifurcation->add_option("--tol", f.tol, "Bracket width");

  orbit->add_option("--state", f.state, "Initial state x,y,z,vx,vy,vz");
  orbit->add_option("--tmax", f.t_max, "Final time");
  orbit->add_option("--dt", f.dt, "Sample spacing (0: every step)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kConfigError, "config-error", e.what());
  }

  try {
    Invocation inv;
    RunConfig& cfg = inv.config;
    if (f.config.empty()) {
      if (const char* dir = std::getenv(kConfigDirEnv); dir != nullptr && *dir != '\0') {
        const fs::path def = fs::path(dir) / kDefaultConfigName;
        if (fs::exists(def)) load_file(cfg, def);
      }
    } else {
      load_file(cfg, resolve_config_path(f.config));
    }
    apply_flags(cfg, f, app.get_subcommands().front()->get_name());
    resolve(cfg);
    if (!f.out.empty()) inv.out = fs::path(f.out);
    inv.threads = f.threads;
    inv.command_line = recorded_command_line(argc, argv);
    run(inv, std::cout);
    return kOk;
  } catch (const ConfigError& e) {
    return fail(kConfigError, "config-error", e.what());
  } catch (const FieldDiscontinuityError& e) {
    return fail(kDomainError, "domain-error", e.what(), {{"normal_jump", e.normal_jump()}});
  } catch (const DomainError& e) {
    return fail(kDomainError, "domain-error", e.what());
  } catch (const IntegrationFailure& e) {
    return fail(kConvergenceError, "convergence-error", e.what(), {{"last_time", e.last_time()}});
  } catch (const ConvergenceError& e) {
    return fail(kConvergenceError, "convergence-error", e.what());
  } catch (const std::exception& e) {
    return fail(kConfigError, "config-error", e.what());
  }
}
