#include "annulus/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "annulus/cli/format.hpp"
#include "annulus/cli/parallel.hpp"
#include "annulus/dynamics.hpp"
#include "annulus/equilibria.hpp"
#include "annulus/potential.hpp"

#ifndef ANNULUS_DYN_VERSION
#define ANNULUS_DYN_VERSION "unknown"
#endif

namespace annulus::cli {

using nlohmann::json;
namespace fs = std::filesystem;
namespace dyn = annulus::dynamics;
namespace eq = annulus::equilibria;

std::string version() { return ANNULUS_DYN_VERSION; }

namespace {

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  return fs::path(p.string() + suffix);
}

// Writes to a file when a path is given, otherwise to the console.
class Sink {
 public:
  Sink(const std::optional<fs::path>& path, std::ostream& console) : os_(&console) {
    if (path) {
      file_.open(*path, std::ios::binary | std::ios::trunc);
      if (!file_) throw ConfigError("cannot open output file " + path->string());
      os_ = &file_;
    }
  }
  std::ostream& stream() { return *os_; }
  void close() {
    os_->flush();
    if (file_.is_open()) {
      file_.close();
      if (file_.fail()) throw ConfigError("failed writing output file");
    }
    if (!*os_) throw ConfigError("failed writing output");
  }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

std::string describe(const AnnulusSpec& s, bool with_b) {
  std::string out = "a=" + format_double(s.a);
  if (with_b) out += " b=" + format_double(s.b);
  return out + " mu=" + format_double(s.mu);
}

std::string describe(const BodySpec& b) {
  std::string out(to_string(b.kind));
  if (b.kind != BodyKind::Stack) return out + " " + describe(b.single, b.kind == BodyKind::Annulus);
  for (std::size_t i = 0; i < b.members.size(); ++i)
    out += (i == 0 ? " [" : "; ") + describe(b.members[i], true);
  return out + "]";
}

Metadata base_metadata(const Invocation& inv) {
  const auto& cfg = inv.config;
  Metadata m;
  m.add("annulus-dyn", version());
  m.add("command", inv.command_line);
  m.add("body", describe(cfg.body));
  m.add("tolerances",
        "rtol=" + format_double(cfg.tolerances.rtol) + " atol=" + format_double(cfg.tolerances.atol) +
            " max_steps=" + std::to_string(cfg.tolerances.max_steps));
  return m;
}

void write_resolved_config(const Invocation& inv) {
  if (!inv.out) return;
  Sink sink(with_suffix(*inv.out, ".config.json"), std::cout);
  sink.stream() << to_json(inv.config).dump(2) << '\n';
  sink.close();
}

void write_json_result(const Invocation& inv, std::ostream& console, json result) {
  json doc = {{"version", version()},
              {"command", inv.command_line},
              {"body", to_json(inv.config)["body"]},
              {"result", std::move(result)}};
  Sink sink(inv.out, console);
  sink.stream() << doc.dump(2) << '\n';
  sink.close();
}

// ---------------------------------------------------------------- eval

void cmd_eval(const Invocation& inv, std::ostream& console) {
  const auto& cfg = inv.config;
  const Body body = make_body(cfg.body);
  const auto& [gx, gy, gz] = cfg.eval.grid;
  const std::size_t n = gx.n * gy.n * gz.n;
  std::vector<std::string> rows(n);

  parallel_for(n, inv.threads, [&](std::size_t i) {
    const double x = gx.at(i % gx.n);
    const double y = gy.at((i / gx.n) % gy.n);
    const double z = gz.at(i / (gx.n * gy.n));
    const auto s = potential::sample_field(body, make_point(x, y, z));
    std::string flags;
    if (s.on_edge) flags = "edge";
    if (s.on_plate) flags = "plate";
    std::vector<std::string> cells = {format_double(x), format_double(y), format_double(z),
                                      format_optional(s.U)};
    for (int k = 0; k < 3; ++k)
      cells.push_back(s.grad ? format_double((*s.grad)[k]) : std::string());
    cells.push_back(flags);
    std::ostringstream line;
    write_row(line, cells);
    rows[i] = line.str();
  });

  Metadata meta = base_metadata(inv);
  meta.add("grid", "x=" + format_axis(gx) + " y=" + format_axis(gy) + " z=" + format_axis(gz));
  Sink sink(inv.out, console);
  meta.write(sink.stream());
  write_row(sink.stream(), {"x", "y", "z", "U", "Ux", "Uy", "Uz", "flags"});
  for (const auto& r : rows) sink.stream() << r;
  sink.close();
  write_resolved_config(inv);
}

// ---------------------------------------------------------------- portrait

std::vector<double> auto_levels(std::size_t count, double lo, double hi) {
  std::vector<double> out;
  for (std::size_t k = 1; k <= count; ++k)
    out.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count + 1));
  return out;
}

std::vector<double> portrait_levels(const BodyStack& stack, const PortraitConfig& p, double Lambda) {
  if (!p.levels.empty()) return p.levels;
  const auto [lo, hi] = *p.range;
  if (p.mode == "axial") {
    const double bottom = potential::stack_axis_potential(stack, 0.0);
    const double top = std::min(potential::stack_axis_potential(stack, lo),
                                potential::stack_axis_potential(stack, hi));
    return auto_levels(p.level_count, bottom, top);
  }
  const auto curve = dyn::sample_effective_potential(stack, Lambda, lo, hi, p.samples);
  double wmin = std::numeric_limits<double>::infinity();
  double wmax = -wmin;
  for (double w : curve.W) {
    if (!std::isfinite(w)) continue;
    wmin = std::min(wmin, w);
    wmax = std::max(wmax, w);
  }
  if (!(wmax > wmin)) throw DomainError("effective potential is flat on the portrait range");
  return auto_levels(p.level_count, wmin, wmax);
}

void cmd_portrait(const Invocation& inv, std::ostream&) {
  const auto& cfg = inv.config;
  const auto& p = cfg.portrait;
  if (!inv.out) throw ConfigError("portrait writes several files and needs --out");
  const BodyStack stack = make_stack(cfg.body);
  const bool axial = p.mode == "axial";
  const std::vector<double> lambdas = axial ? std::vector<double>{0.0} : p.lambda;

  struct Job {
    std::size_t lambda_index;
    double Lambda;
    std::size_t level_index;
    double energy;
  };
  std::vector<Job> jobs;
  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    const auto levels = portrait_levels(stack, p, lambdas[li]);
    for (std::size_t k = 0; k < levels.size(); ++k) jobs.push_back({li, lambdas[li], k, levels[k]});
  }

  std::vector<dyn::PortraitCurve> curves(jobs.size());
  parallel_for(jobs.size(), inv.threads, [&](std::size_t i) {
    dyn::PortraitRequest req;
    req.mode = axial ? dyn::PortraitMode::Axial : dyn::PortraitMode::Planar;
    req.Lambda = jobs[i].Lambda;
    req.lo = (*p.range)[0];
    req.hi = (*p.range)[1];
    req.samples = p.samples;
    req.levels = {jobs[i].energy};
    curves[i] = dyn::phase_portrait(stack, req).front();
  });

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    std::string suffix = ".level" + std::to_string(jobs[i].level_index) + ".csv";
    if (!axial) suffix = ".lambda" + std::to_string(jobs[i].lambda_index) + suffix;
    Metadata meta = base_metadata(inv);
    meta.add("mode", p.mode);
    if (!axial) meta.add("lambda", format_double(jobs[i].Lambda));
    meta.add("energy", format_double(jobs[i].energy));
    meta.add("range", format_double((*p.range)[0]) + ":" + format_double((*p.range)[1]));
    Sink sink(with_suffix(*inv.out, suffix), std::cout);
    meta.write(sink.stream());
    write_row(sink.stream(), axial ? std::vector<std::string>{"branch", "z", "zdot"}
                                   : std::vector<std::string>{"branch", "r", "rdot"});
    const auto& branches = curves[i].branches;
    for (std::size_t b = 0; b < branches.size(); ++b)
      for (const auto& [q, v] : branches[b])
        write_row(sink.stream(), {std::to_string(b), format_double(q), format_double(v)});
    sink.close();
  }

  if (p.emit_wprime) {
    const double a = stack.outer_radius();
    const double lo = axial ? 0.05 * a : (*p.range)[0];
    const double hi = axial ? 3.0 * a : (*p.range)[1];
    std::vector<dyn::EffectivePotentialCurve> wcurves(p.lambda.size());
    parallel_for(p.lambda.size(), inv.threads, [&](std::size_t i) {
      wcurves[i] = dyn::sample_effective_potential(stack, p.lambda[i], lo, hi, p.samples);
    });
    Metadata meta = base_metadata(inv);
    meta.add("range", format_double(lo) + ":" + format_double(hi));
    Sink sink(with_suffix(*inv.out, ".wprime.csv"), std::cout);
    meta.write(sink.stream());
    write_row(sink.stream(), {"Lambda", "r", "W", "Wprime"});
    for (const auto& c : wcurves)
      for (std::size_t k = 0; k < c.r.size(); ++k)
        write_row(sink.stream(), {format_double(c.Lambda), format_double(c.r[k]),
                                  format_double(c.W[k]), format_double(c.Wp[k])});
    sink.close();
  }
  write_resolved_config(inv);
}

// ---------------------------------------------------------------- equilibria

json complex_list(const std::vector<std::complex<double>>& v) {
  json out = json::array();
  for (const auto& z : v) out.push_back({z.real(), z.imag()});
  return out;
}

json monodromy_json(const BodyStack& stack, const eq::EquilibriumReport& rep) {
  try {
    const auto m = eq::circular_orbit_monodromy(stack, rep.r0, rep.Lambda);
    return {{"period", m.period},
            {"eigenvalues", complex_list(m.eigenvalues)},
            {"log_moduli", m.log_moduli},
            {"determinant", m.determinant},
            {"segments", m.segments},
            {"verdict", m.spectrally_stable ? "spectrally-stable" : "unstable"}};
  } catch (const Error& e) {
    return {{"error", e.what()}};
  }
}

json report_json(const eq::EquilibriumReport& rep) {
  json j = {{"r0", rep.r0},
            {"Lambda", rep.Lambda},
            {"residual", rep.residual},
            {"curvature", rep.curvature},
            {"kind", std::string(eq::to_string(rep.kind))},
            {"region", std::string(eq::to_string(rep.region))},
            {"eigenvalues", complex_list(rep.eigenvalues)},
            {"method", rep.method}};
  j["bracket"] = rep.bracket ? json{rep.bracket->first, rep.bracket->second} : json(nullptr);
  return j;
}

void cmd_equilibria(const Invocation& inv, std::ostream& console) {
  const auto& q = inv.config.equilibria;
  const BodyStack stack = make_stack(inv.config.body);
  std::vector<json> results(q.lambda.size());
  parallel_for(q.lambda.size(), inv.threads, [&](std::size_t i) {
    const auto reports = eq::find_planar_critical_points(stack, q.lambda[i], *q.r_max);
    json points = json::array();
    for (const auto& rep : reports) {
      json j = report_json(rep);
      if (q.monodromy && rep.Lambda > 0.0 && rep.region != eq::Region::PlateInterior)
        j["monodromy"] = monodromy_json(stack, rep);
      points.push_back(std::move(j));
    }
    results[i] = {{"Lambda", q.lambda[i]}, {"r_max", *q.r_max}, {"critical_points", points}};
  });
  write_json_result(inv, console, results);
  write_resolved_config(inv);
}

// ---------------------------------------------------------------- bifurcation

void cmd_bifurcation(const Invocation& inv, std::ostream& console) {
  const auto& b = inv.config.bifurcation;
  const BodyStack stack = make_stack(inv.config.body);
  const auto res = eq::bifurcation_lambda(stack, b.bracket[0], b.bracket[1], b.tol);
  json j = {{"lambda_star", res.lambda_star},
            {"bracket", {res.bracket.first, res.bracket.second}},
            {"count_low", res.count_low},
            {"count_high", res.count_high}};
  j["lambda_sufficient"] = res.lambda_sufficient ? json(*res.lambda_sufficient) : json(nullptr);
  write_json_result(inv, console, j);
  write_resolved_config(inv);
}

// ---------------------------------------------------------------- orbit

void cmd_orbit(const Invocation& inv, std::ostream& console) {
  const auto& cfg = inv.config;
  const BodyStack stack = make_stack(cfg.body);
  const auto s0 = dyn::CartesianState::from_array(cfg.orbit.state);
  dyn::IntegrationOptions opt;
  opt.ode.rtol = cfg.tolerances.rtol;
  opt.ode.atol = cfg.tolerances.atol;
  opt.ode.max_steps = cfg.tolerances.max_steps;
  opt.sample_dt = cfg.orbit.dt;
  const auto traj = dyn::integrate(stack, s0, cfg.orbit.t_max, opt);

  Metadata meta = base_metadata(inv);
  meta.add("termination", std::string(dyn::to_string(traj.termination)));
  if (traj.event) meta.add("event_time", format_double(traj.event->t));
  meta.add("steps", std::to_string(traj.steps));

  Sink sink(inv.out, console);
  meta.write(sink.stream());
  write_row(sink.stream(), {"t", "x", "y", "z", "vx", "vy", "vz", "E", "Lz"});
  for (const auto& smp : traj.samples) {
    const auto& s = smp.state;
    write_row(sink.stream(),
              {format_double(smp.t), format_double(s.x), format_double(s.y), format_double(s.z),
               format_double(s.vx), format_double(s.vy), format_double(s.vz),
               format_double(dyn::energy(stack, s)), format_double(s.angular_momentum())});
  }
  sink.close();
  write_resolved_config(inv);
}

}  // namespace

void run(const Invocation& inv, std::ostream& console) {
  const auto& c = inv.config.command;
  if (c == "eval") return cmd_eval(inv, console);
  if (c == "portrait") return cmd_portrait(inv, console);
  if (c == "equilibria") return cmd_equilibria(inv, console);
  if (c == "bifurcation") return cmd_bifurcation(inv, console);
  if (c == "orbit") return cmd_orbit(inv, console);
  throw ConfigError("unknown command '" + c + "'");
}

}  // namespace annulus::cli
