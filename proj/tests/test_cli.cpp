#include <doctest.h>

#include <atomic>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>
#include <unistd.h>

#include "annulus/cli/commands.hpp"
#include "annulus/cli/config.hpp"
#include "annulus/cli/format.hpp"
#include "annulus/cli/parallel.hpp"

using namespace annulus;
using namespace annulus::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("annulus-cli-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_exe(const std::string& args, const TempDir& dir, const std::string& env = "") {
  const fs::path out = dir.path / "stdout.txt";
  const fs::path err = dir.path / "stderr.txt";
  const std::string cmd = env + " '" + std::string(ANNULUS_DYN_EXE) + "' " + args + " >'" + out.string() +
                          "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("shortest round-trip formatting") {
  std::mt19937_64 rng(12345);
  int bad = 0;
  for (int i = 0; i < 20000; ++i) {
    const double v = std::bit_cast<double>(rng());
    if (!std::isfinite(v)) continue;
    if (parse_double(format_double(v)) != v) ++bad;
  }
  CHECK(bad == 0);
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.0) == "-2");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_optional(std::nullopt).empty());
  CHECK_THROWS_AS(parse_double("1.5x"), ConfigError);
  CHECK_THROWS_AS(parse_double(""), ConfigError);
  CHECK(parse_double_list("1,2.5,-3") == std::vector<double>{1.0, 2.5, -3.0});
}

TEST_CASE("axis specs") {
  const auto ax = parse_axis("-1:1:5");
  CHECK(ax.lo == -1.0);
  CHECK(ax.hi == 1.0);
  CHECK(ax.n == 5);
  CHECK(ax.at(0) == -1.0);
  CHECK(ax.at(4) == 1.0);
  CHECK(ax.at(2) == 0.0);
  const auto single = parse_axis("0.25");
  CHECK(single.n == 1);
  CHECK(single.at(0) == 0.25);
  CHECK(parse_axis(format_axis(ax)) == ax);
  CHECK_THROWS_AS(parse_axis("1:0"), ConfigError);
  CHECK_THROWS_AS(parse_axis("0:1:0"), ConfigError);
}

TEST_CASE("configuration round trip") {
  RunConfig cfg;
  cfg.command = "equilibria";
  cfg.body.kind = BodyKind::Stack;
  cfg.body.members = {{0.5, 0.3, 0.5}, {1.0, 0.75, 0.5}};
  cfg.eval.grid = {parse_axis("0:2:3"), parse_axis("0.1"), parse_axis("-1:1:4")};
  cfg.portrait.mode = "planar";
  cfg.portrait.lambda = {1.0, 2.5};
  cfg.portrait.levels = {-0.5, -0.25};
  cfg.portrait.range = std::array{0.1, 3.0};
  cfg.equilibria.lambda = {0.1, 1.0 / 3.0};
  cfg.equilibria.r_max = 75.0;
  cfg.equilibria.monodromy = true;
  cfg.bifurcation.bracket = {0.2, 3.0};
  cfg.orbit.state = {1.5, 0.1, 0.2, 0.3, 0.4, 0.5};
  cfg.tolerances.rtol = 1e-10;

  const auto j = to_json(cfg);
  const RunConfig back = from_json(j);
  CHECK(back == cfg);
  CHECK(to_json(back) == j);
  CHECK(from_json(nlohmann::json::parse(j.dump())) == cfg);
}

TEST_CASE("partial configurations merge over defaults") {
  RunConfig cfg;
  merge_json(cfg, nlohmann::json::parse(R"({"orbit": {"t_max": 5}, "body": {"kind": "disk"}})"));
  CHECK(cfg.orbit.t_max == 5.0);
  CHECK(cfg.orbit.dt == OrbitConfig{}.dt);
  CHECK(cfg.body.kind == BodyKind::Disk);
  merge_json(cfg, nlohmann::json::parse(R"({"equilibria": {"lambda": 3}})"));
  CHECK(cfg.equilibria.lambda == std::vector<double>{3.0});
  CHECK_THROWS_AS(merge_json(cfg, nlohmann::json::parse(R"({"orbit": {"tmax": 5}})")), ConfigError);
  CHECK_THROWS_AS(merge_json(cfg, nlohmann::json::parse(R"({"colour": 1})")), ConfigError);
  CHECK_THROWS_AS(merge_json(cfg, nlohmann::json::parse(R"({"orbit": {"t_max": "x"}})")), ConfigError);
}

TEST_CASE("resolution fills derived defaults") {
  RunConfig cfg;
  cfg.command = "equilibria";
  cfg.equilibria.lambda = {1.0, 4.0};
  resolve(cfg);
  REQUIRE(cfg.equilibria.r_max.has_value());
  CHECK(*cfg.equilibria.r_max == doctest::Approx(320.0));

  RunConfig p;
  p.command = "portrait";
  resolve(p);
  REQUIRE(p.portrait.range.has_value());
  CHECK((*p.portrait.range)[0] == -2.0);
  CHECK((*p.portrait.range)[1] == 2.0);

  RunConfig bad;
  bad.command = "orbit";
  bad.tolerances.rtol = -1.0;
  CHECK_THROWS_AS(resolve(bad), ConfigError);
  bad = {};
  bad.command = "nope";
  CHECK_THROWS_AS(resolve(bad), ConfigError);
}

TEST_CASE("bodies from configuration") {
  BodySpec spec;
  spec.kind = BodyKind::Wire;
  CHECK(std::holds_alternative<WireBody>(make_body(spec)));
  CHECK_THROWS_AS(make_stack(spec), ConfigError);
  spec.kind = BodyKind::Stack;
  spec.members = {{1.0, 0.75, 0.5}, {0.5, 0.3, 0.5}};
  const auto s = make_stack(spec);
  CHECK(s.size() == 2);
  CHECK(s[0].a() == 0.5);
  CHECK(parse_body_kind("annulus") == BodyKind::Annulus);
  CHECK(to_string(BodyKind::Disk) == "disk");
  CHECK_THROWS_AS(parse_body_kind("sphere"), ConfigError);
}

TEST_CASE("parallel_for is deterministic and reports the lowest failing index") {
  std::vector<double> serial(1000), threaded(1000);
  auto work = [](std::size_t i) { return std::sin(0.001 * static_cast<double>(i)) * 3.0; };
  parallel_for(serial.size(), 1, [&](std::size_t i) { serial[i] = work(i); });
  parallel_for(threaded.size(), 7, [&](std::size_t i) { threaded[i] = work(i); });
  CHECK(serial == threaded);

  std::atomic<int> visited = 0;
  try {
    parallel_for(100, 4, [&](std::size_t i) {
      ++visited;
      if (i == 37 || i == 81) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "37");
  }
  CHECK(visited == 100);
  parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("eval writes a CSV table through the library entry point") {
  Invocation inv;
  inv.config.command = "eval";
  inv.config.eval.grid = {parse_axis("0.5:1:5"), parse_axis("0"), parse_axis("0")};
  resolve(inv.config);
  std::ostringstream out;
  run(inv, out);
  const std::string text = out.str();
  CHECK(text.find("# annulus-dyn: " + version()) != std::string::npos);
  CHECK(text.find("x,y,z,U,Ux,Uy,Uz,flags") != std::string::npos);
  CHECK(text.find(",plate") != std::string::npos);
  CHECK(text.find(",edge") != std::string::npos);
}

TEST_CASE("command-line exit codes and error records") {
  TempDir dir;
  SUBCASE("success") {
    const auto r = run_exe("eval --grid x=0:2:3 y=0 z=0.5", dir);
    CHECK(r.code == 0);
    CHECK(r.out.find("x,y,z,U") != std::string::npos);
  }
  SUBCASE("unknown flag") {
    const auto r = run_exe("eval --bogus 1", dir);
    CHECK(r.code == 2);
    const auto j = nlohmann::json::parse(r.err);
    CHECK(j["error"]["exit_code"] == 2);
    CHECK(j["error"]["kind"] == "config-error");
  }
  SUBCASE("invalid body") {
    CHECK(run_exe("eval --grid x=1 --a 1 --b 2", dir).code == 2);
  }
  SUBCASE("orbit starting on the plate") {
    const auto r = run_exe("orbit --state 0.9,0,0,0,0,1 --tmax 1", dir);
    CHECK(r.code == 3);
    CHECK(nlohmann::json::parse(r.err)["error"]["kind"] == "domain-error");
  }
  SUBCASE("bracket without a change") {
    CHECK(run_exe("bifurcation --bracket 0.1 0.5", dir).code == 3);
  }
  SUBCASE("unreachable tolerance") {
    CHECK(run_exe("orbit --rtol 1e-30", dir).code == 2);
  }
  SUBCASE("integrator failure") {
    const auto r = run_exe("orbit --state 2,0,0.1,0,1,0 --tmax 10 --max-steps 20", dir);
    CHECK(r.code == 4);
    const auto j = nlohmann::json::parse(r.err);
    CHECK(j["error"].contains("last_time"));
  }
  SUBCASE("version") {
    const auto r = run_exe("--version", dir);
    CHECK(r.code == 0);
    CHECK(r.out.find(version()) != std::string::npos);
  }
}

TEST_CASE("configuration files: precedence and default directory") {
  TempDir dir;
  const fs::path cfg = dir.path / "run.json";
  std::ofstream(cfg) << R"({"orbit": {"t_max": 1, "dt": 0.5}})";
  const fs::path csv = dir.path / "orbit.csv";

  SUBCASE("file values are used and flags override them") {
    REQUIRE(run_exe("orbit --config '" + cfg.string() + "' --dt 0.25 --out '" + csv.string() + "'", dir).code == 0);
    const auto resolved = nlohmann::json::parse(slurp(fs::path(csv.string() + ".config.json")));
    CHECK(resolved["orbit"]["t_max"] == 1.0);
    CHECK(resolved["orbit"]["dt"] == 0.25);
    const std::string table = slurp(csv);
    CHECK(table.find("\n1,") != std::string::npos);
    CHECK(table.find("threads") == std::string::npos);
  }
  SUBCASE("the default file is found through the environment") {
    std::ofstream(dir.path / kDefaultConfigName) << R"({"orbit": {"t_max": 0.5, "dt": 0.5}})";
    const std::string env = std::string(kConfigDirEnv) + "='" + dir.path.string() + "'";
    const auto r = run_exe("orbit", dir, env);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("\n0.5,") != std::string::npos);
    CHECK(r.out.find("\n1,") == std::string::npos);
  }
  SUBCASE("a malformed file is a configuration error") {
    std::ofstream(dir.path / "broken.json") << "{not json";
    CHECK(run_exe("orbit --config '" + (dir.path / "broken.json").string() + "'", dir).code == 2);
    CHECK(run_exe("orbit --config '" + (dir.path / "missing.json").string() + "'", dir).code == 2);
  }
}

TEST_CASE("outputs do not depend on the thread count") {
  TempDir dir;
  const fs::path one = dir.path / "one";
  const fs::path four = dir.path / "four";
  const std::string args = "portrait --mode planar --lambda 1,2.5 --level-count 3 --samples 101 --emit-wprime";
  REQUIRE(run_exe(args + " --threads 1 --out '" + one.string() + "'", dir).code == 0);
  REQUIRE(run_exe(args + " --threads 4 --out '" + four.string() + "'", dir).code == 0);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir.path)) {
    const std::string name = entry.path().filename().string();
    if (!name.starts_with("one")) continue;
    const fs::path twin = dir.path / ("four" + name.substr(3));
    REQUIRE(fs::exists(twin));
    CHECK(slurp(entry.path()) == slurp(twin));
    ++files;
  }
  CHECK(files >= 7);
}

}  // TEST_SUITE
