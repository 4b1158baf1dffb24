#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "fixtures.hpp"
#include "marchenko/config.hpp"
#include "marchenko/errors.hpp"
#include "marchenko/runner.hpp"

using namespace marchenko;
using fixtures::I;
namespace fs = std::filesystem;

namespace {

const char* kSimple = R"({"command": "reflectionless",
  "plus": {"A": [[[0,1]]], "B": [[[1,0]]], "C": [[[2,0]]]},
  "minus": {"A": [[[0,-2]]], "B": [[[1,0]]], "C": [[[3,0]]]},
  "x_grid": {"min": -2, "max": 2, "count": 41}})";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("marchenko_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

const Column& column(const RunOutput& out, const std::string& name) {
  for (const auto& c : out.columns)
    if (c.name == name) return c;
  FAIL("missing column " << name);
  return out.columns.front();
}

// Runs the command-line binary; returns its exit status.
int run_cli(const std::string& args) {
  const char* exe = std::getenv("MARCHENKO_CLI");
  REQUIRE_MESSAGE(exe != nullptr, "MARCHENKO_CLI is not set");
  const std::string cmd = std::string(exe) + " " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

}  // namespace

TEST_CASE("parse_config: minimal config gets the defaults") {
  const auto c = parse_config_text(R"({"command": "reflectionless"})");
  CHECK(c.command == Command::reflectionless);
  CHECK(c.x_grid == GridSpec{-10, 10, 401});
  CHECK(c.format == OutputFormat::csv);
  CHECK(resolve(c.plus, Side::plus).size() == 0);
}

TEST_CASE("parse_config: unknown keys and bad values name the key") {
  try {
    parse_config_text(R"({"command": "reflectionless", "x_gird": {}})");
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK(e.key == "x_gird");
  }
  try {
    parse_config_text(R"({"command": "reflectionless", "plus": {"A": [[[0,1],[0,0]]], "B": [[[1,0]]], "C": [[[1,0]]]}})");
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK(e.key == "plus.A");
  }
  CHECK_THROWS_AS(parse_config_text(R"({"command": "nope"})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"command": "direct", "x_grid": {"min": 1, "max": 0, "count": 3}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"command": "direct", "tol": -1})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
}

TEST_CASE("parse_config: bound-state list assembles the Jordan triplet") {
  const auto c = parse_config_text(R"({"command": "reflectionless",
    "plus": [{"lambda": [0, 1], "multiplicity": 2, "norming": [[2, 0], [3, 0]]}]})");
  CHECK(resolve(c.plus, Side::plus) == fixtures::double_pair().plus);
}

TEST_CASE("property: parse(serialize(config)) == config") {
  RunConfig c;
  c.command = Command::marchenko;
  c.plus.form = fixtures::mixed_pair().plus;
  c.minus.form = std::vector<BoundStateSpec>{{-I, 1, {1.0}, Side::minus}, {-2.0 * I, 1, {cplx(4, 0.5)}, Side::minus}};
  c.reflection_plus = RationalProfile{{{cplx(0.1, 0.2), -I, 1}, {0.3, cplx(1, -2), 2}}};
  c.reflection_minus = GaussianProfile{cplx(0.5, -0.25), 2.0, 0.1};
  c.x_grid = {-1.5, 2.25, 7};
  c.zeta_grid = {0.1, 0.9, 3};
  c.numeric = {120, 15.5, GridRule::boole};
  c.bound_state_search = true;
  c.probes = {-5, 0.125};
  c.tol = 3e-9;
  c.threads = 2;
  c.format = OutputFormat::json;
  c.out = "some/dir";
  c.name = "run one";
  CHECK(parse_config_text(serialize(c)) == c);

  RunConfig d;
  d.command = Command::direct;
  d.field = FieldSamples{-3.0, 0.1, {cplx(0.1, 0.3), cplx(1.0 / 3.0, 0), 0.0, 0.0},
                        {cplx(-2, 0.7), cplx(0, 1e-300), 0.0, cplx(0, -1)}};
  d.reflection_plus = SampledProfile{-2.0, 0.5, {cplx(0.1, 0), cplx(0.2, 0.1), cplx(0.3, 0)}};
  CHECK(parse_config_text(serialize(d)) == d);
}

TEST_CASE("execute: empty triplets give zero potentials and mu = 0") {
  const auto out = execute(parse_config_text(R"({"command": "reflectionless", "x_grid": {"min": -1, "max": 1, "count": 5}})"));
  for (const auto* name : {"re_q", "im_q", "abs_q", "re_r", "im_r", "abs_r"})
    for (double v : column(out, name).numbers) CHECK(v == 0.0);
  const auto meta = nlohmann::json::parse(out.metadata_json);
  CHECK(meta["mu"][0].get<double>() == 0.0);
  CHECK(meta["mu"][1].get<double>() == 0.0);
}

TEST_CASE("execute: simple_pair reflectionless columns and metadata") {
  const auto out = execute(parse_config_text(kSimple));
  const auto& x = column(out, "x").numbers;
  const auto& aq = column(out, "abs_q").numbers;
  REQUIRE(x.size() == 41);
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(std::abs(aq[k] - std::abs(fixtures::simple_q(x[k]))) < 1e-9);
  const auto meta = nlohmann::json::parse(out.metadata_json);
  const cplx mu{meta["mu_principal"][0].get<double>(), meta["mu_principal"][1].get<double>()};
  CHECK(std::abs(mu - fixtures::simple_mu()) < 1e-8);
}

TEST_CASE("run: csv and json outputs, deterministic bytes") {
  auto c = parse_config_text(kSimple);
  c.out = scratch("det").string();
  c.name = "a";
  REQUIRE(run(c).status == 0);
  c.name = "b";
  REQUIRE(run(c).status == 0);
  const fs::path dir(c.out);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.metadata.json") == slurp(dir / "b.metadata.json"));
  const std::string csv = slurp(dir / "a.csv");
  CHECK(csv.rfind("x,re_q,im_q,abs_q,re_r,im_r,abs_r\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 42);

  c.format = OutputFormat::json;
  c.name = "j";
  REQUIRE(run(c).status == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "j.json"));
  CHECK(j.contains("metadata"));
  CHECK(j["columns"]["abs_q"].size() == 41);
}

TEST_CASE("run: exit statuses for validation and numerical failures") {
  auto bad = parse_config_text(R"({"command": "reflectionless", "plus": {"A": [[[0,-1]]], "B": [[[1,0]]], "C": [[[1,0]]]}})");
  bad.out = scratch("bad").string();
  CHECK(run(bad).status == 1);
  // Gamma(x) = 1 - e^{-6x} vanishes at x = 0, which is on the grid.
  auto singular = parse_config_text(R"({"command": "reflectionless",
    "plus": {"A": [[[0,1]]], "B": [[[1,0]]], "C": [[[1,0]]]},
    "minus": {"A": [[[0,-2]]], "B": [[[1,0]]], "C": [[[0,4.5]]]},
    "x_grid": {"min": -1, "max": 1, "count": 3}})");
  singular.out = bad.out;
  CHECK(run(singular).status == 2);
}

TEST_CASE("format_number: 17 significant digits and special values") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(-2.0) == "-2");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(-HUGE_VAL) == "-inf");
}

TEST_CASE("command line: overrides, exit codes and the verify report") {
  const fs::path dir = scratch("proc");
  write_file(dir / "simple.json", kSimple);
  CHECK(run_cli("--config " + (dir / "simple.json").string() + " --out " + dir.string() + " --format json") == 0);
  CHECK(fs::exists(dir / "reflectionless.json"));

  CHECK(run_cli("--out " + dir.string()) == 1);  // --config is required
  CHECK(run_cli("--config " + (dir / "missing.json").string()) == 1);
  write_file(dir / "unknown.json", R"({"command": "direct", "colour": 1})");
  CHECK(run_cli("--config " + (dir / "unknown.json").string() + " --out " + dir.string()) == 1);
  CHECK(run_cli("--config " + (dir / "simple.json").string() + " --format xml") == 1);

  write_file(dir / "verify.json", R"({"command": "verify",
    "plus": {"A": [[[0,1],[1,0],[0,0]], [[0,0],[0,1],[1,0]], [[0,0],[0,0],[0,1]]], "B": [[[0,0]],[[0,0]],[[1,0]]], "C": [[[1,0],[1,0],[1,0]]]},
    "minus": {"A": [[[0,-1],[1,0]], [[0,0],[0,-1]]], "B": [[[0,0]],[[1,0]]], "C": [[[1,0],[1,0]]]},
    "probes": [-5], "x_grid": {"min": -3, "max": 3, "count": 13}})");
  CHECK(run_cli("--config " + (dir / "verify.json").string() + " --out " + dir.string() + " --threads 1") == 0);
  const std::string report = slurp(dir / "verify.csv");
  CHECK(report.find("abs_r(-5)") != std::string::npos);
  CHECK(slurp(dir / "verify.metadata.json").find("Schwartz") != std::string::npos);
}
