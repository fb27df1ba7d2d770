#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "xbound/cli.hpp"

using namespace xbound;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("xbound_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int invoke(std::vector<std::string> args, std::string* err = nullptr) {
  args.insert(args.begin(), "xbound");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream es;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), es);
  if (err) *err = es.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

io::json load(const fs::path& p) { return io::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("solve1d reproduces the even gamma = 2 tail phase") {
  TempDir d("solve1d");
  REQUIRE(invoke({"solve1d", "--gamma", "2", "--g", "0", "--energy", "0", "--parity", "even", "--L", "30", "--out",
                  d.path.string()}) == 0);
  const auto j = load(d.path / "solve1d.json");
  CHECK(j["tail_fit"]["chi0"].get<double>() == Approx(std::numbers::pi / 6).margin(0.1));
  CHECK(j["spec"]["gamma"].get<double>() == 2.0);
  CHECK(fs::exists(d.path / "solve1d.csv"));
  CHECK(fs::exists(d.path / "solve1d.manifest.json"));
  const auto m = load(d.path / "solve1d.manifest.json");
  CHECK(m["subcommand"] == "solve1d");
  CHECK(m["configuration"]["L"] == "30");
}

TEST_CASE("invalid configuration exits with 2") {
  TempDir d("invalid");
  std::string err;
  CHECK(invoke({"solve1d", "--gamma", "0.5", "--out", d.path.string()}, &err) == 2);
  CHECK(err.find("gamma") != std::string::npos);
  CHECK(invoke({"solve1d", "--bogus", "1", "--out", d.path.string()}, &err) == 2);
  CHECK_FALSE(err.empty());
  CHECK(invoke({"frobnicate"}, &err) == 2);
  CHECK(invoke({"solve1d", "--parity", "sideways", "--out", d.path.string()}) == 2);
}

TEST_CASE("numerical failures exit with 1 and leave a diagnostic") {
  TempDir d("numerical");
  CHECK(invoke({"solve1d", "--gamma", "2", "--g", "1", "--sigma", "2", "--amplitude", "3", "--L", "5", "--out",
                d.path.string()}) == 1);
  const auto j = load(d.path / "solve1d.json");
  CHECK(j["status"] == "numerical_failure");
  CHECK(j["where"].is_number());
  CHECK(fs::exists(d.path / "solve1d.manifest.json"));
}

TEST_CASE("repeated runs give byte-identical data") {
  TempDir a("repeat_a"), b("repeat_b");
  const std::vector<std::string> base{"solve1d", "--gamma", "1.5", "--energy", "0.3", "--parity", "odd", "--L", "12"};
  auto with = [&](const fs::path& p) {
    auto v = base;
    v.push_back("--out");
    v.push_back(p.string());
    return v;
  };
  REQUIRE(invoke(with(a.path)) == 0);
  REQUIRE(invoke(with(b.path)) == 0);
  CHECK(slurp(a.path / "solve1d.csv") == slurp(b.path / "solve1d.csv"));
  CHECK(slurp(a.path / "solve1d_norm.csv") == slurp(b.path / "solve1d_norm.csv"));
  const std::string csv = slurp(a.path / "solve1d.csv");
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(csv.rfind("x,phi\n", 0) == 0);
}

TEST_CASE("flags override config file values") {
  TempDir d("config");
  {
    std::ofstream cfg(d.path / "run.cfg");
    cfg << "# comment\ngamma = 2\nL = 9\nenergy = 0.5\n";
  }
  REQUIRE(invoke({"solve1d", "--config", (d.path / "run.cfg").string(), "--L", "11", "--out", d.path.string()}) == 0);
  const auto j = load(d.path / "solve1d.json");
  CHECK(j["spec"]["gamma"].get<double>() == 2.0);
  CHECK(j["spec"]["energy"].get<double>() == 0.5);
  CHECK(j["grid"]["extent"].get<double>() == 11.0);
  {
    std::ofstream cfg(d.path / "bad.cfg");
    cfg << "gamma 2\n";
  }
  CHECK(invoke({"solve1d", "--config", (d.path / "bad.cfg").string(), "--out", d.path.string()}) == 2);
}

TEST_CASE("ladder syntax") {
  const auto log = io::parse_ladder("-100:-10000:log:3");
  REQUIRE(log.size() == 3);
  CHECK(log[0] == Approx(-100));
  CHECK(log[1] == Approx(-1000));
  CHECK(log[2] == Approx(-10000));
  const auto lin = io::parse_ladder("0.2:0.4:lin:3");
  REQUIRE(lin.size() == 3);
  CHECK(lin[1] == Approx(0.3));
  CHECK(io::parse_ladder("1,2.5,4") == std::vector<double>{1, 2.5, 4});
  CHECK_THROWS_AS(io::parse_ladder("1:2:cubic:3"), ConfigError);
  CHECK_THROWS_AS(io::parse_ladder("1,x"), ConfigError);
}

TEST_CASE("exact objects") {
  TempDir d("exact");
  REQUIRE(invoke({"exact", "--object", "vortex", "--S", "2", "--out", d.path.string()}) == 0);
  CHECK(load(d.path / "exact.json")["norm"].get<double>() == Approx(1.392).margin(5e-4));
  REQUIRE(invoke({"exact", "--object", "vortex", "--S", "1", "--out", d.path.string()}) == 0);
  CHECK(load(d.path / "exact.json")["norm"] == "divergent");
  REQUIRE(invoke({"exact", "--object", "coupled", "--S", "1", "--lambda", "2", "--rmax", "6.5", "--points", "13001",
                  "--out", d.path.string()}) == 0);
  const auto c = load(d.path / "exact.json");
  CHECK(c["exact_energy"].get<double>() == 3.0);
  CHECK(c["max_abs_res_u"].get<double>() < 1e-8);
  REQUIRE(invoke({"exact", "--object", "nonlinear-vortex", "--S", "1", "--g", "1", "--out", d.path.string()}) == 0);
  CHECK(load(d.path / "exact.json")["phi0_squared"] == "no-solution");
  CHECK(invoke({"exact", "--object", "teapot", "--out", d.path.string()}) == 2);
}

TEST_CASE("fit-tail reads a state written by solve1d") {
  TempDir d("fit");
  REQUIRE(invoke({"solve1d", "--gamma", "2", "--parity", "odd", "--L", "25", "--out", d.path.string()}) == 0);
  REQUIRE(invoke({"fit-tail", "--gamma", "2", "--parity", "odd", "--state", (d.path / "solve1d.csv").string(), "--out",
                  d.path.string()}) == 0);
  CHECK(load(d.path / "fit-tail.json")["tail_fit"]["chi0"].get<double>() == Approx(std::numbers::pi / 3).margin(0.1));
}

TEST_CASE("verify passes") {
  TempDir d("verify");
  REQUIRE(invoke({"verify", "--out", d.path.string()}) == 0);
  const auto j = load(d.path / "verify.json");
  CHECK(j["pass"] == true);
  bool saw_kappa = false;
  for (const auto& row : j["coupled_kappa_sweep"])
    if (row["kappa"].get<double>() > 0.0) saw_kappa = row["max_abs_res_v"].get<double>() > 1e-3;
  CHECK(saw_kappa);
}
