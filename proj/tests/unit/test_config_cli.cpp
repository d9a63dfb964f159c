#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "lipgeo/cli.hpp"
#include "lipgeo/config.hpp"
#include "lipgeo/errors.hpp"

using namespace lipgeo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("lipgeo-test-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct CliResult {
  int code;
  std::string out, err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

ErrorKind kind_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::domain;
}

std::string message_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const auto cfg = parse_run_config(R"({"metric": "flat", "x0": [0, 0], "v0": [1, 2], "tspan": [0, 3]})");
  CHECK(cfg.metric == "flat");
  CHECK(cfg.integrator.rel_tol == 1e-10);
  CHECK(cfg.integrator.abs_tol == 1e-12);
  CHECK(cfg.integrator.event_tol == 1e-12);
  CHECK(std::isinf(cfg.integrator.max_step));
  CHECK(cfg.solver == SolverKind::filippov);
  CHECK(cfg.t1 == 3.0);
  CHECK(cfg.params.at("n") == 2.0);
}

TEST_CASE("config errors name the offending field") {
  const std::string typo = R"({"metrc": "flat", "x0": [0], "v0": [1], "tspan": [0, 1]})";
  CHECK(kind_of(typo) == ErrorKind::config);
  CHECK(message_of(typo).find("metrc") != std::string::npos);

  const std::string reversed = R"({"metric": "flat", "x0": [0, 0], "v0": [1, 0], "tspan": [2, 1]})";
  CHECK(kind_of(reversed) == ErrorKind::config);
  CHECK(message_of(reversed).find("tspan") != std::string::npos);

  const std::string nested =
      R"({"metric": "flat", "x0": [0, 0], "v0": [1, 0], "tspan": [0, 1], "tolerances": {"rel_tol": -1}})";
  CHECK(message_of(nested).find("tolerances.rel_tol") != std::string::npos);

  CHECK(kind_of(R"({"metric": "kink1d", "x0": [0, 0], "v0": [1], "tspan": [0, 1]})") == ErrorKind::config);
  CHECK(kind_of("{not json") == ErrorKind::config);
  CHECK(kind_of(R"({"metric": "flat", "x0": [0, 0], "v0": [1, 0]})") == ErrorKind::config);
}

TEST_CASE("config round trip") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < 100; ++k) {
    RunConfig c;
    c.metric = (k % 2) ? "kink1d" : "flat";
    c.params = (k % 2) ? Params{{"c", 0.5 + std::abs(u(rng))}} : Params{{"n", 2.0}, {"lorentzian", 1.0}};
    const std::size_t n = (k % 2) ? 1 : 2;
    for (std::size_t i = 0; i < n; ++i) {
      c.x0.push_back(u(rng));
      c.v0.push_back(u(rng));
    }
    c.t0 = u(rng);
    c.t1 = c.t0 + 0.1 + std::abs(u(rng));
    c.integrator.rel_tol = std::pow(10.0, -6 - k % 6);
    c.seed = rng();
    CHECK(parse_run_config(write_run_config(c)) == c);
  }
}

TEST_CASE("inline metric config") {
  const std::string text = R"({
    "metric": "inline",
    "inline_metric": {"signature": [1], "switch_coordinate": 0, "switch_offset": 0,
                      "components": [{"i": 0, "j": 0, "minus": [1, -0.5], "plus": [1, 0.5]}]},
    "x0": [-1], "v0": [1], "tspan": [0, 2]})";
  const auto cfg = parse_run_config(text);
  REQUIRE(cfg.inline_metric.has_value());
  const auto m = resolve_model(cfg);
  CHECK(m.surfaces.size() == 1);
  CHECK(parse_run_config(write_run_config(cfg)) == cfg);

  const std::string broken = R"({
    "metric": "inline",
    "inline_metric": {"signature": [1], "switch_coordinate": 0, "switch_offset": 0,
                      "components": [{"i": 0, "j": 0, "minus": [1, -0.5], "plus": [2, 0.5]}]},
    "x0": [-1], "v0": [1], "tspan": [0, 2]})";
  CHECK_THROWS_AS(resolve_model(parse_run_config(broken)), Error);
}

TEST_CASE("cli integrate writes the kink1d crossing") {
  TempDir dir;
  const auto out = dir.file("traj.csv");
  const auto r = run_cli({"integrate", "--metric", "kink1d", "--param", "c=1", "--x0", "-1", "--v0", "1",
                      "--tspan", "0", "2", "--out", out});
  REQUIRE(r.code == 0);
  std::ifstream in(out);
  std::string line, header;
  double best_dt = 1e9, x_at = 1e9;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header.empty()) {
      header = line;
      continue;
    }
    double t = 0, x = 0, v = 0;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &x, &v) == 3);
    if (std::abs(t - 0.632121) < best_dt) {
      best_dt = std::abs(t - 0.632121);
      x_at = x;
    }
  }
  CHECK(header == "t,x1,v1");
  CHECK(std::abs(x_at) < 1e-6);
  const auto events = nlohmann::json::parse(slurp(out + ".events.json"));
  CHECK(events["format_version"] == kFormatVersion);
  CHECK(events["events"].size() == 1);
  CHECK(events["config"]["metric"] == "kink1d");
}

TEST_CASE("cli compare on the rosen impulse") {
  const auto r = run_cli({"compare", "--metric", "rosen", "--scenario", "impulse-crossing", "--eps", "1e-3"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["max_dev_regularized"].get<double>() <= 1e-2);
  CHECK(j["max_dev_exact"].get<double>() <= 1e-6);
}

TEST_CASE("cli verify passes and catches a broken christoffel sign") {
  TempDir dir;
  const auto ok = run_cli({"verify", "--suite", "all", "--report", dir.file("report.json")});
  CHECK(ok.code == cli::kOk);
  CHECK(ok.out.find("FAIL") == std::string::npos);
  const auto rep = nlohmann::json::parse(slurp(dir.file("report.json")));
  CHECK(rep["pass"] == true);

  const auto bad = run_cli({"verify", "--suite", "all", "--inject-fault", "christoffel-sign"});
  CHECK(bad.code == cli::kVerifyFailure);
}

TEST_CASE("cli errors are single lines with the documented exit codes") {
  auto single_line = [](const std::string& s) {
    return !s.empty() && s.back() == '\n' && s.find('\n') == s.size() - 1;
  };
  const auto usage = run_cli({"integrate", "--bogus"});
  CHECK(usage.code == cli::kValidationError);
  CHECK(single_line(usage.err));

  const auto bad_param = run_cli({"integrate", "--metric", "kink1d", "--param", "c=-1", "--x0", "0.5", "--v0", "1",
                              "--tspan", "0", "1"});
  CHECK(bad_param.code == cli::kValidationError);
  CHECK(single_line(bad_param.err));

  const auto solver = run_cli({"integrate", "--metric", "rosen", "--x0", "0.5", "0", "0", "0", "--v0", "1", "0", "0",
                           "0", "--tspan", "0", "1"});
  CHECK(solver.code == cli::kSolverError);
  CHECK(single_line(solver.err));
  CHECK(solver.err.find("degeneracy") != std::string::npos);

  const auto missing = run_cli({"integrate", "--config", "/nonexistent/run.json"});
  CHECK(missing.code == cli::kValidationError);
}

TEST_CASE("cli outputs are reproducible") {
  TempDir dir;
  const std::vector<std::string> base{"sweep", "--metric", "kink1d", "--x0", "-1", "--v0", "1", "--tspan", "0", "2",
                                      "--vary-v", "0", "0.5", "1.5", "--count", "6"};
  auto with = [&](std::vector<std::string> extra) {
    auto a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  REQUIRE(run_cli(with({"--jobs", "1", "--out", dir.file("a.csv")})).code == 0);
  const std::string serial = slurp(dir.file("a.csv"));
  REQUIRE(run_cli(with({"--jobs", "4", "--out", dir.file("a.csv")})).code == 0);
  CHECK(slurp(dir.file("a.csv")) == serial);

  const std::vector<std::string> run{"integrate", "--metric", "conformal2d", "--x0", "-0.5", "0", "--v0", "1",
                                     "0.3", "--tspan", "0", "2"};
  auto r1 = run_cli(run), r2 = run_cli(run);
  CHECK(r1.code == 0);
  CHECK(r1.out == r2.out);
}

TEST_CASE("write_atomic leaves no temporary files") {
  TempDir dir;
  cli::write_atomic(dir.file("x.txt"), "hello\n");
  CHECK(slurp(dir.file("x.txt")) == "hello\n");
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir.path)) files += entry.is_regular_file();
  CHECK(files == 1);
  CHECK_THROWS_AS(cli::write_atomic("/nonexistent-dir/x.txt", "x"), Error);
}
