#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "speclaw/cli.hpp"
#include "speclaw/io.hpp"

using namespace speclaw;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "speclaw_test_cli";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  return {std::istreambuf_iterator<char>(is), {}};
}

std::string last_line(const std::string& s) {
  auto end = s.find_last_not_of('\n');
  auto start = s.rfind('\n', end);
  return s.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1);
}

}  // namespace

TEST_CASE("density writes one CSV row per grid point") {
  const auto out = scratch("rho.csv");
  const auto r = run({"density", "--profile", R"({"n": 3, "constant": 1})", "--grid", "-3:3:600", "--out", out.string()});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(out);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 601);
  CHECK(r.out.rfind("mass=1 ", 0) == 0);
}

TEST_CASE("unknown flag gives usage and exit 1") {
  const auto r = run({"density", "--frobnicate"});
  CHECK(r.code == 1);
  CHECK(r.err.find("Usage") != std::string::npos);
  const auto record = json::parse(last_line(r.err));
  CHECK(record["error"] == "Config");
  CHECK(record["exit_code"] == 1);
  CHECK(run({}).code == 1);
  CHECK(run({"no-such-command"}).code == 1);
}

TEST_CASE("error records and exit codes") {
  auto r = run({"density", "--profile", scratch("absent.json").string()});
  CHECK(r.code == 1);
  CHECK(json::parse(last_line(r.err))["error"] == "Io");
  r = run({"density", "--profile", R"({"n": 2, "entries": [[1, 0.5], [0.2, 1]]})"});
  CHECK(r.code == 1);
  CHECK(json::parse(last_line(r.err))["error"] == "InvalidProfile");
  r = run({"density", "--profile", R"({"n": 2, "constant": 1})", "--grid", "3:-3:10"});
  CHECK(r.code == 1);
  r = run({"verify-local-law", "--ensemble", R"({"type": "wigner", "n": 50})", "--eps", "5"});
  CHECK(r.code == 2);
  CHECK(json::parse(last_line(r.err))["error"] == "EmptyBulk");
  CHECK(exit_code_for("NonConvergence") == 2);
  CHECK(exit_code_for("AssertionFailure") == 3);
}

TEST_CASE("qve-solve prints the solution") {
  const auto r = run({"qve-solve", "--profile", R"({"n": 4, "constant": 1})", "--eta", "2"});
  REQUIRE(r.code == 0);
  CHECK(last_line(r.out).rfind("m=0+0.414214i", 0) == 0);
  const auto j = json::parse(r.out.substr(0, r.out.rfind('}') + 1));
  CHECK(j["m"][1].get<double>() == doctest::Approx(0.41421356237309505).epsilon(1e-9));
}

TEST_CASE("local law from a config file is reproducible and re-parses") {
  const auto cfg = scratch("llaw.json");
  {
    std::ofstream os(cfg);
    os << R"({"ensemble": {"type": "wigner", "n": 300, "seed": 0}, "interval_length": 0.2, "trials": 3})";
  }
  const auto a = scratch("a.json"), b = scratch("b.json");
  auto r = run({"verify-local-law", "--config", cfg.string(), "--trials", "4", "--out", a.string(), "--threads", "2"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("pass_fraction=", 0) == 0);
  REQUIRE(run({"verify-local-law", "--config", cfg.string(), "--trials", "4", "--out", b.string()}).code == 0);
  CHECK(slurp(a) == slurp(b));
  const auto report = local_law_report_from_json(read_json_file(a));
  CHECK(report.trials == 4);
  CHECK(report_to_json(report).dump(2) + "\n" == slurp(a));
}

TEST_CASE("sample and spectrum") {
  const auto m = scratch("m.mtx");
  auto r = run({"sample", "--ensemble", R"({"type": "sparse", "p": 0.5, "base": {"type": "wigner", "n": 40}})",
                "--seed", "9", "--out", m.string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(m.string() + ".json"));
  const auto s = scratch("s.csv");
  r = run({"spectrum", "--matrix", m.string(), "--vectors", "--out", s.string()});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(s);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 41);
  CHECK(r.out.find("max_inf_norm=") != std::string::npos);
}

TEST_CASE("other campaign commands") {
  const std::string ens = R"({"type": "wigner", "n": 200})";
  auto r = run({"verify-stieltjes", "--ensemble", ens, "--trials", "2", "--eta-grid", "0.5,0.2"});
  CHECK(r.code == 0);
  CHECK(last_line(r.out).rfind("median_sup=", 0) == 0);
  r = run({"verify-deloc", "--ensemble", ens, "--trials", "2"});
  CHECK(r.code == 0);
  CHECK(last_line(r.out).rfind("max_ratio=", 0) == 0);
  r = run({"test-projection", "--n", "60", "--dim", "20", "--trials", "500"});
  CHECK(r.code == 0);
  CHECK(last_line(r.out).rfind("monotone=true", 0) == 0);
  r = run({"test-interlacing", "--trials", "10", "--n", "20"});
  CHECK(r.code == 0);
  CHECK(last_line(r.out).rfind("violations=0", 0) == 0);
}
