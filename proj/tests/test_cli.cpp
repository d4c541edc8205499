// End-to-end tests driving the qyscheck binary through a shell.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

#ifndef QYS_CLI_PATH
#error "QYS_CLI_PATH must point at the qyscheck binary"
#endif

namespace {

struct RunResult {
  int code;
  std::string out;
};

RunResult run(const std::string& args, bool merge_stderr = false) {
  std::string cmd = std::string(QYS_CLI_PATH) + " " + args +
                    (merge_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = pclose(pipe);
  return {WEXITSTATUS(status), std::move(out)};
}

std::string temp_path(const std::string& name) {
  return std::string("/tmp/qyscheck_test_") + name;
}

}  // namespace

TEST_CASE("check on a passing builtin exits 0 with a valid JSON report") {
  RunResult r = run("check gaussian-soliton -q");
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("scenario") == "gaussian-soliton");
  CHECK_FALSE(j.at("failed").get<bool>());
  CHECK(j.at("environment").at("tool_version") == "qyscheck 0.1.0");
  CHECK(j.at("checks").size() == 13);
}

TEST_CASE("repeated runs are byte-identical") {
  RunResult a = run("check line-exp-warped-witness -q");
  RunResult b = run("check line-exp-warped-witness -q");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(!a.out.empty());
}

TEST_CASE("strict mode turns a recorded audit gap into exit 1") {
  RunResult relaxed = run("check hyperbolic-halfspace -q");
  CHECK(relaxed.code == 0);
  RunResult strict = run("check hyperbolic-halfspace -q --strict");
  CHECK(strict.code == 1);
  auto j = nlohmann::json::parse(strict.out);
  CHECK(j.at("failed").get<bool>());
}

TEST_CASE("csv format") {
  RunResult r = run("check euclidean-3 -q --format csv");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("check,point,residual,tolerance,verdict\n", 0) == 0);
}

TEST_CASE("report file output") {
  std::string path = temp_path("report.json");
  RunResult r = run("check euclidean-3 -q --report " + path);
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(path);
  REQUIRE(in.good());
  auto j = nlohmann::json::parse(in);
  CHECK(j.at("scenario") == "euclidean-3");
  std::remove(path.c_str());
}

TEST_CASE("scenario files round trip through the builtin printer") {
  std::string path = temp_path("witness.json");
  RunResult dump = run("builtin line-exp-warped-witness");
  CHECK(dump.code == 0);
  {
    std::ofstream out(path, std::ios::binary);
    out << dump.out;
  }
  RunResult r = run("check " + path + " -q");
  CHECK(r.code == 0);
  std::remove(path.c_str());
}

TEST_CASE("malformed JSON exits 2 and reports the byte offset") {
  std::string path = temp_path("broken.json");
  {
    std::ofstream out(path, std::ios::binary);
    out << "{\"name\": \"x\", }";
  }
  RunResult r = run("check " + path + " -q", true);
  CHECK(r.code == 2);
  CHECK(r.out.find("byte") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("input errors exit 2") {
  CHECK(run("check no-such-scenario -q", true).code == 2);
  CHECK(run("check gaussian-soliton -q --jet-order 9", true).code == 2);
  CHECK(run("warp gaussian-soliton", true).code == 2);
}

TEST_CASE("option overrides show up in the report") {
  RunResult r = run("check gaussian-soliton -q --points 8 --seed 42");
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("environment").at("points").get<int>() == 8);
  CHECK(j.at("environment").at("seed").get<std::uint64_t>() == 42);
}

TEST_CASE("fit subcommand recovers the coefficients") {
  RunResult r = run("fit hyperbolic-halfspace");
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("lambda").get<double>() == doctest::Approx(-7.0));
  CHECK(j.at("mu").get<double>() == doctest::Approx(1.0));
  CHECK(j.at("max_residual").get<double>() <= 1e-9);
}

TEST_CASE("warp subcommand summarizes the product structure") {
  RunResult r = run("warp line-exp-warped-witness");
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("base_dim").get<int>() == 1);
  CHECK(j.at("fiber_dim").get<int>() == 2);
  CHECK(j.at("scal_formula_crosscheck_max").get<double>() <= 1e-8);
  CHECK(j.at("lift_grad_fiber_max").get<double>() <= 1e-10);
}

TEST_CASE("builtin listing") {
  RunResult r = run("builtin --list");
  CHECK(r.code == 0);
  CHECK(r.out.find("hyperbolic-halfspace\n") != std::string::npos);
  CHECK(r.out.find("flat-torus-2\n") != std::string::npos);
}
