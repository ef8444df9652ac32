#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

std::string binary() {
  const char* bin = std::getenv("SKILLFORGE_BIN");
  REQUIRE(bin != nullptr);
  return bin;
}

int run(const std::string& args) {
  std::string cmd = binary() + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string fixture(const char* name) {
  return testsupport::fixture_path(name);
}

}  // namespace

TEST_CASE("check accepts a clean library and flags warnings without failing") {
  CHECK(run("check " + fixture("best.skill")) == 0);
  CHECK(run("check " + fixture("failure_qwen.skill")) == 0);  // warnings only
}

TEST_CASE("check rejects text that is not a library") {
  fs::path bad = fs::temp_directory_path() / "skillforge_cli_bad.skill";
  std::ofstream(bad) << "this is not a skill document\n";
  CHECK(run("check " + bad.string()) == 2);
  fs::remove(bad);
}

TEST_CASE("plan reports decomposition failures distinctly from bad input") {
  // Empty kitchen: the mature library plans Bread/Beef prep, so it succeeds.
  CHECK(run("plan --library " + fixture("best.skill") +
            " --task make_BeefBurger") == 0);
  // The origin library has no method for this task at all.
  CHECK(run("plan --library " + fixture("origin.skill") +
            " --task make_LettuceBurger") == 3);
  CHECK(run("plan --library " + fixture("best.skill") +
            " --task make_BeefBurger --state bread_count") == 2);
}

TEST_CASE("run produces a log that replay can diagnose") {
  fs::path log = fs::temp_directory_path() / "skillforge_cli_ep.jsonl";
  CHECK(run("run --library " + fixture("best.skill") + " --seed 7 --log " +
            log.string()) == 0);
  CHECK(run("replay " + log.string()) == 0);
  CHECK(run("replay " + log.string() + " --report json") == 0);
  fs::remove(log);
}

TEST_CASE("report rejects a CSV that does not parse") {
  fs::path csv = fs::temp_directory_path() / "skillforge_cli_bad.csv";
  std::ofstream(csv) << "iteration,seed\n1,2,3\n";
  CHECK(run("report --from-csv " + csv.string()) == 2);
  fs::remove(csv);
}

TEST_CASE("loop with the mock optimizer leaves a complete artifact trail") {
  fs::path dir = fs::temp_directory_path() / "skillforge_cli_loop";
  fs::remove_all(dir);
  CHECK(run("loop --library " + fixture("origin.skill") +
            " --episodes 2 --master-seed 1 --optimizer mock --canned " +
            fixture("best.skill") + " --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "report.csv"));
  CHECK(fs::exists(dir / "opt_1.json"));
  CHECK(run("report --from-csv " + (dir / "report.csv").string()) == 0);
  fs::remove_all(dir);
}

TEST_CASE("loop refuses a mock optimizer without a reference library") {
  CHECK(run("loop --library " + fixture("origin.skill") +
            " --episodes 1 --optimizer mock") == 2);
}
