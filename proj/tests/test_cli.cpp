#include "doctest.h"

#include <cstdio>
#include <string>
#include <sys/wait.h>

#include "bergman/report.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(BERGMANLAB_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST_CASE("cli: deterministic output and JSON round trip") {
  const auto a = run("kernel-identities --samples 2000 --seed 9");
  const auto b = run("kernel-identities --samples 2000 --seed 9");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  const auto j = bergman::Json::parse(a.out);
  CHECK(j["subcommand"] == "kernel-identities");
  CHECK(j["seed"] == 9);
  CHECK(bergman::dump_json(j) == a.out);

  const auto g = run("grids --depth 2 --beta 1/3");
  CHECK(g.code == 0);
  CHECK(bergman::Json::parse(g.out)["report"].size() == 7);
}

TEST_CASE("cli: csv carries the seed in a comment line") {
  const auto r = run("two-weight-verify --trials 3 --depth 2 --seed 4 --format csv");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("# bergmanlab two-weight-verify seed=4\n", 0) == 0);
}

TEST_CASE("cli: exit codes") {
  CHECK(run("no-such-command").code == 1);
  CHECK(run("grids --beta 1/2").code == 1);
  CHECK(run("grids --quad-order 7").code == 1);
  CHECK(run("kernel-compare --format csv --samples 10").code == 1);
  CHECK(run("stegenga-set --nmax 3 --trials 200").code == 0);
}
