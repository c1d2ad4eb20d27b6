#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "catch_amalgamated.hpp"
#include "lieharm/coeffs.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace lieharm;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

class Workdir {
 public:
  Workdir() {
    dir_ = fs::temp_directory_path() / ("lieharm_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  ~Workdir() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& body) const {
    std::ofstream(path(name)) << body;
    return path(name);
  }

 private:
  fs::path dir_;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(LIEHARM_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

const char* kEx1 = "group T^1xS3^1\nP1 = sqrt(2)*dx1 + i*d0_1\n";
const char* kEx2 = "group T^2xS3^1\nP1 = dx1 + i*i*d0_1 + 1/3\nP2 = dx2 + i*i*d0_1 + 1/3\n";
const char* kEx3 = "group S3^1\nP1 = 1*d0_1^2 + i*dplus_1*dminus_1\nP2 = 2*d0_1^2 + 3i*dplus_1*dminus_1\n";

}  // namespace

TEST_CASE("exit codes", "[cli]") {
  Workdir w;
  const auto ex1 = w.write("ex1.sys", kEx1), ex3 = w.write("ex3.sys", kEx3);
  CHECK(run("classify --system " + ex3 + " --cap 30 --expect gh=holds,gs=holds").code == 0);
  CHECK(run("classify --system " + ex3 + " --cap 30 --expect gh=fails").code == 1);
  CHECK(run("classify --system " + ex1 + " --expect gh=fails,zset=InfiniteCertified").code == 0);
  CHECK(run("classify --system " + ex1 + " --expect nonsense=1").code == 2);
  CHECK(run("classify --system " + ex1 + " --expect gh").code == 2);
  CHECK(run("classify --system " + w.path("missing.sys")).code == 2);
  CHECK(run("classify --system " + w.write("bad.sys", "group T^1\nP1 = dx1 +\n")).code == 2);
  CHECK(run("classify --system " + w.write("dim.sys", "group T^1\nP1 = dx2\n")).code == 2);
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("zset --system " + ex1 + " --cap -4").code == 2);
  CHECK(run("classify --system " + w.write("pi.sys", "group T^2\nP1 = dx1 + pi*dx2\n") + " --exact").code == 2);
  CHECK(run("synth --group T^1 --profile wiggle:3").code == 2);
  CHECK(run("--help").code == 0);

  const auto parse_err = run("zset --system " + w.path("bad.sys"));
  CHECK(parse_err.out.find("bad.sys:") != std::string::npos);
}

TEST_CASE("json output parses and is deterministic", "[cli]") {
  Workdir w;
  const auto ex1 = w.write("ex1.sys", kEx1);
  for (const char* sub : {"classify", "zset", "dcscan", "witness"}) {
    INFO(sub);
    const auto a = run(std::string(sub) + " --system " + ex1 + " --cap 15 --json");
    const auto b = run(std::string(sub) + " --system " + ex1 + " --cap 15 --json");
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(nlohmann::json::accept(a.out));
  }
  const auto z = nlohmann::json::parse(run("zset --system " + ex1 + " --cap 10 --json").out);
  CHECK(z.contains("hits"));

  const auto s1 = run("synth --group T^1xS3^1 --cap 8 --seed 11");
  const auto s2 = run("synth --group T^1xS3^1 --cap 8 --seed 11");
  const auto s3 = run("synth --group T^1xS3^1 --cap 8 --seed 12");
  CHECK(s1.code == 0);
  CHECK(s1.out == s2.out);
  CHECK(s1.out != s3.out);
}

TEST_CASE("synth, apply, solve round trip", "[cli]") {
  Workdir w;
  const auto ex2 = w.write("ex2.sys", kEx2);
  const auto u = w.path("u.json"), f1 = w.path("f1.json"), f2 = w.path("f2.json"), v = w.path("v.json");
  REQUIRE(run("synth --system " + ex2 + " --cap 12 --seed 5 --profile poly_decay:6 --out " + u).code == 0);
  REQUIRE(run("apply --system " + ex2 + " --in " + u + " --out " + f1 + " --out " + f2).code == 0);
  REQUIRE(run("compat --system " + ex2 + " --rhs " + f1 + " --rhs " + f2 + " --expect ok=yes").code == 0);
  REQUIRE(run("solve --system " + ex2 + " --rhs " + f1 + " --rhs " + f2 + " --out " + v).code == 0);
  CHECK(run("apply --system " + ex2 + " --in " + v + " --rhs " + f1 + " --rhs " + f2 + " --expect match=yes").code == 0);

  const auto a = read_field(u), b = read_field(v);
  REQUIRE(a.size() == b.size());
  for (const auto& [xi, m] : a.data) CHECK((b.at(xi) - m).cwiseAbs().maxCoeff() <= 1e-10);

  // swapping the right-hand sides breaks the cross relation
  CHECK(run("compat --system " + ex2 + " --rhs " + f2 + " --rhs " + f1 + " --expect ok=no").code == 0);
  CHECK(run("solve --system " + ex2 + " --rhs " + f1).code == 2);
}

TEST_CASE("oracle and counterexamples", "[cli]") {
  Workdir w;
  const auto r = run("oracle --ell-max 2 --json");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("max_residual").get<double>() <= 1e-6);
  CHECK(run("oracle --ell-max 1 --expect pass=yes").code == 0);

  const auto ex1 = w.write("ex1.sys", kEx1), k = w.path("k.json");
  const auto kr = run("counterexample kernel --system " + ex1 + " --count 6 --out " + k + " --json");
  REQUIRE(kr.code == 0);
  CHECK(nlohmann::json::parse(kr.out).at("max_abs_Pu").get<double>() == 0.0);
  CHECK(read_field(k).size() == 6);
  CHECK(run("counterexample --system " + ex1).code == 2);
}
