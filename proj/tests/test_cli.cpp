#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "solvkit/cli.hpp"
#include "solvkit/io.hpp"

using namespace solvkit;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string model(const std::string& name) { return std::string(SOLVKIT_MODELS_DIR) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& text) {
  auto p = std::filesystem::temp_directory_path() / ("solvkit_test_" + name);
  std::ofstream(p) << text;
  return p.string();
}

}  // namespace

TEST_CASE("spectrum") {
  auto r = run({"spectrum", model("krawtchouk.json")});
  CHECK(r.code == kExitPass);
  CHECK(r.out == "0,1,2,3,4\n");
  auto j = run({"spectrum", model("krawtchouk.json"), "--format", "json"});
  CHECK(j.code == kExitPass);
  CHECK(Json::parse(j.out).dump().find("energies") != std::string::npos);
  CHECK(run({"spectrum", model("qes_l3.json")}).code == kExitUnsupported);
  CHECK(run({"spectrum", model("krawtchouk.json"), "--n-max", "9"}).code == kExitInput);
  CHECK(run({"spectrum", model("krawtchouk.json"), "--n-max", "-1"}).code == kExitInput);
  CHECK(run({"spectrum", model("does_not_exist.json")}).code == kExitInput);
}

TEST_CASE("eigenpoly") {
  auto r = run({"eigenpoly", model("krawtchouk.json"), "--n", "2"});
  CHECK(r.code == kExitPass);
  CHECK(r.out == "3,-4,1\n");
}

TEST_CASE("verify") {
  auto r = run({"verify", model("askey_wilson.json")});
  CHECK(r.code == kExitPass);
  auto j = Json::parse(r.out);
  CHECK(j["status"] == "PASS");
  CHECK(j["checks"].size() == 5);
  CHECK(run({"verify", model("wilson.json"), "--checks", "closure,dual"}).code == kExitPass);
  CHECK(run({"verify", model("krawtchouk.json"), "--checks", ""}).code == kExitInput);
  CHECK(run({"verify", model("krawtchouk.json"), "--checks", "nonsense"}).code == kExitInput);
  CHECK(run({"verify", model("krawtchouk.json"), "--checks", "crum"}).code == kExitUnsupported);
}

TEST_CASE("tampering is detected") {
  auto rec = run({"verify", model("krawtchouk.json"), "--record"});
  REQUIRE(rec.code == kExitPass);
  auto recorded = Json::parse(rec.out);
  auto clean = write_temp("clean.json", recorded.dump());
  CHECK(run({"verify", clean}).code == kExitPass);

  recorded["potential"]["v"]["1,0"] = -2.001;
  auto tampered = write_temp("tampered.json", recorded.dump());
  auto t = run({"verify", tampered});
  CHECK(t.code == kExitFail);
  CHECK(Json::parse(t.out)["status"] == "FAIL");
}

TEST_CASE("qes") {
  auto r = run({"qes", model("qes_l3.json")});
  CHECK(r.code == kExitPass);
  int lines = 0;
  for (char ch : r.out) lines += ch == '\n';
  CHECK(lines == 4);
  auto rep = run({"qes", model("qes_l4.json"), "--report"});
  CHECK(rep.code == kExitPass);
  auto j = Json::parse(rep.out);
  CHECK(j["e0"] == Json(1));
  CHECK(j["eigenvalues"].size() == 4);
  auto n = run({"qes", model("non_qes_l5.json")});
  CHECK(n.code == kExitUnsupported);
  CHECK(n.out.find("non-QES") != std::string::npos);
  CHECK(run({"qes", model("krawtchouk.json")}).code == kExitUnsupported);
}

TEST_CASE("lattice") {
  auto r = run({"lattice", model("krawtchouk.json"), "--diag"});
  CHECK(r.code == kExitPass);
  auto j = Json::parse(r.out);
  CHECK(j["report"]["status"] == "PASS");
  CHECK(j.contains("H"));
  CHECK(run({"lattice", model("meixner.json")}).code == kExitPass);
  CHECK(run({"lattice", model("qes_lattice_l3.json")}).code == kExitPass);
  CHECK(run({"lattice", model("qes_l4.json")}).code != kExitPass);  // B(N) does not vanish
  CHECK(run({"lattice", model("askey_wilson.json")}).code == kExitInput);
  auto csv = run({"lattice", model("krawtchouk.json"), "--format", "csv"});
  CHECK(csv.code == kExitPass);
  CHECK(csv.out.rfind("x,B,D,phi0", 0) == 0);
}

TEST_CASE("catalog and usage") {
  auto c = run({"catalog", "--format", "json"});
  CHECK(c.code == kExitPass);
  CHECK(Json::parse(c.out).size() == 14);  // 13 standard kinds and the nonstandard control
  CHECK(run({"catalog"}).code == kExitPass);
  CHECK(run({}).code == kExitInput);
  CHECK(run({"frobnicate"}).code == kExitInput);
}

TEST_CASE("backend selection") {
  setenv("SOLVKIT_BACKEND", "float", 1);
  auto f = run({"verify", model("krawtchouk.json")});
  CHECK(Json::parse(f.out)["backend"] == "float");
  setenv("SOLVKIT_BACKEND", "quaternion", 1);
  CHECK(run({"spectrum", model("krawtchouk.json")}).code == kExitInput);
  setenv("SOLVKIT_BACKEND", "rational", 1);
  auto w = run({"verify", model("askey_wilson.json")});
  CHECK(w.code == kExitPass);
  CHECK_FALSE(w.err.empty());
  unsetenv("SOLVKIT_BACKEND");
  CHECK(Json::parse(run({"verify", model("krawtchouk.json")}).out)["backend"] == "rational");
}

TEST_CASE("exit code mapping") {
  CHECK(exit_code_for(ErrorKind::Schema) == kExitInput);
  CHECK(exit_code_for(ErrorKind::Domain) == kExitInput);
  CHECK(exit_code_for(ErrorKind::Unsupported) == kExitUnsupported);
  CHECK(exit_code_for(ErrorKind::NotExactlySolvable) == kExitUnsupported);
  CHECK(exit_code_for(ErrorKind::QesBroken) == kExitFail);
}
