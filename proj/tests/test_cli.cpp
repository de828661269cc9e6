#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace vortexflow;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "vortexflow");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("vortexflow_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"eval", "--preset", "nope"}).code == cli::kExitUsage);
  CHECK(run({"eval", "--gamma", "abc"}).code == cli::kExitUsage);
  CHECK(run({"eval", "--config", temp_file("missing.json").string()}).code == cli::kExitUsage);
  CHECK(run({"eval", "--format", "xml"}).code == cli::kExitUsage);
}

TEST_CASE("help exits 0") {
  const Outcome o = run({"--help"});
  CHECK(o.code == cli::kExitOk);
  CHECK(o.out.find("classify") != std::string::npos);
}

TEST_CASE("eval writes the flow table") {
  const Outcome o = run({"eval", "--preset", "generic"});
  CHECK(o.code == cli::kExitOk);
  CHECK(o.out.rfind("x,y,rho,u1,u2,p\n", 0) == 0);
  const Outcome j = run({"eval", "--preset", "generic", "--format", "json"});
  CHECK(j.code == cli::kExitOk);
  CHECK_NOTHROW((void)Json::parse(j.out));
}

TEST_CASE("invalid parameters are domain errors") {
  const Outcome o = run({"eval", "--gamma", "0.5"});
  CHECK(o.code == cli::kExitDomain);
  CHECK(!o.err.empty());
}

TEST_CASE("classify labels the fixture presets") {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"periodic-demo", "1"}, {"blowup-demo", "2b-blowup"}, {"gamma3-critical", "3bI-global"}, {"linear-collapse", "2aII"}};
  for (const auto& [name, branch] : cases) {
    const Outcome o = run({"classify", "--preset", name});
    CHECK(o.code == cli::kExitOk);
    const Json j = Json::parse(o.out);
    CHECK(j["regime"]["branch"] == branch);
    CHECK(j["certification"]["consistent"] == true);
  }
}

TEST_CASE("integrate and period") {
  const Outcome traj = run({"integrate", "--preset", "expanding", "--t-end", "1"});
  CHECK(traj.code == cli::kExitOk);
  CHECK(traj.out.rfind("t,a,adot,E,F_kin,F_pot\n", 0) == 0);

  const Outcome per = run({"period", "--preset", "periodic-demo"});
  CHECK(per.code == cli::kExitOk);
  const Json j = Json::parse(per.out);
  CHECK(j["relative_difference"].get<double>() <= 1e-5);

  CHECK(run({"period", "--preset", "blowup-demo"}).code == cli::kExitDomain);
}

TEST_CASE("verify targets and verdict exit codes") {
  Outcome o = run({"verify", "--preset", "generic"});
  CHECK(o.code == cli::kExitOk);
  CHECK(Json::parse(o.out)["pass"] == true);

  o = run({"verify", "--preset", "generic", "--target", "navier-stokes", "--mu", "3.7"});
  CHECK(o.code == cli::kExitOk);

  o = run({"verify", "--target", "zz"});
  CHECK(o.code == cli::kExitOk);
  o = run({"verify", "--target", "zz-as-printed"});
  CHECK(o.code == cli::kExitDomain);
  CHECK(Json::parse(o.out)["pass"] == false);

  o = run({"verify", "--target", "generic-g", "--count", "3"});
  CHECK(o.code == cli::kExitOk);
  CHECK(Json::parse(o.out)["sweep"].size() == 3);

  o = run({"verify", "--preset", "generic", "--ladder", "4e-3,2e-3,1e-3"});
  CHECK(o.code == cli::kExitOk);
  const double order = Json::parse(o.out)["report"]["ladder"]["order"].get<double>();
  CHECK(order >= 1.8);
  CHECK(order <= 4.2);
}

TEST_CASE("verify3d named cases") {
  const Outcome o = run({"verify3d", "--case", "pure-drift"});
  CHECK(o.code == cli::kExitOk);
  CHECK(o.out.find("PASS") != std::string::npos);
}

TEST_CASE("emitted config reproduces the run") {
  const auto cfg = temp_file("config.json");
  const std::vector<std::string> flags{"verify", "--preset", "generic", "--h", "2e-3", "--n-r", "8"};
  std::vector<std::string> emit = flags;
  emit.push_back("--emit-config");
  const Outcome e = run(emit);
  REQUIRE(e.code == cli::kExitOk);
  {
    std::ofstream f(cfg);
    f << e.out;
  }
  const Outcome direct = run(flags);
  const Outcome via_file = run({"verify", "--config", cfg.string()});
  CHECK(direct.code == via_file.code);
  CHECK(direct.out == via_file.out);

  // Flags override the file.
  const Outcome overridden = run({"verify", "--config", cfg.string(), "--h", "1e-3"});
  CHECK(overridden.out != via_file.out);

  std::ofstream(cfg) << R"({"params": {"gama": 2}})";
  CHECK(run({"eval", "--config", cfg.string()}).code == cli::kExitUsage);
  std::filesystem::remove(cfg);
}

TEST_CASE("output file") {
  const auto path = temp_file("flow.csv");
  const Outcome o = run({"eval", "--preset", "generic", "--out", path.string()});
  CHECK(o.code == cli::kExitOk);
  CHECK(o.out.empty());
  CHECK(slurp(path).rfind("x,y,rho", 0) == 0);
  std::filesystem::remove(path);
  CHECK(run({"eval", "--out", "/nonexistent-dir/x.csv"}).code == cli::kExitUsage);
}

TEST_CASE("fvbench table") {
  const Outcome o = run({"fvbench", "--preset", "generic", "--resolutions", "16,32"});
  CHECK(o.code == cli::kExitOk);
  CHECK(o.out.rfind("resolution,", 0) == 0);
}
