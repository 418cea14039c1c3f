#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oscilab/cli.hpp"
#include "oscilab/potentials.hpp"

using namespace oscilab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("oscilab_test_" + name);
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int call(std::vector<std::string> args, std::string& out, std::string& err) {
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream o, e;
  int code = cli_main(static_cast<int>(argv.size()), argv.data(), o, e);
  out = o.str();
  err = e.str();
  return code;
}

json wvn_doc(const fs::path& dir) {
  return {{"command", "verify-wvn"}, {"params", {{"x_max", 20.0}, {"step", 1e-3}}}, {"output_dir", dir.string()}};
}

}  // namespace

TEST_CASE("command table: eight commands, each with an anchor, stable listing") {
  const auto& t = command_table();
  CHECK(t.size() == 8);
  std::set<std::string> names;
  for (const auto& c : t) {
    names.insert(c.name);
    CHECK_FALSE(c.anchor.empty());
    CHECK(list_commands().find(c.name) != std::string::npos);
  }
  CHECK(names.size() == 8);
  CHECK(list_commands() == list_commands());
}

TEST_CASE("dot-path overrides") {
  json doc{{"command", "lap-scan"}, {"params", {{"scan", {{"s", 1.0}}}}}};
  apply_override(doc, "params.scan.s=0.51");
  CHECK(doc["params"]["scan"]["s"] == 0.51);
  apply_override(doc, "params.scan.box_list=[100,200]");
  CHECK(doc["params"]["scan"]["box_list"].size() == 2);
  apply_override(doc, "params.mode=strict");
  CHECK(doc["params"]["mode"] == "strict");
  apply_override(doc, "params.new.deep=3");
  CHECK(doc["params"]["new"]["deep"] == 3);
  CHECK_THROWS_AS(apply_override(doc, "novalue"), ValidationError);
  CHECK_THROWS_AS(apply_override(doc, "params..x=1"), ValidationError);
  CHECK_THROWS_AS(apply_override(doc, "command.x=1"), ValidationError);
}

TEST_CASE("config parsing") {
  auto cfg = parse_config(json{{"command", "verify-wvn"}, {"seed", 9}});
  CHECK(cfg.command == "verify-wvn");
  CHECK(cfg.seed == 9);
  CHECK(cfg.output_dir == "out");
  CHECK_THROWS_AS(parse_config(json{{"command", "nope"}}), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"params", json::object()}}), ValidationError);
  CHECK_THROWS_AS(parse_config(json::array()), ValidationError);
}

TEST_CASE("verify-wvn run writes its outputs and a checksummed manifest") {
  fs::path dir = fresh_dir("wvn");
  RunOutcome r = run(parse_config(wvn_doc(dir)));
  REQUIRE(r.exit_code == 0);
  json w = json::parse(slurp(dir / "wvn.json"));
  CHECK(w["residual_1d"].get<double>() < 1e-9);
  CHECK(w["residual_3d"].get<double>() < 1e-9);
  json m = json::parse(slurp(dir / "manifest.json"));
  CHECK(m["command"] == "verify-wvn");
  CHECK(m["tool_version"] == kToolVersion);
  REQUIRE(m["outputs"].size() == 1);
  const json& entry = m["outputs"][0];
  std::string content = slurp(dir / entry["file"].get<std::string>());
  CHECK(entry["bytes"] == content.size());
  CHECK(!entry["fnv1a64"].get<std::string>().empty());
  CHECK_FALSE(fs::exists(dir / "manifest.json.tmp"));
}

TEST_CASE("identical configs give byte-identical outputs") {
  fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  json doc{{"command", "mourre-check"},
           {"params", {{"mode", "at_infinity"}, {"window", {0.3, 0.8}}, {"L", 40.0}, {"h", 0.2}, {"radii", {10, 20}},
                       {"trials", 8}}}};
  doc["output_dir"] = a.string();
  REQUIRE(run(parse_config(doc)).exit_code == 0);
  doc["output_dir"] = b.string();
  REQUIRE(run(parse_config(doc)).exit_code == 0);
  CHECK(slurp(a / "mourre.json") == slurp(b / "mourre.json"));
}

TEST_CASE("validation failure: exit code 2, named invariant, no outputs") {
  fs::path dir = fresh_dir("beta0");
  json doc{{"command", "lap-scan"},
           {"params",
            {{"potential", {{"kind", "oscillating"}, {"w", 3.0}, {"k", 2.0}, {"alpha", 1.0}, {"beta", 0.0}}}}},
           {"output_dir", dir.string()}};
  RunOutcome r = run(parse_config(doc));
  CHECK(r.exit_code == 2);
  CHECK(r.error["error"] == "validation");
  CHECK(r.error["invariant"].get<std::string>().find("beta > 0") != std::string::npos);
  CHECK_FALSE(fs::exists(dir));

  json bad = wvn_doc(dir);
  bad["params"]["step"] = -1.0;
  CHECK(run(parse_config(bad)).exit_code == 2);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("cli_main: list, run with overrides, bad input") {
  std::string out, err;
  CHECK(call({"oscilab", "list"}, out, err) == 0);
  CHECK(out == list_commands());

  fs::path dir = fresh_dir("cli");
  fs::create_directories(dir);
  fs::path cfg = dir / "cfg.json";
  std::ofstream(cfg) << wvn_doc(dir / "unused").dump();
  fs::path outd = dir / "out";
  CHECK(call({"oscilab", "run", cfg.string(), "--set", "params.x_max=10", "--out", outd.string(), "--seed", "5",
              "--threads", "1"},
             out, err) == 0);
  json m = json::parse(slurp(outd / "manifest.json"));
  CHECK(m["config"]["params"]["x_max"] == 10.0);
  CHECK(m["config"]["seed"] == 5);
  CHECK_FALSE(fs::exists(dir / "unused"));

  CHECK(call({"oscilab", "run", (dir / "missing.json").string()}, out, err) == 2);
  CHECK(json::parse(err)["error"] == "validation");
  CHECK(call({"oscilab", "run", cfg.string(), "--threads", "0"}, out, err) == 2);
  CHECK(call({"oscilab"}, out, err) == 2);
}
