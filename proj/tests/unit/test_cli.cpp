#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <regex>
#include <sstream>

#include <unistd.h>

#include "catch919/cli.hpp"
#include "catch919/run_io.hpp"
#include "fixtures.hpp"

using namespace catch919;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("catch919_cli_" + std::to_string(::getpid()) + "_" + std::to_string(n_++))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& content = "") const {
    const std::string p = (path_ / name).string();
    if (!content.empty()) std::ofstream(p) << content;
    return p;
  }

 private:
  static inline int n_ = 0;
  fs::path path_;
};

std::string ramp_script(const std::vector<fixtures::RampFrame>& frames) {
  std::string s = "step,target,value\n";
  long long step = 0;
  for (const auto& f : frames) {
    for (CableId c : {CableId::IndexBL, CableId::IndexOL, CableId::IndexPL}) {
      s += std::to_string(step) + "," + std::string(to_string(c)) + "," + format_double(f.commands[idx(c)]) + "\n";
    }
    ++step;
  }
  return s;
}

struct Silhouette {
  double mcp = 0;
  double pip = 0;
};

// Joint angles read back from the drawn bones.
std::vector<Silhouette> silhouettes(const std::string& svg) {
  std::vector<Silhouette> out;
  const std::regex frame(R"re(<g class="frame"[^>]*>\s*<polyline class="bone" points="([^"]+)")re");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), frame); it != std::sregex_iterator(); ++it) {
    std::vector<std::pair<double, double>> pts;
    std::istringstream ss((*it)[1].str());
    std::string tok;
    while (ss >> tok) {
      const auto comma = tok.find(',');
      pts.emplace_back(std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1)));
    }
    auto heading = [&](int k) {
      return std::atan2(pts[k + 1].second - pts[k].second, pts[k + 1].first - pts[k].first) * 180 / std::numbers::pi;
    };
    out.push_back({heading(0) - heading(1), heading(1) - heading(2)});
  }
  return out;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("model dump equals the shipped description, validate accepts it") {
    const Run r = cli({"model", "dump"});
    CHECK(r.code == kExitOk);
    CHECK(r.out == fixtures::read_file(fixtures::data_path("catch919.json")));
    CHECK(cli({"model", "validate"}).code == kExitOk);
    CHECK(cli({"model", "validate", "--model", fixtures::data_path("catch919.json")}).code == kExitOk);
  }

  TEST_CASE("bad input exits with 1") {
    TempDir d;
    CHECK(cli({}).code == kExitInvalid);
    CHECK(cli({"fly"}).code == kExitInvalid);
    CHECK(cli({"model", "validate", "--model", "/nonexistent.json"}).code == kExitInvalid);
    const Run r = cli({"posture", "classify", "--q", d.file("q.json", R"({"Index.MCP.FlexExt": 120})")});
    CHECK(r.code == kExitInvalid);
    CHECK(r.err.find("violates the reference bound") != std::string::npos);
    CHECK(cli({"posture", "classify", "--q", d.file("u.json", R"({"Index.MCP.Roll": 1})")}).code == kExitInvalid);
    CHECK(cli({"simulate", "--script", d.file("s.csv", "step,target,value\n0,IndexBL,1e9\n")}).code == kExitInvalid);
    CHECK(cli({"grasp", "check", "99"}).code == kExitInvalid);
  }

  TEST_CASE("posture commands") {
    TempDir d;
    const Run r = cli({"posture", "classify", "--q", d.file("q.json", R"({"Index.MCP.FlexExt": -20, "Index.PIP.FlexExt": 60})")});
    CHECK(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["class"] == "B");
    CHECK(j["activations"]["PL"] == "+");
    const Run f = cli({"posture", "classify", "--forced", "--q", d.file("f.json", R"({"Index.MCP.FlexExt": 70, "Index.PIP.FlexExt": 2})")});
    CHECK(nlohmann::json::parse(f.out)["class"] == "E");
    const Run t = cli({"posture", "table"});
    CHECK(t.out.find("A,,,(+),+") != std::string::npos);
    CHECK(t.out.find("E,(+),+,(+),") != std::string::npos);
  }

  TEST_CASE("calibrate is deterministic per seed") {
    const Run a = cli({"calibrate", "--samples", "200", "--noise-sd", "0.1", "--seed", "5"});
    const Run b = cli({"calibrate", "--samples", "200", "--noise-sd", "0.1", "--seed", "5"});
    const Run c = cli({"calibrate", "--samples", "200", "--noise-sd", "0.1", "--seed", "6"});
    CHECK(a.code == kExitOk);
    CHECK(a.out == b.out);
    CHECK(a.out != c.out);
    const double rms = nlohmann::json::parse(a.out)["fit_rms_mm"];
    CHECK(rms > 0.05);
    CHECK(rms < 0.2);
  }

  TEST_CASE("grasp subcommands") {
    TempDir d;
    CHECK(cli({"grasp", "list"}).out.find("\n") != std::string::npos);
    const Run one = cli({"grasp", "check", "1"});
    CHECK(one.code == kExitOk);
    const std::string report = d.file("report.json");
    const Run all = cli({"grasp", "run-all", "--report", report});
    CHECK(all.code == kExitOk);
    CHECK(nlohmann::json::parse(fixtures::read_file(report))["realizable"] == 33);
    CHECK(cli({"grasp", "export"}).out == fixtures::read_file(fixtures::data_path("grasps.json")));
    CHECK(cli({"grasp", "--catalog", fixtures::data_path("grasps.json"), "run-all"}).code == kExitOk);
  }

  TEST_CASE("linkage subcommands") {
    TempDir d;
    const Run c = cli({"linkage", "curve", "--samples", "19"});
    CHECK(c.code == kExitOk);
    const std::string curve = d.file("curve.csv", c.out);
    const Run s = cli({"linkage", "synth", "--curve", curve, "--restarts", "1"});
    CHECK(s.code == kExitOk);
    CHECK(s.err.find("rms") != std::string::npos);
    CHECK(nlohmann::json::parse(s.out).contains("coupler_mm"));
    CHECK(cli({"linkage", "curve", "--finger", "Thumb"}).code == kExitInvalid);
  }

  TEST_CASE("independent IP movement: MCP holds across the drawn frames") {
    TempDir d;
    const ModelPtr m = default_model_ptr();
    const auto frames = fixtures::run_ramp(m, fixtures::ip_only_ramp(0.0), exact_map(*m));
    const std::string svg = d.file("ip.svg");
    const Run r = cli({"simulate", "--script", d.file("ip.csv", ramp_script(frames)), "--svg", svg});
    REQUIRE(r.code == kExitOk);
    const auto sil = silhouettes(fixtures::read_file(svg));
    REQUIRE(sil.size() == frames.size());
    for (const Silhouette& s : sil) CHECK(std::abs(s.mcp - sil.front().mcp) <= 1.0);
    CHECK(sil.back().pip - sil.front().pip >= 80);
  }

  TEST_CASE("independent MCP movement: PIP holds across the drawn frames") {
    TempDir d;
    const ModelPtr m = default_model_ptr();
    const auto frames = fixtures::run_ramp(m, fixtures::mcp_only_ramp(0.0), exact_map(*m));
    const std::string svg = d.file("mcp.svg");
    const Run r = cli({"simulate", "--script", d.file("mcp.csv", ramp_script(frames)), "--svg", svg});
    REQUIRE(r.code == kExitOk);
    const auto sil = silhouettes(fixtures::read_file(svg));
    REQUIRE(sil.size() == frames.size());
    for (const Silhouette& s : sil) CHECK(std::abs(s.pip - sil.front().pip) <= 1.0);
    CHECK(sil.back().mcp - sil.front().mcp >= 110);
  }

  TEST_CASE("simulate output round trips through the run CSV reader and plot") {
    TempDir d;
    const std::string script = d.file("s.csv", "step,target,value\n0,IndexBL,3\n1,force.Index,2\n1,resistance,1\n2,preset,4\n3,reset,0\n");
    const std::string run = d.file("run.csv");
    REQUIRE(cli({"simulate", "--script", script, "--out", run}).code == kExitOk);
    const auto rows = parse_run_csv(fixtures::read_file(run));
    CHECK(rows.size() == 4);
    CHECK(run_csv(rows) == fixtures::read_file(run));
    const Run p = cli({"plot", "--run", run});
    CHECK(p.code == kExitOk);
    CHECK(p.out.rfind("<svg", 0) == 0);
    const Run j = cli({"plot", "--jacobian", d.file("q.json", R"({"Index.PIP.FlexExt": 10})")});
    CHECK(j.code == kExitOk);
    CHECK(std::count(j.out.begin(), j.out.end(), '\n') == 1 + static_cast<long>(kCableCount));
  }

  TEST_CASE("script errors") {
    CHECK_THROWS_AS(parse_script("step,target,value\n0,Nope,1\n"), Error);
    CHECK_THROWS_AS(parse_script("time,cable\n"), Error);
    CHECK_THROWS_AS(parse_script("step,target,value\n1,IndexBL,1\n0,IndexBL,2\n"), Error);
  }

  TEST_CASE("format_double is shortest round trip") {
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(-0.0) == "0");
    CHECK(format_double(1.5) == "1.5");
    CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
  }
}
