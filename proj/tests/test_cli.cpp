#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(OPTOGRAV_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  Run r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("optograv_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

using Table = std::vector<std::map<std::string, std::string>>;

Table parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  Table rows;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (header.empty()) {
      header = cells;
      continue;
    }
    REQUIRE(cells.size() == header.size());
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < cells.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run("derive").code == 0);
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("derive --samples -3").code == 2);
  CHECK(run("derive --config " + write_config("broken.json", "{\"params\": ")).code == 2);
  CHECK(run("derive --config " + write_config("unknown.json", R"({"params": {"mass": 1}})")).code == 2);
  CHECK(run("derive --config " + write_config("neg.json", R"({"params": {"m": -1}})")).code == 2);
  CHECK(run("derive --config /nonexistent/optograv.json").code == 2);
  CHECK(run("sweep").code == 2);
  CHECK(run("verify").code == 0);
  CHECK(run("verify --inject-fault").code == 1);
}

TEST_CASE("identical invocations give identical bytes") {
  for (const char* args : {"derive", "qfi --format json", "sample --seed 5 --samples 50",
                           "sweep --config " OPTOGRAV_CONFIGS "/photon_sweep.json"}) {
    const Run a = run(args), b = run(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
  }
  CHECK(run("sample --seed 5 --samples 50").out != run("sample --seed 6 --samples 50").out);
}

TEST_CASE("outputs carry version and config hash") {
  const Run csv = run("derive");
  CHECK(csv.out.rfind("# optograv ", 0) == 0);
  CHECK(csv.out.find("config_hash=") != std::string::npos);
  const json j = json::parse(run("derive --format json").out);
  CHECK(j.contains("version"));
  CHECK(j.at("config_hash").get<std::string>().size() == 16);

  const fs::path file = scratch() / "derive.csv";
  CHECK(run("derive --output " + file.string()).code == 0);
  std::ifstream in(file);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == csv.out);
}

TEST_CASE("one-point sweep equals a single evaluation") {
  const std::string cfg = write_config("one.json", R"({"sweep": {"variable": "N_p", "min": 30, "max": 30, "points": 1}})");
  const Table sweep = parse_csv(run("sweep --config " + cfg).out);
  const Table single = parse_csv(run("fi").out);
  REQUIRE(sweep.size() == 1);
  REQUIRE(single.size() == 1);
  CHECK(sweep[0].at("fi") == single[0].at("fi"));
  CHECK(sweep[0].at("qfi") == single[0].at("qfi"));
}

TEST_CASE("first-order photon sweep is linear through the origin") {
  const std::string cfg = write_config(
      "linear.json", R"({"mode": "first-order", "sweep": {"variable": "N_p", "min": 1, "max": 100, "points": 12}})");
  const Table rows = parse_csv(run("sweep --config " + cfg).out);
  REQUIRE(rows.size() == 12);
  for (const char* column : {"qfi", "fi"}) {
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (const auto& r : rows) {
      const double x = std::stod(r.at("N_p")), y = std::stod(r.at(column));
      sxy += x * y;
      sxx += x * x;
      syy += y * y;
    }
    const double slope = sxy / sxx;
    double ss_res = 0.0;
    for (const auto& r : rows) ss_res += std::pow(std::stod(r.at(column)) - slope * std::stod(r.at("N_p")), 2);
    INFO(column);
    CHECK(1.0 - ss_res / syy > 0.9999);
  }
}

TEST_CASE("coupling sweep keeps the homodyne ratio near one") {
  const std::string cfg = write_config(
      "g0.json", R"({"sweep": {"variable": "g0", "min": 7.25, "max": 115.9, "points": 5, "spacing": "log"}})");
  const Table rows = parse_csv(run("sweep --config " + cfg).out);
  REQUIRE(rows.size() == 5);
  for (const auto& r : rows) CHECK(std::abs(std::stod(r.at("ratio")) - 1.0) <= 1e-3);
}

TEST_CASE("verify reports every check") {
  const Run r = run("verify --json");
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  REQUIRE(j.at("checks").is_array());
  CHECK(j.at("checks").size() >= 9);
  for (const auto& c : j.at("checks")) CHECK(c.at("passed").get<bool>());

  const json bad = json::parse(run("verify --json --inject-fault").out);
  bool any_failed = false;
  for (const auto& c : bad.at("checks")) any_failed |= !c.at("passed").get<bool>();
  CHECK(any_failed);
}

TEST_CASE("platform table") {
  const Table rows = parse_csv(run("table").out);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].at("platform") == "Atom Interferometry");
  CHECK(rows[0].at("rel_error") == "1.3e-9");
  CHECK(rows[4].at("platform") == "Optomechanics");
  CHECK(rows[4].at("status") == "predicted");
}

TEST_CASE("zero gravity has no static displacement") {
  const std::string cfg = write_config("g0grav.json", R"({"params": {"g": 0}})");
  const Table rows = parse_csv(run("derive --config " + cfg).out);
  REQUIRE(rows.size() == 1);
  CHECK(std::stod(rows[0].at("S_tilde")) == 0.0);
}

TEST_CASE("estimate and study run end to end") {
  const std::string cfg = OPTOGRAV_CONFIGS "/scaled.json";
  const Run est = run("estimate --config " + cfg + " --samples 2000 --seed 3 --method both --format json");
  CHECK(est.code == 0);
  const Run st = run("study --config " + cfg + " --samples 500 --replicas 50 --seed 4 --bracket 0.3");
  CHECK(st.code == 0);
  CHECK(st.out == run("study --config " + cfg + " --samples 500 --replicas 50 --seed 4 --bracket 0.3").out);
}
