#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = GENACC_CLI_PATH;

fs::path sandbox() {
  const auto p = fs::temp_directory_path() / "genacc_cli_tests";
  fs::create_directories(p);
  return p;
}

int run(const std::string& args, const std::string& env_prefix = "") {
  const auto log = (sandbox() / "last_command.log").string();
  const std::string cmd = env_prefix + kCli + " " + args + " > " + log + " 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file: ", p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

// Rows of a comma-separated file, skipping the header; each row split on commas.
std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string csv_header(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  return line;
}

void push_be32(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>((v >> 24) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>(v & 0xff));
}

void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("selftest passes") { CHECK(run("selftest") == 0); }

TEST_CASE("toy-curves writes every curve and the area summary") {
  const auto out = sandbox() / "toy";
  REQUIRE(run("toy-curves --out " + out.string()) == 0);

  for (const std::string f : {"f1", "f2", "f3"}) {
    for (const std::string tag : {"std-max", "std-exact", "gen-exact", "gen-max-class-region"}) {
      CHECK(fs::exists(out / (f + "_" + tag + ".csv")));
    }
  }

  const auto rows = read_csv(out / "f1_std-max.csv");
  bool saw_half = false;
  for (const auto& r : rows) {
    REQUIRE(r.size() == 2);
    if (std::stod(r[0]) == 0.5) {
      saw_half = true;
      CHECK(std::stod(r[1]) == 0.75);
    }
  }
  CHECK(saw_half);

  const auto summary = read_json(out / "ara_summary.json");
  for (const std::string f : {"f1", "f2", "f3"})
    CHECK(summary.at(f).at("std-max").get<double>() == 1.5);
  CHECK(fs::exists(out / "run_config.json"));
}

TEST_CASE("eval on sampled toy points keeps nearest-neighbor accuracy at one") {
  const auto out = sandbox() / "eval_toy";
  REQUIRE(run("eval --toy-sample 64 --eps-max 1 --eps-steps 16 --out " + out.string()) == 0);

  const auto rows = read_csv(out / "curve.csv");
  REQUIRE(rows.size() == 16);
  for (const auto& r : rows) CHECK(std::stod(r[1]) == 1.0);

  const auto cfg = read_json(out / "run_config.json");
  CHECK(cfg.at("evaluator").get<std::string>() == "gen-max");
  CHECK(cfg.at("classifier").get<std::string>() == "1nn");
  CHECK(cfg.at("ara").get<double>() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exact-norm evaluation on a 4-D dataset fails loudly") {
  const auto dir = sandbox();
  const auto csv = dir / "dim4.csv";
  write_file(csv,
             "x0,x1,x2,x3,label\n"
             "0,0,0,0,0\n"
             "1,1,1,1,1\n");
  CHECK(run("eval --data " + csv.string() + " --norm exact --eps-max 0.5 --out " +
            (dir / "eval_dim4").string()) != 0);
}

TEST_CASE("unknown classifier names are rejected") {
  CHECK(run("eval --toy-sample 8 --classifier bogus --out " +
            (sandbox() / "eval_bogus").string()) != 0);
}

TEST_CASE("analyze reproduces the three-point hand values") {
  const auto dir = sandbox();
  const auto csv = dir / "line3.csv";
  write_file(csv,
             "x0,label\n"
             "0,0\n"
             "1,0\n"
             "3,1\n");
  const auto out = dir / "analysis3";
  REQUIRE(run("analyze --data " + csv.string() + " --out " + out.string()) == 0);

  const auto rows = read_csv(out / "stats.csv");
  REQUIRE(rows.size() == 3);
  // index,label,d_diff,d_same_min,d_same_max,ratio_min,ratio_max
  CHECK(std::stod(rows[0][2]) == 3.0);
  CHECK(std::stod(rows[0][3]) == 1.0);
  CHECK(std::stod(rows[0][5]) == 0.75);
  CHECK(std::stod(rows[2][2]) == 2.0);
  CHECK(std::isinf(std::stod(rows[2][3])));
  CHECK(std::stod(rows[2][5]) == 0.0);

  const auto summary = read_json(out / "summary.json");
  CHECK(summary.at("min_d_diff").get<double>() == 2.0);
  CHECK(summary.at("max_d_diff").get<double>() == 3.0);
  CHECK(summary.at("excluded_ratio_min").get<int>() == 1);
  CHECK(summary.at("loo_strict").get<double>() == doctest::Approx(2.0 / 3.0));
  CHECK(fs::exists(out / "hist_d_diff.csv"));
  CHECK(fs::exists(out / "hist_ratio_min.csv"));
}

TEST_CASE("analyze runs on IDX input through the integer path") {
  const auto dir = sandbox();
  std::string images;
  push_be32(images, 0x00000803);
  push_be32(images, 2);  // two 2x2 images
  push_be32(images, 2);
  push_be32(images, 2);
  for (unsigned char b : {0, 64, 128, 255, 10, 20, 30, 40}) images.push_back(static_cast<char>(b));
  std::string labels;
  push_be32(labels, 0x00000801);
  push_be32(labels, 2);
  labels.push_back(3);
  labels.push_back(4);
  write_file(dir / "mini-images.idx", images);
  write_file(dir / "mini-labels.idx", labels);

  const auto out = dir / "analysis_idx";
  REQUIRE(run("analyze --idx-images " + (dir / "mini-images.idx").string() + " --idx-labels " +
              (dir / "mini-labels.idx").string() + " --out " + out.string()) == 0);
  const auto summary = read_json(out / "summary.json");
  CHECK(summary.at("raw_integer_path").get<bool>() == true);
  CHECK(summary.at("n").get<int>() == 2);
}

TEST_CASE("ensemble grids are identical regardless of thread count") {
  const auto out1 = sandbox() / "ens1";
  const auto out3 = sandbox() / "ens3";
  const std::string args = "ensemble-grid --members 8 --grid-res 20 --sigma 0.3 --out ";
  REQUIRE(run(args + out1.string(), "GENACC_THREADS=1 ") == 0);
  REQUIRE(run(args + out3.string(), "GENACC_THREADS=3 ") == 0);

  CHECK(csv_header(out1 / "grid.csv") == "x1,x2,score_0,score_1,pred");
  CHECK(read_csv(out1 / "grid.csv").size() == 400);
  CHECK(slurp(out1 / "grid.csv") == slurp(out3 / "grid.csv"));
  CHECK(fs::exists(out1 / "points.csv"));
}

TEST_CASE("the sunset decision grid follows the parabola rule") {
  const auto out = sandbox() / "sunset";
  REQUIRE(run("sunset-demo --n 400 --grid-res 50 --out " + out.string()) == 0);
  const auto cfg = read_json(out / "run_config.json");
  CHECK(cfg.at("agreement").get<double>() > 0.98);
  CHECK(read_csv(out / "grid.csv").size() == 50 * 50);
  CHECK(fs::exists(out / "points.csv"));
}
