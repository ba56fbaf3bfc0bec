#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "rsevi/frame_io.hpp"
#include "test_util.hpp"

#ifdef RSEVI_CLI_PATH

using namespace rsevi;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(RSEVI_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_static_frames(const std::string& dir, int count, int h, int w) {
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(81);
  const Frame img = test::random_frame(h, w, rng);
  char name[32];
  for (int k = 0; k < count; ++k) {
    std::snprintf(name, sizeof name, "/f_%04d.pgm", k);
    write_pnm(img, dir + name);
  }
}

}  // namespace

TEST(Cli, StaticFramesProduceNoEvents) {
  test::TempDir dir("cli_static");
  write_static_frames(dir.file("gs"), 20, 8, 6);
  ASSERT_EQ(run("simulate --frames " + dir.file("gs") + " --fps 8 --out " + dir.file("sim")), 0);
  const auto m = nlohmann::json::parse(slurp(dir.file("sim/manifest.json")));
  EXPECT_EQ(m.at("events").at("count").get<int>(), 0);
  EXPECT_NEAR(m.at("rs_fps").get<double>(), 1.0, 1e-12);
}

TEST(Cli, ManifestRsRateForTallSensor) {
  test::TempDir dir("cli_rate");
  write_static_frames(dir.file("gs"), 260, 260, 2);
  ASSERT_EQ(run("simulate --frames " + dir.file("gs") + " --fps 120 --out " + dir.file("sim")), 0);
  const auto m = nlohmann::json::parse(slurp(dir.file("sim/manifest.json")));
  EXPECT_NEAR(m.at("rs_fps").get<double>(), 120.0 / 260.0, 1e-12);
}

TEST(Cli, SimulateRerunIsByteIdentical) {
  test::TempDir dir("cli_rerun");
  ASSERT_EQ(run("synth --out " + dir.file("gs") + " --height 16 --width 16"), 0);
  const std::string sim = "simulate --frames " + dir.file("gs") + " --fps 1920 --rs-start 0 --out ";
  ASSERT_EQ(run(sim + dir.file("a")), 0);
  ASSERT_EQ(run("--threads 3 " + sim + dir.file("b")), 0);
  for (const char* f : {"events.evs", "manifest.json", "rs_0000.frm", "rs_0001.frm"})
    EXPECT_EQ(slurp(dir.file(std::string("a/") + f)), slurp(dir.file(std::string("b/") + f))) << f;
}

TEST(Cli, StaticPairInterpolatesToInput) {
  test::TempDir dir("cli_interp");
  write_static_frames(dir.file("gs"), 20, 8, 6);
  ASSERT_EQ(run("simulate --frames " + dir.file("gs") + " --fps 8 --out " + dir.file("sim")), 0);
  ASSERT_EQ(run("interpolate --manifest " + dir.file("sim/manifest.json") +
                " --factor 2 --out " + dir.file("out")),
            0);
  const Frame rs = read_frame(dir.file("sim/rs_0000.frm"));
  for (const char* f : {"out/gs_0000.frm", "out/gs_0001.frm"})
    EXPECT_EQ(read_frame(dir.file(f)).data, rs.data) << f;
}

TEST(Cli, EvaluateIdenticalAndOffset) {
  test::TempDir dir("cli_eval");
  std::filesystem::create_directories(dir.file("a"));
  std::filesystem::create_directories(dir.file("b"));
  write_frm(Frame(16, 16, 1, 0.2), dir.file("a/x.frm"));
  write_frm(Frame(16, 16, 1, 0.2), dir.file("b/x.frm"));
  ASSERT_EQ(run("evaluate --pred " + dir.file("a") + " --gt " + dir.file("b") + " --out " +
                dir.file("same.csv")),
            0);
  EXPECT_NE(slurp(dir.file("same.csv")).find("99"), std::string::npos);
  write_frm(Frame(16, 16, 1, 0.3), dir.file("b/x.frm"));
  ASSERT_EQ(run("evaluate --pred " + dir.file("a") + " --gt " + dir.file("b") + " --out " +
                dir.file("off.csv")),
            0);
  std::istringstream rows(slurp(dir.file("off.csv")));
  std::string header, row;
  std::getline(rows, header);
  std::getline(rows, row);
  const double p = std::stod(row.substr(row.find(',') + 1));
  EXPECT_NEAR(p, 20.0, 1e-4);
}

TEST(Cli, ExitCodes) {
  test::TempDir dir("cli_exit");
  std::filesystem::create_directories(dir.file("empty1"));
  std::filesystem::create_directories(dir.file("empty2"));
  EXPECT_EQ(run("evaluate --pred " + dir.file("empty1") + " --gt " + dir.file("empty2")), 2);
  EXPECT_EQ(run("nosuchcommand"), 2);
  EXPECT_EQ(run("interpolate --manifest " + dir.file("missing.json") + " --out " + dir.file("o")), 2);

  write_static_frames(dir.file("gs"), 20, 8, 6);
  ASSERT_EQ(run("simulate --frames " + dir.file("gs") + " --fps 8 --out " + dir.file("sim")), 0);
  EXPECT_EQ(run("bandwidth --events " + dir.file("sim/events.evs") +
                " --rs-fps 4 --target-fps 128 --seconds 0"),
            2);
  // Windows that overlap are inconsistent.
  EXPECT_EQ(run("interpolate --manifest " + dir.file("sim/manifest.json") +
                " --rs0-window 0 1 --rs1-window 0.5 1.5 --out " + dir.file("o")),
            3);
  // Sizes that disagree with the events are inconsistent.
  write_frm(Frame(5, 5, 1, 0.5), dir.file("small.frm"));
  EXPECT_EQ(run("interpolate --manifest " + dir.file("sim/manifest.json") + " --rs0 " +
                dir.file("small.frm") + " --out " + dir.file("o")),
            3);
}

TEST(Cli, BandwidthEmptyEvents) {
  test::TempDir dir("cli_bw");
  write_static_frames(dir.file("gs"), 20, 8, 6);
  ASSERT_EQ(run("simulate --frames " + dir.file("gs") + " --fps 8 --out " + dir.file("sim")), 0);
  ASSERT_EQ(run("bandwidth --events " + dir.file("sim/events.evs") +
                " --rs-fps 4 --target-fps 128 --seconds 1 --out " + dir.file("bw.json")),
            0);
  const auto j = nlohmann::json::parse(slurp(dir.file("bw.json")));
  EXPECT_EQ(j.at("reduction_ratio").get<double>(), 0.96875);
  EXPECT_EQ(j.at("event_params").get<int>(), 0);
}

#endif
