#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

// ctest runs each test in its own process, so each gets its own directory.
fs::path workdir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const auto d = fs::temp_directory_path() / "mswap-cli-test" / info->name();
  if (!fs::exists(d)) {
    fs::create_directories(d);
  }
  return d;
}

int mswap(const std::string& args) {
  const std::string cmd = std::string(MSWAP_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

nlohmann::json report(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "report.json")); }

std::string path(const char* name) { return (workdir() / name).string(); }

} // namespace

TEST(Cli, TraceFileRunIsReproducible) {
  ASSERT_EQ(mswap("trace-gen --phases high-locality,vector-add --length 20000 --iterations 2 --seed 3 --out " +
                  path("t.trace")),
            0);
  ASSERT_EQ(mswap("trace-gen --phases high-locality,vector-add --length 20000 --iterations 2 --seed 3 --out " +
                  path("t2.trace")),
            0);
  EXPECT_EQ(slurp(path("t.trace")), slurp(path("t2.trace")));
  ASSERT_EQ(mswap("run --trace " + path("t.trace") + " --seed 1 --quiet --out " + path("r1")), 0);
  ASSERT_EQ(mswap("run --trace " + path("t.trace") + " --seed 1 --quiet --out " + path("r2")), 0);
  for (const char* f : {"report.json", "intervals.csv", "reuse_histograms.csv"}) {
    EXPECT_EQ(slurp(workdir() / "r1" / f), slurp(workdir() / "r2" / f)) << f;
  }
}

TEST(Cli, ForcedModelReportsAccuracy) {
  ASSERT_EQ(mswap("run --synthetic meabo3-short --force-model fixed-rate --validate --quiet --out " + path("forced")), 0);
  const auto j = report(workdir() / "forced");
  const auto& run = j.at("runs")[0];
  EXPECT_FALSE(run.at("per_phase_accuracy").empty());
  for (const auto& p : run.at("phases")) {
    EXPECT_EQ(p.at("candidates").size(), 1u);
    EXPECT_EQ(p.at("chosen"), "fixed-rate");
  }
}

TEST(Cli, ChosenModelsOnMeabo) {
  ASSERT_EQ(mswap("run --synthetic meabo3 --models all --validate --quiet --out " + path("all")), 0);
  const auto j = report(workdir() / "all");
  std::map<std::string, std::string> chosen;
  for (const auto& p : j.at("runs")[0].at("phases")) {
    chosen[p.at("workload")] = p.at("chosen");
  }
  EXPECT_EQ(chosen["marker"], "fixed-rate");
  EXPECT_EQ(chosen["high-locality"], "markov8");
  EXPECT_EQ(chosen["vector-add"], "markov8");
}

TEST(Cli, ConfigFileWithFlagOverride) {
  {
    std::ofstream cfg(path("run.ini"));
    cfg << "# run settings\n[run]\nsynthetic = \"meabo3-short\"\nseed = 77\ntrain-intervals = 3\n";
  }
  ASSERT_EQ(mswap("run --config " + path("run.ini") + " --seed 5 --quiet --out " + path("cfg")), 0);
  ASSERT_EQ(mswap("--config " + path("run.ini") + " run --quiet --out " + path("cfg77")), 0);
  EXPECT_EQ(report(workdir() / "cfg77").at("config").at("seed"), 77);
  const auto j = report(workdir() / "cfg");
  EXPECT_EQ(j.at("config").at("seed"), 5);
  EXPECT_EQ(j.at("config").at("controller").at("train_intervals"), 3);
  EXPECT_EQ(j.at("config").at("synthetic"), "meabo3-short");
}

TEST(Cli, ReportSubcommand) {
  ASSERT_EQ(mswap("run --synthetic meabo3-short --quiet --out " + path("rep")), 0);
  EXPECT_EQ(mswap("report --in " + path("rep")), 0);
  EXPECT_EQ(mswap("report --in " + path("rep") + " --format csv"), 0);
  EXPECT_EQ(mswap("report --in " + path("rep") + " --format xml"), 1);
  EXPECT_EQ(mswap("report --in " + path("missing")), 2);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(mswap(""), 1);
  EXPECT_EQ(mswap("run --quiet"), 1) << "no trace source";
  EXPECT_EQ(mswap("run --synthetic meabo3 --trace x --quiet"), 1);
  EXPECT_EQ(mswap("run --synthetic nope --quiet"), 1);
  EXPECT_EQ(mswap("run --synthetic meabo3 --force-model markov9 --quiet"), 1);
  EXPECT_EQ(mswap("run --synthetic meabo3 --bogus"), 1);
  EXPECT_EQ(mswap("run --synthetic meabo3 --l1-size 1000 --quiet"), 1);
  EXPECT_EQ(mswap("trace-gen --synthetic meabo3 --iterations 0 --out " + path("zero.trace")), 1);
  EXPECT_EQ(mswap("trace-gen --phases loops --out " + path("bad.trace")), 1);
}

TEST(Cli, RuntimeErrors) {
  {
    std::ofstream bad(path("bad.trace"));
    bad << "R 0x10\nQ 0x20\n";
  }
  EXPECT_EQ(mswap("run --trace " + path("bad.trace") + " --quiet --out " + path("bad")), 2);
  EXPECT_EQ(mswap("run --trace " + path("absent.trace") + " --quiet --out " + path("bad")), 2);
  EXPECT_EQ(mswap("trace-gen --synthetic meabo3-short --out /nonexistent-dir/x.trace"), 2);
}
