#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "mswap/report.hpp"

using namespace mswap;

namespace {

struct Fixture {
  RunConfig cfg;
  LoadedTrace trace;
  std::vector<SeededResult> runs;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture x;
    x.cfg.synthetic = "meabo3-short";
    x.cfg.sim.validate = true;
    x.cfg.runs = 2;
    x.trace = load_trace(x.cfg);
    x.runs = run_all(x.cfg, x.trace);
    return x;
  }();
  return f;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

} // namespace

TEST(Report, JsonContents) {
  const auto& f = fixture();
  const json j = build_report(f.cfg, f.trace, f.runs);
  EXPECT_EQ(j.at("references").get<std::uint64_t>(), f.trace.records.size());
  ASSERT_EQ(j.at("model_complexity").size(), 4u);
  EXPECT_EQ(j.at("model_complexity")[0].at("size_bytes").get<std::uint64_t>(), 8192u);
  ASSERT_EQ(j.at("runs").size(), 2u);
  const auto& run = j.at("runs")[0];
  EXPECT_TRUE(run.contains("percent_change"));
  EXPECT_TRUE(run.contains("per_phase_accuracy"));
  bool saw_markov_counts = false;
  for (const auto& p : run.at("phases")) {
    EXPECT_TRUE(p.contains("workload"));
    for (const auto& c : p.at("candidates")) {
      EXPECT_TRUE(c.contains("score"));
      if (c.contains("markov")) {
        saw_markov_counts = true;
        const auto n = c.at("markov").at("states").size();
        EXPECT_EQ(c.at("markov").at("counts").size(), n);
      }
    }
  }
  EXPECT_TRUE(saw_markov_counts);
  EXPECT_EQ(j.at("aggregate").at("per_phase_accuracy").begin()->at("runs").get<int>(), 2);
}

TEST(Report, IntervalsCsv) {
  const auto& f = fixture();
  std::ostringstream os;
  write_intervals_csv(os, f.runs);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("seed,interval_index,phase_id", 0), 0u);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
  }
  EXPECT_EQ(rows, f.runs[0].result.intervals.size() + f.runs[1].result.intervals.size());
}

TEST(Report, ReuseCsvCountsMatchHistograms) {
  const auto& f = fixture();
  std::ostringstream os;
  write_reuse_csv(os, {f.runs[0]});
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  std::uint64_t all_model = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) {
      cols.push_back(c);
    }
    ASSERT_EQ(cols.size(), 5u);
    if (cols[1] == "all" && cols[2] == "model") {
      all_model += std::stoull(cols[4]);
    }
  }
  EXPECT_EQ(all_model, f.runs[0].result.reuse_all.total());
}

TEST(Report, FilesAreByteIdenticalAcrossRuns) {
  const auto root = std::filesystem::temp_directory_path() / "mswap-report-test";
  std::filesystem::remove_all(root);
  for (const char* d : {"a", "b"}) {
    RunConfig cfg = fixture().cfg;
    const auto trace = load_trace(cfg);
    write_report_files(root / d, cfg, trace, run_all(cfg, trace));
  }
  for (const char* name : {"report.json", "intervals.csv", "reuse_histograms.csv"}) {
    const auto a = slurp(root / "a" / name);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(root / "b" / name)) << name;
  }
  const json j = read_report(root / "a");
  const std::string text = render_text(j);
  EXPECT_NE(text.find("Model complexity"), std::string::npos);
  EXPECT_NE(text.find("change vs detailed"), std::string::npos);
  EXPECT_NE(render_scores_csv(j).find("markov8"), std::string::npos);
  std::filesystem::remove_all(root);
}
