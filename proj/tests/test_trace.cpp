#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "mswap/cache.hpp"
#include "mswap/trace.hpp"

using namespace mswap;

TEST(TraceParse, ReadRecord) {
  std::istringstream in("R 0x7fff0040\n");
  auto recs = read_trace(in);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0], (TraceRecord{Op::Read, 0x7fff0040}));
}

TEST(TraceParse, WriteRecord) {
  std::istringstream in("W 0x10\n");
  auto recs = read_trace(in);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0], (TraceRecord{Op::Write, 0x10}));
}

TEST(TraceParse, BadOpReportsLine) {
  std::istringstream in("X 0x10\n");
  try {
    read_trace(in);
    FAIL() << "expected a parse error";
  } catch (const TraceParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(TraceParse, ErrorLineCountsCommentsAndBlanks) {
  std::istringstream in("# header\n\nR 0x10\nW zz\n");
  try {
    read_trace(in);
    FAIL() << "expected a parse error";
  } catch (const TraceParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(TraceParse, EmptyInputIsEmpty) {
  std::istringstream in("");
  EXPECT_TRUE(read_trace(in).empty());
  std::istringstream only_comments("# nothing\n\n   \n");
  EXPECT_TRUE(read_trace(only_comments).empty());
}

TEST(TraceParse, RejectsMissingPrefixAndTrailingJunk) {
  for (const char* bad : {"R 10\n", "R 0x\n", "R 0x10 extra\n", "R\n", "RW 0x10\n", "R 0x1ffffffffffffffff\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(read_trace(in), TraceParseError) << bad;
  }
}

TEST(TraceParse, StreamingReader) {
  std::istringstream in("R 0x1\n# c\nW 0xABC\n");
  TraceReader reader(in);
  auto a = reader.next();
  auto b = reader.next();
  auto c = reader.next();
  ASSERT_TRUE(a && b);
  EXPECT_EQ(*a, (TraceRecord{Op::Read, 0x1}));
  EXPECT_EQ(*b, (TraceRecord{Op::Write, 0xabc}));
  EXPECT_FALSE(c);
}

TEST(TraceParse, WriteThenReadRoundTrips) {
  const auto g = generate_preset(meabo3_preset(3, 20'000));
  std::ostringstream out;
  write_trace(out, g.records);
  std::istringstream in(out.str());
  EXPECT_EQ(read_trace(in), g.records);
}

TEST(Synthetic, MeaboLayout) {
  const auto g = generate_preset(meabo3_preset(1, 50'000));
  ASSERT_EQ(g.segments.size(), 18u);
  const PhaseKind expect[] = {PhaseKind::HighLocality, PhaseKind::VectorAdd, PhaseKind::RandomAccess};
  for (std::size_t i = 0; i < g.segments.size(); ++i) {
    if (i % 2 == 1) {
      EXPECT_EQ(g.segments[i].kind, PhaseKind::Marker);
    } else {
      EXPECT_EQ(g.segments[i].kind, expect[(i / 2) % 3]);
    }
    EXPECT_EQ(g.segments[i].length, 50'000u);
  }
  EXPECT_EQ(g.records.size(), 18u * 50'000u);
}

TEST(Synthetic, Deterministic) {
  const auto a = generate_preset(meabo3_preset(9, 30'000));
  const auto b = generate_preset(meabo3_preset(9, 30'000));
  EXPECT_EQ(a.records, b.records);
  const auto c = generate_preset(meabo3_preset(10, 30'000));
  EXPECT_NE(a.records, c.records);
}

TEST(Synthetic, IterationsDiffer) {
  const SyntheticPhaseSpec spec{PhaseKind::RandomAccess, 1000, 5, 0};
  const auto g = generate_trace_with_layout(std::span(&spec, 1), 2, false);
  ASSERT_EQ(g.records.size(), 2000u);
  EXPECT_FALSE(std::equal(g.records.begin(), g.records.begin() + 1000, g.records.begin() + 1000));
}

TEST(Synthetic, Errors) {
  std::vector<SyntheticPhaseSpec> none;
  EXPECT_THROW(generate_trace(none, 1, true), std::invalid_argument);
  std::vector<SyntheticPhaseSpec> one = {{PhaseKind::VectorAdd, 100, 1, 0}};
  EXPECT_THROW(generate_trace(one, 0, true), std::invalid_argument);
  std::vector<SyntheticPhaseSpec> empty_phase = {{PhaseKind::VectorAdd, 0, 1, 0}};
  EXPECT_THROW(generate_trace(empty_phase, 1, true), std::invalid_argument);
}

TEST(Synthetic, AddressesNonzero) {
  const auto g = generate_preset(meabo3_preset(2, 20'000));
  for (const auto& r : g.records) {
    ASSERT_NE(r.address, 0u);
  }
}

TEST(Synthetic, MarkerPhaseAlmostAllHits) {
  std::vector<SyntheticPhaseSpec> spec = {{PhaseKind::Marker, 10'000, 0, 0}};
  const auto recs = generate_trace(spec, 1, false);
  SetAssociativeCache l1;
  std::uint64_t hits = 0;
  for (const auto& r : recs) {
    hits += l1.hit_check(r.address, r.op) == HitOutcome::Hit;
  }
  EXPECT_GT(static_cast<double>(hits) / static_cast<double>(recs.size()), 0.99);
}

TEST(Synthetic, VectorAddIsThreeSequentialStreams) {
  std::vector<SyntheticPhaseSpec> spec = {{PhaseKind::VectorAdd, 30'000, 4, 0}};
  const auto recs = generate_trace(spec, 1, false);
  const std::uint64_t a = synth::kVectorBase;
  const std::uint64_t b = a + synth::kVectorArrayGap;
  const std::uint64_t c = b + synth::kVectorArrayGap;
  std::map<std::uint64_t, std::uint64_t> last; // stream base -> last address
  for (const auto& r : recs) {
    const std::uint64_t base = r.address >= c ? c : r.address >= b ? b : a;
    EXPECT_EQ(r.op == Op::Write, base == c);
    if (auto it = last.find(base); it != last.end()) {
      EXPECT_TRUE(r.address > it->second || r.address == base) << "stream moves forward or wraps";
    }
    last[base] = r.address;
  }
  EXPECT_EQ(last.size(), 3u);
}

TEST(Synthetic, HighLocalityWorkingSetIsSmall) {
  std::vector<SyntheticPhaseSpec> spec = {{PhaseKind::HighLocality, 50'000, 4, 0}};
  const auto recs = generate_trace(spec, 1, false);
  std::set<std::uint64_t> lines;
  std::uint64_t writes = 0;
  for (const auto& r : recs) {
    lines.insert(r.address / 64);
    writes += r.op == Op::Write;
  }
  EXPECT_EQ(lines.size(), synth::default_working_set(PhaseKind::HighLocality) / 64);
  EXPECT_GT(writes, 0u);
}

// Pearson chi-squared over line buckets, compared with the upper 0.001 tail
// via the Wilson-Hilferty normal approximation.
TEST(Synthetic, RandomAccessIsUniform) {
  const std::uint64_t ws = 64 * 256;
  std::vector<SyntheticPhaseSpec> spec = {{PhaseKind::RandomAccess, 200'000, 17, ws}};
  const auto recs = generate_trace(spec, 1, false);
  std::vector<double> counts(ws / 64, 0.0);
  for (const auto& r : recs) {
    ASSERT_EQ(r.address % 64, 0u);
    const std::uint64_t line = (r.address - synth::kRandomBase) / 64;
    ASSERT_LT(line, counts.size());
    counts[line] += 1.0;
  }
  const double expected = static_cast<double>(recs.size()) / static_cast<double>(counts.size());
  double chi2 = 0.0;
  for (double c : counts) {
    chi2 += (c - expected) * (c - expected) / expected;
  }
  const double k = static_cast<double>(counts.size() - 1);
  const double z = 3.0902; // upper 0.001 quantile of N(0,1)
  const double critical = k * std::pow(1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k)), 3.0);
  EXPECT_LT(chi2, critical);
}

TEST(Synthetic, PhaseKindNames) {
  for (PhaseKind k : {PhaseKind::HighLocality, PhaseKind::VectorAdd, PhaseKind::RandomAccess, PhaseKind::Marker}) {
    EXPECT_EQ(parse_phase_kind(to_string(k)), k);
  }
  EXPECT_FALSE(parse_phase_kind("loop"));
}
