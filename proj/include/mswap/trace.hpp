#pragma once

// Memory-trace records, the text trace format, and synthetic phased workloads.
//
// Trace file format: one record per line, "<op> <address>" with op R or W and
// a 0x-prefixed hexadecimal byte address. Lines starting with '#' are comments
// and blank lines are ignored.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mswap/random.hpp"

namespace mswap {

enum class Op : std::uint8_t { Read, Write };

struct TraceRecord {
  Op op = Op::Read;
  std::uint64_t address = 0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

class TraceParseError : public std::runtime_error {
public:
  TraceParseError(std::size_t line, const std::string& reason)
      : std::runtime_error("trace line " + std::to_string(line) + ": " + reason), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::optional<TraceRecord> parse_trace_line(std::string_view raw, std::size_t line_no) {
  const std::string_view line = trim(raw);
  if (line.empty() || line.front() == '#') {
    return std::nullopt;
  }
  TraceRecord rec;
  switch (line.front()) {
  case 'R':
    rec.op = Op::Read;
    break;
  case 'W':
    rec.op = Op::Write;
    break;
  default:
    throw TraceParseError(line_no, "invalid op code '" + std::string(1, line.front()) + "'");
  }
  if (line.size() < 2 || (line[1] != ' ' && line[1] != '\t')) {
    throw TraceParseError(line_no, "expected whitespace after op code");
  }
  const std::string_view addr = trim(line.substr(2));
  if (addr.size() < 3 || addr[0] != '0' || (addr[1] != 'x' && addr[1] != 'X')) {
    throw TraceParseError(line_no, "address must be 0x-prefixed hexadecimal");
  }
  const std::string_view digits = addr.substr(2);
  if (digits.size() > 16) {
    throw TraceParseError(line_no, "address exceeds 64 bits");
  }
  std::uint64_t value = 0;
  for (const char c : digits) {
    unsigned d = 0;
    if (c >= '0' && c <= '9') {
      d = static_cast<unsigned>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      d = static_cast<unsigned>(c - 'a' + 10);
    } else if (c >= 'A' && c <= 'F') {
      d = static_cast<unsigned>(c - 'A' + 10);
    } else {
      throw TraceParseError(line_no, "invalid hex digit '" + std::string(1, c) + "'");
    }
    value = (value << 4) | d;
  }
  rec.address = value;
  return rec;
}

} // namespace detail

/// Streaming reader over a text trace.
class TraceReader {
public:
  explicit TraceReader(std::istream& in) : in_(&in) {}

  /// Next record, or nullopt at end of input. Throws TraceParseError.
  std::optional<TraceRecord> next() {
    std::string line;
    while (std::getline(*in_, line)) {
      ++line_no_;
      if (auto rec = detail::parse_trace_line(line, line_no_)) {
        return rec;
      }
    }
    return std::nullopt;
  }

  std::size_t line_number() const noexcept { return line_no_; }

private:
  std::istream* in_;
  std::size_t line_no_ = 0;
};

inline std::vector<TraceRecord> read_trace(std::istream& in) {
  std::vector<TraceRecord> out;
  TraceReader reader(in);
  while (auto rec = reader.next()) {
    out.push_back(*rec);
  }
  return out;
}

inline std::vector<TraceRecord> read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open trace file: " + path);
  }
  return read_trace(in);
}

inline void write_trace(std::ostream& out, std::span<const TraceRecord> records) {
  char buf[32];
  for (const auto& r : records) {
    const int n = std::snprintf(buf, sizeof buf, "%c 0x%llx\n", r.op == Op::Read ? 'R' : 'W',
                                static_cast<unsigned long long>(r.address));
    out.write(buf, n);
  }
}

// ---------------------------------------------------------------------------
// Synthetic workloads

enum class PhaseKind : std::uint8_t { HighLocality, VectorAdd, RandomAccess, Marker };

inline const char* to_string(PhaseKind k) {
  switch (k) {
  case PhaseKind::HighLocality:
    return "high-locality";
  case PhaseKind::VectorAdd:
    return "vector-add";
  case PhaseKind::RandomAccess:
    return "random";
  case PhaseKind::Marker:
    return "marker";
  }
  return "?";
}

inline std::optional<PhaseKind> parse_phase_kind(std::string_view s) {
  for (PhaseKind k : {PhaseKind::HighLocality, PhaseKind::VectorAdd, PhaseKind::RandomAccess, PhaseKind::Marker}) {
    if (s == to_string(k)) {
      return k;
    }
  }
  return std::nullopt;
}

/// One synthetic phase. working_set_bytes of 0 selects the kind's default.
struct SyntheticPhaseSpec {
  PhaseKind kind = PhaseKind::Marker;
  std::uint64_t length = 100'000;
  std::uint64_t seed = 0;
  std::uint64_t working_set_bytes = 0;
};

/// A contiguous run of records produced by one phase spec.
struct TraceSegment {
  PhaseKind kind;
  std::size_t spec_index; // index into the caller's spec list, or npos for inserted markers
  std::uint64_t begin;
  std::uint64_t length;
};

struct GeneratedTrace {
  std::vector<TraceRecord> records;
  std::vector<TraceSegment> segments;
};

namespace synth {

inline constexpr std::uint64_t kWord = 8;
inline constexpr std::uint64_t kLine = 64;

inline constexpr std::uint64_t kHighLocalityBase = 0x0000'1000'0000ULL;
inline constexpr std::uint64_t kVectorBase = 0x0000'2000'0000ULL;
inline constexpr std::uint64_t kVectorArrayGap = 0x0000'0400'0000ULL;
inline constexpr std::uint64_t kRandomBase = 0x0000'4000'0000ULL;
inline constexpr std::uint64_t kMarkerBase = 0x0000'7fff'0000ULL;

/// Default working sets per kind.
inline std::uint64_t default_working_set(PhaseKind k) {
  switch (k) {
  case PhaseKind::HighLocality:
    return 16 * 1024; // 256 lines in a 16-column conflict grid
  case PhaseKind::VectorAdd:
    return 256 * 1024; // per array
  case PhaseKind::RandomAccess:
    return 40 * 1024;
  case PhaseKind::Marker:
    return 256;
  }
  return 0;
}

/// Column count of the HighLocality conflict grid. Rows sit one 4 KiB page
/// apart, so lines in a column share an L1 set.
inline constexpr std::uint64_t kGridColumns = 16;
inline constexpr std::uint64_t kGridRowPitch = 4096;
/// Probability that a HighLocality access stays on the current line.
inline constexpr double kNearProbability = 0.6;
inline constexpr double kHighLocalityWriteFraction = 0.3;
inline constexpr double kRandomWriteFraction = 0.25;
/// Probability that a VectorAdd run extends by another word within its line.
inline constexpr double kVectorRunContinue = 0.5;

/// Emits the reference stream of one phase.
class PhaseStream {
public:
  explicit PhaseStream(const SyntheticPhaseSpec& spec)
      : spec_(spec), rng_(spec.seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(spec.kind) + 1))),
        ws_(spec.working_set_bytes ? spec.working_set_bytes : default_working_set(spec.kind)) {}

  void emit(std::vector<TraceRecord>& out) {
    switch (spec_.kind) {
    case PhaseKind::Marker:
      return emit_marker(out);
    case PhaseKind::HighLocality:
      return emit_high_locality(out);
    case PhaseKind::VectorAdd:
      return emit_vector_add(out);
    case PhaseKind::RandomAccess:
      return emit_random(out);
    }
  }

private:
  void emit_marker(std::vector<TraceRecord>& out) {
    const std::uint64_t words = std::max<std::uint64_t>(1, ws_ / kWord);
    for (std::uint64_t i = 0; i < spec_.length; ++i) {
      out.push_back({Op::Read, kMarkerBase + (i % words) * kWord});
    }
  }

  // Bursts of reads and writes on one line, hopping between lines of a grid
  // whose columns oversubscribe their L1 sets.
  void emit_high_locality(std::vector<TraceRecord>& out) {
    const std::uint64_t lines = std::max<std::uint64_t>(1, ws_ / kLine);
    std::uint64_t line = 0;
    bool started = false;
    for (std::uint64_t i = 0; i < spec_.length; ++i) {
      if (!started || !rng_.next_bernoulli(kNearProbability)) {
        std::uint64_t next = rng_.next_below(lines);
        if (started && lines > 1 && next == line) {
          next = (next + 1 + rng_.next_below(lines - 1)) % lines;
        }
        line = next;
        started = true;
      }
      const std::uint64_t base = kHighLocalityBase + (line % kGridColumns) * kLine + (line / kGridColumns) * kGridRowPitch;
      const std::uint64_t word = rng_.next_below(2);
      const Op op = rng_.next_bernoulli(kHighLocalityWriteFraction) ? Op::Write : Op::Read;
      out.push_back({op, base + word * kWord});
    }
  }

  // c[i] = a[i] + b[i] one cache line at a time: each array touches a run of
  // words from the start of the line, then the loop moves to the next line.
  // Run lengths are geometric, so the end of a run is unpredictable from the
  // previous outcome alone.
  void emit_vector_add(std::vector<TraceRecord>& out) {
    const std::uint64_t elems = std::max<std::uint64_t>(1, ws_ / kWord);
    const std::uint64_t words_per_line = kLine / kWord;
    const std::uint64_t a = kVectorBase;
    const std::uint64_t b = a + kVectorArrayGap;
    const std::uint64_t c = b + kVectorArrayGap;
    std::uint64_t emitted = 0;
    std::uint64_t i = 0;
    while (emitted < spec_.length) {
      for (const auto& [array, op] : {std::pair{a, Op::Read}, std::pair{b, Op::Read}, std::pair{c, Op::Write}}) {
        std::uint64_t run = 1;
        while (run < words_per_line && rng_.next_bernoulli(kVectorRunContinue)) {
          ++run;
        }
        for (std::uint64_t k = 0; k < run && emitted < spec_.length; ++k) {
          out.push_back({op, array + ((i + k) % elems) * kWord});
          ++emitted;
        }
      }
      i = (i + words_per_line) % elems;
    }
  }

  void emit_random(std::vector<TraceRecord>& out) {
    const std::uint64_t lines = std::max<std::uint64_t>(1, ws_ / kLine);
    for (std::uint64_t i = 0; i < spec_.length; ++i) {
      const Op op = rng_.next_bernoulli(kRandomWriteFraction) ? Op::Write : Op::Read;
      out.push_back({op, kRandomBase + rng_.next_below(lines) * kLine});
    }
  }

  SyntheticPhaseSpec spec_;
  UniformSource rng_;
  std::uint64_t ws_;
};

} // namespace synth

inline void validate(const SyntheticPhaseSpec& spec) {
  if (spec.length == 0) {
    throw std::invalid_argument("synthetic phase length must be > 0");
  }
}

/// Repeats the phase list `iterations` times. With marker_between, a marker
/// phase follows every non-marker phase.
inline GeneratedTrace generate_trace_with_layout(std::span<const SyntheticPhaseSpec> phases, std::uint64_t iterations,
                                                 bool marker_between, std::uint64_t marker_length = 100'000) {
  if (phases.empty()) {
    throw std::invalid_argument("at least one synthetic phase is required");
  }
  if (iterations == 0) {
    throw std::invalid_argument("iterations must be >= 1");
  }
  for (const auto& p : phases) {
    validate(p);
  }
  if (marker_between && marker_length == 0) {
    throw std::invalid_argument("marker length must be > 0");
  }
  GeneratedTrace out;
  auto append = [&](const SyntheticPhaseSpec& spec, std::size_t index) {
    const std::uint64_t begin = out.records.size();
    synth::PhaseStream(spec).emit(out.records);
    out.segments.push_back({spec.kind, index, begin, out.records.size() - begin});
  };
  for (std::uint64_t it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < phases.size(); ++i) {
      SyntheticPhaseSpec spec = phases[i];
      spec.seed = spec.seed + it * 0x632be59bd9b4e019ULL;
      append(spec, i);
      if (marker_between && spec.kind != PhaseKind::Marker) {
        append({PhaseKind::Marker, marker_length, 0, 0}, static_cast<std::size_t>(-1));
      }
    }
  }
  return out;
}

inline std::vector<TraceRecord> generate_trace(std::span<const SyntheticPhaseSpec> phases, std::uint64_t iterations,
                                               bool marker_between) {
  return generate_trace_with_layout(phases, iterations, marker_between).records;
}

/// Named workload presets.
struct SyntheticPreset {
  std::vector<SyntheticPhaseSpec> phases;
  std::uint64_t iterations = 3;
  bool marker_between = true;
  std::uint64_t marker_length = 100'000;
};

/// Three computational phases (high locality, vector add, random), each run
/// three times with a marker phase after every one. Occurrences are 20
/// intervals long.
inline SyntheticPreset meabo3_preset(std::uint64_t seed, std::uint64_t phase_length = 200'000) {
  SyntheticPreset p;
  p.phases = {
      {PhaseKind::HighLocality, phase_length, seed, 0},
      {PhaseKind::VectorAdd, phase_length, seed + 1, 0},
      {PhaseKind::RandomAccess, phase_length, seed + 2, 0},
  };
  p.iterations = 3;
  p.marker_between = true;
  p.marker_length = phase_length;
  return p;
}

inline std::optional<SyntheticPreset> find_preset(std::string_view name, std::uint64_t seed) {
  if (name == "meabo3") {
    return meabo3_preset(seed);
  }
  if (name == "meabo3-short") {
    return meabo3_preset(seed, 100'000);
  }
  return std::nullopt;
}

inline GeneratedTrace generate_preset(const SyntheticPreset& p) {
  return generate_trace_with_layout(p.phases, p.iterations, p.marker_between, p.marker_length);
}

} // namespace mswap
