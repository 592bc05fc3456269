#pragma once

// One invocation of the tool: where the trace comes from, how the simulator
// is configured, and which simulation seeds to run.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mswap/simulator.hpp"
#include "mswap/trace.hpp"

namespace mswap {

struct RunConfig {
  std::optional<std::string> trace_path;
  std::optional<std::string> synthetic; // preset name
  std::uint64_t trace_seed = 42;        // synthetic traces only
  SimulationConfig sim;
  std::uint64_t runs = 1; // seeds sim.seed, sim.seed + 1, ...

  void validate() const {
    if (trace_path.has_value() == synthetic.has_value()) {
      throw std::invalid_argument("exactly one of a trace file or a synthetic preset is required");
    }
    if (synthetic && !find_preset(*synthetic, trace_seed)) {
      throw std::invalid_argument("unknown synthetic preset '" + *synthetic + "'");
    }
    if (runs == 0) {
      throw std::invalid_argument("runs must be >= 1");
    }
    sim.hierarchy.validate();
    sim.detector.validate();
    sim.controller.validate();
  }
};

struct LoadedTrace {
  std::string source;
  std::vector<TraceRecord> records;
  std::vector<TraceSegment> segments; // synthetic traces only
};

inline LoadedTrace load_trace(const RunConfig& cfg) {
  LoadedTrace out;
  if (cfg.trace_path) {
    out.source = *cfg.trace_path;
    out.records = read_trace(*cfg.trace_path);
    return out;
  }
  auto preset = find_preset(*cfg.synthetic, cfg.trace_seed);
  if (!preset) {
    throw std::invalid_argument("unknown synthetic preset '" + *cfg.synthetic + "'");
  }
  GeneratedTrace g = generate_preset(*preset);
  out.source = "synthetic:" + *cfg.synthetic;
  out.records = std::move(g.records);
  out.segments = std::move(g.segments);
  return out;
}

struct SeededResult {
  std::uint64_t seed = 0;
  SimulationResult result;
};

inline std::vector<SeededResult> run_all(const RunConfig& cfg, const LoadedTrace& trace) {
  cfg.validate();
  std::vector<SeededResult> out;
  for (std::uint64_t i = 0; i < cfg.runs; ++i) {
    SimulationConfig sc = cfg.sim;
    sc.seed = cfg.sim.seed + i;
    out.push_back({sc.seed, simulate(sc, trace.records)});
  }
  return out;
}

/// Most frequent synthetic workload kind among the intervals of each phase.
/// Intervals are attributed to the segment holding their first reference.
inline std::map<int, PhaseKind> dominant_kinds(const SimulationResult& r, std::span<const TraceSegment> segments,
                                               std::uint64_t interval_len) {
  std::map<int, std::map<PhaseKind, std::uint64_t>> votes;
  std::size_t seg = 0;
  for (const auto& rec : r.intervals) {
    const std::uint64_t first = rec.interval_index * interval_len;
    while (seg < segments.size() && segments[seg].begin + segments[seg].length <= first) {
      ++seg;
    }
    if (seg == segments.size() || rec.phase_id < 0) {
      continue;
    }
    ++votes[rec.phase_id][segments[seg].kind];
  }
  std::map<int, PhaseKind> out;
  for (const auto& [phase, counts] : votes) {
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
      if (it->second > best->second) {
        best = it;
      }
    }
    out[phase] = best->first;
  }
  return out;
}

} // namespace mswap
