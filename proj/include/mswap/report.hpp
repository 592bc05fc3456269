#pragma once

// Report files: report.json (configuration, aggregates, per-phase scores and
// chosen models), intervals.csv and reuse_histograms.csv. Output is a pure
// function of its inputs so that identical runs give identical bytes.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mswap/metrics.hpp"
#include "mswap/run.hpp"

namespace mswap {

using json = nlohmann::ordered_json;

namespace detail {

inline json to_json(const CacheConfig& c) {
  return {{"size_bytes", c.total_bytes},
          {"associativity", c.associativity},
          {"line_bytes", c.line_bytes},
          {"hit_latency", c.hit_latency}};
}

inline json to_json(const HierarchyStats& s) {
  return {{"l1_hits", s.l1_hits},
          {"l2_hits", s.l2_hits},
          {"l3_hits", s.l3_hits},
          {"mem_accesses", s.mem_accesses},
          {"cycles", s.cycles}};
}

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json to_json(const PercentChange& p) {
  return {{"l1_hits", optional_number(p.l1_hits)},
          {"l2_hits", optional_number(p.l2_hits)},
          {"l3_hits", optional_number(p.l3_hits)},
          {"cycles", optional_number(p.cycles)}};
}

inline json config_json(const RunConfig& cfg) {
  const auto& sim = cfg.sim;
  json candidates = json::array();
  for (ModelKind k : sim.controller.effective_candidates()) {
    candidates.push_back(to_string(k));
  }
  json out;
  if (cfg.trace_path) {
    out["trace"] = *cfg.trace_path;
  } else {
    out["synthetic"] = *cfg.synthetic;
    out["trace_seed"] = cfg.trace_seed;
  }
  out["seed"] = sim.seed;
  out["runs"] = cfg.runs;
  out["validate"] = sim.validate;
  out["hierarchy"] = {{"l1", to_json(sim.hierarchy.l1)},
                      {"l2", to_json(sim.hierarchy.l2)},
                      {"l3", to_json(sim.hierarchy.l3)},
                      {"memory_latency", sim.hierarchy.memory_latency}};
  out["detector"] = {{"threshold", sim.detector.threshold},
                     {"interval_len", sim.detector.interval_len},
                     {"sig_len", sim.detector.sig_len},
                     {"drop_bits", sim.detector.drop_bits},
                     {"stable_min", sim.detector.stable_min}};
  out["controller"] = {
      {"train_intervals", sim.controller.train_intervals},
      {"candidates", candidates},
      {"give_up_after", sim.controller.give_up_after ? json(*sim.controller.give_up_after) : json(nullptr)},
      {"force_model", sim.controller.single_model_override ? json(to_string(*sim.controller.single_model_override))
                                                           : json(nullptr)}};
  out["reuse_cap"] = sim.reuse_cap;
  return out;
}

template <std::size_t N>
json markov_json(const MarkovModel<N>& m) {
  json states = json::array();
  for (std::size_t s = 0; s < N; ++s) {
    states.push_back(MarkovModel<N>::state_name(s));
  }
  json counts = json::array();
  for (const auto& row : m.counts()) {
    counts.push_back(json(std::vector<std::uint64_t>(row.begin(), row.end())));
  }
  return {{"states", states}, {"counts", counts}};
}

inline json candidate_json(const CandidateModel& c) {
  json out;
  out["model"] = to_string(c.model.kind());
  if (c.score) {
    out["accuracy"] = c.score->vector.accuracy;
    out["near_miss_ratio"] = c.score->vector.near_miss_ratio;
    out["size_fraction"] = c.score->vector.size_fraction;
    out["complexity_fraction"] = c.score->vector.complexity_fraction;
    out["score"] = c.score->scalar;
  }
  out["shadow"] = {{"correct", c.shadow.correct_predictions},
                   {"predictions", c.shadow.total_predictions},
                   {"model_near_misses", c.shadow.model_near_misses},
                   {"base_near_misses", c.shadow.base_near_misses}};
  if (const auto* f = c.model.as<FixedHitRateModel>()) {
    out["hit_rate"] = f->hit_rate();
  } else if (const auto* m4 = c.model.as<Markov4Model>()) {
    out["markov"] = markov_json(*m4);
  } else if (const auto* m8 = c.model.as<Markov8Model>()) {
    out["markov"] = markov_json(*m8);
  }
  return out;
}

inline json run_json(const SeededResult& sr, const LoadedTrace& trace, const RunConfig& cfg) {
  const SimulationResult& r = sr.result;
  const auto kinds = dominant_kinds(r, trace.segments, cfg.sim.detector.interval_len);
  json out;
  out["seed"] = sr.seed;
  out["intervals"] = r.intervals.size();
  out["swapped_intervals"] = r.swapped_intervals();
  out["swapped_fraction"] =
      r.intervals.empty() ? 0.0 : static_cast<double>(r.swapped_intervals()) / static_cast<double>(r.intervals.size());
  out["phases_discovered"] = r.phases_discovered;
  out["totals"] = to_json(r.totals);
  if (r.validation_totals) {
    out["base_totals"] = to_json(*r.validation_totals);
    out["percent_change"] = to_json(percent_change(r.totals, *r.validation_totals));
    json acc = json::object();
    for (const auto& [phase, a] : per_phase_accuracy(std::span<const IntervalRecord>(r.intervals))) {
      acc[std::to_string(phase)] = a;
    }
    out["per_phase_accuracy"] = acc;
  }
  json phases = json::array();
  for (const auto& [id, st] : r.phases) {
    json p;
    p["phase_id"] = id;
    if (auto it = kinds.find(id); it != kinds.end()) {
      p["workload"] = to_string(it->second);
    }
    p["state"] = to_string(st.state);
    p["intervals_trained"] = st.intervals_trained;
    p["chosen"] = st.chosen ? json(to_string(*st.chosen)) : json(nullptr);
    json cands = json::array();
    for (const auto& c : st.candidates) {
      cands.push_back(candidate_json(c));
    }
    p["candidates"] = cands;
    phases.push_back(p);
  }
  out["phases"] = phases;
  return out;
}

inline json aggregate_json(const std::vector<SeededResult>& runs) {
  json out;
  std::vector<std::vector<IntervalRecord>> records;
  std::map<std::string, std::vector<double>> deltas;
  for (const auto& sr : runs) {
    if (!sr.result.validation_totals) {
      return out;
    }
    records.push_back(sr.result.intervals);
    const PercentChange p = percent_change(sr.result.totals, *sr.result.validation_totals);
    for (const auto& [name, v] : {std::pair{"l1_hits", p.l1_hits}, std::pair{"l2_hits", p.l2_hits},
                                  std::pair{"l3_hits", p.l3_hits}, std::pair{"cycles", p.cycles}}) {
      if (v) {
        deltas[name].push_back(*v);
      }
    }
  }
  json acc = json::object();
  for (const auto& [phase, ms] : per_phase_accuracy(std::span<const std::vector<IntervalRecord>>(records))) {
    acc[std::to_string(phase)] = {{"mean", ms.mean}, {"stddev", ms.stddev}, {"runs", ms.samples}};
  }
  out["per_phase_accuracy"] = acc;
  json pc = json::object();
  for (const char* name : {"l1_hits", "l2_hits", "l3_hits", "cycles"}) {
    auto it = deltas.find(name);
    if (it == deltas.end()) {
      pc[name] = nullptr;
    } else {
      const MeanStd ms = mean_std(it->second);
      pc[name] = {{"mean", ms.mean}, {"stddev", ms.stddev}};
    }
  }
  out["percent_change"] = pc;
  return out;
}

inline std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

} // namespace detail

/// The full report.json document.
inline json build_report(const RunConfig& cfg, const LoadedTrace& trace, const std::vector<SeededResult>& runs) {
  json out;
  out["source"] = trace.source;
  out["references"] = trace.records.size();
  out["config"] = detail::config_json(cfg);
  json table = json::array();
  table.push_back({{"model", "base"},
                   {"size_bytes", base_model_size_bytes(cfg.sim.hierarchy.l1)},
                   {"comparisons", base_model_comparisons(cfg.sim.hierarchy.l1)}});
  for (ModelKind k : kAllModelKinds) {
    table.push_back(
        {{"model", to_string(k)}, {"size_bytes", model_size_bytes(k)}, {"comparisons", model_hit_check_comparisons(k)}});
  }
  out["model_complexity"] = table;
  json rs = json::array();
  for (const auto& sr : runs) {
    rs.push_back(detail::run_json(sr, trace, cfg));
  }
  out["runs"] = rs;
  if (cfg.sim.validate) {
    out["aggregate"] = detail::aggregate_json(runs);
  }
  return out;
}

inline void write_intervals_csv(std::ostream& os, const std::vector<SeededResult>& runs) {
  os << "seed,interval_index,phase_id,directive_phase,slot,training,references,l1_hits,l2_hits,l3_hits,"
        "mem_accesses,cycles,accuracy\n";
  for (const auto& sr : runs) {
    for (const auto& r : sr.result.intervals) {
      os << sr.seed << ',' << r.interval_index << ',' << r.phase_id << ',' << r.directive_phase << ','
         << (r.model ? to_string(*r.model) : "base") << ',' << (r.training ? 1 : 0) << ',' << r.references << ','
         << r.stats.l1_hits << ',' << r.stats.l2_hits << ',' << r.stats.l3_hits << ',' << r.stats.mem_accesses << ','
         << r.stats.cycles << ',' << (r.accuracy ? detail::fixed(*r.accuracy) : "") << '\n';
    }
  }
}

/// One row per non-empty bucket. `stream` is "model" for the simulated L2
/// stream and "base" for the detailed reference run.
inline void write_reuse_csv(std::ostream& os, const std::vector<SeededResult>& runs) {
  os << "seed,phase_id,stream,distance,count\n";
  auto emit = [&os](std::uint64_t seed, const std::string& phase, const char* stream, const ReuseHistogram& h) {
    for (std::size_t d = 0; d < h.buckets.size(); ++d) {
      if (h.buckets[d]) {
        os << seed << ',' << phase << ',' << stream << ',' << d << ',' << h.buckets[d] << '\n';
      }
    }
    if (h.overflow) {
      os << seed << ',' << phase << ',' << stream << ",overflow," << h.overflow << '\n';
    }
    if (h.cold_count) {
      os << seed << ',' << phase << ',' << stream << ",cold," << h.cold_count << '\n';
    }
  };
  for (const auto& sr : runs) {
    for (const auto& [phase, pr] : sr.result.reuse) {
      emit(sr.seed, std::to_string(phase), "model", pr.model_run);
      if (pr.base_run) {
        emit(sr.seed, std::to_string(phase), "base", *pr.base_run);
      }
    }
    emit(sr.seed, "all", "model", sr.result.reuse_all);
    if (sr.result.reuse_all_base) {
      emit(sr.seed, "all", "base", *sr.result.reuse_all_base);
    }
  }
}

inline void write_text_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot write " + p.string());
  }
  f << content;
  if (!f) {
    throw std::runtime_error("error writing " + p.string());
  }
}

/// Writes report.json, intervals.csv and reuse_histograms.csv into `dir`.
inline void write_report_files(const std::filesystem::path& dir, const RunConfig& cfg, const LoadedTrace& trace,
                               const std::vector<SeededResult>& runs) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "report.json", build_report(cfg, trace, runs).dump(2) + "\n");
  std::ostringstream iv;
  write_intervals_csv(iv, runs);
  write_text_file(dir / "intervals.csv", iv.str());
  std::ostringstream rh;
  write_reuse_csv(rh, runs);
  write_text_file(dir / "reuse_histograms.csv", rh.str());
}

/// Human-readable tables from a report.json document.
inline std::string render_text(const json& report) {
  std::ostringstream os;
  char line[256];
  os << "source: " << report.value("source", "?") << "  references: " << report.value("references", 0) << "\n\n";

  os << "Model complexity\n";
  std::snprintf(line, sizeof line, "  %-12s %10s %12s\n", "model", "size (B)", "comparisons");
  os << line;
  for (const auto& row : report.at("model_complexity")) {
    std::snprintf(line, sizeof line, "  %-12s %10llu %12llu\n", row.at("model").get<std::string>().c_str(),
                  static_cast<unsigned long long>(row.at("size_bytes").get<std::uint64_t>()),
                  static_cast<unsigned long long>(row.at("comparisons").get<std::uint64_t>()));
    os << line;
  }

  auto pct = [](const json& v) {
    if (v.is_null()) {
      return std::string("n/a");
    }
    if (v.is_object()) {
      return format_percent(v.at("mean").get<double>());
    }
    return format_percent(v.get<double>());
  };

  for (const auto& run : report.at("runs")) {
    os << "\nRun seed " << run.at("seed").get<std::uint64_t>() << ": " << run.at("phases_discovered").get<std::uint64_t>()
       << " phases, " << run.at("swapped_intervals").get<std::uint64_t>() << "/" << run.at("intervals").get<std::uint64_t>()
       << " intervals swapped (" << detail::fixed(100.0 * run.at("swapped_fraction").get<double>(), 1) << "%)\n";
    std::snprintf(line, sizeof line, "  %-6s %-14s %-9s %-11s %9s %9s %9s %9s %9s\n", "phase", "workload", "state",
                  "model", "accuracy", "near-miss", "size", "complexity", "score");
    os << line;
    for (const auto& p : run.at("phases")) {
      const std::string chosen = p.at("chosen").is_null() ? "" : p.at("chosen").get<std::string>();
      for (const auto& c : p.at("candidates")) {
        const std::string model = c.at("model").get<std::string>();
        if (!c.contains("score")) {
          continue;
        }
        std::snprintf(line, sizeof line, "  %-6d %-14s %-9s %-11s %9.4f %9.4f %9.4f %9.4f %9.4f%s\n",
                      p.at("phase_id").get<int>(), p.value("workload", "").c_str(),
                      p.at("state").get<std::string>().c_str(), model.c_str(), c.at("accuracy").get<double>(),
                      c.at("near_miss_ratio").get<double>(), c.at("size_fraction").get<double>(),
                      c.at("complexity_fraction").get<double>(), c.at("score").get<double>(),
                      model == chosen ? "  *" : "");
        os << line;
      }
    }
    if (run.contains("percent_change")) {
      const auto& pc = run.at("percent_change");
      os << "  change vs detailed: L1 " << pct(pc.at("l1_hits")) << "  L2 " << pct(pc.at("l2_hits")) << "  L3 "
         << pct(pc.at("l3_hits")) << "  cycles " << pct(pc.at("cycles")) << "\n";
    }
  }

  if (report.contains("aggregate") && report.at("aggregate").contains("per_phase_accuracy")) {
    const auto& agg = report.at("aggregate");
    os << "\nMean per-phase accuracy over " << report.at("runs").size() << " run(s)\n";
    for (const auto& [phase, ms] : agg.at("per_phase_accuracy").items()) {
      std::snprintf(line, sizeof line, "  phase %-4s mean %.4f  stddev %.4f\n", phase.c_str(), ms.at("mean").get<double>(),
                    ms.at("stddev").get<double>());
      os << line;
    }
    const auto& pc = agg.at("percent_change");
    os << "Mean change vs detailed: L1 " << pct(pc.at("l1_hits")) << "  L2 " << pct(pc.at("l2_hits")) << "  L3 "
       << pct(pc.at("l3_hits")) << "  cycles " << pct(pc.at("cycles")) << "\n";
  }
  return os.str();
}

/// Per-phase candidate scores as CSV, from a report.json document.
inline std::string render_scores_csv(const json& report) {
  std::ostringstream os;
  os << "seed,phase_id,workload,model,chosen,accuracy,near_miss_ratio,size_fraction,complexity_fraction,score\n";
  for (const auto& run : report.at("runs")) {
    for (const auto& p : run.at("phases")) {
      const std::string chosen = p.at("chosen").is_null() ? "" : p.at("chosen").get<std::string>();
      for (const auto& c : p.at("candidates")) {
        if (!c.contains("score")) {
          continue;
        }
        const std::string model = c.at("model").get<std::string>();
        os << run.at("seed").get<std::uint64_t>() << ',' << p.at("phase_id").get<int>() << ','
           << p.value("workload", "") << ',' << model << ',' << (model == chosen ? 1 : 0) << ','
           << detail::fixed(c.at("accuracy").get<double>()) << ','
           << detail::fixed(c.at("near_miss_ratio").get<double>()) << ','
           << detail::fixed(c.at("size_fraction").get<double>()) << ','
           << detail::fixed(c.at("complexity_fraction").get<double>()) << ','
           << detail::fixed(c.at("score").get<double>()) << '\n';
      }
    }
  }
  return os.str();
}

inline json read_report(const std::filesystem::path& dir) {
  const auto p = std::filesystem::is_directory(dir) ? dir / "report.json" : dir;
  std::ifstream f(p);
  if (!f) {
    throw std::runtime_error("cannot read " + p.string());
  }
  return json::parse(f);
}

} // namespace mswap
