// mswap: online model-swapping L1D cache simulator.
//
//   mswap run --synthetic meabo3 --validate --out out/
//   mswap trace-gen --synthetic meabo3 --out meabo3.trace
//   mswap report --in out/

#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mswap/mswap.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

mswap::ModelKind model_or_throw(const std::string& name) {
  auto k = mswap::parse_model_kind(name);
  if (!k) {
    throw UsageError("unknown model '" + name + "' (expected fixed-rate, markov4 or markov8)");
  }
  return *k;
}

void add_cache_options(CLI::App* app, const std::string& level, mswap::CacheConfig& c) {
  app->add_option("--" + level + "-size", c.total_bytes, level + " capacity in bytes")->capture_default_str();
  app->add_option("--" + level + "-assoc", c.associativity, level + " associativity")->capture_default_str();
  app->add_option("--" + level + "-line", c.line_bytes, level + " line size in bytes")->capture_default_str();
  app->add_option("--" + level + "-latency", c.hit_latency, level + " hit latency in cycles")->capture_default_str();
}

struct RunOptions {
  mswap::RunConfig cfg;
  std::string trace;
  std::string synthetic;
  std::string models = "all";
  std::string force_model;
  std::uint64_t give_up_after = 0;
  std::string out = "mswap-out";
  bool quiet = false;
};

struct TraceGenOptions {
  std::string synthetic;
  std::string phases;
  std::uint64_t length = 100'000;
  std::uint64_t iterations = 3;
  bool markers = true;
  std::uint64_t seed = 42;
  std::uint64_t working_set = 0;
  std::string out;
};

struct ReportOptions {
  std::string in;
  std::string format = "text";
};

int cmd_run(RunOptions& o) {
  mswap::RunConfig& cfg = o.cfg;
  if (!o.trace.empty()) {
    cfg.trace_path = o.trace;
  }
  if (!o.synthetic.empty()) {
    cfg.synthetic = o.synthetic;
  }
  if (o.models != "all") {
    cfg.sim.controller.candidate_kinds.clear();
    for (const auto& name : split_list(o.models)) {
      cfg.sim.controller.candidate_kinds.push_back(model_or_throw(name));
    }
  }
  if (!o.force_model.empty()) {
    cfg.sim.controller.single_model_override = model_or_throw(o.force_model);
  }
  if (o.give_up_after > 0) {
    cfg.sim.controller.give_up_after = o.give_up_after;
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const mswap::LoadedTrace trace = mswap::load_trace(cfg);
  const auto runs = mswap::run_all(cfg, trace);
  mswap::write_report_files(o.out, cfg, trace, runs);
  if (!o.quiet) {
    std::cout << mswap::render_text(mswap::read_report(o.out));
    std::cout << "\nreports written to " << o.out << "\n";
  }
  return 0;
}

int cmd_trace_gen(const TraceGenOptions& o) {
  if (o.iterations == 0) {
    throw UsageError("--iterations must be >= 1");
  }
  if (o.synthetic.empty() == o.phases.empty()) {
    throw UsageError("exactly one of --synthetic or --phases is required");
  }
  mswap::GeneratedTrace g;
  if (!o.synthetic.empty()) {
    auto preset = mswap::find_preset(o.synthetic, o.seed);
    if (!preset) {
      throw UsageError("unknown synthetic preset '" + o.synthetic + "'");
    }
    g = mswap::generate_preset(*preset);
  } else {
    std::vector<mswap::SyntheticPhaseSpec> specs;
    for (const auto& name : split_list(o.phases)) {
      auto kind = mswap::parse_phase_kind(name);
      if (!kind) {
        throw UsageError("unknown phase kind '" + name + "'");
      }
      specs.push_back({*kind, o.length, o.seed + specs.size(), o.working_set});
    }
    try {
      g = mswap::generate_trace_with_layout(specs, o.iterations, o.markers, o.length);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot write " + o.out);
  }
  f << "# mswap synthetic trace, " << g.records.size() << " references\n";
  mswap::write_trace(f, g.records);
  f.flush();
  if (!f) {
    throw std::runtime_error("error writing " + o.out);
  }
  return 0;
}

int cmd_report(const ReportOptions& o) {
  const auto report = mswap::read_report(o.in);
  if (o.format == "json") {
    std::cout << report.dump(2) << "\n";
  } else if (o.format == "csv") {
    std::cout << mswap::render_scores_csv(report);
  } else {
    std::cout << mswap::render_text(report);
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online model-swapping L1D cache simulator"};
  app.require_subcommand(1);

  RunOptions run;
  auto& sim = run.cfg.sim;
  app.set_config("--config", "", "Config file: option = value lines under a [run] section; flags take precedence");
  CLI::App* run_cmd = app.add_subcommand("run", "Simulate a trace and write report files");
  run_cmd->fallthrough(); // accept --config after the subcommand name
  run_cmd->add_option("--trace", run.trace, "Trace file (R/W + hex address per line)");
  run_cmd->add_option("--synthetic", run.synthetic, "Synthetic preset (meabo3, meabo3-short)");
  run_cmd->add_option("--trace-seed", run.cfg.trace_seed, "Seed of the synthetic trace")->capture_default_str();
  run_cmd->add_option("--seed", sim.seed, "Simulation seed")->capture_default_str();
  run_cmd->add_option("--runs", run.cfg.runs, "Number of runs with consecutive seeds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run_cmd->add_option("--models", run.models, "Candidate models: all or a comma list")->capture_default_str();
  run_cmd->add_option("--force-model", run.force_model, "Train and swap in only this model");
  run_cmd->add_option("--train-intervals", sim.controller.train_intervals, "Training intervals per phase")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run_cmd->add_option("--give-up-after", run.give_up_after, "Abandon training after this many intervals (0: never)");
  run_cmd->add_flag("--validate", sim.validate, "Run the detailed hierarchy alongside as ground truth");
  run_cmd->add_option("--out", run.out, "Output directory")->capture_default_str();
  run_cmd->add_option("--reuse-cap", sim.reuse_cap, "Largest tracked reuse distance")->capture_default_str();
  run_cmd->add_option("--phase-threshold", sim.detector.threshold, "Signature distance threshold")->capture_default_str();
  run_cmd->add_option("--interval-len", sim.detector.interval_len, "References per interval")->capture_default_str();
  run_cmd->add_option("--sig-len", sim.detector.sig_len, "Signature length in bits")->capture_default_str();
  run_cmd->add_option("--drop-bits", sim.detector.drop_bits, "Low address bits ignored by the signature")
      ->capture_default_str();
  run_cmd->add_option("--stable-min", sim.detector.stable_min, "Stable intervals before a phase is recorded")
      ->capture_default_str();
  add_cache_options(run_cmd, "l1", sim.hierarchy.l1);
  add_cache_options(run_cmd, "l2", sim.hierarchy.l2);
  add_cache_options(run_cmd, "l3", sim.hierarchy.l3);
  run_cmd->add_option("--mem-latency", sim.hierarchy.memory_latency, "Memory latency in cycles")->capture_default_str();
  run_cmd->add_flag("--quiet", run.quiet, "Do not print the summary");

  TraceGenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("trace-gen", "Write a synthetic trace file");
  gen_cmd->add_option("--synthetic", gen.synthetic, "Preset name (meabo3, meabo3-short)");
  gen_cmd->add_option("--phases", gen.phases, "Comma list of high-locality, vector-add, random, marker");
  gen_cmd->add_option("--length", gen.length, "References per phase occurrence")->capture_default_str();
  gen_cmd->add_option("--iterations", gen.iterations, "Repetitions of the phase list")->capture_default_str();
  gen_cmd->add_option("--working-set", gen.working_set, "Working set in bytes (0: per-kind default)");
  gen_cmd->add_flag("--markers,!--no-markers", gen.markers, "Insert a marker phase after each phase");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output trace path")->required();

  ReportOptions rep;
  CLI::App* rep_cmd = app.add_subcommand("report", "Re-render a previous run's report");
  rep_cmd->add_option("--in", rep.in, "Run directory or report.json")->required();
  rep_cmd->add_option("--format", rep.format, "text, json or csv")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (run_cmd->parsed()) {
      return cmd_run(run);
    }
    if (gen_cmd->parsed()) {
      return cmd_trace_gen(gen);
    }
    return cmd_report(rep);
  } catch (const UsageError& e) {
    std::cerr << "mswap: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "mswap: " << e.what() << "\n";
    return kExitRuntime;
  }
}
