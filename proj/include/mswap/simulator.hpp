#pragma once

// The simulation loop: phase detection, the swappable L1D slot, the lower
// hierarchy, and measurement. With validation enabled a second, fully detailed
// hierarchy runs in lockstep as ground truth; it never feeds back into the
// swapped simulation.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mswap/cache.hpp"
#include "mswap/metrics.hpp"
#include "mswap/phase_detect.hpp"
#include "mswap/random.hpp"
#include "mswap/reuse.hpp"
#include "mswap/stat_models.hpp"
#include "mswap/swap_controller.hpp"
#include "mswap/trace.hpp"

namespace mswap {

struct SimulationConfig {
  HierarchyConfig hierarchy;
  PhaseDetectorConfig detector;
  ControllerConfig controller;
  std::uint64_t seed = 1;
  bool validate = false;
  std::uint64_t reuse_cap = 500;
};

/// L2-bound reuse histograms of one phase.
struct PhaseReuse {
  ReuseHistogram model_run;
  std::optional<ReuseHistogram> base_run;
};

struct SimulationResult {
  std::vector<IntervalRecord> intervals;
  HierarchyStats totals;
  std::optional<HierarchyStats> validation_totals;
  std::map<int, PhaseModelState> phases;
  std::uint64_t phases_discovered = 0;
  std::map<int, PhaseReuse> reuse; // keyed by interval phase label
  ReuseHistogram reuse_all;
  std::optional<ReuseHistogram> reuse_all_base;

  std::uint64_t swapped_intervals() const {
    std::uint64_t n = 0;
    for (const auto& r : intervals) {
      n += r.swapped() ? 1 : 0;
    }
    return n;
  }
};

class Simulation {
public:
  explicit Simulation(const SimulationConfig& cfg)
      : cfg_(cfg), hierarchy_(cfg.hierarchy), detector_(cfg.detector), controller_(cfg.controller, cfg.hierarchy.l1),
        rng_(cfg.seed), line_shift_(static_cast<unsigned>(std::countr_zero(cfg.hierarchy.l2.line_bytes))),
        reuse_all_(cfg.reuse_cap) {
    if (cfg_.validate) {
      validation_.emplace(cfg.hierarchy);
      base_tracker_.emplace();
      reuse_all_base_.emplace(cfg.reuse_cap);
    }
  }

  const SwapController& controller() const noexcept { return controller_; }
  const MemoryHierarchy& hierarchy() const noexcept { return hierarchy_; }

  void step(const TraceRecord& r) {
    const AccessContext ctx = proximity_.classify(r);
    const SlotResult res = controller_.on_access(r, ctx, hierarchy_, rng_);
    cur_.stats.add(res.access.level, res.access.cycles);
    ++cur_.references;
    const std::uint64_t line = r.address >> line_shift_;
    if (res.l1 == HitOutcome::Miss) {
      const std::int64_t d = tracker_.access(line);
      pending_model_.push_back(d);
      reuse_all_.add(d);
    }
    if (validation_) {
      const HitOutcome truth = validation_->l1().hit_check(r.address, r.op);
      const AccessResult v = validation_->complete(r, truth);
      cur_validation_.add(v.level, v.cycles);
      correct_ += truth == res.l1 ? 1 : 0;
      if (truth == HitOutcome::Miss) {
        const std::int64_t d = base_tracker_->access(line);
        pending_base_.push_back(d);
        reuse_all_base_->add(d);
      }
    }
    if (auto ev = detector_.observe(r.address)) {
      close_interval(ev->phase_id);
      controller_.on_interval_end(*ev);
    }
  }

  void run(std::span<const TraceRecord> trace) {
    for (const auto& r : trace) {
      step(r);
    }
  }

  /// Closes any partial trailing interval and returns the collected results.
  SimulationResult finish() {
    if (cur_.references > 0) {
      close_interval(-1);
    }
    SimulationResult out;
    out.intervals = std::move(intervals_);
    out.totals = hierarchy_.stats();
    if (validation_) {
      out.validation_totals = validation_->stats();
      out.reuse_all_base = reuse_all_base_;
    }
    out.phases = controller_.phases();
    out.phases_discovered = detector_.phase_table().size();
    out.reuse = std::move(reuse_);
    out.reuse_all = reuse_all_;
    return out;
  }

private:
  void close_interval(int phase_id) {
    const L1DSlotDirective& d = controller_.directive();
    cur_.interval_index = intervals_.size();
    cur_.phase_id = phase_id;
    cur_.directive_phase = d.phase_id;
    cur_.model = d.model;
    cur_.training = d.training;
    auto [it, inserted] = reuse_.try_emplace(phase_id, PhaseReuse{ReuseHistogram(cfg_.reuse_cap), std::nullopt});
    for (auto dist : pending_model_) {
      it->second.model_run.add(dist);
    }
    if (validation_) {
      cur_.accuracy = static_cast<double>(correct_) / static_cast<double>(cur_.references);
      cur_.validation_stats = cur_validation_;
      if (!it->second.base_run) {
        it->second.base_run.emplace(cfg_.reuse_cap);
      }
      for (auto dist : pending_base_) {
        it->second.base_run->add(dist);
      }
    }
    intervals_.push_back(cur_);
    cur_ = IntervalRecord{};
    cur_validation_ = HierarchyStats{};
    correct_ = 0;
    pending_model_.clear();
    pending_base_.clear();
  }

  SimulationConfig cfg_;
  MemoryHierarchy hierarchy_;
  PhaseDetector detector_;
  SwapController controller_;
  ProximityTracker proximity_;
  UniformSource rng_;
  unsigned line_shift_;

  std::optional<MemoryHierarchy> validation_;
  StackDistanceTracker tracker_;
  std::optional<StackDistanceTracker> base_tracker_;
  ReuseHistogram reuse_all_;
  std::optional<ReuseHistogram> reuse_all_base_;
  std::map<int, PhaseReuse> reuse_;

  std::vector<IntervalRecord> intervals_;
  IntervalRecord cur_;
  HierarchyStats cur_validation_;
  std::uint64_t correct_ = 0;
  std::vector<std::int64_t> pending_model_;
  std::vector<std::int64_t> pending_base_;
};

inline SimulationResult simulate(const SimulationConfig& cfg, std::span<const TraceRecord> trace) {
  Simulation sim(cfg);
  sim.run(trace);
  return sim.finish();
}

} // namespace mswap
