#pragma once

// Per-phase train-then-swap state machine that owns the L1D slot.
//
//   Unseen --(phase identified)--> Training --(train_intervals done)--> Swapped
//                                     |
//                                     +--(give_up_after reached first)--> GivenUp
//
// Transitions happen only at interval boundaries. The directive produced at a
// boundary applies to the next interval, which is assumed to continue the
// phase that just ended.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mswap/cache.hpp"
#include "mswap/evaluate.hpp"
#include "mswap/phase_detect.hpp"
#include "mswap/random.hpp"
#include "mswap/stat_models.hpp"

namespace mswap {

struct ControllerConfig {
  std::uint64_t train_intervals = 2;
  std::vector<ModelKind> candidate_kinds{kAllModelKinds.begin(), kAllModelKinds.end()};
  std::optional<std::uint64_t> give_up_after;
  std::optional<ModelKind> single_model_override;

  void validate() const {
    if (train_intervals == 0) {
      throw std::invalid_argument("train_intervals must be >= 1");
    }
    if (!single_model_override && candidate_kinds.empty()) {
      throw std::invalid_argument("at least one candidate model is required");
    }
    if (give_up_after && *give_up_after == 0) {
      throw std::invalid_argument("give_up_after must be >= 1 when set");
    }
  }

  /// Candidates actually trained, in enum order with duplicates removed.
  std::vector<ModelKind> effective_candidates() const {
    if (single_model_override) {
      return {*single_model_override};
    }
    std::vector<ModelKind> out;
    for (ModelKind k : kAllModelKinds) {
      if (std::find(candidate_kinds.begin(), candidate_kinds.end(), k) != candidate_kinds.end()) {
        out.push_back(k);
      }
    }
    return out;
  }
};

enum class PhaseState : std::uint8_t { Unseen, Training, Swapped, GivenUp };

inline const char* to_string(PhaseState s) {
  switch (s) {
  case PhaseState::Unseen:
    return "unseen";
  case PhaseState::Training:
    return "training";
  case PhaseState::Swapped:
    return "swapped";
  case PhaseState::GivenUp:
    return "given-up";
  }
  return "?";
}

struct CandidateModel {
  explicit CandidateModel(ModelKind k) : model(k) {}

  StatModel model;
  ShadowStats shadow;
  std::optional<ModelScore> score;
};

struct PhaseModelState {
  PhaseState state = PhaseState::Unseen;
  std::uint64_t intervals_trained = 0;
  std::vector<CandidateModel> candidates;
  std::optional<ModelKind> chosen;

  CandidateModel* find(ModelKind k) {
    for (auto& c : candidates) {
      if (c.model.kind() == k) {
        return &c;
      }
    }
    return nullptr;
  }
  const CandidateModel* find(ModelKind k) const { return const_cast<PhaseModelState*>(this)->find(k); }
};

/// What occupies the L1D slot for the coming interval.
struct L1DSlotDirective {
  int phase_id = -1;
  std::optional<ModelKind> model; // empty: detailed base cache
  bool training = false;          // base interval that also shadow-trains phase_id

  bool uses_base() const noexcept { return !model.has_value(); }
  friend bool operator==(const L1DSlotDirective&, const L1DSlotDirective&) = default;
};

struct SlotResult {
  AccessResult access;
  HitOutcome l1 = HitOutcome::Miss;
  std::optional<HitOutcome> truth; // detailed outcome, when the base model ran
};

class SwapController {
public:
  explicit SwapController(const ControllerConfig& cfg = {}, const CacheConfig& base_l1 = {})
      : cfg_(cfg), base_l1_(base_l1), candidates_(cfg.effective_candidates()) {
    cfg_.validate();
  }

  const ControllerConfig& config() const noexcept { return cfg_; }
  const L1DSlotDirective& directive() const noexcept { return directive_; }
  const std::map<int, PhaseModelState>& phases() const noexcept { return phases_; }

  const PhaseModelState* phase(int id) const {
    auto it = phases_.find(id);
    return it == phases_.end() ? nullptr : &it->second;
  }

  /// Interval boundary: account the interval that just ran, then pick the
  /// slot occupant for the next one.
  L1DSlotDirective on_interval_end(const PhaseEvent& event) {
    if (directive_.training) {
      PhaseModelState& trained = phases_.at(directive_.phase_id);
      ++trained.intervals_trained;
      if (trained.intervals_trained >= cfg_.train_intervals) {
        finish_training(trained);
      } else if (cfg_.give_up_after && trained.intervals_trained >= *cfg_.give_up_after) {
        trained.state = PhaseState::GivenUp;
      }
    }

    L1DSlotDirective next;
    next.phase_id = event.phase_id;
    if (event.phase_id >= 0) {
      PhaseModelState& st = state_for(event.phase_id);
      if (st.state == PhaseState::Unseen) {
        st.state = PhaseState::Training;
      }
      if (st.state == PhaseState::Training) {
        next.training = true;
      } else if (st.state == PhaseState::Swapped) {
        next.model = st.chosen;
      }
    }
    directive_ = next;
    return directive_;
  }

  /// One L1D access under the current directive. Misses continue into the
  /// lower levels of `hierarchy`.
  SlotResult on_access(const TraceRecord& r, const AccessContext& ctx, MemoryHierarchy& hierarchy, UniformSource& rng) {
    SlotResult out;
    if (directive_.uses_base()) {
      const HitOutcome actual = hierarchy.l1().hit_check(r.address, r.op);
      if (directive_.training) {
        for (auto& c : phases_.at(directive_.phase_id).candidates) {
          // Predict before training so accuracy measures generalization.
          const HitOutcome predicted = c.model.predict(ctx, rng.next_unit());
          c.model.train(ctx, actual);
          record_shadow(c.shadow, predicted, actual, ctx.proximity);
        }
      }
      out.l1 = actual;
      out.truth = actual;
    } else {
      CandidateModel* c = phases_.at(directive_.phase_id).find(*directive_.model);
      out.l1 = c->model.hit_check(ctx, rng);
    }
    out.access = hierarchy.complete(r, out.l1);
    return out;
  }

private:
  PhaseModelState& state_for(int id) {
    auto [it, inserted] = phases_.try_emplace(id);
    if (inserted) {
      for (ModelKind k : candidates_) {
        it->second.candidates.emplace_back(k);
      }
    }
    return it->second;
  }

  void finish_training(PhaseModelState& st) {
    std::map<ModelKind, double> scalar;
    for (auto& c : st.candidates) {
      c.score = score(c.shadow, c.model.kind(), base_l1_);
      scalar[c.model.kind()] = c.score->scalar;
    }
    st.chosen = select_best(scalar);
    st.state = PhaseState::Swapped;
  }

  ControllerConfig cfg_;
  CacheConfig base_l1_;
  std::vector<ModelKind> candidates_;
  std::map<int, PhaseModelState> phases_;
  L1DSlotDirective directive_;
};

} // namespace mswap
