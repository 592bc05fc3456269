#pragma once

// Statistical stand-ins for the detailed L1D: fixed hit rate, and 4- and
// 8-state Markov chains with access-restricted prediction.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "mswap/cache.hpp"
#include "mswap/random.hpp"

namespace mswap {

enum class Proximity : std::uint8_t { Near, Far };

/// Line granularity used for near/far classification, independent of the
/// simulated line size.
inline constexpr std::uint64_t kProximityLineBytes = 64;

struct AccessContext {
  Op op = Op::Read;
  std::uint64_t address = 0;
  Proximity proximity = Proximity::Far;
};

/// Classifies each access against the one before it in the L1D stream.
class ProximityTracker {
public:
  AccessContext classify(const TraceRecord& r) {
    const std::uint64_t line = r.address / kProximityLineBytes;
    const Proximity p = (has_last_ && line == last_line_) ? Proximity::Near : Proximity::Far;
    has_last_ = true;
    last_line_ = line;
    return {r.op, r.address, p};
  }

private:
  bool has_last_ = false;
  std::uint64_t last_line_ = 0;
};

enum class ModelKind : std::uint8_t { FixedRate, Markov4, Markov8 };

inline constexpr std::array<ModelKind, 3> kAllModelKinds = {ModelKind::FixedRate, ModelKind::Markov4,
                                                            ModelKind::Markov8};

inline const char* to_string(ModelKind k) {
  switch (k) {
  case ModelKind::FixedRate:
    return "fixed-rate";
  case ModelKind::Markov4:
    return "markov4";
  case ModelKind::Markov8:
    return "markov8";
  }
  return "?";
}

inline std::optional<ModelKind> parse_model_kind(std::string_view s) {
  if (s == "fixed-rate" || s == "fixed") {
    return ModelKind::FixedRate;
  }
  if (s == "markov4" || s == "m4") {
    return ModelKind::Markov4;
  }
  if (s == "markov8" || s == "m8") {
    return ModelKind::Markov8;
  }
  return std::nullopt;
}

/// Storage cost in bytes, as accounted for scoring.
constexpr std::uint64_t model_size_bytes(ModelKind k) {
  switch (k) {
  case ModelKind::FixedRate:
    return 16; // hit count + hit rate
  case ModelKind::Markov4:
    return 3 * 4 * 4 * 8;
  case ModelKind::Markov8:
    return 3 * 8 * 8 * 8;
  }
  return 0;
}

/// Comparisons per hit check.
constexpr std::uint64_t model_hit_check_comparisons(ModelKind k) {
  switch (k) {
  case ModelKind::FixedRate:
    return 1;
  case ModelKind::Markov4:
    return 1;
  case ModelKind::Markov8:
    return 2; // near/far test + hit/miss draw
  }
  return 0;
}

class FixedHitRateModel {
public:
  static constexpr ModelKind kind = ModelKind::FixedRate;

  void train(const AccessContext&, HitOutcome actual) {
    ++total_;
    if (actual == HitOutcome::Hit) {
      ++hits_;
    }
    hit_rate_ = static_cast<double>(hits_) / static_cast<double>(total_);
  }

  /// Hit iff u < hit rate. An untrained model has rate 0.
  HitOutcome predict(const AccessContext&, double u) const { return u < hit_rate_ ? HitOutcome::Hit : HitOutcome::Miss; }

  void commit(const AccessContext&, HitOutcome) {}

  double hit_rate() const noexcept { return hit_rate_; }
  std::uint64_t hits() const noexcept { return hits_; }
  std::uint64_t total() const noexcept { return total_; }

private:
  std::uint64_t hits_ = 0;
  std::uint64_t total_ = 0;
  double hit_rate_ = 0.0;
};

/// Markov chain over {Read,Write} x {Hit,Miss} states, crossed with
/// {Near,Far} when N = 8.
///
/// State index layout: bit 0 = miss, bit 1 = write, bit 2 = far (N = 8 only).
/// Counts are the source of truth. The probability matrix and the restricted
/// prefix tables are caches rebuilt after training.
///
/// Prediction renormalizes the current row over the two states the context
/// allows. A row with no count in either falls back to the pooled column
/// counts; with no count anywhere the prediction is a miss.
template <std::size_t N>
class MarkovModel {
  static_assert(N == 4 || N == 8);

public:
  static constexpr ModelKind kind = N == 4 ? ModelKind::Markov4 : ModelKind::Markov8;
  static constexpr std::size_t kStates = N;
  static constexpr std::size_t kRestrictions = N / 2;

  static constexpr std::size_t state_of(Op op, HitOutcome h, Proximity p) {
    std::size_t s = (h == HitOutcome::Miss ? 1u : 0u) | (op == Op::Write ? 2u : 0u);
    if constexpr (N == 8) {
      s |= p == Proximity::Far ? 4u : 0u;
    }
    return s;
  }

  static constexpr HitOutcome outcome_of(std::size_t state) { return (state & 1u) ? HitOutcome::Miss : HitOutcome::Hit; }

  /// The two states a prediction may land in under this context: (hit, miss).
  static constexpr std::array<std::size_t, 2> allowed(const AccessContext& ctx) {
    return {state_of(ctx.op, HitOutcome::Hit, ctx.proximity), state_of(ctx.op, HitOutcome::Miss, ctx.proximity)};
  }

  static constexpr std::size_t restriction_index(const AccessContext& ctx) { return allowed(ctx)[0] >> 1; }

  static std::string state_name(std::size_t s) {
    std::string name = (s & 2u) ? "W" : "R";
    name += (s & 1u) ? "M" : "H";
    if constexpr (N == 8) {
      name += (s & 4u) ? "-far" : "-near";
    }
    return name;
  }

  void train(const AccessContext& ctx, HitOutcome actual) {
    const std::size_t s = state_of(ctx.op, actual, ctx.proximity);
    if (last_state_) {
      ++counts_[*last_state_][s];
      dirty_ = true;
    }
    last_state_ = s;
  }

  /// Restricted prediction from the current state; does not move the chain.
  HitOutcome predict(const AccessContext& ctx, double u) const { return outcome_of(predict_state(ctx, u)); }

  std::size_t predict_state(const AccessContext& ctx, double u) const {
    refresh();
    const auto pair = allowed(ctx);
    const std::size_t r = restriction_index(ctx);
    double p_first = last_state_ ? restricted_[r][*last_state_] : -1.0;
    if (p_first < 0.0) {
      // The current row never led to either allowed state: fall back to how
      // often those states were entered from anywhere.
      p_first = fallback_[r];
    }
    if (p_first < 0.0) {
      return pair[1];
    }
    return u < p_first ? pair[0] : pair[1];
  }

  /// Moves the chain to the state a prediction selected.
  void commit(const AccessContext& ctx, HitOutcome predicted) {
    last_state_ = state_of(ctx.op, predicted, ctx.proximity);
  }

  std::uint64_t count(std::size_t from, std::size_t to) const { return counts_[from][to]; }
  const std::array<std::array<std::uint64_t, N>, N>& counts() const noexcept { return counts_; }
  std::optional<std::size_t> last_state() const noexcept { return last_state_; }
  void set_last_state(std::size_t s) { last_state_ = s; }

  /// Row-stochastic transition matrix; all-zero rows stay zero.
  const std::array<std::array<double, N>, N>& probabilities() const {
    refresh();
    return probs_;
  }

  /// Probability of the first (hit) state of the restricted pair for `row`,
  /// or -1 when neither allowed state has any count in that row.
  double restricted_hit_probability(std::size_t restriction, std::size_t row) const {
    refresh();
    return restricted_[restriction][row];
  }

  /// Same, pooled over all rows.
  double fallback_hit_probability(std::size_t restriction) const {
    refresh();
    return fallback_[restriction];
  }

private:
  void refresh() const {
    if (!dirty_) {
      return;
    }
    for (std::size_t i = 0; i < N; ++i) {
      std::uint64_t total = 0;
      for (std::size_t j = 0; j < N; ++j) {
        total += counts_[i][j];
      }
      for (std::size_t j = 0; j < N; ++j) {
        probs_[i][j] = total ? static_cast<double>(counts_[i][j]) / static_cast<double>(total) : 0.0;
      }
    }
    for (std::size_t r = 0; r < kRestrictions; ++r) {
      const std::size_t hit_state = r << 1;
      const std::size_t miss_state = hit_state | 1u;
      std::uint64_t col_a = 0;
      std::uint64_t col_b = 0;
      for (std::size_t i = 0; i < N; ++i) {
        const std::uint64_t a = counts_[i][hit_state];
        const std::uint64_t b = counts_[i][miss_state];
        restricted_[r][i] = (a + b) ? static_cast<double>(a) / static_cast<double>(a + b) : -1.0;
        col_a += a;
        col_b += b;
      }
      fallback_[r] = (col_a + col_b) ? static_cast<double>(col_a) / static_cast<double>(col_a + col_b) : -1.0;
    }
    dirty_ = false;
  }

  std::array<std::array<std::uint64_t, N>, N> counts_{};
  std::optional<std::size_t> last_state_;
  mutable bool dirty_ = true;
  mutable std::array<std::array<double, N>, N> probs_{};
  mutable std::array<std::array<double, N>, kRestrictions> restricted_{};
  mutable std::array<double, kRestrictions> fallback_{};
};

using Markov4Model = MarkovModel<4>;
using Markov8Model = MarkovModel<8>;

/// Any of the three statistical models.
class StatModel {
public:
  explicit StatModel(ModelKind k) {
    switch (k) {
    case ModelKind::FixedRate:
      impl_ = FixedHitRateModel{};
      break;
    case ModelKind::Markov4:
      impl_ = Markov4Model{};
      break;
    case ModelKind::Markov8:
      impl_ = Markov8Model{};
      break;
    }
  }

  ModelKind kind() const {
    return std::visit([](const auto& m) { return std::decay_t<decltype(m)>::kind; }, impl_);
  }

  void train(const AccessContext& ctx, HitOutcome actual) {
    std::visit([&](auto& m) { m.train(ctx, actual); }, impl_);
  }

  HitOutcome predict(const AccessContext& ctx, double u) const {
    return std::visit([&](const auto& m) { return m.predict(ctx, u); }, impl_);
  }

  void commit(const AccessContext& ctx, HitOutcome predicted) {
    std::visit([&](auto& m) { m.commit(ctx, predicted); }, impl_);
  }

  /// Swapped-in hit check: predict and advance the chain on the prediction.
  HitOutcome hit_check(const AccessContext& ctx, UniformSource& rng) {
    const HitOutcome h = predict(ctx, rng.next_unit());
    commit(ctx, h);
    return h;
  }

  template <class T>
  const T* as() const {
    return std::get_if<T>(&impl_);
  }

private:
  std::variant<FixedHitRateModel, Markov4Model, Markov8Model> impl_;
};

} // namespace mswap
