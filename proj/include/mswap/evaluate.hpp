#pragma once

// Shadow-training bookkeeping and model scoring.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>

#include "mswap/cache.hpp"
#include "mswap/stat_models.hpp"

namespace mswap {

/// [accuracy, near-miss ratio, size fraction, complexity fraction].
struct ScoreVector {
  double accuracy = 0.0;
  double near_miss_ratio = 0.0;
  double size_fraction = 0.0;
  double complexity_fraction = 0.0;

  std::array<double, 4> as_array() const { return {accuracy, near_miss_ratio, size_fraction, complexity_fraction}; }
};

inline constexpr std::array<double, 4> kIdealScore = {1.0, 1.0, 0.0, 0.0};

/// Euclidean distance from the ideal vector; lower is better.
inline double distance_from_ideal(const ScoreVector& v) {
  const auto a = v.as_array();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - kIdealScore[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

struct ShadowStats {
  std::uint64_t correct_predictions = 0;
  std::uint64_t total_predictions = 0;
  std::uint64_t model_near_misses = 0;
  std::uint64_t base_near_misses = 0;

  friend bool operator==(const ShadowStats&, const ShadowStats&) = default;
};

inline void record_shadow(ShadowStats& stats, HitOutcome predicted, HitOutcome actual, Proximity proximity) {
  ++stats.total_predictions;
  if (predicted == actual) {
    ++stats.correct_predictions;
  }
  if (proximity == Proximity::Near) {
    if (predicted == HitOutcome::Miss) {
      ++stats.model_near_misses;
    }
    if (actual == HitOutcome::Miss) {
      ++stats.base_near_misses;
    }
  }
}

/// Model near misses over base near misses. With no base near misses the
/// ratio is 1 when the model has none either, otherwise
/// 1 + model_near_misses / total_predictions.
inline double near_miss_ratio(const ShadowStats& s) {
  if (s.base_near_misses == 0) {
    if (s.model_near_misses == 0) {
      return 1.0;
    }
    return 1.0 + static_cast<double>(s.model_near_misses) / static_cast<double>(s.total_predictions);
  }
  return static_cast<double>(s.model_near_misses) / static_cast<double>(s.base_near_misses);
}

struct ModelScore {
  ScoreVector vector;
  double scalar = 0.0;
};

class UnscoreableError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline ModelScore score(const ShadowStats& stats, ModelKind kind, const CacheConfig& base_config) {
  if (stats.total_predictions == 0) {
    throw UnscoreableError("cannot score a model with no shadow predictions");
  }
  ModelScore out;
  out.vector.accuracy = static_cast<double>(stats.correct_predictions) / static_cast<double>(stats.total_predictions);
  out.vector.near_miss_ratio = near_miss_ratio(stats);
  out.vector.size_fraction =
      static_cast<double>(model_size_bytes(kind)) / static_cast<double>(base_model_size_bytes(base_config));
  out.vector.complexity_fraction = static_cast<double>(model_hit_check_comparisons(kind)) /
                                   static_cast<double>(base_model_comparisons(base_config));
  out.scalar = distance_from_ideal(out.vector);
  return out;
}

/// Lowest score wins; ties go to the smaller model (enum order).
inline ModelKind select_best(const std::map<ModelKind, double>& scores) {
  if (scores.empty()) {
    throw std::invalid_argument("select_best needs at least one scored model");
  }
  auto best = scores.begin();
  for (auto it = std::next(scores.begin()); it != scores.end(); ++it) {
    if (it->second < best->second) {
      best = it;
    }
  }
  return best->first;
}

} // namespace mswap
