#pragma once

// Per-interval records and run-level aggregations.

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mswap/cache.hpp"
#include "mswap/stat_models.hpp"

namespace mswap {

struct IntervalRecord {
  std::uint64_t interval_index = 0;
  int phase_id = -1;            // detector label of this interval
  int directive_phase = -1;     // phase the slot occupant was chosen for
  std::optional<ModelKind> model; // empty: detailed base cache
  bool training = false;
  std::uint64_t references = 0;
  HierarchyStats stats;
  /// Fraction of L1D outcomes matching the detailed hierarchy run alongside
  /// (validation mode only).
  std::optional<double> accuracy;
  std::optional<HierarchyStats> validation_stats;

  bool swapped() const noexcept { return model.has_value(); }
};

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
  std::uint64_t samples = 0;
};

/// Population mean and standard deviation.
inline MeanStd mean_std(std::span<const double> xs) {
  MeanStd out;
  out.samples = xs.size();
  if (xs.empty()) {
    return out;
  }
  double sum = 0.0;
  for (double x : xs) {
    sum += x;
  }
  out.mean = sum / static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) {
    var += (x - out.mean) * (x - out.mean);
  }
  out.stddev = std::sqrt(var / static_cast<double>(xs.size()));
  return out;
}

/// Mean accuracy of each phase's swapped intervals within one run, weighted
/// by references. Phases with no accuracy data are omitted.
inline std::map<int, double> per_phase_accuracy(std::span<const IntervalRecord> records) {
  std::map<int, std::pair<double, std::uint64_t>> acc;
  for (const auto& r : records) {
    if (!r.accuracy || !r.swapped() || r.phase_id < 0) {
      continue;
    }
    auto& [correct, total] = acc[r.phase_id];
    correct += *r.accuracy * static_cast<double>(r.references);
    total += r.references;
  }
  std::map<int, double> out;
  for (const auto& [phase, ct] : acc) {
    out[phase] = ct.first / static_cast<double>(ct.second);
  }
  return out;
}

/// Per-phase accuracy mean and standard deviation across runs.
inline std::map<int, MeanStd> per_phase_accuracy(std::span<const std::vector<IntervalRecord>> runs) {
  std::map<int, std::vector<double>> samples;
  for (const auto& run : runs) {
    for (const auto& [phase, a] : per_phase_accuracy(std::span<const IntervalRecord>(run))) {
      samples[phase].push_back(a);
    }
  }
  std::map<int, MeanStd> out;
  for (const auto& [phase, xs] : samples) {
    out[phase] = mean_std(xs);
  }
  return out;
}

/// (model - base) / base, or empty when base is zero.
inline std::optional<double> relative_change(double model, double base) {
  if (base == 0.0) {
    return std::nullopt;
  }
  return (model - base) / base;
}

struct PercentChange {
  std::optional<double> l1_hits;
  std::optional<double> l2_hits;
  std::optional<double> l3_hits;
  std::optional<double> cycles;
};

inline PercentChange percent_change(const HierarchyStats& model_run, const HierarchyStats& base_run) {
  auto pct = [](std::uint64_t m, std::uint64_t b) -> std::optional<double> {
    auto r = relative_change(static_cast<double>(m), static_cast<double>(b));
    if (r) {
      *r *= 100.0;
    }
    return r;
  };
  return {pct(model_run.l1_hits, base_run.l1_hits), pct(model_run.l2_hits, base_run.l2_hits),
          pct(model_run.l3_hits, base_run.l3_hits), pct(model_run.cycles, base_run.cycles)};
}

inline std::string format_percent(const std::optional<double>& p) {
  if (!p) {
    return "n/a";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.2f%%", *p);
  return buf;
}

/// Ordinary least-squares slope of ys against 0, 1, 2, ...
inline double least_squares_slope(std::span<const double> ys) {
  const double n = static_cast<double>(ys.size());
  if (ys.size() < 2) {
    return 0.0;
  }
  const double mean_x = (n - 1.0) / 2.0;
  double mean_y = 0.0;
  for (double y : ys) {
    mean_y += y;
  }
  mean_y /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double dx = static_cast<double>(i) - mean_x;
    sxy += dx * (ys[i] - mean_y);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

} // namespace mswap
