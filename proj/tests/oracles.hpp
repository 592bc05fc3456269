#pragma once

// Slow, obviously-correct reference implementations used by the unit tests
// and the acceptance checks.

#include <array>
#include <cstdint>
#include <list>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "mswap/cache.hpp"
#include "mswap/stat_models.hpp"

namespace oracle {

/// Stack distance by scanning back to the previous occurrence and counting
/// distinct lines in between; -1 on first touch.
inline std::vector<std::int64_t> stack_distances(const std::vector<std::uint64_t>& stream) {
  std::vector<std::int64_t> out;
  out.reserve(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) {
    std::int64_t d = -1;
    std::set<std::uint64_t> between;
    for (std::size_t j = i; j-- > 0;) {
      if (stream[j] == stream[i]) {
        d = static_cast<std::int64_t>(between.size());
        break;
      }
      between.insert(stream[j]);
    }
    out.push_back(d);
  }
  return out;
}

/// Set-associative LRU cache where each set is a recency-ordered list.
class ListLru {
public:
  ListLru(std::uint64_t total_bytes, std::uint64_t assoc, std::uint64_t line)
      : assoc_(assoc), line_(line), sets_(total_bytes / (assoc * line)), lists_(sets_) {}

  bool access(std::uint64_t address) {
    const std::uint64_t block = address / line_;
    auto& l = lists_[block % sets_];
    for (auto it = l.begin(); it != l.end(); ++it) {
      if (*it == block) {
        l.erase(it);
        l.push_front(block);
        return true;
      }
    }
    l.push_front(block);
    if (l.size() > assoc_) {
      l.pop_back();
    }
    return false;
  }

private:
  std::uint64_t assoc_;
  std::uint64_t line_;
  std::uint64_t sets_;
  std::vector<std::list<std::uint64_t>> lists_;
};

/// Markov chain keyed by (op, outcome, proximity) tuples with no state
/// numbering. Restricted prediction enumerates every successor tuple, keeps
/// those consistent with the access, and renormalizes.
class TupleMarkov {
public:
  using State = std::tuple<mswap::Op, mswap::HitOutcome, mswap::Proximity>;

  explicit TupleMarkov(bool use_proximity) : use_proximity_(use_proximity) {}

  State state(const mswap::AccessContext& ctx, mswap::HitOutcome h) const {
    return {ctx.op, h, use_proximity_ ? ctx.proximity : mswap::Proximity::Near};
  }

  void train(const mswap::AccessContext& ctx, mswap::HitOutcome h) {
    const State s = state(ctx, h);
    if (has_last_) {
      ++counts_[{last_, s}];
    }
    last_ = s;
    has_last_ = true;
  }

  mswap::HitOutcome predict(const mswap::AccessContext& ctx, double u) const {
    std::uint64_t hit = 0;
    std::uint64_t miss = 0;
    std::uint64_t pooled_hit = 0;
    std::uint64_t pooled_miss = 0;
    for (const auto& [edge, n] : counts_) {
      const auto& [from, to] = edge;
      if (std::get<0>(to) != ctx.op) {
        continue;
      }
      if (use_proximity_ && std::get<2>(to) != ctx.proximity) {
        continue;
      }
      const bool is_hit = std::get<1>(to) == mswap::HitOutcome::Hit;
      (is_hit ? pooled_hit : pooled_miss) += n;
      if (has_last_ && from == last_) {
        (is_hit ? hit : miss) += n;
      }
    }
    if (hit + miss == 0) {
      hit = pooled_hit;
      miss = pooled_miss;
    }
    if (hit + miss == 0) {
      return mswap::HitOutcome::Miss;
    }
    const double p = static_cast<double>(hit) / static_cast<double>(hit + miss);
    return u < p ? mswap::HitOutcome::Hit : mswap::HitOutcome::Miss;
  }

  void set_last(const State& s) {
    last_ = s;
    has_last_ = true;
  }

private:
  bool use_proximity_;
  std::map<std::pair<State, State>, std::uint64_t> counts_;
  State last_{};
  bool has_last_ = false;
};

} // namespace oracle
