#pragma once

// LRU stack (reuse) distance over line addresses.

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace mswap {

/// Histogram of stack distances. Bucket d counts reuses with exactly d
/// distinct lines in between; distances above cap land in overflow.
struct ReuseHistogram {
  explicit ReuseHistogram(std::uint64_t cap = 500) : buckets(cap + 1, 0) {}

  std::vector<std::uint64_t> buckets;
  std::uint64_t overflow = 0;
  std::uint64_t cold_count = 0;

  std::uint64_t cap() const { return buckets.size() - 1; }

  void add(std::int64_t distance) {
    if (distance < 0) {
      ++cold_count;
    } else if (static_cast<std::uint64_t>(distance) > cap()) {
      ++overflow;
    } else {
      ++buckets[static_cast<std::size_t>(distance)];
    }
  }

  std::uint64_t total() const {
    std::uint64_t n = overflow + cold_count;
    for (auto b : buckets) {
      n += b;
    }
    return n;
  }

  ReuseHistogram& operator+=(const ReuseHistogram& o) {
    if (buckets.size() < o.buckets.size()) {
      buckets.resize(o.buckets.size(), 0);
    }
    for (std::size_t i = 0; i < o.buckets.size(); ++i) {
      buckets[i] += o.buckets[i];
    }
    overflow += o.overflow;
    cold_count += o.cold_count;
    return *this;
  }

  friend bool operator==(const ReuseHistogram&, const ReuseHistogram&) = default;
};

/// Exact stack distance in O(log n) per access: a Fenwick tree marks, for
/// each distinct line, the time of its latest access. The distance of a reuse
/// is the number of marks strictly after the line's previous access time.
class StackDistanceTracker {
public:
  /// Distance for this access, or -1 on first touch.
  std::int64_t access(std::uint64_t line) {
    const std::uint64_t now = time_++;
    ensure_capacity(now + 1);
    std::int64_t distance = -1;
    auto it = last_.find(line);
    if (it != last_.end()) {
      const std::uint64_t prev = it->second;
      distance = static_cast<std::int64_t>(live_ - prefix(prev + 1));
      update(prev, -1);
      it->second = now;
    } else {
      last_.emplace(line, now);
      ++live_;
    }
    update(now, +1);
    return distance;
  }

  std::uint64_t distinct_lines() const { return live_; }

private:
  // Fenwick tree over positions [0, n), 1-based internally.
  void update(std::uint64_t pos, std::int64_t delta) {
    for (std::uint64_t i = pos + 1; i <= tree_.size(); i += i & (~i + 1)) {
      tree_[i - 1] += delta;
    }
  }

  // Sum over positions [0, end).
  std::uint64_t prefix(std::uint64_t end) const {
    std::int64_t s = 0;
    for (std::uint64_t i = end; i > 0; i -= i & (~i + 1)) {
      s += tree_[i - 1];
    }
    return static_cast<std::uint64_t>(s);
  }

  void ensure_capacity(std::uint64_t n) {
    if (n <= tree_.size()) {
      return;
    }
    std::uint64_t cap = tree_.empty() ? 1024 : tree_.size();
    while (cap < n) {
      cap *= 2;
    }
    // Rebuild from the live marks.
    tree_.assign(cap, 0);
    for (const auto& [line, t] : last_) {
      update(t, +1);
    }
  }

  std::unordered_map<std::uint64_t, std::uint64_t> last_;
  std::vector<std::int64_t> tree_;
  std::uint64_t time_ = 0;
  std::uint64_t live_ = 0;
};

/// Stack-distance histogram of one stream.
class ReuseDistanceAnalyzer {
public:
  explicit ReuseDistanceAnalyzer(std::uint64_t cap = 500) : hist_(cap) {}

  std::int64_t observe(std::uint64_t line_address) {
    const std::int64_t d = tracker_.access(line_address);
    hist_.add(d);
    return d;
  }

  const ReuseHistogram& histogram() const noexcept { return hist_; }

private:
  StackDistanceTracker tracker_;
  ReuseHistogram hist_;
};

} // namespace mswap
