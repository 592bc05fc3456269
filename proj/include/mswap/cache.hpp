#pragma once

// Detailed set-associative LRU cache and the three-level hierarchy.

#include <algorithm>
#include <array>
#include <bit>
#include <concepts>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mswap/trace.hpp"

namespace mswap {

enum class HitOutcome : std::uint8_t { Hit, Miss };

inline const char* to_string(HitOutcome h) { return h == HitOutcome::Hit ? "hit" : "miss"; }

struct CacheConfig {
  std::uint64_t total_bytes = 32 * 1024;
  std::uint64_t associativity = 8;
  std::uint64_t line_bytes = 64;
  std::uint64_t hit_latency = 4;

  std::uint64_t set_count() const { return total_bytes / (associativity * line_bytes); }

  void validate(const std::string& name = "cache") const {
    if (associativity == 0 || line_bytes == 0 || total_bytes == 0) {
      throw std::invalid_argument(name + ": sizes must be nonzero");
    }
    if (!std::has_single_bit(line_bytes)) {
      throw std::invalid_argument(name + ": line size must be a power of two");
    }
    if (total_bytes % (associativity * line_bytes) != 0) {
      throw std::invalid_argument(name + ": total size not divisible by associativity x line size");
    }
    if (!std::has_single_bit(set_count())) {
      throw std::invalid_argument(name + ": set count must be a power of two");
    }
  }

  friend bool operator==(const CacheConfig&, const CacheConfig&) = default;
};

/// Set-associative cache with true LRU replacement and write-allocate.
///
/// Each way stores its tag and a last-use stamp, both 8 bytes. A lookup is a
/// linear scan of the set; a miss in a full set runs a second scan for the
/// oldest stamp. That gives 2 x associativity comparisons worst case and a
/// metadata footprint of 16 bytes per way.
class SetAssociativeCache {
public:
  explicit SetAssociativeCache(const CacheConfig& cfg = {}) : cfg_(cfg) {
    cfg_.validate();
    sets_ = cfg_.set_count();
    line_shift_ = static_cast<unsigned>(std::countr_zero(cfg_.line_bytes));
    set_mask_ = sets_ - 1;
    ways_.assign(sets_ * cfg_.associativity, Way{});
  }

  const CacheConfig& config() const noexcept { return cfg_; }

  HitOutcome hit_check(std::uint64_t address, Op /*op*/ = Op::Read) {
    const std::uint64_t line = address >> line_shift_;
    Way* set = &ways_[(line & set_mask_) * cfg_.associativity];
    const std::uint64_t tag = line >> std::countr_zero(sets_);
    ++clock_;
    Way* empty = nullptr;
    for (std::uint64_t w = 0; w < cfg_.associativity; ++w) {
      if (set[w].tag == tag) {
        set[w].last_use = clock_;
        return HitOutcome::Hit;
      }
      if (!empty && set[w].tag == kInvalid) {
        empty = &set[w];
      }
    }
    Way* victim = empty;
    if (!victim) {
      victim = set;
      for (std::uint64_t w = 1; w < cfg_.associativity; ++w) {
        if (set[w].last_use < victim->last_use) {
          victim = &set[w];
        }
      }
    }
    victim->tag = tag;
    victim->last_use = clock_;
    return HitOutcome::Miss;
  }

  /// Residency query with no side effects.
  bool contains(std::uint64_t address) const {
    const std::uint64_t line = address >> line_shift_;
    const Way* set = &ways_[(line & set_mask_) * cfg_.associativity];
    const std::uint64_t tag = line >> std::countr_zero(sets_);
    for (std::uint64_t w = 0; w < cfg_.associativity; ++w) {
      if (set[w].tag == tag) {
        return true;
      }
    }
    return false;
  }

  /// Resident line addresses of one set, most recently used first.
  std::vector<std::uint64_t> set_contents(std::uint64_t set_index) const {
    std::vector<const Way*> valid;
    for (std::uint64_t w = 0; w < cfg_.associativity; ++w) {
      const Way& way = ways_[set_index * cfg_.associativity + w];
      if (way.tag != kInvalid) {
        valid.push_back(&way);
      }
    }
    std::sort(valid.begin(), valid.end(), [](const Way* a, const Way* b) { return a->last_use > b->last_use; });
    std::vector<std::uint64_t> out;
    for (const Way* w : valid) {
      out.push_back(((w->tag << std::countr_zero(sets_)) | set_index) << line_shift_);
    }
    return out;
  }

  /// FNV-1a over the tag and stamp arrays; changes iff the cache state changes.
  std::uint64_t checksum() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::uint64_t v) {
      for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 0x100000001b3ULL;
      }
    };
    for (const Way& w : ways_) {
      feed(w.tag);
      feed(w.last_use);
    }
    return h;
  }

  std::uint64_t footprint_bytes() const { return ways_.size() * sizeof(Way); }
  std::uint64_t worst_case_comparisons() const { return 2 * cfg_.associativity; }

private:
  static constexpr std::uint64_t kInvalid = std::numeric_limits<std::uint64_t>::max();

  struct Way {
    std::uint64_t tag = kInvalid;
    std::uint64_t last_use = 0;
  };
  static_assert(sizeof(Way) == 16);

  CacheConfig cfg_;
  std::uint64_t sets_ = 0;
  std::uint64_t set_mask_ = 0;
  unsigned line_shift_ = 0;
  std::uint64_t clock_ = 0;
  std::vector<Way> ways_;
};

/// Metadata footprint of the detailed model for a config.
inline std::uint64_t base_model_size_bytes(const CacheConfig& cfg) { return cfg.set_count() * cfg.associativity * 16; }
inline std::uint64_t base_model_comparisons(const CacheConfig& cfg) { return 2 * cfg.associativity; }

enum class Level : std::uint8_t { L1, L2, L3, Mem };

inline const char* to_string(Level l) {
  switch (l) {
  case Level::L1:
    return "L1";
  case Level::L2:
    return "L2";
  case Level::L3:
    return "L3";
  case Level::Mem:
    return "Mem";
  }
  return "?";
}

struct HierarchyConfig {
  CacheConfig l1{32 * 1024, 8, 64, 4};
  CacheConfig l2{256 * 1024, 8, 64, 12};
  CacheConfig l3{2 * 1024 * 1024, 16, 64, 40};
  std::uint64_t memory_latency = 200;

  void validate() const {
    l1.validate("l1");
    l2.validate("l2");
    l3.validate("l3");
    if (!(l1.hit_latency < l2.hit_latency && l2.hit_latency < l3.hit_latency && l3.hit_latency < memory_latency)) {
      throw std::invalid_argument("latencies must strictly increase from L1 to memory");
    }
  }

  std::uint64_t latency(Level l) const {
    switch (l) {
    case Level::L1:
      return l1.hit_latency;
    case Level::L2:
      return l2.hit_latency;
    case Level::L3:
      return l3.hit_latency;
    case Level::Mem:
      return memory_latency;
    }
    return 0;
  }
};

struct HierarchyStats {
  std::uint64_t l1_hits = 0;
  std::uint64_t l2_hits = 0;
  std::uint64_t l3_hits = 0;
  std::uint64_t mem_accesses = 0;
  std::uint64_t cycles = 0;

  std::uint64_t accesses() const { return l1_hits + l2_hits + l3_hits + mem_accesses; }

  void add(Level l, std::uint64_t latency) {
    switch (l) {
    case Level::L1:
      ++l1_hits;
      break;
    case Level::L2:
      ++l2_hits;
      break;
    case Level::L3:
      ++l3_hits;
      break;
    case Level::Mem:
      ++mem_accesses;
      break;
    }
    cycles += latency;
  }

  HierarchyStats& operator+=(const HierarchyStats& o) {
    l1_hits += o.l1_hits;
    l2_hits += o.l2_hits;
    l3_hits += o.l3_hits;
    mem_accesses += o.mem_accesses;
    cycles += o.cycles;
    return *this;
  }

  friend bool operator==(const HierarchyStats&, const HierarchyStats&) = default;
};

struct AccessResult {
  Level level;
  std::uint64_t cycles;
};

/// Anything that can stand in the L1D slot.
template <class M>
concept L1Model = requires(M m, const TraceRecord& r) {
  { m.hit_check(r) } -> std::same_as<HitOutcome>;
};

/// L2, L3 and memory behind a swappable L1D. The detailed L1D lives here so
/// its state persists while a statistical model occupies the slot.
class MemoryHierarchy {
public:
  explicit MemoryHierarchy(const HierarchyConfig& cfg = {}) : cfg_(cfg), l1_(cfg.l1), l2_(cfg.l2), l3_(cfg.l3) {
    cfg_.validate();
  }

  const HierarchyConfig& config() const noexcept { return cfg_; }
  SetAssociativeCache& l1() noexcept { return l1_; }
  const SetAssociativeCache& l1() const noexcept { return l1_; }
  const SetAssociativeCache& l2() const noexcept { return l2_; }
  const SetAssociativeCache& l3() const noexcept { return l3_; }
  const HierarchyStats& stats() const noexcept { return stats_; }

  /// Services an access given the L1D slot's verdict.
  AccessResult complete(const TraceRecord& r, HitOutcome l1_outcome) {
    Level level = Level::L1;
    if (l1_outcome == HitOutcome::Miss) {
      if (l2_.hit_check(r.address, r.op) == HitOutcome::Hit) {
        level = Level::L2;
      } else if (l3_.hit_check(r.address, r.op) == HitOutcome::Hit) {
        level = Level::L3;
      } else {
        level = Level::Mem;
      }
    }
    const std::uint64_t cycles = cfg_.latency(level);
    stats_.add(level, cycles);
    return {level, cycles};
  }

  /// Runs the access through the given L1D model and the levels below it.
  template <L1Model M>
  AccessResult simulate_access(M& l1_model, const TraceRecord& r) {
    return complete(r, l1_model.hit_check(r));
  }

  /// Access through the detailed L1D.
  AccessResult simulate_access(const TraceRecord& r) { return complete(r, l1_.hit_check(r.address, r.op)); }

private:
  HierarchyConfig cfg_;
  SetAssociativeCache l1_;
  SetAssociativeCache l2_;
  SetAssociativeCache l3_;
  HierarchyStats stats_;
};

} // namespace mswap
