#pragma once

// Working-set phase detection over fixed-length intervals of the reference
// stream. Each interval's addresses are hashed into a bit-vector signature;
// consecutive similar signatures make a phase, and unstable intervals are
// matched against the table of known phases.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mswap/random.hpp"

namespace mswap {

struct PhaseDetectorConfig {
  double threshold = 0.5;
  std::uint64_t interval_len = 10'000;
  std::uint64_t sig_len = 1024;
  unsigned drop_bits = 3;
  std::uint64_t stable_min = 5;

  void validate() const {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
      throw std::invalid_argument("phase threshold must be in (0, 1]");
    }
    if (interval_len == 0) {
      throw std::invalid_argument("interval length must be > 0");
    }
    if (!std::has_single_bit(sig_len) || sig_len < 2) {
      throw std::invalid_argument("signature length must be a power of two >= 2");
    }
    if (drop_bits >= 64) {
      throw std::invalid_argument("drop_bits must be < 64");
    }
  }
};

class PhaseSignature {
public:
  explicit PhaseSignature(std::uint64_t bits = 1024) : bits_(bits), words_((bits + 63) / 64, 0) {}

  void set(std::uint64_t i) { words_[i >> 6] |= 1ULL << (i & 63); }
  bool test(std::uint64_t i) const { return (words_[i >> 6] >> (i & 63)) & 1ULL; }
  void clear() { std::fill(words_.begin(), words_.end(), 0); }
  std::uint64_t size() const noexcept { return bits_; }

  std::uint64_t popcount() const {
    std::uint64_t n = 0;
    for (auto w : words_) {
      n += static_cast<std::uint64_t>(std::popcount(w));
    }
    return n;
  }

  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  friend bool operator==(const PhaseSignature&, const PhaseSignature&) = default;

private:
  std::uint64_t bits_;
  std::vector<std::uint64_t> words_;
};

/// |a XOR b| / |a OR b| (Jaccard distance); 0 when both are empty.
inline double signature_diff(const PhaseSignature& a, const PhaseSignature& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("signature lengths differ");
  }
  std::uint64_t x = 0;
  std::uint64_t o = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i) {
    x += static_cast<std::uint64_t>(std::popcount(a.words()[i] ^ b.words()[i]));
    o += static_cast<std::uint64_t>(std::popcount(a.words()[i] | b.words()[i]));
  }
  return o == 0 ? 0.0 : static_cast<double>(x) / static_cast<double>(o);
}

/// Signature bit for an address: drop the low bits, mix, keep the top bits.
inline std::uint64_t hash_address(std::uint64_t address, const PhaseDetectorConfig& cfg) {
  const int width = std::countr_zero(cfg.sig_len);
  return mix64(address >> cfg.drop_bits) >> (64 - width);
}

struct PhaseEvent {
  std::uint64_t interval_index = 0;
  int phase_id = -1;

  friend bool operator==(const PhaseEvent&, const PhaseEvent&) = default;
};

class PhaseDetector {
public:
  explicit PhaseDetector(const PhaseDetectorConfig& cfg = {})
      : cfg_(cfg), sig_(cfg.sig_len), last_sig_(cfg.sig_len) {
    cfg_.validate();
  }

  const PhaseDetectorConfig& config() const noexcept { return cfg_; }

  /// Feeds one reference. Returns the completed interval's phase at an
  /// interval boundary, nothing otherwise.
  std::optional<PhaseEvent> observe(std::uint64_t address) {
    sig_.set(hash_address(address, cfg_));
    if (++count_ % cfg_.interval_len != 0) {
      return std::nullopt;
    }
    // The first interval compares against an empty signature (distance 1).
    if (signature_diff(sig_, last_sig_) < cfg_.threshold) {
      ++stable_;
      if (stable_ >= cfg_.stable_min && phase_ == -1) {
        table_.push_back(sig_);
        phase_ = static_cast<int>(table_.size()) - 1;
      }
    } else {
      stable_ = 0;
      phase_ = -1;
      double best = 2.0;
      for (std::size_t i = 0; i < table_.size(); ++i) {
        const double d = signature_diff(sig_, table_[i]);
        if (d < best) {
          best = d;
          phase_ = d < cfg_.threshold ? static_cast<int>(i) : -1;
        }
      }
    }
    last_sig_ = sig_;
    sig_.clear();
    return PhaseEvent{interval_++, phase_};
  }

  const std::vector<PhaseSignature>& phase_table() const noexcept { return table_; }
  int current_phase() const noexcept { return phase_; }
  std::uint64_t stable_count() const noexcept { return stable_; }

private:
  PhaseDetectorConfig cfg_;
  PhaseSignature sig_;
  PhaseSignature last_sig_;
  std::vector<PhaseSignature> table_;
  std::uint64_t count_ = 0;
  std::uint64_t interval_ = 0;
  std::uint64_t stable_ = 0;
  int phase_ = -1;
};

} // namespace mswap
