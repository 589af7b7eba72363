#pragma once

#include <cmath>
#include <cstdint>

#include "biht/errors.hpp"

namespace biht {

// Counter-based pseudo-random numbers built on the splitmix64 output
// function. Every draw is a pure function of (key, counter), so any element
// of a stream can be produced without generating its predecessors and
// parallel consumers of disjoint counter ranges never contend or interleave.

namespace detail {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

constexpr std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace detail

// The i-th 64-bit output of the stream identified by key. This is the
// splitmix64 generator seeded with key, evaluated at position i.
constexpr std::uint64_t hash_at(std::uint64_t key, std::uint64_t i) {
  return detail::mix64(key + (i + 1) * detail::kGolden);
}

// Purpose tags keep the streams used for different random objects within
// one trial disjoint even though they share the master seed.
enum class StreamPurpose : std::uint64_t {
  signal = 1,      // the planted parameter vector
  design = 2,      // measurement matrix entries
  responses = 3,   // response flips
  init = 4,        // algorithm initialization
  probe = 5,       // perturbation probes
  aux = 6,         // anything else
};

// Derives the key of a substream from (master, stream_id, purpose). Each
// fold step is bijective in its argument, so distinct inputs land on
// effectively independent keys.
constexpr std::uint64_t derive_key(std::uint64_t master, std::uint64_t stream_id,
                                   StreamPurpose purpose) {
  std::uint64_t k = detail::mix64(master ^ 0xd1b54a32d192ed03ull);
  k = detail::mix64(k + detail::kGolden * stream_id);
  k = detail::mix64(k ^ (static_cast<std::uint64_t>(purpose) * 0x8cb92ba72f3d8dd7ull));
  return k;
}

// Uniform double in (0, 1]: 53 high bits shifted into the unit interval,
// offset so the result is never zero (safe under log).
inline double unit_pos_from(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

// Uniform double in [0, 1).
inline double unit_from(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// The i-th standard normal of the stream identified by key. Consecutive
// counter positions (2p, 2p+1) form a Box-Muller pair sharing two uniform
// draws, so the mapping from counter to value is random access.
inline double normal_at(std::uint64_t key, std::uint64_t i) {
  const std::uint64_t p = i >> 1;
  const double u1 = unit_pos_from(hash_at(key, 2 * p));
  const double u2 = unit_from(hash_at(key, 2 * p + 1));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.2831853071795864769 * u2;
  return (i & 1) ? r * std::sin(a) : r * std::cos(a);
}

// Sequential convenience wrapper over the counter-based draws. Copying an
// Rng forks the position; both copies then produce the same tail.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  static Rng stream(std::uint64_t master, std::uint64_t stream_id, StreamPurpose purpose) {
    return Rng(derive_key(master, stream_id, purpose));
  }

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() { return hash_at(key_, counter_++); }

  double next_unit_pos() { return unit_pos_from(next_u64()); }

  double next_unit() { return unit_from(next_u64()); }

  // Standard normal via Box-Muller; generates a pair and caches the spare.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit_pos();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.2831853071795864769 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in [0, n), free of modulo bias via rejection.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw InvalidParams("next_below: n must be positive");
    const std::uint64_t rem = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= rem) return x % n;
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace biht
