#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace synevo {

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a parent seed and a tag (FNV-1a of the tag),
/// optionally indexed, e.g. derive_seed(run_seed, "synthesis", generation).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) noexcept;

/// Top 53 bits of a word mapped to [0, 1).
constexpr double unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based generator. Draw n of stream s is
///
///   key(s)   = mix64(mix64(seed) ^ mix64(s))
///   bits(n)  = mix64(key(s) + (n + 1) * 0x9E3779B97F4A7C15)
///
/// so any draw of any stream can be computed independently of every other
/// draw. Synthesis assigns each cluster its own stream (see
/// cluster_stream_id), which keeps sampling order-independent.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(mix64(mix64(seed) ^ mix64(stream))) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix64(key_ + (counter + 1) * 0x9E3779B97F4A7C15ULL);
  }
  constexpr double uniform(std::uint64_t counter) const noexcept { return unit_interval(bits(counter)); }
  /// Bernoulli(p): true iff uniform < p, so p = 1 always and p = 0 never fires.
  constexpr bool bernoulli(std::uint64_t counter, double p) const noexcept { return uniform(counter) < p; }

 private:
  std::uint64_t key_;
};

/// Stream id for (resample attempt, layer, kernel).
constexpr std::uint64_t cluster_stream_id(std::uint64_t attempt, std::uint64_t layer, std::uint64_t kernel) noexcept {
  return mix64(mix64(mix64(attempt) ^ layer) ^ kernel);
}

/// Sequential generator for initialization, shuffling and synthetic data.
/// The std distributions are implementation-defined, so the conversions
/// here are done by hand to keep results identical across standard libraries.
class SequentialRng {
 public:
  explicit SequentialRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform() { return unit_interval(engine_()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n), multiply-shift reduction.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace synevo
