#pragma once

#include <cstdint>

namespace sentinel {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based random stream: draw n is a pure function of (key, n), so a
// stream can be derived for any (seed, index) pair without touching any other
// stream. Output does not depend on the standard library's distributions,
// which keeps results identical across platforms.
class CounterStream {
 public:
  constexpr CounterStream() noexcept = default;
  constexpr explicit CounterStream(std::uint64_t key) noexcept : key_(key) {}

  // Independent child stream `index` of stream family `seed`.
  static constexpr CounterStream derive(std::uint64_t seed, std::uint64_t index) noexcept {
    return CounterStream(splitmix64(seed ^ splitmix64(index ^ 0xD1B54A32D192ED03ULL)));
  }

  constexpr std::uint64_t next_u64() noexcept {
    // splitmix64 already adds the golden-ratio increment, so consecutive
    // counters land on well-separated inputs.
    return splitmix64(key_ ^ splitmix64(counter_++));
  }

  // Uniform on [0, 1) with 53 bits of resolution.
  constexpr double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer on [0, n); n > 0.
  constexpr std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  }

  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace sentinel
