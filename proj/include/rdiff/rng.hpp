#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace rdiff {

/// Philox 4x64-10 counter-based generator. Streams are keyed by
/// (master seed, path index), so any number of paths can be generated
/// independently and in any order with identical results.
class Philox4x64 {
 public:
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  Philox4x64(std::uint64_t key0, std::uint64_t key1)
      : key_{key0, key1}, counter_{0, 0, 0, 0}, pos_(4) {}

  /// Next raw 64-bit output. The counter advances before each block, so
  /// block b uses counter value b+1.
  std::uint64_t next_u64() {
    if (pos_ == 4) {
      advance_counter();
      block_ = generate(counter_, key_);
      pos_ = 0;
    }
    return block_[pos_++];
  }

  /// Uniform double in [0, 1), 53-bit resolution.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// One keyed block, stateless.
  static Counter generate(Counter counter, Key key);

 private:
  void advance_counter() {
    for (int i = 0; i < 4; ++i) {
      if (++counter_[i] != 0) break;
    }
  }

  Key key_;
  Counter counter_;
  Counter block_{};
  int pos_;
};

/// Standard normal variates on top of a Philox stream (Box-Muller, so the
/// output does not depend on any library's distribution internals).
class NormalStream {
 public:
  NormalStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : rng_(master_seed, stream_index), have_spare_(false), spare_(0.0) {}

  double next();

  /// Fills out[0..n) with independent N(0, variance) draws.
  template <typename V>
  void fill(V&& out, int n, double variance) {
    const double sd = std::sqrt(variance);
    for (int i = 0; i < n; ++i) out[i] = sd * next();
  }

 private:
  Philox4x64 rng_;
  bool have_spare_;
  double spare_;
};

}  // namespace rdiff
