#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace fks {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The 128-bit counter is split into a 64-bit block counter and a 64-bit
/// stream id; the key is the 64-bit master seed. Every (seed, stream) pair
/// is therefore an independent, randomly addressable sequence and no state
/// has to be shared between threads. Satisfies UniformRandomBitGenerator.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;

  Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (lane_ == kBuffered) {
      refill();
    }
    return buffer_[lane_++];
  }

  /// Next block counter to be generated.
  std::uint64_t block() const noexcept { return block_; }

  /// The four 32-bit output words of one block, for known-answer tests.
  static std::array<std::uint32_t, 4> block_words(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;
  static constexpr int kBlocks = 8;
  static constexpr int kBuffered = 2 * kBlocks;

  void refill() noexcept {
    for (int j = 0; j < kBlocks; ++j) {
      const std::uint64_t b = block_ + static_cast<std::uint64_t>(j);
      const auto w = block_words({static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                                  static_cast<std::uint32_t>(stream_),
                                  static_cast<std::uint32_t>(stream_ >> 32)},
                                 key_);
      buffer_[2 * j] = (std::uint64_t{w[0]} << 32) | w[1];
      buffer_[2 * j + 1] = (std::uint64_t{w[2]} << 32) | w[3];
    }
    block_ += kBlocks;
    lane_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, kBuffered> buffer_{};
  int lane_ = kBuffered;
};

// Stream-id domains; distinct purposes never share Philox streams.
namespace stream_domain {
inline constexpr std::uint64_t kShift = 40;
inline constexpr std::uint64_t kWiener = 0;
inline constexpr std::uint64_t kInitialValue = 1;
inline constexpr std::uint64_t kTau = 2;
inline constexpr std::uint64_t kTauAlt = 3;
inline constexpr std::uint64_t kTest = 7;

constexpr std::uint64_t stream(std::uint64_t domain, std::uint64_t index) noexcept {
  return (domain << kShift) + index;
}
}  // namespace stream_domain

}  // namespace fks
