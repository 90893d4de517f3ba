#pragma once

#include <array>
#include <cstdint>

namespace sshwalk {

/// Philox4x64-10 counter-based generator (Salmon et al., Random123).
///
/// A stream is keyed by (seed, stream id) and walks a 256-bit block counter
/// from zero, so trajectory i of a run always sees the same numbers no matter
/// which thread draws it.
class Philox4x64 {
public:
  using Block = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
  static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

  /// The raw bijection: ten rounds of the Philox S-box.
  static Block encrypt(Block counter, Key key) {
    for (int round = 0; round < 10; ++round) {
      const unsigned __int128 p0 = static_cast<unsigned __int128>(kMul0) * counter[0];
      const unsigned __int128 p1 = static_cast<unsigned __int128>(kMul1) * counter[2];
      const auto hi0 = static_cast<std::uint64_t>(p0 >> 64);
      const auto lo0 = static_cast<std::uint64_t>(p0);
      const auto hi1 = static_cast<std::uint64_t>(p1 >> 64);
      const auto lo1 = static_cast<std::uint64_t>(p1);
      counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return counter;
  }

  Philox4x64(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}

  std::uint64_t next_u64() {
    if (lane_ == 4) {
      block_ = encrypt(counter_, key_);
      bump();
      lane_ = 0;
    }
    return block_[lane_++];
  }

  /// Uniform on (0, 1]; never returns zero, so -log(u) is finite.
  double uniform_open_closed() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
  void bump() {
    for (auto &word : counter_) {
      if (++word != 0) {
        break;
      }
    }
  }

  Key key_;
  Block counter_{};
  Block block_{};
  int lane_ = 4;
};

} // namespace sshwalk
