#pragma once

#include <array>
#include <cstdint>

namespace amis {

using Philox4x32Block = std::array<std::uint32_t, 4>;

/// Philox4x32 with 10 rounds.
Philox4x32Block philox4x32_10(Philox4x32Block counter, std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based random stream. Streams derived with different ids are
/// statistically independent and do not depend on evaluation order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0);

  RngStream derive(std::uint64_t id) const;

  std::uint64_t next_u64();
  /// Uniform on the open interval (0,1).
  double uniform();
  double normal();

  std::uint64_t key() const noexcept { return key_; }

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

}  // namespace amis
