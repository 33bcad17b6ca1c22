#pragma once

#include <array>
#include <cstdint>

namespace fusionutil {

// Philox4x64-10 (Salmon et al., Random123). Block b of stream (seed, stream)
// is philox4x64(counter = {b, 0, 0, 0}, key = {seed, stream}); words are
// consumed in order. This matches numpy.random.Philox(key=[seed, stream])
// started with its counter at 2^256 - 1 (numpy pre-increments).
class CounterRng {
 public:
  using Block = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept : key_{seed, stream} {}

  static Block philox(Block counter, Key key) noexcept;

  std::uint64_t next_u64() noexcept;
  // [0, 1) on the 2^-53 grid.
  double uniform() noexcept;
  // (0, 1), midpoint of the 2^-53 grid cell.
  double uniform_open() noexcept;
  // Inverse-CDF standard normal draw.
  double normal() noexcept;

 private:
  Key key_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int used_ = 4;
};

// Stream ids reserved by the library.
inline constexpr std::uint64_t kStreamData = 0;
inline constexpr std::uint64_t kStreamSplit = 1;
inline constexpr std::uint64_t kStreamReplication = 2;

// Seed of replication `index` under `master`: first word of
// philox({index, 0, 0, 0}, {master, kStreamReplication}).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

}  // namespace fusionutil
