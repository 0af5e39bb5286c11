#ifndef S2CD_RNG_HPP
#define S2CD_RNG_HPP

#include <array>
#include <cstdint>
#include <limits>

namespace s2cd {

/// Seeded pseudo-random generator: xoshiro256** with its state filled by
/// SplitMix64. The algorithm is fixed for the repository, so a given
/// (seed, stream) pair yields the same bit sequence on every platform.
///
/// Streams let one run hold several independent generators derived from a
/// single user seed (e.g. one for coordinate/example draws, one for the
/// inner-loop length).
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept { return next(); }
  result_type next() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept;

  /// Uniform integer in [0, bound). Unbiased (Lemire's multiply-shift with
  /// rejection). bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound) noexcept;

  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double normal() noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::array<std::uint64_t, 4> state_{};
  std::uint64_t seed_;
  std::uint64_t stream_;
};

/// Named streams used by the solvers.
namespace streams {
inline constexpr std::uint64_t kCoordinates = 1;
inline constexpr std::uint64_t kInnerLength = 2;
inline constexpr std::uint64_t kGenerator = 3;
inline constexpr std::uint64_t kProbes = 4;
}  // namespace streams

}  // namespace s2cd

#endif  // S2CD_RNG_HPP
