#ifndef S2CD_SAMPLING_HPP
#define S2CD_SAMPLING_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "s2cd/problem.hpp"
#include "s2cd/rng.hpp"

namespace s2cd {

/// Finite distribution over {0, ..., size-1} proportional to the given
/// weights, sampled in O(1) through Walker/Vose alias tables.
///
/// Zero-weight indices are never returned. A single-index distribution
/// returns 0 without consuming randomness.
class DiscreteDistribution {
 public:
  DiscreteDistribution() = default;
  /// Throws std::invalid_argument on an empty, negative, non-finite or
  /// all-zero weight vector.
  explicit DiscreteDistribution(std::span<const double> weights);

  std::size_t size() const noexcept { return prob_.size(); }
  double probability(std::size_t k) const noexcept { return normalized_[k]; }
  std::span<const double> probabilities() const noexcept { return normalized_; }

  std::size_t sample(Rng& rng) const noexcept {
    if (prob_.size() == 1) return 0;
    const auto k = static_cast<std::size_t>(rng.uniform_index(prob_.size()));
    return rng.uniform01() < prob_[k] ? k : alias_[k];
  }

 private:
  std::vector<double> normalized_;
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

/// Inner-loop length law P(T) = rho^(m-T) / beta on T in {1..m},
/// rho = 1 - mu h, beta = sum_{t=1}^m rho^(m-t). Sampled by inverse CDF.
/// mu h = 0 gives the uniform law.
class GeometricLaw {
 public:
  /// Throws std::invalid_argument unless m >= 1 and 0 <= mu_h < 1.
  GeometricLaw(std::size_t m, double mu_h);

  std::size_t m() const noexcept { return cumulative_.size(); }
  double rho() const noexcept { return rho_; }
  double beta() const noexcept { return beta_; }
  /// P(T = t) for t in {1..m}.
  double probability(std::size_t t) const noexcept;
  std::size_t sample(Rng& rng) const noexcept;

 private:
  double rho_;
  double beta_;
  std::vector<double> cumulative_;  // cumulative_[t-1] = sum_{s<=t} rho^(m-s)
};

/// Draw of one (coordinate, example) pair. `pos` is the position of the
/// example inside column j of the problem's Lipschitz table.
struct SampledPair {
  std::size_t j;
  std::size_t i;
  std::size_t pos;
};

/// j ~ p, then i ~ q_{.j}. Conditional tables are built on first use of a
/// column and memoized, so one sampler belongs to one run (not thread-safe).
class PairSampler {
 public:
  explicit PairSampler(const Problem& problem);

  SampledPair sample(Rng& rng);
  const DiscreteDistribution& coordinates() const noexcept { return coordinates_; }
  /// Conditional table for column j, building it if needed.
  const DiscreteDistribution& conditional(std::size_t j);
  std::size_t built_columns() const noexcept { return built_; }

 private:
  const Problem* problem_;
  DiscreteDistribution coordinates_;
  std::vector<std::optional<DiscreteDistribution>> conditionals_;
  std::size_t built_ = 0;
};

/// Direct draw of (i, j) from the flattened joint table p_ij = p_j q_ij.
class JointSampler {
 public:
  explicit JointSampler(const Problem& problem);
  SampledPair sample(Rng& rng) const noexcept { return pairs_[joint_.sample(rng)]; }
  std::span<const SampledPair> pairs() const noexcept { return pairs_; }
  const DiscreteDistribution& distribution() const noexcept { return joint_; }

 private:
  std::vector<SampledPair> pairs_;
  DiscreteDistribution joint_;
};

}  // namespace s2cd

#endif  // S2CD_SAMPLING_HPP
