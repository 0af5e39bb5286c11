#include "s2cd/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace s2cd {

DiscreteDistribution::DiscreteDistribution(std::span<const double> weights) {
  if (weights.empty()) throw std::invalid_argument("empty weight vector");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("weights must be finite and nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("all weights are zero");

  const std::size_t n = weights.size();
  normalized_.resize(n);
  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::size_t heaviest = 0;
  for (std::size_t k = 0; k < n; ++k) {
    normalized_[k] = weights[k] / total;
    scaled[k] = normalized_[k] * static_cast<double>(n);
    if (weights[k] > weights[heaviest]) heaviest = k;
  }

  // Vose's method; both worklists are filled and consumed in ascending
  // index order so the table is a pure function of the weights.
  std::vector<std::uint32_t> small;
  std::vector<std::uint32_t> large;
  for (std::size_t k = 0; k < n; ++k)
    (scaled[k] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(k));
  std::size_t s = 0;
  std::size_t l = 0;
  while (s < small.size() && l < large.size()) {
    const auto lo = small[s++];
    const auto hi = large[l];
    prob_[lo] = scaled[lo];
    alias_[lo] = hi;
    scaled[hi] = (scaled[hi] + scaled[lo]) - 1.0;
    if (scaled[hi] < 1.0) {
      ++l;
      small.push_back(hi);
    }
  }
  for (; l < large.size(); ++l) prob_[large[l]] = 1.0;
  for (; s < small.size(); ++s) {
    const auto k = small[s];
    // Leftovers are rounding residue; a zero-weight index must stay unreachable.
    if (weights[k] == 0.0) {
      prob_[k] = 0.0;
      alias_[k] = static_cast<std::uint32_t>(heaviest);
    } else {
      prob_[k] = 1.0;
    }
  }
}

GeometricLaw::GeometricLaw(std::size_t m, double mu_h) : rho_(1.0 - mu_h) {
  if (m == 0) throw std::invalid_argument("m must be at least 1");
  if (!(mu_h >= 0.0) || !(mu_h < 1.0))
    throw std::invalid_argument("inner-loop law needs 0 <= mu*h < 1");
  cumulative_.resize(m);
  double acc = 0.0;
  for (std::size_t t = 1; t <= m; ++t) {
    acc += std::pow(rho_, static_cast<double>(m - t));
    cumulative_[t - 1] = acc;
  }
  beta_ = acc;
}

double GeometricLaw::probability(std::size_t t) const noexcept {
  if (t < 1 || t > m()) return 0.0;
  return std::pow(rho_, static_cast<double>(m() - t)) / beta_;
}

std::size_t GeometricLaw::sample(Rng& rng) const noexcept {
  const double target = rng.uniform01() * beta_;
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  const auto t = static_cast<std::size_t>(it - cumulative_.begin()) + 1;
  return std::min(t, m());
}

PairSampler::PairSampler(const Problem& problem)
    : problem_(&problem), coordinates_(problem.p()), conditionals_(problem.dim()) {}

const DiscreteDistribution& PairSampler::conditional(std::size_t j) {
  auto& slot = conditionals_[j];
  if (!slot) {
    const auto col = problem_->lipschitz().column(j);
    std::vector<double> w(col.size());
    for (std::size_t k = 0; k < col.size(); ++k) w[k] = problem_->q(j, k);
    slot.emplace(w);
    ++built_;
  }
  return *slot;
}

SampledPair PairSampler::sample(Rng& rng) {
  const std::size_t j = coordinates_.sample(rng);
  const std::size_t pos = conditional(j).sample(rng);
  return {j, problem_->lipschitz().column(j)[pos].example, pos};
}

JointSampler::JointSampler(const Problem& problem) {
  const auto& table = problem.lipschitz();
  std::vector<double> w;
  w.reserve(table.size());
  pairs_.reserve(table.size());
  for (std::size_t j = 0; j < table.dim(); ++j) {
    const auto col = table.column(j);
    for (std::size_t k = 0; k < col.size(); ++k) {
      pairs_.push_back({j, col[k].example, k});
      w.push_back(problem.p()[j] * problem.q(j, k));
    }
  }
  joint_ = DiscreteDistribution(w);
}

}  // namespace s2cd
