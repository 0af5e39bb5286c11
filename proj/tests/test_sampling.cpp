#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "s2cd/problem.hpp"
#include "s2cd/sampling.hpp"
#include "support.hpp"

using namespace s2cd;

namespace {

// Pearson statistic against expected probabilities; cells with zero
// probability must stay empty and are left out of the degrees of freedom.
bool chi_square_passes(const std::vector<std::size_t>& counts, const std::vector<double>& probs,
                       std::size_t draws, double significance = 1e-4) {
  double stat = 0.0;
  std::size_t cells = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (probs[k] == 0.0) {
      if (counts[k] != 0) return false;
      continue;
    }
    const double e = probs[k] * static_cast<double>(draws);
    stat += (static_cast<double>(counts[k]) - e) * (static_cast<double>(counts[k]) - e) / e;
    ++cells;
  }
  if (cells < 2) return true;
  const boost::math::chi_squared dist(static_cast<double>(cells - 1));
  return stat <= boost::math::quantile(boost::math::complement(dist, significance));
}

// |count/draws - prob| within `sigmas` binomial standard errors
bool within_sigma(std::size_t count, double prob, std::size_t draws, double sigmas = 4.0) {
  const auto N = static_cast<double>(draws);
  const double se = std::sqrt(prob * (1.0 - prob) / N);
  return std::abs(static_cast<double>(count) / N - prob) <= sigmas * se + 1e-15;
}

}  // namespace

TEST_CASE("discrete distribution: normalization and trivial cases") {
  const std::vector<double> w = {2.0, 8.0};
  DiscreteDistribution d(w);
  CHECK(d.size() == 2);
  CHECK(d.probability(0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(d.probability(1) == doctest::Approx(0.8).epsilon(1e-15));

  const std::vector<double> one = {5.0};
  DiscreteDistribution single(one);
  Rng rng(1);
  const auto before = Rng(1).next();
  for (int k = 0; k < 100; ++k) CHECK(single.sample(rng) == 0);
  CHECK(rng.next() == before);  // no randomness consumed
}

TEST_CASE("discrete distribution: zero-weight index is never drawn") {
  const std::vector<double> w = {1.0, 0.0, 1.0};
  DiscreteDistribution d(w);
  CHECK(d.probability(1) == 0.0);
  Rng rng(7);
  std::size_t hits = 0;
  for (int k = 0; k < 1000000; ++k) hits += d.sample(rng) == 1 ? 1 : 0;
  CHECK(hits == 0);
}

TEST_CASE("discrete distribution: invalid weights") {
  CHECK_THROWS_AS(DiscreteDistribution(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteDistribution(std::vector<double>{0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteDistribution(std::vector<double>{1.0, -0.5}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteDistribution(std::vector<double>{1.0, INFINITY}), std::invalid_argument);
}

TEST_CASE("discrete distribution: chi-square goodness of fit on 1e6 draws") {
  const std::vector<std::vector<double>> cases = {
      {2.0, 8.0},
      {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0},
      {1e-3, 1.0, 0.0, 50.0, 0.25},
      {3.0, 3.0, 3.0, 3.0},
  };
  std::uint64_t seed = 100;
  for (const auto& w : cases) {
    DiscreteDistribution d(w);
    double total = 0.0;
    for (double x : w) total += x;
    std::vector<double> probs;
    for (double x : w) probs.push_back(x / total);
    Rng rng(seed++);
    std::vector<std::size_t> counts(w.size(), 0);
    const std::size_t draws = 1000000;
    for (std::size_t k = 0; k < draws; ++k) ++counts[d.sample(rng)];
    CHECK(chi_square_passes(counts, probs, draws));
    for (std::size_t k = 0; k < w.size(); ++k) CHECK(within_sigma(counts[k], probs[k], draws));
  }
}

TEST_CASE("geometric law: hand-evaluated cases") {
  GeometricLaw law(2, 0.5);
  CHECK(law.rho() == 0.5);
  CHECK(law.beta() == doctest::Approx(1.5));
  CHECK(law.probability(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(law.probability(2) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

  GeometricLaw one(1, 0.3);
  Rng rng(4);
  for (int k = 0; k < 100; ++k) CHECK(one.sample(rng) == 1);

  GeometricLaw flat(4, 1e-9);
  for (std::size_t t = 1; t <= 4; ++t) CHECK(std::abs(flat.probability(t) - 0.25) <= 1e-6);

  GeometricLaw uniform(5, 0.0);
  for (std::size_t t = 1; t <= 5; ++t) CHECK(uniform.probability(t) == doctest::Approx(0.2));
}

TEST_CASE("geometric law: normalization, monotonicity and errors") {
  for (const auto& [m, mh] : std::vector<std::pair<std::size_t, double>>{
           {10, 0.1}, {1000, 0.001}, {50000, 2e-5}, {7, 0.9}}) {
    GeometricLaw law(m, mh);
    double sum = 0.0;
    for (std::size_t t = 1; t <= m; ++t) {
      sum += law.probability(t);
      if (t > 1) CHECK(law.probability(t) >= law.probability(t - 1));
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(GeometricLaw(0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(GeometricLaw(5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GeometricLaw(5, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(GeometricLaw(5, std::nan("")), std::invalid_argument);
}

TEST_CASE("geometric law: samples fit the stated probabilities") {
  const std::size_t m = 12;
  GeometricLaw law(m, 0.15);
  Rng rng(21);
  std::vector<std::size_t> counts(m, 0);
  const std::size_t draws = 1000000;
  for (std::size_t k = 0; k < draws; ++k) {
    const auto t = law.sample(rng);
    REQUIRE(t >= 1);
    REQUIRE(t <= m);
    ++counts[t - 1];
  }
  std::vector<double> probs;
  for (std::size_t t = 1; t <= m; ++t) probs.push_back(law.probability(t));
  CHECK(chi_square_passes(counts, probs, draws));
}

TEST_CASE("pair sampling on the 2x2 instance") {
  const auto P = build_problem(testing::tiny_data(), LossKind::Squared, 0.25);
  PairSampler seq(P);
  JointSampler joint(P);
  CHECK(seq.built_columns() == 0);
  Rng r1(5), r2(6);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> a, b;
  const std::size_t draws = 1000000;
  for (std::size_t k = 0; k < draws; ++k) {
    const auto s = seq.sample(r1);
    REQUIRE(P.lipschitz().column(s.j)[s.pos].example == s.i);
    ++a[{s.j, s.i}];
    const auto t = joint.sample(r2);
    ++b[{t.j, t.i}];
  }
  CHECK(seq.built_columns() == 2);
  const std::map<std::pair<std::size_t, std::size_t>, double> expected = {
      {{0, 0}, 0.2}, {{1, 0}, 0.4}, {{1, 1}, 0.4}};
  for (const auto* counts : {&a, &b}) {
    CHECK(counts->size() == 3);
    for (const auto& [key, p] : expected) CHECK(within_sigma(counts->at(key), p, draws));
  }
}

TEST_CASE("pair sampling: sequential and joint draws agree with p_j q_ij") {
  const auto data = testing::make_data(25, 12, 0.3, true, 77);
  const auto P = build_problem(data, LossKind::Logistic, 0.05);
  PairSampler seq(P);
  JointSampler joint(P);
  const auto pairs = joint.pairs();
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
  std::vector<double> probs;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    index[{pairs[k].j, pairs[k].i}] = k;
    probs.push_back(P.p()[pairs[k].j] * P.q(pairs[k].j, pairs[k].pos));
    CHECK(joint.distribution().probability(k) == doctest::Approx(probs.back()).epsilon(1e-12));
  }
  Rng r1(8), r2(9);
  std::vector<std::size_t> ca(pairs.size(), 0), cb(pairs.size(), 0);
  const std::size_t draws = 1000000;
  for (std::size_t k = 0; k < draws; ++k) {
    const auto s = seq.sample(r1);
    ++ca[index.at({s.j, s.i})];
    const auto t = joint.sample(r2);
    ++cb[index.at({t.j, t.i})];
  }
  CHECK(chi_square_passes(ca, probs, draws));
  CHECK(chi_square_passes(cb, probs, draws));
}

TEST_CASE("pair sampling: degenerate shapes") {
  SUBCASE("one component") {
    auto data = std::make_shared<const SparseDataset>(
        SparseDataset::from_rows({{{0, 1.0}, {1, 2.0}, {2, 0.5}}}, {0.0}, 3));
    const auto P = build_problem(data, LossKind::Squared, 0.1);
    PairSampler s(P);
    Rng rng(1);
    for (int k = 0; k < 1000; ++k) CHECK(s.sample(rng).i == 0);
  }
  SUBCASE("single nonzero") {
    auto data = std::make_shared<const SparseDataset>(SparseDataset::from_rows({{{0, 1.0}}}, {0.0}, 1));
    const auto P = build_problem(data, LossKind::Squared, 0.1);
    PairSampler s(P);
    Rng rng(1);
    for (int k = 0; k < 100; ++k) {
      const auto d = s.sample(rng);
      CHECK(d.i == 0);
      CHECK(d.j == 0);
    }
  }
}
