// Dense reference implementations used as oracles by the tests. Everything
// here is written from the definitions with plain loops over a dense copy of
// the data, independently of the library's sparse tables and caches.
#ifndef S2CD_TESTS_SUPPORT_HPP
#define S2CD_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstddef>
#include <memory>
#include <vector>

#include "s2cd/dataset.hpp"
#include "s2cd/problem.hpp"
#include "s2cd/rng.hpp"

namespace testing {

using Matrix = std::vector<std::vector<double>>;

struct Dense {
  Matrix a;  // n x d
  std::vector<double> b;
  s2cd::LossKind loss;
  s2cd::RegMode mode;
  double mu;
  Matrix c;  // regularizer coefficients c_ij
  Matrix L;  // coordinate Lipschitz constants

  std::size_t n() const { return a.size(); }
  std::size_t d() const { return a.empty() ? 0 : a[0].size(); }
  double gamma() const { return loss == s2cd::LossKind::Squared ? 1.0 : 0.25; }

  double phi(double t, double y) const {
    if (loss == s2cd::LossKind::Squared) return 0.5 * (t - y) * (t - y);
    return std::log1p(std::exp(-y * t));
  }
  double dphi(double t, double y) const {
    if (loss == s2cd::LossKind::Squared) return t - y;
    return -y / (1.0 + std::exp(y * t));
  }
  double margin(std::size_t i, const std::vector<double>& x) const {
    double s = 0.0;
    for (std::size_t j = 0; j < d(); ++j) s += a[i][j] * x[j];
    return s;
  }
  double fi(std::size_t i, const std::vector<double>& x) const {
    double s = phi(margin(i, x), b[i]);
    for (std::size_t j = 0; j < d(); ++j) s += 0.5 * c[i][j] * x[j] * x[j];
    return s;
  }
  double dfi(std::size_t i, std::size_t j, const std::vector<double>& x) const {
    return dphi(margin(i, x), b[i]) * a[i][j] + c[i][j] * x[j];
  }
  double f(const std::vector<double>& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n(); ++i) s += fi(i, x);
    return s / static_cast<double>(n());
  }
  std::vector<double> grad(const std::vector<double>& x) const {
    std::vector<double> g(d(), 0.0);
    for (std::size_t i = 0; i < n(); ++i)
      for (std::size_t j = 0; j < d(); ++j) g[j] += dfi(i, j, x);
    for (auto& v : g) v /= static_cast<double>(n());
    return g;
  }

  std::vector<double> omega() const {
    std::vector<double> w(n(), 0.0);
    for (std::size_t i = 0; i < n(); ++i)
      for (std::size_t j = 0; j < d(); ++j) w[i] += L[i][j] != 0.0 ? 1.0 : 0.0;
    return w;
  }
  std::vector<double> v() const {
    const auto w = omega();
    std::vector<double> out(d(), 0.0);
    for (std::size_t j = 0; j < d(); ++j)
      for (std::size_t i = 0; i < n(); ++i) out[j] += w[i] * L[i][j];
    return out;
  }
  double v_total() const {
    double s = 0.0;
    for (double x : v()) s += x;
    return s;
  }
  double L_hat() const { return v_total() / static_cast<double>(n()); }
  double p(std::size_t j) const { return v()[j] / v_total(); }
  double q(std::size_t i, std::size_t j) const { return omega()[i] * L[i][j] / v()[j]; }
};

inline Dense densify(const s2cd::SparseDataset& data, s2cd::LossKind loss, double mu,
                     s2cd::RegMode mode) {
  Dense D;
  D.loss = loss;
  D.mode = mode;
  D.mu = mu;
  const std::size_t n = data.num_examples(), d = data.num_features();
  D.a.assign(n, std::vector<double>(d, 0.0));
  D.b.assign(data.labels().begin(), data.labels().end());
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& e : data.row(i)) D.a[i][e.index] = e.value;
  std::vector<double> col_count(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) col_count[j] += D.a[i][j] != 0.0 ? 1.0 : 0.0;
  D.c.assign(n, std::vector<double>(d, 0.0));
  D.L.assign(n, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (mode == s2cd::RegMode::Dense)
        D.c[i][j] = mu;
      else if (D.a[i][j] != 0.0)
        D.c[i][j] = mu * static_cast<double>(n) / col_count[j];
      D.L[i][j] = D.gamma() * D.a[i][j] * D.a[i][j] + D.c[i][j];
    }
  }
  return D;
}

inline std::shared_ptr<const s2cd::SparseDataset> make_data(std::size_t n, std::size_t d,
                                                            double density, bool classification,
                                                            std::uint64_t seed, double scale = 1.0) {
  s2cd::GeneratorParams g;
  g.n = n;
  g.d = d;
  g.density = density;
  g.scale = scale;
  g.labels = classification ? s2cd::LabelModel::Classification : s2cd::LabelModel::Regression;
  g.seed = seed;
  return std::make_shared<const s2cd::SparseDataset>(s2cd::generate_dataset(g));
}

/// 2 x 2 squared-loss instance with mu = 0.25 whose Lipschitz table is
/// [[1, 2], [0, 4]]: p = (0.2, 0.8), L_hat = 5.
inline std::shared_ptr<const s2cd::SparseDataset> tiny_data() {
  return std::make_shared<const s2cd::SparseDataset>(s2cd::SparseDataset::from_rows(
      {{{0, std::sqrt(0.5)}, {1, std::sqrt(1.75)}}, {{1, std::sqrt(3.75)}}}, {1.0, -1.0}, 2));
}

inline std::vector<double> random_vector(s2cd::Rng& rng, std::size_t d, double scale = 1.0) {
  std::vector<double> x(d);
  for (auto& v : x) v = scale * rng.normal();
  return x;
}

inline double norm(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) num += (a[k] - b[k]) * (a[k] - b[k]);
  const double den = norm(b);
  return den > 0.0 ? std::sqrt(num) / den : std::sqrt(num);
}

}  // namespace testing

#endif  // S2CD_TESTS_SUPPORT_HPP
