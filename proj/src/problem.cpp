#include "s2cd/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace s2cd {

std::string_view to_string(LossKind loss) noexcept {
  return loss == LossKind::Squared ? "squared" : "logistic";
}

std::string_view to_string(RegMode mode) noexcept {
  return mode == RegMode::SupportDistributed ? "support" : "dense";
}

LossKind parse_loss(std::string_view name) {
  if (name == "squared") return LossKind::Squared;
  if (name == "logistic") return LossKind::Logistic;
  throw std::invalid_argument("unknown loss '" + std::string(name) +
                              "' (valid: squared, logistic)");
}

RegMode parse_reg_mode(std::string_view name) {
  if (name == "support") return RegMode::SupportDistributed;
  if (name == "dense") return RegMode::Dense;
  throw std::invalid_argument("unknown reg mode '" + std::string(name) +
                              "' (valid: support, dense)");
}

double loss_value(LossKind loss, double t, double b) noexcept {
  if (loss == LossKind::Squared) return 0.5 * (t - b) * (t - b);
  const double z = b * t;
  return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

double loss_derivative(LossKind loss, double t, double b) noexcept {
  if (loss == LossKind::Squared) return t - b;
  const double z = b * t;
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return -b * e / (1.0 + e);
  }
  return -b / (1.0 + std::exp(z));
}

double loss_second_derivative(LossKind loss, double t, double b) noexcept {
  if (loss == LossKind::Squared) return 1.0;
  const double s = 1.0 / (1.0 + std::exp(-std::abs(b * t)));
  return b * b * s * (1.0 - s);
}

double curvature_bound(LossKind loss) noexcept {
  return loss == LossKind::Squared ? 1.0 : 0.25;
}

LipschitzTable::LipschitzTable(std::size_t num_components, std::size_t dim,
                               std::vector<std::size_t> col_ptr,
                               std::vector<LipschitzEntry> entries)
    : n_(num_components), col_ptr_(std::move(col_ptr)), entries_(std::move(entries)) {
  if (col_ptr_.size() != dim + 1 || col_ptr_.back() != entries_.size())
    throw std::invalid_argument("inconsistent Lipschitz table layout");
}

LipschitzTable LipschitzTable::from_dense(const std::vector<std::vector<double>>& lipschitz) {
  if (lipschitz.empty() || lipschitz.front().empty())
    throw std::invalid_argument("empty Lipschitz table");
  const std::size_t n = lipschitz.size();
  const std::size_t d = lipschitz.front().size();
  std::vector<std::size_t> col_ptr{0};
  std::vector<LipschitzEntry> entries;
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (lipschitz[i].size() != d) throw std::invalid_argument("ragged Lipschitz table");
      const double l = lipschitz[i][j];
      if (l < 0.0 || !std::isfinite(l)) throw std::invalid_argument("invalid L_ij");
      if (l > 0.0) entries.push_back({static_cast<std::uint32_t>(i), 0.0, l, 0.0});
    }
    col_ptr.push_back(entries.size());
  }
  return LipschitzTable(n, d, std::move(col_ptr), std::move(entries));
}

std::optional<std::size_t> LipschitzTable::find(std::size_t i, std::size_t j) const noexcept {
  const auto col = column(j);
  const auto it = std::lower_bound(col.begin(), col.end(), i,
                                   [](const LipschitzEntry& e, std::size_t ii) {
                                     return e.example < ii;
                                   });
  if (it == col.end() || it->example != i) return std::nullopt;
  return static_cast<std::size_t>(it - col.begin());
}

double LipschitzTable::at(std::size_t i, std::size_t j) const noexcept {
  const auto pos = find(i, j);
  return pos ? column(j)[*pos].lipschitz : 0.0;
}

SamplingQuantities compute_sampling_quantities(const LipschitzTable& table) {
  SamplingQuantities out;
  const std::size_t n = table.num_components();
  const std::size_t d = table.dim();
  out.omega.assign(n, 0);
  for (std::size_t j = 0; j < d; ++j)
    for (const auto& e : table.column(j)) ++out.omega[e.example];

  out.v.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double vj = 0.0;
    for (const auto& e : table.column(j))
      vj += static_cast<double>(out.omega[e.example]) * e.lipschitz;
    if (!(vj > 0.0))
      throw std::invalid_argument("coordinate " + std::to_string(j) + " has v_j = 0");
    out.v[j] = vj;
  }
  out.v_total = std::accumulate(out.v.begin(), out.v.end(), 0.0);
  out.p.resize(d);
  for (std::size_t j = 0; j < d; ++j) out.p[j] = out.v[j] / out.v_total;
  out.L_hat = out.v_total / static_cast<double>(n);
  return out;
}

double Problem::q(std::size_t j, std::size_t pos) const noexcept {
  const auto& e = table_->column(j)[pos];
  return static_cast<double>(sampling_.omega[e.example]) * e.lipschitz / sampling_.v[j];
}

double Problem::reg_coefficient(std::size_t i, std::size_t j) const noexcept {
  if (collapsed_) return reg_weight_[j];
  if (reg_mode_ == RegMode::Dense) return mu_;
  return data_->at(i, j) != 0.0 ? col_reg_[j] : 0.0;
}

Problem build_problem(std::shared_ptr<const SparseDataset> data, LossKind loss, double mu,
                      RegMode mode, BuildOptions options) {
  if (!data || data->num_examples() == 0 || data->nnz() == 0)
    throw std::invalid_argument("empty dataset");
  if (!std::isfinite(mu) || mu < 0.0 || (mu == 0.0 && !options.allow_zero_mu))
    throw std::invalid_argument("mu must be positive");
  if (loss == LossKind::Logistic)
    for (double b : data->labels())
      if (b != 1.0 && b != -1.0)
        throw std::invalid_argument("logistic loss needs labels in {-1, +1}");

  const auto& A = *data;
  const std::size_t n = A.num_examples();
  const std::size_t d = A.num_features();
  const double gamma = curvature_bound(loss);
  const double dn = static_cast<double>(n);

  Problem pr;
  pr.data_ = data;
  pr.loss_ = loss;
  pr.reg_mode_ = mode;
  pr.mu_ = mu;

  pr.col_reg_.resize(d);
  for (std::size_t j = 0; j < d; ++j)
    pr.col_reg_[j] = mode == RegMode::Dense ? mu : mu * dn / static_cast<double>(A.col_count(j));

  std::vector<std::size_t> col_ptr{0};
  std::vector<LipschitzEntry> entries;
  entries.reserve(mode == RegMode::Dense && mu > 0.0 ? n * d : A.nnz());
  for (std::size_t j = 0; j < d; ++j) {
    const auto col = A.col(j);
    if (mode == RegMode::SupportDistributed || mu == 0.0) {
      for (const auto& e : col)
        entries.push_back({e.index, e.value, gamma * e.value * e.value + pr.col_reg_[j],
                           mode == RegMode::Dense ? mu : pr.col_reg_[j]});
    } else {
      auto it = col.begin();
      for (std::size_t i = 0; i < n; ++i) {
        double a = 0.0;
        if (it != col.end() && it->index == i) a = (it++)->value;
        entries.push_back({static_cast<std::uint32_t>(i), a, gamma * a * a + mu, mu});
      }
    }
    col_ptr.push_back(entries.size());
  }
  pr.table_ = std::make_shared<const LipschitzTable>(n, d, std::move(col_ptr), std::move(entries));
  pr.model_ = pr.table_;
  pr.sampling_ = compute_sampling_quantities(*pr.table_);

  pr.reg_weight_.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0.0;
    for (const auto& e : pr.table_->column(j)) s += e.reg;
    pr.reg_weight_[j] = s / dn;
  }

  pr.component_smoothness_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    double max_reg = mode == RegMode::Dense ? mu : 0.0;
    for (const auto& e : A.row(i)) {
      sq += e.value * e.value;
      if (mode == RegMode::SupportDistributed) max_reg = std::max(max_reg, pr.col_reg_[e.index]);
    }
    pr.component_smoothness_[i] = gamma * sq + max_reg;
  }
  return pr;
}

Problem build_problem(SparseDataset data, LossKind loss, double mu, RegMode mode,
                      BuildOptions options) {
  return build_problem(std::make_shared<const SparseDataset>(std::move(data)), loss, mu, mode,
                       options);
}

Problem collapse(const Problem& problem) {
  if (problem.collapsed_) return problem;
  const std::size_t d = problem.dim();
  const double dn = static_cast<double>(problem.num_examples());
  std::vector<std::size_t> col_ptr{0};
  std::vector<LipschitzEntry> entries;
  entries.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (const auto& e : problem.model_->column(j)) sum += e.lipschitz;
    entries.push_back({0, 0.0, sum / dn, problem.reg_weight_[j]});
    col_ptr.push_back(entries.size());
  }
  Problem out = problem;
  out.collapsed_ = true;
  out.table_ = std::make_shared<const LipschitzTable>(1, d, std::move(col_ptr), std::move(entries));
  out.sampling_ = compute_sampling_quantities(*out.table_);
  const auto& li = problem.component_smoothness_;
  out.component_smoothness_ = {std::accumulate(li.begin(), li.end(), 0.0) / dn};
  return out;
}

namespace {

void check_dim(const Problem& problem, std::span<const double> x) {
  if (x.size() != problem.dim())
    throw std::invalid_argument("point has dimension " + std::to_string(x.size()) +
                                ", problem has " + std::to_string(problem.dim()));
}

void check_owner(const Problem& problem, const ResidualCache& cache) {
  if (cache.owner() != &problem.data())
    throw std::logic_error("residual cache belongs to a different dataset");
}

double value_from_margins(const Problem& problem, std::span<const double> margins,
                          std::span<const double> x) {
  const auto& A = problem.data();
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < A.num_examples(); ++i)
    loss_sum += loss_value(problem.loss(), margins[i], A.label(i));
  double reg = 0.0;
  const auto w = problem.reg_weight();
  for (std::size_t j = 0; j < x.size(); ++j) reg += w[j] * x[j] * x[j];
  return loss_sum / static_cast<double>(A.num_examples()) + 0.5 * reg;
}

std::vector<double> gradient_from_margins(const Problem& problem, std::span<const double> margins,
                                          std::span<const double> x) {
  const auto& A = problem.data();
  const double inv_n = 1.0 / static_cast<double>(A.num_examples());
  const auto w = problem.reg_weight();
  std::vector<double> g(problem.dim());
  for (std::size_t j = 0; j < g.size(); ++j) {
    double s = 0.0;
    for (const auto& e : A.col(j))
      s += loss_derivative(problem.loss(), margins[e.index], A.label(e.index)) * e.value;
    g[j] = s * inv_n + w[j] * x[j];
  }
  return g;
}

std::vector<double> margins_of(const SparseDataset& A, std::span<const double> x) {
  std::vector<double> r(A.num_examples());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = A.row_dot(i, x);
  return r;
}

}  // namespace

double value(const Problem& problem, std::span<const double> x) {
  check_dim(problem, x);
  return value_from_margins(problem, margins_of(problem.data(), x), x);
}

std::vector<double> full_gradient(const Problem& problem, std::span<const double> x) {
  check_dim(problem, x);
  return gradient_from_margins(problem, margins_of(problem.data(), x), x);
}

double value(const Problem& problem, const ResidualCache& cache) {
  check_owner(problem, cache);
  return value_from_margins(problem, cache.residuals(), cache.point());
}

std::vector<double> full_gradient(const Problem& problem, const ResidualCache& cache) {
  check_owner(problem, cache);
  return gradient_from_margins(problem, cache.residuals(), cache.point());
}

double component_value(const Problem& problem, std::size_t i, std::span<const double> x) {
  check_dim(problem, x);
  if (problem.collapsed()) return value(problem, x);
  const auto& A = problem.data();
  double out = loss_value(problem.loss(), A.row_dot(i, x), A.label(i));
  if (problem.reg_mode() == RegMode::Dense) {
    double sq = 0.0;
    for (double xj : x) sq += xj * xj;
    return out + 0.5 * problem.mu() * sq;
  }
  for (const auto& e : A.row(i)) out += 0.5 * problem.column_reg(e.index) * x[e.index] * x[e.index];
  return out;
}

std::vector<double> component_gradient(const Problem& problem, std::size_t i,
                                       std::span<const double> x) {
  check_dim(problem, x);
  if (problem.collapsed()) return full_gradient(problem, x);
  const auto& A = problem.data();
  const double dphi = loss_derivative(problem.loss(), A.row_dot(i, x), A.label(i));
  std::vector<double> g(x.size(), 0.0);
  if (problem.reg_mode() == RegMode::Dense)
    for (std::size_t j = 0; j < x.size(); ++j) g[j] = problem.mu() * x[j];
  for (const auto& e : A.row(i)) {
    g[e.index] += dphi * e.value;
    if (problem.reg_mode() == RegMode::SupportDistributed)
      g[e.index] += problem.column_reg(e.index) * x[e.index];
  }
  return g;
}

ResidualCache::ResidualCache(const Problem& problem, std::vector<double> y)
    : data_(problem.data_ptr()), y_(std::move(y)) {
  check_dim(problem, y_);
  recompute();
  refreshes_ = 0;
}

void ResidualCache::apply_coordinate_step(std::size_t j, double delta) {
  if (delta == 0.0) return;
  y_[j] += delta;
  const auto col = data_->col(j);
  for (const auto& e : col) r_[e.index] += e.value * delta;
  column_touches_ += col.size();
  if (++steps_since_refresh_ >= data_->num_examples()) recompute();
}

void ResidualCache::recompute() {
  r_ = margins_of(*data_, y_);
  steps_since_refresh_ = 0;
  ++refreshes_;
}

double ResidualCache::residual_drift() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < r_.size(); ++i) {
    double fresh = 0.0;
    double scale = 0.0;
    for (const auto& e : data_->row(i)) {
      fresh += e.value * y_[e.index];
      scale += std::abs(e.value * y_[e.index]);
    }
    worst = std::max(worst, std::abs(r_[i] - fresh) / std::max(1.0, scale));
  }
  return worst;
}

double partial_at(const Problem& problem, std::size_t j, std::size_t pos,
                  const ResidualCache& cache) {
  check_owner(problem, cache);
  const double yj = cache.coordinate(j);
  if (problem.collapsed()) {
    const auto& A = problem.data();
    double s = 0.0;
    for (const auto& e : A.col(j))
      s += loss_derivative(problem.loss(), cache.residual(e.index), A.label(e.index)) * e.value;
    return s / static_cast<double>(A.num_examples()) + problem.reg_weight()[j] * yj;
  }
  const auto& e = problem.lipschitz().column(j)[pos];
  const double dphi =
      e.a == 0.0 ? 0.0
                 : loss_derivative(problem.loss(), cache.residual(e.example),
                                   problem.data().label(e.example));
  return dphi * e.a + e.reg * yj;
}

double partial(const Problem& problem, std::size_t i, std::size_t j, const ResidualCache& cache) {
  check_owner(problem, cache);
  if (i >= problem.num_components() || j >= problem.dim())
    throw std::invalid_argument("index out of range");
  const auto pos = problem.lipschitz().find(i, j);
  if (!pos) throw std::invalid_argument("L_ij = 0: f_i does not depend on coordinate j");
  return partial_at(problem, j, *pos, cache);
}

}  // namespace s2cd
