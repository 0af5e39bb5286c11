#include "s2cd/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace s2cd {

void validate(const SolverConfig& config, const Problem& problem) {
  if (!(config.h > 0.0) || !std::isfinite(config.h))
    throw std::invalid_argument("stepsize h must be positive");
  if (config.m < 1) throw std::invalid_argument("m must be at least 1");
  if (config.epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  const double mu = config.mu_lower_bound.value_or(problem.mu());
  if (!(mu >= 0.0) || mu > problem.mu())
    throw std::invalid_argument("mu lower bound must lie in [0, mu]");
  if (!(mu * config.h < 1.0)) throw std::invalid_argument("need mu*h < 1");
}

bool within_rate_range(const SolverConfig& config, const Problem& problem) noexcept {
  return config.h > 0.0 && 2.0 * problem.L_hat() * config.h < 1.0;
}

double accuracy_delta(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  const double k = std::ceil(std::log(1.0 / epsilon));
  return std::pow(epsilon, 1.0 / k);
}

SolverConfig default_params(double L_hat, double mu, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (!(L_hat > 0.0) || !(mu > 0.0)) throw std::invalid_argument("need L_hat > 0 and mu > 0");
  const double k = std::ceil(std::log(1.0 / epsilon));
  const double delta = std::pow(epsilon, 1.0 / k);
  const double kappa = L_hat / mu;
  const double m = std::ceil((4.0 / delta + 2.0) * std::log(2.0 / delta + 2.0) * kappa);
  if (!(m <= 1e8)) throw std::invalid_argument("inner loop length exceeds 1e8 (kappa too large)");
  SolverConfig c;
  c.epochs = static_cast<std::size_t>(k);
  c.h = delta / ((4.0 + 2.0 * delta) * L_hat);
  c.m = static_cast<std::size_t>(m);
  c.epsilon = epsilon;
  return c;
}

SolverConfig default_params(const Problem& problem, double epsilon) {
  return default_params(problem.L_hat(), problem.mu(), epsilon);
}

TheoreticalRate theoretical_rate(double L_hat, double mu, double h, std::size_t m) {
  if (!(h > 0.0) || !(2.0 * L_hat * h < 1.0))
    throw std::invalid_argument("rate needs 0 < h < 1/(2 L_hat)");
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  const double decay = std::pow(1.0 - mu * h, static_cast<double>(m));
  const double slack = 1.0 - 2.0 * L_hat * h;
  TheoreticalRate r{};
  r.restart_term = decay / ((1.0 - decay) * slack);
  r.variance_term = 2.0 * L_hat * h / slack;
  r.rho_epoch = r.restart_term + r.variance_term;
  return r;
}

TheoreticalRate theoretical_rate(const Problem& problem, double h, std::size_t m) {
  return theoretical_rate(problem.L_hat(), problem.mu(), h, m);
}

double effective_passes(const Problem& problem, std::uint64_t grad_evals,
                        std::uint64_t partial_evals) noexcept {
  const auto n = static_cast<double>(problem.num_components());
  const double support = problem.collapsed() ? static_cast<double>(problem.dim())
                                             : problem.data().mean_row_support();
  return static_cast<double>(grad_evals) / n + static_cast<double>(partial_evals) / (n * support);
}

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kDivergenceFactor = 1e6;

/// Accumulates counters and records for one run; applies the divergence guard.
class TraceBuilder {
 public:
  TraceBuilder(const Problem& problem, std::string method, std::uint64_t seed,
               const RunOptions& options)
      : problem_(problem), options_(options), start_(Clock::now()) {
    trace_.method = std::move(method);
    trace_.seed = seed;
  }

  std::uint64_t grad_evals = 0;
  std::uint64_t partial_evals = 0;
  std::uint64_t column_touches = 0;

  void record(std::size_t epoch, double f, std::uint64_t inner_steps) {
    if (trace_.records.empty()) f0_ = f;
    EpochRecord r;
    r.epoch = epoch;
    r.f = f;
    r.gap = options_.f_star ? f - *options_.f_star : std::numeric_limits<double>::quiet_NaN();
    r.grad_evals = grad_evals;
    r.partial_evals = partial_evals;
    r.column_touches = column_touches;
    r.inner_steps = inner_steps;
    r.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    trace_.records.push_back(r);
    if (!std::isfinite(f) || (f0_ > 0.0 && f > kDivergenceFactor * f0_)) {
      std::ostringstream msg;
      msg << trace_.method << " diverged at epoch " << epoch << ": f = " << f
          << " (f(x0) = " << f0_ << "); reduce the stepsize";
      throw DivergenceError(msg.str());
    }
  }

  bool budget_exhausted() const noexcept {
    return options_.max_passes > 0.0 &&
           effective_passes(problem_, grad_evals, partial_evals) >= options_.max_passes;
  }

  void check_step(double delta) const {
    if (!std::isfinite(delta))
      throw DivergenceError(trace_.method + " produced a non-finite step; reduce the stepsize");
  }

  RunTrace finish(std::vector<double> solution) {
    trace_.solution = std::move(solution);
    return std::move(trace_);
  }

 private:
  const Problem& problem_;
  const RunOptions& options_;
  Clock::time_point start_;
  double f0_ = 0.0;
  RunTrace trace_;
};

std::vector<double> starting_point(const Problem& problem, const RunOptions& options) {
  if (options.x0.empty()) return std::vector<double>(problem.dim(), 0.0);
  if (options.x0.size() != problem.dim())
    throw std::invalid_argument("starting point has the wrong dimension");
  return options.x0;
}

void require_examples(const Problem& problem, const char* method) {
  if (problem.collapsed())
    throw std::invalid_argument(std::string(method) + " needs per-example components");
}

}  // namespace

RunTrace s2cd(const Problem& problem, const SolverConfig& config, const RunOptions& options) {
  validate(config, problem);
  const double mu_law = config.mu_lower_bound.value_or(problem.mu());
  const GeometricLaw law(config.m, mu_law * config.h);
  PairSampler sampler(problem);
  Rng pair_rng(config.seed, streams::kCoordinates);
  Rng length_rng(config.seed, streams::kInnerLength);
  const auto n = static_cast<double>(problem.num_components());
  const auto p = problem.p();

  TraceBuilder tb(problem, "s2cd", config.seed, options);
  ResidualCache x(problem, starting_point(problem, options));
  tb.record(0, value(problem, x), 0);

  for (std::size_t k = 0; k < config.epochs && !tb.budget_exhausted(); ++k) {
    const std::vector<double> grad = full_gradient(problem, x);
    tb.grad_evals += problem.num_components();
    const std::size_t length = law.sample(length_rng);
    ResidualCache y = x;
    const auto touches_before = y.column_touches();
    for (std::size_t t = 0; t < length; ++t) {
      const SampledPair s = sampler.sample(pair_rng);
      const double at_y = partial_at(problem, s.j, s.pos, y);
      const double at_x = partial_at(problem, s.j, s.pos, x);
      const double G = grad[s.j] + (at_y - at_x) / (n * problem.q(s.j, s.pos));
      const double delta = -config.h * G / p[s.j];
      if (options.observer) options.observer({k, t, length, s, G, delta, &y, &x, grad});
      tb.check_step(delta);
      y.apply_coordinate_step(s.j, delta);
    }
    tb.partial_evals += 2 * length;
    tb.column_touches += y.column_touches() - touches_before;
    x = std::move(y);
    tb.record(k + 1, value(problem, x), length);
  }
  return tb.finish(std::vector<double>(x.point().begin(), x.point().end()));
}

RunTrace gd(const Problem& problem, double stepsize, std::size_t iters, const RunOptions& options) {
  if (!(stepsize > 0.0)) throw std::invalid_argument("stepsize must be positive");
  TraceBuilder tb(problem, "gd", 0, options);
  std::vector<double> x = starting_point(problem, options);
  tb.record(0, value(problem, x), 0);
  for (std::size_t it = 0; it < iters && !tb.budget_exhausted(); ++it) {
    const auto g = full_gradient(problem, x);
    tb.grad_evals += problem.num_components();
    for (std::size_t j = 0; j < x.size(); ++j) x[j] -= stepsize * g[j];
    tb.record(it + 1, value(problem, x), 0);
  }
  return tb.finish(std::move(x));
}

RunTrace sgd(const Problem& problem, StepSchedule schedule, std::size_t iters, std::uint64_t seed,
             const RunOptions& options) {
  require_examples(problem, "sgd");
  if (!(schedule.h0 > 0.0) || !(schedule.decay >= 0.0))
    throw std::invalid_argument("sgd needs h0 > 0 and decay >= 0");
  const auto& A = problem.data();
  const std::size_t n = A.num_examples();
  Rng rng(seed, streams::kCoordinates);
  TraceBuilder tb(problem, "sgd", seed, options);
  std::vector<double> y = starting_point(problem, options);
  tb.record(0, value(problem, y), 0);
  std::size_t epoch = 0;
  std::uint64_t steps_in_epoch = 0;
  for (std::uint64_t t = 0; t < iters; ++t) {
    const auto i = static_cast<std::size_t>(rng.uniform_index(n));
    const double h = schedule.at(t);
    const double dphi = loss_derivative(problem.loss(), A.row_dot(i, y), A.label(i));
    if (problem.reg_mode() == RegMode::Dense) {
      const double shrink = 1.0 - h * problem.mu();
      for (auto& yj : y) yj *= shrink;
      for (const auto& e : A.row(i)) y[e.index] -= h * dphi * e.value;
    } else {
      for (const auto& e : A.row(i))
        y[e.index] -= h * (dphi * e.value + problem.column_reg(e.index) * y[e.index]);
    }
    ++tb.grad_evals;
    if (++steps_in_epoch == n || t + 1 == iters) {
      tb.record(++epoch, value(problem, y), steps_in_epoch);
      steps_in_epoch = 0;
      if (tb.budget_exhausted()) break;
    }
  }
  return tb.finish(std::move(y));
}

RunTrace cd_nonuniform(const Problem& problem, double h, std::size_t iters, std::uint64_t seed,
                       const RunOptions& options) {
  if (!(h > 0.0)) throw std::invalid_argument("stepsize must be positive");
  const auto& A = problem.data();
  const DiscreteDistribution coordinates(problem.p());
  const auto p = problem.p();
  const auto w = problem.reg_weight();
  const double inv_n = 1.0 / static_cast<double>(A.num_examples());
  const std::size_t d = problem.dim();
  Rng rng(seed, streams::kCoordinates);
  TraceBuilder tb(problem, "cd", seed, options);
  ResidualCache y(problem, starting_point(problem, options));
  tb.record(0, value(problem, y), 0);
  std::size_t epoch = 0;
  std::uint64_t steps_in_epoch = 0;
  for (std::uint64_t t = 0; t < iters; ++t) {
    const std::size_t j = coordinates.sample(rng);
    double s = 0.0;
    for (const auto& e : A.col(j))
      s += loss_derivative(problem.loss(), y.residual(e.index), A.label(e.index)) * e.value;
    const double grad_j = s * inv_n + w[j] * y.coordinate(j);
    const double delta = -h * grad_j / p[j];
    if (options.observer)
      options.observer({0, static_cast<std::size_t>(t), 0, {j, 0, 0}, grad_j, delta, &y, nullptr, {}});
    tb.check_step(delta);
    const auto before = y.column_touches();
    y.apply_coordinate_step(j, delta);
    tb.partial_evals += problem.model_table().column(j).size();
    tb.column_touches += y.column_touches() - before;
    if (++steps_in_epoch == d || t + 1 == iters) {
      tb.record(++epoch, value(problem, y), steps_in_epoch);
      steps_in_epoch = 0;
      if (tb.budget_exhausted()) break;
    }
  }
  return tb.finish(std::vector<double>(y.point().begin(), y.point().end()));
}

RunTrace s2gd(const Problem& problem, double h, std::size_t m, std::size_t epochs,
              std::uint64_t seed, const RunOptions& options) {
  require_examples(problem, "s2gd");
  if (!(h > 0.0)) throw std::invalid_argument("stepsize must be positive");
  const auto& A = problem.data();
  const std::size_t n = A.num_examples();
  const std::size_t d = problem.dim();
  const GeometricLaw law(m, problem.mu() * h);
  const DiscreteDistribution examples(problem.component_smoothness());
  Rng pick_rng(seed, streams::kCoordinates);
  Rng length_rng(seed, streams::kInnerLength);
  const bool dense = problem.reg_mode() == RegMode::Dense;

  TraceBuilder tb(problem, "s2gd", seed, options);
  std::vector<double> x = starting_point(problem, options);
  tb.record(0, value(problem, x), 0);
  std::vector<double> margins_x(n);
  std::vector<double> correction;
  for (std::size_t k = 0; k < epochs && !tb.budget_exhausted(); ++k) {
    const auto grad = full_gradient(problem, x);
    for (std::size_t i = 0; i < n; ++i) margins_x[i] = A.row_dot(i, x);
    tb.grad_evals += n;
    const std::size_t length = law.sample(length_rng);
    std::vector<double> y = x;
    for (std::size_t t = 0; t < length; ++t) {
      const std::size_t i = examples.sample(pick_rng);
      const double scale = 1.0 / (static_cast<double>(n) * examples.probability(i));
      const double dphi = loss_derivative(problem.loss(), A.row_dot(i, y), A.label(i)) -
                          loss_derivative(problem.loss(), margins_x[i], A.label(i));
      const auto row = A.row(i);
      if (dense) {
        correction.assign(d, 0.0);
        for (std::size_t j = 0; j < d; ++j) correction[j] = problem.mu() * (y[j] - x[j]);
        for (const auto& e : row) correction[e.index] += dphi * e.value;
        for (std::size_t j = 0; j < d; ++j) y[j] -= h * (grad[j] + scale * correction[j]);
      } else {
        correction.resize(row.size());
        for (std::size_t r = 0; r < row.size(); ++r) {
          const auto j = row[r].index;
          correction[r] = dphi * row[r].value +
                          problem.column_reg(j) * (y[j] - x[j]);
        }
        for (std::size_t j = 0; j < d; ++j) y[j] -= h * grad[j];
        for (std::size_t r = 0; r < row.size(); ++r)
          y[row[r].index] -= h * scale * correction[r];
      }
      tb.check_step(y[row.empty() ? 0 : row.front().index]);
    }
    tb.grad_evals += 2 * length;
    x = std::move(y);
    tb.record(k + 1, value(problem, x), length);
  }
  return tb.finish(std::move(x));
}

}  // namespace s2cd
