#include "s2cd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "s2cd/solvers.hpp"

namespace s2cd {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

void check_component(const Problem& problem, std::size_t i, std::size_t j) {
  if (i >= problem.num_components() || j >= problem.dim())
    throw std::invalid_argument("index out of range");
}

double max_probability(const Problem& problem) {
  const auto p = problem.p();
  return *std::max_element(p.begin(), p.end());
}

}  // namespace

EstimatorAudit audit_estimator(const Problem& problem, std::span<const double> y,
                               std::span<const double> x_k, double f_star, AuditLimits limits) {
  if (problem.lipschitz().size() > limits.max_entries)
    throw BudgetExceeded("estimator audit needs " + std::to_string(problem.lipschitz().size()) +
                         " entries, budget is " + std::to_string(limits.max_entries));
  const ResidualCache cy(problem, std::vector<double>(y.begin(), y.end()));
  const ResidualCache cx(problem, std::vector<double>(x_k.begin(), x_k.end()));
  const auto gx = full_gradient(problem, cx);
  const auto n = static_cast<double>(problem.num_components());
  const auto p = problem.p();

  EstimatorAudit a;
  a.gradient = full_gradient(problem, cy);
  a.mean.assign(problem.dim(), 0.0);
  for (std::size_t j = 0; j < problem.dim(); ++j) {
    const auto col = problem.lipschitz().column(j);
    double first = 0.0;
    double second = 0.0;
    for (std::size_t pos = 0; pos < col.size(); ++pos) {
      const double q = problem.q(j, pos);
      const double G =
          gx[j] + (partial_at(problem, j, pos, cy) - partial_at(problem, j, pos, cx)) / (n * q);
      first += q * G;
      second += q * G * G;
    }
    // E[g]_j = sum_i p_j q_ij p_j^-1 G; E||g||^2 picks up p_j^-1.
    a.mean[j] = first;
    a.second_moment += second / p[j];
  }

  std::vector<double> diff(a.mean.size());
  for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = a.mean[j] - a.gradient[j];
  const double gnorm = norm2(a.gradient);
  a.mean_error = gnorm > 0.0 ? norm2(diff) / gnorm : norm2(diff);

  a.f_y = value(problem, cy);
  a.f_x = value(problem, cx);
  a.f_star = f_star;
  const double L = problem.L_hat();
  a.loose_bound = 4.0 * L * (a.f_y - f_star) + 4.0 * L * (a.f_x - f_star);
  a.stronger_bound = 4.0 * L * (a.f_y - f_star) +
                     4.0 * (L - problem.mu() / max_probability(problem)) * (a.f_x - f_star);
  return a;
}

InequalityCheck check_cocoercivity(const Problem& problem, std::size_t i, std::size_t j,
                                   std::span<const double> x, std::span<const double> y,
                                   double tol) {
  check_component(problem, i, j);
  const double L = problem.lipschitz().at(i, j);
  if (!(L > 0.0)) throw std::invalid_argument("coordinate outside the support of f_i");
  const auto gx = component_gradient(problem, i, x);
  const auto gy = component_gradient(problem, i, y);
  std::vector<double> step(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) step[k] = x[k] - y[k];
  const double bregman =
      component_value(problem, i, x) - component_value(problem, i, y) - dot(gy, step);
  InequalityCheck c;
  c.lhs = (gx[j] - gy[j]) * (gx[j] - gy[j]);
  c.rhs = 2.0 * L * bregman;
  c.holds = c.lhs <= c.rhs + tol;
  return c;
}

InequalityCheck check_smoothness_probe(const Problem& problem, std::size_t i, std::size_t j,
                                       std::span<const double> x, double h, double tol) {
  check_component(problem, i, j);
  const double L = problem.lipschitz().at(i, j);
  std::vector<double> moved(x.begin(), x.end());
  moved[j] += h;
  InequalityCheck c;
  c.lhs = component_value(problem, i, moved);
  c.rhs = component_value(problem, i, x) + component_gradient(problem, i, x)[j] * h +
          0.5 * L * h * h;
  c.holds = c.lhs <= c.rhs + tol;
  return c;
}

InequalityCheck check_strong_convexity(const Problem& problem, std::span<const double> x,
                                       std::span<const double> y, double tol) {
  const auto g = full_gradient(problem, x);
  std::vector<double> step(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) step[k] = y[k] - x[k];
  const double dist = norm2(step);
  InequalityCheck c;
  c.lhs = value(problem, x) + dot(g, step) + 0.5 * problem.mu() * dist * dist;
  c.rhs = value(problem, y);
  c.holds = c.lhs <= c.rhs + tol;
  return c;
}

namespace {

ReferenceSolution finish_reference(const Problem& problem, std::vector<double> x, double tol,
                                   std::size_t iterations, ReferenceMethod method) {
  ReferenceSolution s;
  s.grad_norm = norm2(full_gradient(problem, x));
  s.f_star = value(problem, x);
  s.certified_gap = s.grad_norm * s.grad_norm / (2.0 * problem.mu());
  s.gap_bound = tol * tol / (2.0 * problem.mu());
  s.iterations = iterations;
  s.method = method;
  s.x = std::move(x);
  return s;
}

/// (1/n) A^T A v + w .* v, the Hessian of the squared-loss objective.
void hessian_apply(const Problem& problem, std::span<const double> v, std::span<double> out) {
  const auto& A = problem.data();
  const double inv_n = 1.0 / static_cast<double>(A.num_examples());
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < A.num_examples(); ++i) {
    const double r = A.row_dot(i, v) * inv_n;
    for (const auto& e : A.row(i)) out[e.index] += r * e.value;
  }
  const auto w = problem.reg_weight();
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += w[j] * v[j];
}

ReferenceSolution solve_cg(const Problem& problem, double tol, std::size_t max_iterations) {
  const std::size_t d = problem.dim();
  std::vector<double> x(d, 0.0), r(d), p(d), hp(d);
  std::size_t it = 0;
  // Restart from the true gradient until it certifies the tolerance; the CG
  // recurrence residual alone can drift below the true one.
  while (true) {
    const auto g = full_gradient(problem, x);
    for (std::size_t j = 0; j < d; ++j) r[j] = -g[j];
    if (norm2(r) <= tol) break;
    p = r;
    double rr = dot(r, r);
    const double target = 0.25 * tol * tol;
    for (std::size_t inner = 0; inner < 4 * d + 50 && rr > target; ++inner) {
      if (++it > max_iterations) throw std::runtime_error("reference CG hit its iteration cap");
      hessian_apply(problem, p, hp);
      const double alpha = rr / dot(p, hp);
      for (std::size_t j = 0; j < d; ++j) {
        x[j] += alpha * p[j];
        r[j] -= alpha * hp[j];
      }
      const double rr_new = dot(r, r);
      const double beta = rr_new / rr;
      rr = rr_new;
      for (std::size_t j = 0; j < d; ++j) p[j] = r[j] + beta * p[j];
    }
    if (it > max_iterations) throw std::runtime_error("reference CG hit its iteration cap");
  }
  return finish_reference(problem, std::move(x), tol, it, ReferenceMethod::ConjugateGradient);
}

ReferenceSolution solve_gd(const Problem& problem, double tol, std::size_t max_iterations) {
  const std::size_t d = problem.dim();
  const auto li = problem.component_smoothness();
  // Average component smoothness bounds the smoothness of f, so steps no
  // longer than 1/L_avg always decrease f in exact arithmetic.
  const double l_avg = std::accumulate(li.begin(), li.end(), 0.0) / static_cast<double>(li.size());
  const double safe_step = 1.0 / std::max(l_avg, problem.mu());
  double step = safe_step;
  std::vector<double> x(d, 0.0), trial(d);
  double fx = value(problem, x);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    const auto g = full_gradient(problem, x);
    const double gn = norm2(g);
    if (gn <= tol)
      return finish_reference(problem, std::move(x), tol, it, ReferenceMethod::GradientDescent);
    step *= 2.0;
    while (true) {
      for (std::size_t j = 0; j < d; ++j) trial[j] = x[j] - step * g[j];
      const double ft = value(problem, trial);
      if (ft <= fx - 0.5 * step * gn * gn || step <= safe_step) {
        fx = ft;
        break;
      }
      step = std::max(0.5 * step, safe_step);
    }
    x.swap(trial);
  }
  throw std::runtime_error("reference gradient descent hit its iteration cap");
}

}  // namespace

ReferenceSolution solve_reference(const Problem& problem, double tol, ReferenceMethod method,
                                  std::size_t max_iterations) {
  if (!(tol >= 1e-12)) throw std::invalid_argument("reference tolerance must be >= 1e-12");
  if (method == ReferenceMethod::Auto)
    method = problem.loss() == LossKind::Squared ? ReferenceMethod::ConjugateGradient
                                                 : ReferenceMethod::GradientDescent;
  if (method == ReferenceMethod::ConjugateGradient) {
    if (problem.loss() != LossKind::Squared)
      throw std::invalid_argument("conjugate gradients need squared loss");
    return solve_cg(problem, tol, max_iterations);
  }
  return solve_gd(problem, tol, max_iterations);
}

ConditionReport condition_report(const Problem& problem) {
  ConditionReport r;
  r.n = problem.num_components();
  r.d = problem.dim();
  r.nnz = problem.data().nnz();
  r.mean_row_support = problem.data().mean_row_support();
  r.mu = problem.mu();
  r.L_hat = problem.L_hat();
  const auto li = problem.component_smoothness();
  r.L_avg = std::accumulate(li.begin(), li.end(), 0.0) / static_cast<double>(li.size());
  r.L_max = *std::max_element(li.begin(), li.end());
  r.kappa_hat = r.L_hat / r.mu;
  r.kappa_avg = r.L_avg / r.mu;
  r.kappa_max = r.L_max / r.mu;
  r.max_p = max_probability(problem);
  if (r.d <= 32) r.p.assign(problem.p().begin(), problem.p().end());

  const auto v = problem.v();
  r.v_histogram.lo = *std::min_element(v.begin(), v.end());
  r.v_histogram.hi = *std::max_element(v.begin(), v.end());
  r.v_histogram.counts.assign(10, 0);
  const double width = (r.v_histogram.hi - r.v_histogram.lo) / 10.0;
  for (double vj : v) {
    std::size_t bin = width > 0.0 ? static_cast<std::size_t>((vj - r.v_histogram.lo) / width) : 0;
    ++r.v_histogram.counts[std::min<std::size_t>(bin, 9)];
  }
  for (auto w : problem.omega()) ++r.omega_counts[w];

  if (r.kappa_hat < r.kappa_avg * (1.0 - 1e-12))
    throw std::logic_error("kappa_hat < kappa_avg: Lipschitz table is inconsistent");
  return r;
}

double sharper_rate(const Problem& problem, double h, std::size_t m) {
  const auto base = theoretical_rate(problem, h, m);
  const double slack = 1.0 - 2.0 * problem.L_hat() * h;
  const double numerator = problem.L_hat() - problem.mu() / max_probability(problem);
  return base.restart_term + 2.0 * numerator * h / slack;
}

namespace {

template <typename Range>
std::string join(const Range& values) {
  std::ostringstream out;
  out.precision(10);
  bool first = true;
  for (const auto& v : values) {
    if (!first) out << ',';
    out << v;
    first = false;
  }
  return out.str();
}

}  // namespace

std::string to_records(const ConditionReport& r) {
  std::ostringstream out;
  out.precision(10);
  out << "n=" << r.n << '\n'
      << "d=" << r.d << '\n'
      << "nnz=" << r.nnz << '\n'
      << "mean_row_support=" << r.mean_row_support << '\n'
      << "mu=" << r.mu << '\n'
      << "L_hat=" << r.L_hat << '\n'
      << "L_avg=" << r.L_avg << '\n'
      << "L_max=" << r.L_max << '\n'
      << "kappa_hat=" << r.kappa_hat << '\n'
      << "kappa_avg=" << r.kappa_avg << '\n'
      << "kappa_max=" << r.kappa_max << '\n'
      << "kappa_hat_vs_kappa_max=" << (r.kappa_hat > r.kappa_max   ? "larger"
                                       : r.kappa_hat < r.kappa_max ? "smaller"
                                                                   : "equal")
      << '\n'
      << "max_p=" << r.max_p << '\n';
  if (!r.p.empty()) out << "p=" << join(r.p) << '\n';
  out << "v_hist_range=" << r.v_histogram.lo << ',' << r.v_histogram.hi << '\n'
      << "v_hist_counts=" << join(r.v_histogram.counts) << '\n';
  std::vector<std::string> omega;
  for (const auto& [w, count] : r.omega_counts)
    omega.push_back(std::to_string(w) + ":" + std::to_string(count));
  out << "omega_counts=" << join(omega) << '\n';
  return out.str();
}

std::string to_records(const EstimatorAudit& a) {
  std::ostringstream out;
  out.precision(10);
  out << "mean_error=" << a.mean_error << '\n'
      << "second_moment=" << a.second_moment << '\n'
      << "stronger_bound=" << a.stronger_bound << '\n'
      << "loose_bound=" << a.loose_bound << '\n'
      << "f_y=" << a.f_y << '\n'
      << "f_x=" << a.f_x << '\n'
      << "f_star=" << a.f_star << '\n'
      << "chain_holds=" << (a.chain_holds() ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace s2cd
