#ifndef S2CD_DIAGNOSTICS_HPP
#define S2CD_DIAGNOSTICS_HPP

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "s2cd/problem.hpp"

namespace s2cd {

/// An exact enumeration would exceed its entry budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact first and second moments of the stochastic direction
/// g = p_j^-1 G^{ij} e_j at inner point y with snapshot x_k, computed by
/// enumerating every (i, j) with L_ij > 0.
struct EstimatorAudit {
  std::vector<double> mean;      // E[g]
  std::vector<double> gradient;  // grad f(y)
  double mean_error = 0.0;       // ||E[g] - grad f(y)|| / ||grad f(y)|| (absolute if 0)
  double second_moment = 0.0;    // E||g||^2
  double f_y = 0.0;
  double f_x = 0.0;
  double f_star = 0.0;
  /// 4 L_hat (f(y) - f*) + 4 L_hat (f(x_k) - f*)
  double loose_bound = 0.0;
  /// 4 L_hat (f(y) - f*) + 4 (L_hat - mu / max_s p_s) (f(x_k) - f*)
  double stronger_bound = 0.0;

  /// E||g||^2 <= stronger <= lemma, each up to `slack`.
  bool chain_holds(double slack = 1e-9) const noexcept {
    return second_moment <= stronger_bound + slack && stronger_bound <= loose_bound + slack;
  }
};

struct AuditLimits {
  std::size_t max_entries = 1'000'000;
};

/// Throws BudgetExceeded when the Lipschitz table has more than
/// limits.max_entries entries.
EstimatorAudit audit_estimator(const Problem& problem, std::span<const double> y,
                               std::span<const double> x_k, double f_star,
                               AuditLimits limits = {});

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// (grad_j f_i(x) - grad_j f_i(y))^2 <= 2 L_ij (f_i(x) - f_i(y) - <grad f_i(y), x - y>).
/// Throws std::invalid_argument if L_ij = 0.
InequalityCheck check_cocoercivity(const Problem& problem, std::size_t i, std::size_t j,
                                   std::span<const double> x, std::span<const double> y,
                                   double tol = 1e-10);

/// f_i(x + h e_j) <= f_i(x) + grad_j f_i(x) h + (L_ij/2) h^2, with L_ij = 0
/// for pairs missing from the table.
InequalityCheck check_smoothness_probe(const Problem& problem, std::size_t i, std::size_t j,
                                       std::span<const double> x, double h,
                                       double tol = 1e-10);

/// f(y) >= f(x) + <grad f(x), y - x> + (mu/2) ||y - x||^2, reported as
/// lhs = right-hand side of that inequality, rhs = f(y).
InequalityCheck check_strong_convexity(const Problem& problem, std::span<const double> x,
                                       std::span<const double> y, double tol = 1e-10);

enum class ReferenceMethod { Auto, ConjugateGradient, GradientDescent };

struct ReferenceSolution {
  std::vector<double> x;
  double f_star = 0.0;
  double grad_norm = 0.0;
  /// ||grad f(x*)||^2 / (2 mu): certified bound on f(x*) - min f.
  double certified_gap = 0.0;
  /// tol^2 / (2 mu)
  double gap_bound = 0.0;
  std::size_t iterations = 0;
  ReferenceMethod method = ReferenceMethod::Auto;
};

/// High-accuracy minimizer with ||grad f(x*)|| <= tol. Auto uses conjugate
/// gradients on the normal equations for squared loss and gradient descent
/// with backtracking for logistic loss. Throws std::invalid_argument for
/// tol < 1e-12 or CG on logistic loss, std::runtime_error when the
/// iteration cap is hit.
ReferenceSolution solve_reference(const Problem& problem, double tol,
                                  ReferenceMethod method = ReferenceMethod::Auto,
                                  std::size_t max_iterations = 2'000'000);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;
};

struct ConditionReport {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t nnz = 0;
  double mean_row_support = 0.0;
  double mu = 0.0;
  double L_hat = 0.0;
  double L_avg = 0.0;
  double L_max = 0.0;
  double kappa_hat = 0.0;
  double kappa_avg = 0.0;
  double kappa_max = 0.0;
  double max_p = 0.0;
  std::vector<double> p;  // kept only for d <= 32
  Histogram v_histogram;
  std::map<std::size_t, std::size_t> omega_counts;
};

/// Condition numbers kappa_hat = L_hat/mu, kappa_avg = L_avg/mu,
/// kappa_max = L_max/mu with L_i the component smoothness bounds. Throws
/// std::logic_error if kappa_hat < kappa_avg.
ConditionReport condition_report(const Problem& problem);

/// Epoch factor with the variance-term numerator L_hat replaced by
/// L_hat - mu / max_s p_s.
double sharper_rate(const Problem& problem, double h, std::size_t m);

/// key=value lines.
std::string to_records(const ConditionReport& report);
std::string to_records(const EstimatorAudit& audit);

}  // namespace s2cd

#endif  // S2CD_DIAGNOSTICS_HPP
