#ifndef S2CD_SOLVERS_HPP
#define S2CD_SOLVERS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "s2cd/problem.hpp"
#include "s2cd/sampling.hpp"

namespace s2cd {

struct SolverConfig {
  double h = 0.0;          // stepsize
  std::size_t m = 1;       // max inner steps per epoch
  std::size_t epochs = 1;  // K
  std::uint64_t seed = 0;
  double epsilon = 0.0;    // target the parameters were derived for; 0 if set by hand
  /// mu used in the inner-loop length law; defaults to the problem's mu.
  /// Zero is allowed and makes the law uniform on {1..m}.
  std::optional<double> mu_lower_bound;
};

/// Throws std::invalid_argument unless h > 0, m >= 1, epochs >= 1 and
/// 0 <= mu_lb * h < 1.
void validate(const SolverConfig& config, const Problem& problem);
/// True when 0 < h < 1/(2 L_hat), the range covered by the epoch rate.
bool within_rate_range(const SolverConfig& config, const Problem& problem) noexcept;

/// Parameters for accuracy epsilon in (0, 1):
///   K = ceil(log(1/eps)), Delta = eps^(1/K),
///   h = Delta / ((4 + 2 Delta) L_hat),
///   m = ceil((4/Delta + 2) log(2/Delta + 2) kappa_hat).
SolverConfig default_params(const Problem& problem, double epsilon);
SolverConfig default_params(double L_hat, double mu, double epsilon);
/// Delta = eps^(1/K) for K = ceil(log(1/eps)).
double accuracy_delta(double epsilon);

struct TheoreticalRate {
  double rho_epoch;         // sum of the two terms below
  double restart_term;      // (1-mu h)^m / ((1-(1-mu h)^m)(1-2 L_hat h))
  double variance_term;     // 2 L_hat h / (1 - 2 L_hat h)
};

/// Per-epoch contraction factor of E[f(x_k) - f*]. Throws
/// std::invalid_argument unless 0 < h < 1/(2 L_hat) and m >= 1.
TheoreticalRate theoretical_rate(double L_hat, double mu, double h, std::size_t m);
TheoreticalRate theoretical_rate(const Problem& problem, double h, std::size_t m);

/// One progress record. Counters are cumulative since the start of the run.
struct EpochRecord {
  std::size_t epoch = 0;
  double f = 0.0;
  double gap = 0.0;  // f - f*, NaN when f* is unknown
  std::uint64_t grad_evals = 0;      // component gradients grad f_i
  std::uint64_t partial_evals = 0;   // partial derivatives grad_j f_i
  std::uint64_t column_touches = 0;  // margin updates for residual upkeep
  std::uint64_t inner_steps = 0;     // stochastic steps in this epoch
  double wall_ms = 0.0;
};

struct RunTrace {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> records;  // records[0] is the starting point
  std::vector<double> solution;
};

/// f(y) left the admissible range (above 1e6 f(x_0), or not finite).
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// State handed to a step observer, taken just before a coordinate update.
struct InnerStep {
  std::size_t epoch;   // k
  std::size_t t;       // step index inside the epoch
  std::size_t length;  // t_k (0 for methods without a random inner length)
  SampledPair pair;
  double estimate;     // G: the value whose p_j^-1 multiple is applied
  double delta;        // change of y_j
  const ResidualCache* y;         // y_{k,t}
  const ResidualCache* snapshot;  // x_k, or null
  std::span<const double> snapshot_gradient;
};
using StepObserver = std::function<void(const InnerStep&)>;

struct RunOptions {
  std::optional<double> f_star;
  /// Stop once this many effective passes are consumed (0 = no cap).
  double max_passes = 0.0;
  /// Starting point; zero vector when empty.
  std::vector<double> x0;
  StepObserver observer;
};

/// Work in effective passes: grad_evals / N + partial_evals / (N d_bar) for
/// N components with mean support d_bar.
double effective_passes(const Problem& problem, std::uint64_t grad_evals,
                        std::uint64_t partial_evals) noexcept;

/// Semi-stochastic coordinate descent. Coordinate/example draws use stream
/// streams::kCoordinates of config.seed, inner lengths use kInnerLength.
RunTrace s2cd(const Problem& problem, const SolverConfig& config, const RunOptions& options = {});

/// Full-gradient descent with fixed stepsize; one record per iteration.
RunTrace gd(const Problem& problem, double stepsize, std::size_t iters,
            const RunOptions& options = {});

/// h_t = h0 / (1 + decay t); decay = 0 is a constant step.
struct StepSchedule {
  double h0 = 0.0;
  double decay = 0.0;
  double at(std::uint64_t t) const noexcept { return h0 / (1.0 + decay * static_cast<double>(t)); }
};

/// Plain SGD with uniform example sampling; one record per n steps.
RunTrace sgd(const Problem& problem, StepSchedule schedule, std::size_t iters, std::uint64_t seed,
             const RunOptions& options = {});

/// Coordinate descent on f with p_j from the problem:
/// y_j <- y_j - h p_j^-1 grad_j f(y). One record per d steps.
RunTrace cd_nonuniform(const Problem& problem, double h, std::size_t iters, std::uint64_t seed,
                       const RunOptions& options = {});

/// S2GD with examples drawn proportionally to component smoothness L_i and
/// the same inner-length law as s2cd.
RunTrace s2gd(const Problem& problem, double h, std::size_t m, std::size_t epochs,
              std::uint64_t seed, const RunOptions& options = {});

}  // namespace s2cd

#endif  // S2CD_SOLVERS_HPP
