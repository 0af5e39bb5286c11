#ifndef S2CD_EXPERIMENT_HPP
#define S2CD_EXPERIMENT_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "s2cd/dataset.hpp"
#include "s2cd/problem.hpp"
#include "s2cd/trace.hpp"

namespace s2cd {

/// Methods understood by the runner: s2cd, s2gd, gd, sgd, cd.
const std::vector<std::string>& method_names();

/// A method name outside method_names().
class UnknownMethod : public std::invalid_argument {
 public:
  explicit UnknownMethod(const std::string& name);
};

/// Exactly one of the two is set.
struct ProblemSource {
  std::optional<std::string> path;
  std::optional<GeneratorParams> generator;
};

/// Hand-set parameters for one method; anything left empty is derived from
/// the problem. Keys used per method:
///   s2cd: h, m, epochs   s2gd: h, m, epochs   gd: h
///   sgd: h (initial), decay   cd: h
struct MethodOverrides {
  std::optional<double> h;
  std::optional<std::size_t> m;
  std::optional<std::size_t> epochs;
  std::optional<double> decay;
};

struct ExperimentSpec {
  ProblemSource source;
  LossKind loss = LossKind::Squared;
  double mu = 0.0;
  RegMode reg_mode = RegMode::SupportDistributed;
  std::vector<std::string> methods;
  std::map<std::string, MethodOverrides> overrides;
  double epsilon = 1e-3;
  std::vector<std::uint64_t> seeds;
  double budget_passes = 0.0;
  std::string out;
};

/// Throws UnknownMethod for an unrecognized method and std::invalid_argument
/// for an empty method or seed list, a nonpositive budget, mu <= 0, epsilon
/// outside (0, 1), or a source that is not exactly one of path/generator.
void validate(const ExperimentSpec& spec);

std::shared_ptr<const SparseDataset> load_source(const ProblemSource& source, LossKind loss);
std::string describe(const ProblemSource& source);

ProblemSummary summarize(const Problem& problem, const std::string& source, double f_star);

/// Parameters each method will run with, after defaults and overrides.
nlohmann::json resolve_config(const ExperimentSpec& spec, const Problem& problem);

/// Runs every (method, seed) pair on up to `threads` worker threads and
/// returns the runs in spec order (methods outer, seeds inner). If any run
/// fails, the first failure in that order is rethrown after all workers stop.
TraceFile run_experiment(const ExperimentSpec& spec, const Problem& problem, double f_star,
                         std::size_t threads = 1);

/// Number of worker threads from S2CD_THREADS (hardware concurrency when
/// unset or unparsable), at least 1.
std::size_t thread_cap_from_env();

inline constexpr std::array<double, 3> kGapThresholds = {1e-1, 1e-2, 1e-3};

struct CompareRow {
  std::string label;  // "<file>:<method>"
  std::size_t runs = 0;
  /// Mean effective passes until (f - f*) / (f(x0) - f*) <= threshold, over
  /// the runs that got there; empty if none did.
  std::array<std::optional<double>, 3> passes_to;
  std::array<std::size_t, 3> reached{};
  double final_relative_gap = 0.0;
  /// Measured cost per partial derivative, 1 + column_touches / partial_evals.
  std::optional<double> cost_partial;
  /// kappa_hat C_pd / (kappa_avg C_grad) with C_grad = d_bar.
  std::optional<double> cost_ratio;
};

/// Throws std::invalid_argument if the files describe different problems.
std::vector<CompareRow> compare_traces(const std::vector<TraceFile>& traces,
                                       const std::vector<std::string>& names);
void print_compare(std::ostream& out, const std::vector<CompareRow>& rows);

struct DiagnoseOptions {
  /// Audits run only when the Lipschitz table has at most this many entries.
  std::size_t audit_budget = 1'000'000;
  std::size_t estimator_points = 20;
  std::size_t probes = 1000;
  std::uint64_t seed = 0;
};

/// Prints the condition report followed by one "check=<name> status=PASS|FAIL"
/// record per audit. Returns false if any audit failed.
bool diagnose(std::ostream& out, const Problem& problem, const DiagnoseOptions& options = {});

}  // namespace s2cd

#endif  // S2CD_EXPERIMENT_HPP
