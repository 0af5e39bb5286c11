#include "s2cd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "s2cd/diagnostics.hpp"
#include "s2cd/rng.hpp"
#include "s2cd/solvers.hpp"

namespace s2cd {

using nlohmann::json;

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = {"s2cd", "s2gd", "gd", "sgd", "cd"};
  return names;
}

namespace {

std::string joined_methods() {
  std::string s;
  for (const auto& m : method_names()) s += (s.empty() ? "" : ", ") + m;
  return s;
}

bool known_method(const std::string& name) {
  const auto& names = method_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace

UnknownMethod::UnknownMethod(const std::string& name)
    : std::invalid_argument("unknown method '" + name + "'; valid methods: " + joined_methods()) {}

void validate(const ExperimentSpec& spec) {
  if (spec.methods.empty()) throw std::invalid_argument("at least one method is required");
  for (const auto& m : spec.methods)
    if (!known_method(m)) throw UnknownMethod(m);
  for (const auto& [m, o] : spec.overrides)
    if (!known_method(m)) throw UnknownMethod(m);
  if (spec.seeds.empty()) throw std::invalid_argument("at least one seed is required");
  if (!(spec.budget_passes > 0.0) || !std::isfinite(spec.budget_passes))
    throw std::invalid_argument("budget must be a positive number of effective passes");
  if (!(spec.mu > 0.0) || !std::isfinite(spec.mu))
    throw std::invalid_argument("mu must be positive");
  if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0))
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (spec.source.path.has_value() == spec.source.generator.has_value())
    throw std::invalid_argument("give exactly one of a data file or generator parameters");
}

std::shared_ptr<const SparseDataset> load_source(const ProblemSource& source, LossKind loss) {
  if (source.path) return std::make_shared<const SparseDataset>(read_libsvm_file(*source.path));
  if (!source.generator) throw std::invalid_argument("empty problem source");
  GeneratorParams params = *source.generator;
  params.labels = loss == LossKind::Logistic ? LabelModel::Classification : LabelModel::Regression;
  return std::make_shared<const SparseDataset>(generate_dataset(params));
}

std::string describe(const ProblemSource& source) {
  if (source.path) return *source.path;
  if (!source.generator) return "";
  const auto& g = *source.generator;
  std::ostringstream s;
  s << std::setprecision(17) << "generate:n=" << g.n << ",d=" << g.d << ",density=" << g.density
    << ",scale=" << g.scale << ",noise=" << g.noise << ",seed=" << g.seed;
  return s.str();
}

ProblemSummary summarize(const Problem& problem, const std::string& source, double f_star) {
  const auto report = condition_report(problem);
  ProblemSummary s;
  s.source = source;
  s.n = report.n;
  s.d = report.d;
  s.nnz = report.nnz;
  s.mean_row_support = report.mean_row_support;
  s.loss = std::string(to_string(problem.loss()));
  s.mu = problem.mu();
  s.reg_mode = std::string(to_string(problem.reg_mode()));
  s.L_hat = report.L_hat;
  s.kappa_hat = report.kappa_hat;
  s.kappa_avg = report.kappa_avg;
  s.kappa_max = report.kappa_max;
  s.f_star = f_star;
  return s;
}

namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Largest stable coordinate step for cd: y_j moves by h/p_j along a
// direction with curvature at most (1/n) sum_i L_ij.
double cd_default_step(const Problem& problem) {
  const auto& table = problem.lipschitz();
  const auto n = static_cast<double>(table.num_components());
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < table.dim(); ++j) {
    double lf = 0.0;
    for (const auto& e : table.column(j)) lf += e.lipschitz;
    lf /= n;
    if (lf > 0.0) h = std::min(h, problem.p()[j] / lf);
  }
  return h;
}

MethodOverrides overrides_for(const ExperimentSpec& spec, const std::string& method) {
  const auto it = spec.overrides.find(method);
  return it == spec.overrides.end() ? MethodOverrides{} : it->second;
}

constexpr std::size_t kOpenEndedEpochs = 100000;

}  // namespace

json resolve_config(const ExperimentSpec& spec, const Problem& problem) {
  const auto smooth = problem.component_smoothness();
  const double L_avg = mean_of(smooth);
  const double L_max = smooth.empty() ? 0.0 : *std::max_element(smooth.begin(), smooth.end());
  const double mu = problem.mu();

  json methods = json::object();
  for (const auto& name : spec.methods) {
    if (methods.contains(name)) continue;
    const auto o = overrides_for(spec, name);
    json c;
    if (name == "s2cd") {
      const auto auto_cfg = default_params(problem, spec.epsilon);
      c = {{"h", o.h.value_or(auto_cfg.h)},
           {"m", o.m.value_or(auto_cfg.m)},
           {"epochs", o.epochs.value_or(auto_cfg.epochs)},
           {"auto", !o.h && !o.m && !o.epochs}};
    } else if (name == "s2gd") {
      const double h = o.h.value_or(0.1 / L_avg);
      const auto m = o.m.value_or(
          static_cast<std::size_t>(std::ceil(2.0 / (mu * h))));
      c = {{"h", h}, {"m", m}, {"epochs", o.epochs.value_or(kOpenEndedEpochs)}};
    } else if (name == "gd") {
      c = {{"h", o.h.value_or(1.0 / L_avg)}};
    } else if (name == "sgd") {
      const double h0 = o.h.value_or(1.0 / L_max);
      c = {{"h", h0}, {"decay", o.decay.value_or(mu * h0)}};
    } else {
      c = {{"h", o.h.value_or(cd_default_step(problem))}};
    }
    methods[name] = c;
  }

  return {{"loss", std::string(to_string(spec.loss))},
          {"mu", spec.mu},
          {"reg_mode", std::string(to_string(spec.reg_mode))},
          {"epsilon", spec.epsilon},
          {"seeds", spec.seeds},
          {"budget_passes", spec.budget_passes},
          {"method_order", spec.methods},
          {"methods", methods}};
}

namespace {

RunTrace run_one(const Problem& problem, const std::string& method, const json& c,
                 std::uint64_t seed, const RunOptions& options, double budget) {
  const double h = c.at("h").get<double>();
  if (method == "s2cd") {
    SolverConfig cfg;
    cfg.h = h;
    cfg.m = c.at("m").get<std::size_t>();
    cfg.epochs = c.at("epochs").get<std::size_t>();
    cfg.seed = seed;
    return s2cd(problem, cfg, options);
  }
  if (method == "s2gd")
    return s2gd(problem, h, c.at("m").get<std::size_t>(), c.at("epochs").get<std::size_t>(), seed,
                options);
  if (method == "gd") return gd(problem, h, static_cast<std::size_t>(std::ceil(budget)), options);
  if (method == "sgd") {
    const auto iters = static_cast<std::size_t>(
        std::ceil(budget * static_cast<double>(problem.num_components())));
    return sgd(problem, {h, c.at("decay").get<double>()}, iters, seed, options);
  }
  if (method == "cd")
    return cd_nonuniform(problem, h, std::numeric_limits<std::size_t>::max(), seed, options);
  throw UnknownMethod(method);
}

}  // namespace

std::size_t thread_cap_from_env() {
  std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("S2CD_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) cap = static_cast<std::size_t>(v);
  }
  return cap;
}

TraceFile run_experiment(const ExperimentSpec& spec, const Problem& problem, double f_star,
                         std::size_t threads) {
  validate(spec);
  TraceFile trace;
  trace.problem = summarize(problem, describe(spec.source), f_star);
  trace.config = resolve_config(spec, problem);

  struct Task {
    std::string method;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& m : spec.methods)
    for (auto s : spec.seeds) tasks.push_back({m, s});

  RunOptions options;
  options.f_star = f_star;
  options.max_passes = spec.budget_passes;

  std::vector<RunTrace> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto& methods = trace.config.at("methods");
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      try {
        results[t] = run_one(problem, tasks[t].method, methods.at(tasks[t].method), tasks[t].seed,
                             options, spec.budget_passes);
        results[t].solution.clear();
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };

  const std::size_t count = std::clamp<std::size_t>(threads, 1, tasks.size());
  if (count == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < count; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  trace.runs = std::move(results);
  return trace;
}

namespace {

bool close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

void check_compatible(const ProblemSummary& a, const ProblemSummary& b, const std::string& name) {
  const bool same = a.n == b.n && a.d == b.d && a.nnz == b.nnz && a.loss == b.loss &&
                    a.reg_mode == b.reg_mode && close(a.mu, b.mu, 1e-12) &&
                    close(a.L_hat, b.L_hat, 1e-9) && close(a.f_star, b.f_star, 1e-9);
  if (!same)
    throw std::invalid_argument(name + " describes a different problem than the first file");
}

}  // namespace

std::vector<CompareRow> compare_traces(const std::vector<TraceFile>& traces,
                                       const std::vector<std::string>& names) {
  if (traces.empty()) throw std::invalid_argument("no trace files to compare");
  for (std::size_t f = 1; f < traces.size(); ++f)
    check_compatible(traces[0].problem, traces[f].problem, names.at(f));

  std::vector<CompareRow> rows;
  for (std::size_t f = 0; f < traces.size(); ++f) {
    const auto& p = traces[f].problem;
    const auto n = static_cast<double>(p.n);
    const double support = p.mean_row_support;

    std::vector<std::string> order;
    for (const auto& run : traces[f].runs)
      if (std::find(order.begin(), order.end(), run.method) == order.end())
        order.push_back(run.method);

    for (const auto& method : order) {
      CompareRow row;
      row.label = names.at(f) + ":" + method;
      std::array<double, 3> sums{};
      double final_gap = 0.0;
      std::uint64_t partials = 0, touches = 0;
      for (const auto& run : traces[f].runs) {
        if (run.method != method || run.records.empty()) continue;
        ++row.runs;
        const double gap0 = run.records.front().gap;
        auto relative = [&](const EpochRecord& r) { return gap0 > 0.0 ? r.gap / gap0 : 0.0; };
        for (std::size_t t = 0; t < kGapThresholds.size(); ++t) {
          for (const auto& r : run.records) {
            if (relative(r) <= kGapThresholds[t]) {
              sums[t] += static_cast<double>(r.grad_evals) / n +
                         static_cast<double>(r.partial_evals) / (n * support);
              ++row.reached[t];
              break;
            }
          }
        }
        final_gap += relative(run.records.back());
        partials += run.records.back().partial_evals;
        touches += run.records.back().column_touches;
      }
      if (row.runs == 0) continue;
      for (std::size_t t = 0; t < kGapThresholds.size(); ++t)
        if (row.reached[t] > 0) row.passes_to[t] = sums[t] / static_cast<double>(row.reached[t]);
      row.final_relative_gap = final_gap / static_cast<double>(row.runs);
      if (partials > 0) {
        row.cost_partial = 1.0 + static_cast<double>(touches) / static_cast<double>(partials);
        row.cost_ratio = p.kappa_hat * *row.cost_partial / (p.kappa_avg * support);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void print_compare(std::ostream& out, const std::vector<CompareRow>& rows) {
  std::size_t width = 6;
  for (const auto& r : rows) width = std::max(width, r.label.size());
  out << std::left << std::setw(static_cast<int>(width)) << "method" << std::right
      << std::setw(6) << "runs";
  for (double t : kGapThresholds) {
    std::ostringstream h;
    h << "passes@" << t;
    out << std::setw(15) << h.str();
  }
  out << std::setw(14) << "final_gap" << std::setw(10) << "C_pd" << std::setw(12) << "ratio"
      << '\n';
  out << std::setprecision(4);
  for (const auto& r : rows) {
    out << std::left << std::setw(static_cast<int>(width)) << r.label << std::right
        << std::setw(6) << r.runs;
    for (std::size_t t = 0; t < kGapThresholds.size(); ++t) {
      std::ostringstream cell;
      if (r.passes_to[t]) {
        cell << std::setprecision(4) << *r.passes_to[t];
        if (r.reached[t] < r.runs) cell << " (" << r.reached[t] << "/" << r.runs << ")";
      } else {
        cell << "not reached";
      }
      out << std::setw(15) << cell.str();
    }
    out << std::setw(14) << r.final_relative_gap;
    if (r.cost_partial)
      out << std::setw(10) << *r.cost_partial << std::setw(12) << *r.cost_ratio;
    else
      out << std::setw(10) << "-" << std::setw(12) << "-";
    out << '\n';
  }
}

namespace {

std::vector<double> random_point(Rng& rng, std::size_t d, double scale,
                                 std::span<const double> center = {}) {
  std::vector<double> x(d);
  for (std::size_t j = 0; j < d; ++j) x[j] = (center.empty() ? 0.0 : center[j]) + scale * rng.normal();
  return x;
}

struct Tally {
  std::size_t probes = 0;
  std::size_t violations = 0;
  double worst = 0.0;  // largest lhs - rhs seen
  void add(const InequalityCheck& c) {
    ++probes;
    if (!c.holds) ++violations;
    worst = std::max(worst, c.lhs - c.rhs);
  }
};

void print_check(std::ostream& out, const std::string& name, bool pass, std::size_t probes,
                 std::size_t violations, const std::string& detail_key, double detail) {
  out << "check=" << name << " status=" << (pass ? "PASS" : "FAIL") << " probes=" << probes
      << " violations=" << violations << ' ' << detail_key << '=' << detail << '\n';
}

}  // namespace

bool diagnose(std::ostream& out, const Problem& problem, const DiagnoseOptions& options) {
  const auto report = condition_report(problem);
  out << to_records(report);

  const auto& table = problem.lipschitz();
  if (table.size() > options.audit_budget) {
    out << "audits=skipped reason=lipschitz_table_entries_" << table.size()
        << "_exceed_budget_" << options.audit_budget << '\n';
    return true;
  }

  const double tol = std::max(1e-12, std::sqrt(2.0 * problem.mu() * 1e-14));
  const auto ref = solve_reference(problem, tol);
  out << std::setprecision(17) << "f_star=" << ref.f_star << '\n'
      << std::setprecision(6) << "f_star_gap_bound=" << ref.gap_bound << '\n';

  Rng rng(options.seed, streams::kProbes);
  const std::size_t d = problem.dim();
  bool all = true;

  {
    double worst_error = 0.0, worst_ratio = 0.0;
    std::size_t failures = 0, chain_failures = 0;
    for (std::size_t k = 0; k < options.estimator_points; ++k) {
      const auto y = random_point(rng, d, 1.0, ref.x);
      const auto x = random_point(rng, d, 1.0, ref.x);
      const auto a = audit_estimator(problem, y, x, ref.f_star);
      worst_error = std::max(worst_error, a.mean_error);
      if (a.stronger_bound > 0.0) worst_ratio = std::max(worst_ratio, a.second_moment / a.stronger_bound);
      if (!(a.mean_error <= 1e-10)) ++failures;
      if (!a.chain_holds(1e-9)) ++chain_failures;
    }
    print_check(out, "unbiasedness", failures == 0, options.estimator_points, failures,
                "max_relative_error", worst_error);
    print_check(out, "variance_bound", chain_failures == 0, options.estimator_points,
                chain_failures, "max_moment_to_bound", worst_ratio);
    all = all && failures == 0 && chain_failures == 0;
  }

  std::vector<std::size_t> columns;
  for (std::size_t j = 0; j < table.dim(); ++j)
    if (!table.column(j).empty()) columns.push_back(j);

  Tally coco, smooth, convex;
  for (std::size_t k = 0; k < options.probes; ++k) {
    const std::size_t j = columns[rng.uniform_index(columns.size())];
    const auto col = table.column(j);
    const std::size_t i = col[rng.uniform_index(col.size())].example;
    const auto x = random_point(rng, d, 1.0);
    const auto y = random_point(rng, d, 1.0);
    bool positive = false;
    for (const auto& e : col)
      if (e.example == i) positive = e.lipschitz > 0.0;
    if (positive) coco.add(check_cocoercivity(problem, i, j, x, y));
    smooth.add(check_smoothness_probe(problem, i, j, x, rng.normal()));
    convex.add(check_strong_convexity(problem, x, y));
  }
  print_check(out, "cocoercivity", coco.violations == 0, coco.probes, coco.violations,
              "max_excess", coco.worst);
  print_check(out, "coordinate_smoothness", smooth.violations == 0, smooth.probes,
              smooth.violations, "max_excess", smooth.worst);
  print_check(out, "strong_convexity", convex.violations == 0, convex.probes, convex.violations,
              "max_excess", convex.worst);
  all = all && coco.violations == 0 && smooth.violations == 0 && convex.violations == 0;
  out << "audits=" << (all ? "pass" : "fail") << '\n';
  return all;
}

}  // namespace s2cd
