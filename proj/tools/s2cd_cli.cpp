// s2cd: run, compare and diagnose semi-stochastic coordinate descent.
//
//   s2cd generate --generate 1000,50,0.1,1 --loss squared --out data.svm
//   s2cd run --data data.svm --mu 0.01 --methods s2cd,gd --seeds 1,2,3 --out trace.jsonl
//   s2cd compare trace.jsonl other.jsonl
//   s2cd diagnose --data data.svm --mu 0.01
//
// Exit codes: 0 success, 1 runtime failure (I/O, parse, divergence),
// 2 invalid arguments.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "s2cd/dataset.hpp"
#include "s2cd/diagnostics.hpp"
#include "s2cd/experiment.hpp"
#include "s2cd/problem.hpp"
#include "s2cd/trace.hpp"

namespace {

using namespace s2cd;

constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

struct SourceArgs {
  std::string data;
  std::string generate;
  std::uint64_t data_seed = 0;
  double noise = 0.1;
  std::string loss = "squared";
  std::string reg_mode = "support";
  double mu = 0.0;
};

void add_source_flags(CLI::App* cmd, SourceArgs& a, bool with_mu) {
  auto* data = cmd->add_option("--data", a.data, "LibSVM file");
  auto* gen = cmd->add_option("--generate", a.generate, "synthetic instance: n,d,density,scale");
  data->excludes(gen);
  cmd->add_option("--data-seed", a.data_seed, "seed for --generate");
  cmd->add_option("--noise", a.noise, "label noise for --generate");
  cmd->add_option("--loss", a.loss, "squared or logistic")
      ->check(CLI::IsMember({"squared", "logistic"}));
  if (with_mu) {
    cmd->add_option("--mu", a.mu, "regularization strength")->required();
    cmd->add_option("--reg-mode", a.reg_mode, "support or dense")
        ->check(CLI::IsMember({"support", "dense"}));
  }
}

GeneratorParams parse_generate(const std::string& text, const SourceArgs& a) {
  std::vector<double> v;
  std::stringstream in(text);
  std::string field;
  while (std::getline(in, field, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != field.size())
      throw std::invalid_argument("--generate expects n,d,density,scale; got '" + text + "'");
    v.push_back(x);
  }
  if (v.size() != 4 || v[0] < 1 || v[1] < 1 || v[0] != std::floor(v[0]) || v[1] != std::floor(v[1]))
    throw std::invalid_argument("--generate expects n,d,density,scale; got '" + text + "'");
  GeneratorParams g;
  g.n = static_cast<std::size_t>(v[0]);
  g.d = static_cast<std::size_t>(v[1]);
  g.density = v[2];
  g.scale = v[3];
  g.noise = a.noise;
  g.seed = a.data_seed;
  return g;
}

ProblemSource make_source(const SourceArgs& a) {
  ProblemSource s;
  if (!a.data.empty()) s.path = a.data;
  if (!a.generate.empty()) s.generator = parse_generate(a.generate, a);
  if (!s.path && !s.generator) throw std::invalid_argument("give --data or --generate");
  return s;
}

std::shared_ptr<const SparseDataset> load(const ProblemSource& source, LossKind loss) {
  auto data = load_source(source, loss);
  if (!data->pruned_columns().empty())
    std::cerr << "warning: dropped " << data->pruned_columns().size()
              << " feature column(s) with no nonzero entries\n";
  return data;
}

double reference_tolerance(double mu) { return std::max(1e-12, std::sqrt(2.0 * mu * 1e-16)); }

template <typename T>
std::vector<T> split_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    if constexpr (std::is_same_v<T, std::string>) {
      out.push_back(item);
    } else {
      std::size_t used = 0;
      const auto v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument("bad seed '" + item + "'");
      out.push_back(v);
    }
  }
  return out;
}

// --set method.key=value
void apply_setting(std::map<std::string, MethodOverrides>& out, const std::string& text) {
  const auto dot = text.find('.');
  const auto eq = text.find('=');
  if (dot == std::string::npos || eq == std::string::npos || eq < dot)
    throw std::invalid_argument("--set expects method.key=value; got '" + text + "'");
  const auto method = text.substr(0, dot);
  const auto key = text.substr(dot + 1, eq - dot - 1);
  const auto value = std::stod(text.substr(eq + 1));
  auto& o = out[method];
  if (key == "h") o.h = value;
  else if (key == "m") o.m = static_cast<std::size_t>(value);
  else if (key == "epochs") o.epochs = static_cast<std::size_t>(value);
  else if (key == "decay") o.decay = value;
  else throw std::invalid_argument("unknown setting '" + key + "' (h, m, epochs, decay)");
}

struct RunArgs {
  SourceArgs source;
  std::string methods = "s2cd";
  double epsilon = 1e-3;
  std::optional<double> h;
  std::optional<std::size_t> m;
  std::optional<std::size_t> epochs;
  std::string seeds = "0";
  double budget = 50.0;
  std::string out;
  std::vector<std::string> settings;
};

int cmd_run(const RunArgs& a) {
  ExperimentSpec spec;
  spec.source = make_source(a.source);
  spec.loss = parse_loss(a.source.loss);
  spec.mu = a.source.mu;
  spec.reg_mode = parse_reg_mode(a.source.reg_mode);
  spec.methods = split_list<std::string>(a.methods);
  spec.epsilon = a.epsilon;
  spec.seeds = split_list<std::uint64_t>(a.seeds);
  spec.budget_passes = a.budget;
  spec.out = a.out;
  auto& s2cd_over = spec.overrides["s2cd"];
  s2cd_over.h = a.h;
  s2cd_over.m = a.m;
  s2cd_over.epochs = a.epochs;
  for (const auto& s : a.settings) apply_setting(spec.overrides, s);
  validate(spec);

  const auto data = load(spec.source, spec.loss);
  const auto problem = build_problem(data, spec.loss, spec.mu, spec.reg_mode);
  const auto ref = solve_reference(problem, reference_tolerance(spec.mu));
  const auto trace = run_experiment(spec, problem, ref.f_star, thread_cap_from_env());

  if (spec.out.empty()) {
    write_trace(std::cout, trace);
  } else {
    std::ofstream out(spec.out);
    if (!out) throw std::runtime_error("cannot write " + spec.out);
    write_trace(out, trace);
    if (!out) throw std::runtime_error("error writing " + spec.out);
    std::cerr << "wrote " << trace.runs.size() << " run(s) to " << spec.out << '\n';
  }
  return 0;
}

int cmd_compare(const std::vector<std::string>& files) {
  std::vector<TraceFile> traces;
  for (const auto& f : files) traces.push_back(read_trace_file(f));
  print_compare(std::cout, compare_traces(traces, files));
  return 0;
}

int cmd_diagnose(const SourceArgs& a, const DiagnoseOptions& options) {
  const auto loss = parse_loss(a.loss);
  const auto data = load(make_source(a), loss);
  const auto problem = build_problem(data, loss, a.mu, parse_reg_mode(a.reg_mode));
  return diagnose(std::cout, problem, options) ? 0 : kRuntimeError;
}

int cmd_generate(const SourceArgs& a, const std::string& out_path) {
  if (a.generate.empty()) throw std::invalid_argument("generate needs --generate n,d,density,scale");
  auto params = parse_generate(a.generate, a);
  params.labels =
      parse_loss(a.loss) == LossKind::Logistic ? LabelModel::Classification : LabelModel::Regression;
  const auto data = generate_dataset(params);
  if (out_path.empty()) {
    write_libsvm(std::cout, data);
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    write_libsvm(out, data);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-stochastic coordinate descent: runs, comparisons and diagnostics"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "run methods over seeds and write a trace file");
  run_cmd->set_help_flag("--help", "print this help message and exit");  // frees --h
  add_source_flags(run_cmd, run.source, true);
  run_cmd->add_option("--methods", run.methods, "comma-separated: s2cd,s2gd,gd,sgd,cd");
  run_cmd->add_option("--epsilon", run.epsilon, "target accuracy for automatic s2cd parameters");
  run_cmd->add_option("--h", run.h, "s2cd stepsize");
  run_cmd->add_option("--m", run.m, "s2cd maximum inner steps");
  run_cmd->add_option("--epochs", run.epochs, "s2cd epochs");
  run_cmd->add_option("--seeds", run.seeds, "comma-separated seeds");
  run_cmd->add_option("--budget-passes", run.budget, "work cap per run in effective passes");
  run_cmd->add_option("--out", run.out, "trace file (stdout if omitted)");
  run_cmd->add_option("--set", run.settings, "per-method parameter, e.g. s2gd.h=0.01");

  std::vector<std::string> files;
  auto* cmp_cmd = app.add_subcommand("compare", "summarize trace files in effective passes");
  cmp_cmd->add_option("files", files, "trace files")->required();

  SourceArgs diag;
  DiagnoseOptions diag_opts;
  auto* diag_cmd = app.add_subcommand("diagnose", "condition numbers and estimator audits");
  add_source_flags(diag_cmd, diag, true);
  diag_cmd->add_option("--audit-budget", diag_opts.audit_budget,
                       "largest Lipschitz table to audit exactly");
  diag_cmd->add_option("--probes", diag_opts.probes, "random probes per inequality");
  diag_cmd->add_option("--seed", diag_opts.seed, "probe seed");

  SourceArgs gen;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("generate", "write a synthetic LibSVM file");
  add_source_flags(gen_cmd, gen, false);
  gen_cmd->add_option("--out", gen_out, "output file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*cmp_cmd) return cmd_compare(files);
    if (*diag_cmd) return cmd_diagnose(diag, diag_opts);
    if (*gen_cmd) return cmd_generate(gen, gen_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
