#include "s2cd/trace.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace s2cd {

using nlohmann::json;

namespace {

json to_json(const ProblemSummary& p) {
  return {{"source", p.source},     {"n", p.n},
          {"d", p.d},               {"nnz", p.nnz},
          {"mean_row_support", p.mean_row_support},
          {"loss", p.loss},         {"mu", p.mu},
          {"reg_mode", p.reg_mode}, {"L_hat", p.L_hat},
          {"kappa_hat", p.kappa_hat}, {"kappa_avg", p.kappa_avg},
          {"kappa_max", p.kappa_max}, {"f_star", p.f_star}};
}

ProblemSummary summary_from_json(const json& j) {
  ProblemSummary p;
  p.source = j.at("source").get<std::string>();
  p.n = j.at("n").get<std::size_t>();
  p.d = j.at("d").get<std::size_t>();
  p.nnz = j.at("nnz").get<std::size_t>();
  p.mean_row_support = j.at("mean_row_support").get<double>();
  p.loss = j.at("loss").get<std::string>();
  p.mu = j.at("mu").get<double>();
  p.reg_mode = j.at("reg_mode").get<std::string>();
  p.L_hat = j.at("L_hat").get<double>();
  p.kappa_hat = j.at("kappa_hat").get<double>();
  p.kappa_avg = j.at("kappa_avg").get<double>();
  p.kappa_max = j.at("kappa_max").get<double>();
  p.f_star = j.at("f_star").get<double>();
  return p;
}

// JSON has no NaN; an unknown gap is written as null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& v) {
  return v.is_null() ? std::nan("") : v.get<double>();
}

}  // namespace

void write_trace_header(std::ostream& out, const ProblemSummary& problem, const json& config) {
  out << json{{"record", "header"}, {"problem", to_json(problem)}, {"config", config}}.dump()
      << '\n';
}

void write_trace_run(std::ostream& out, const RunTrace& run) {
  for (const auto& r : run.records) {
    const json line = {{"record", "epoch"},
                       {"method", run.method},
                       {"seed", run.seed},
                       {"epoch", r.epoch},
                       {"f", number_or_null(r.f)},
                       {"gap", number_or_null(r.gap)},
                       {"grad_evals", r.grad_evals},
                       {"partial_evals", r.partial_evals},
                       {"column_touches", r.column_touches},
                       {"inner_steps", r.inner_steps},
                       {"wall_ms", r.wall_ms}};
    out << line.dump() << '\n';
  }
}

void write_trace(std::ostream& out, const TraceFile& trace) {
  write_trace_header(out, trace.problem, trace.config);
  for (const auto& run : trace.runs) write_trace_run(out, run);
}

TraceFile read_trace(std::istream& in, const std::string& source) {
  TraceFile trace;
  bool have_header = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const auto kind = j.at("record").get<std::string>();
      if (kind == "header") {
        if (have_header) throw std::runtime_error("duplicate header");
        trace.problem = summary_from_json(j.at("problem"));
        trace.config = j.at("config");
        have_header = true;
      } else if (kind == "epoch") {
        if (!have_header) throw std::runtime_error("epoch record before header");
        const auto method = j.at("method").get<std::string>();
        const auto seed = j.at("seed").get<std::uint64_t>();
        EpochRecord r;
        r.epoch = j.at("epoch").get<std::size_t>();
        r.f = number_from(j.at("f"));
        r.gap = number_from(j.at("gap"));
        r.grad_evals = j.at("grad_evals").get<std::uint64_t>();
        r.partial_evals = j.at("partial_evals").get<std::uint64_t>();
        r.column_touches = j.at("column_touches").get<std::uint64_t>();
        r.inner_steps = j.at("inner_steps").get<std::uint64_t>();
        r.wall_ms = j.at("wall_ms").get<double>();
        // A record with epoch 0 starts a new run.
        if (trace.runs.empty() || r.epoch == 0 || trace.runs.back().method != method ||
            trace.runs.back().seed != seed) {
          trace.runs.push_back({method, seed, {}, {}});
        }
        trace.runs.back().records.push_back(r);
      } else {
        throw std::runtime_error("unknown record type '" + kind + "'");
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw std::runtime_error(source + ": missing header record");
  return trace;
}

TraceFile read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_trace(in, path);
}

}  // namespace s2cd
