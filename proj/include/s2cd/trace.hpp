#ifndef S2CD_TRACE_HPP
#define S2CD_TRACE_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "s2cd/solvers.hpp"

namespace s2cd {

/// Problem metadata carried in a trace header.
struct ProblemSummary {
  std::string source;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t nnz = 0;
  double mean_row_support = 0.0;
  std::string loss;
  double mu = 0.0;
  std::string reg_mode;
  double L_hat = 0.0;
  double kappa_hat = 0.0;
  double kappa_avg = 0.0;
  double kappa_max = 0.0;
  double f_star = 0.0;
};

/// Newline-delimited JSON: one header record, then one record per epoch
/// per run:
///   {"record":"header","problem":{...},"config":{...}}
///   {"record":"epoch","method":"s2cd","seed":1,"epoch":0,"f":...,"gap":...,
///    "grad_evals":...,"partial_evals":...,"column_touches":...,
///    "inner_steps":...,"wall_ms":...}
struct TraceFile {
  ProblemSummary problem;
  nlohmann::json config;
  std::vector<RunTrace> runs;  // records only; solutions are not stored
};

void write_trace_header(std::ostream& out, const ProblemSummary& problem,
                        const nlohmann::json& config);
void write_trace_run(std::ostream& out, const RunTrace& run);
void write_trace(std::ostream& out, const TraceFile& trace);

/// Throws std::runtime_error naming the offending line on malformed input.
TraceFile read_trace(std::istream& in, const std::string& source = "<stream>");
TraceFile read_trace_file(const std::string& path);

}  // namespace s2cd

#endif  // S2CD_TRACE_HPP
