#include "s2cd/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "s2cd/rng.hpp"

namespace s2cd {

SparseDataset SparseDataset::from_rows(std::vector<std::vector<SparseEntry>> rows,
                                       std::vector<double> labels,
                                       std::size_t num_features) {
  if (rows.empty()) throw std::invalid_argument("dataset has no examples");
  if (rows.size() != labels.size())
    throw std::invalid_argument("label count does not match example count");
  for (double b : labels)
    if (!std::isfinite(b)) throw std::invalid_argument("non-finite label");

  std::vector<std::size_t> counts(num_features, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& row = rows[i];
    std::erase_if(row, [](const SparseEntry& e) { return e.value == 0.0; });
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k].index >= num_features)
        throw std::invalid_argument("feature index out of range in example " +
                                    std::to_string(i));
      if (k > 0 && row[k].index <= row[k - 1].index)
        throw std::invalid_argument("feature indices not strictly increasing in example " +
                                    std::to_string(i));
      if (!std::isfinite(row[k].value))
        throw std::invalid_argument("non-finite value in example " + std::to_string(i));
      ++counts[row[k].index];
    }
  }

  SparseDataset out;
  out.declared_features_ = num_features;
  std::vector<std::uint32_t> remap(num_features, 0);
  for (std::size_t j = 0; j < num_features; ++j) {
    if (counts[j] == 0) {
      out.pruned_.push_back(j);
    } else {
      remap[j] = static_cast<std::uint32_t>(out.original_columns_.size());
      out.original_columns_.push_back(j);
    }
  }
  const std::size_t d = out.original_columns_.size();
  if (d == 0) throw std::invalid_argument("dataset has no nonzero entries");

  out.labels_ = std::move(labels);
  out.row_ptr_.assign(1, 0);
  out.row_ptr_.reserve(rows.size() + 1);
  for (const auto& row : rows) {
    for (const auto& e : row) out.row_entries_.push_back({remap[e.index], e.value});
    out.row_ptr_.push_back(out.row_entries_.size());
  }

  out.col_ptr_.assign(d + 1, 0);
  for (const auto& e : out.row_entries_) ++out.col_ptr_[e.index + 1];
  std::partial_sum(out.col_ptr_.begin(), out.col_ptr_.end(), out.col_ptr_.begin());
  out.col_entries_.resize(out.row_entries_.size());
  std::vector<std::size_t> fill(out.col_ptr_.begin(), out.col_ptr_.end() - 1);
  // Rows are visited in order, so each column comes out sorted by example.
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& e : out.row(i))
      out.col_entries_[fill[e.index]++] = {static_cast<std::uint32_t>(i), e.value};
  return out;
}

double SparseDataset::mean_row_support() const noexcept {
  return static_cast<double>(nnz()) / static_cast<double>(num_examples());
}

double SparseDataset::at(std::size_t i, std::size_t j) const noexcept {
  const auto r = row(i);
  const auto it = std::lower_bound(r.begin(), r.end(), j, [](const SparseEntry& e, std::size_t jj) {
    return e.index < jj;
  });
  return (it != r.end() && it->index == j) ? it->value : 0.0;
}

double SparseDataset::row_dot(std::size_t i, std::span<const double> x) const noexcept {
  double s = 0.0;
  for (const auto& e : row(i)) s += e.value * x[e.index];
  return s;
}

ParseError::ParseError(std::string_view source, std::size_t line, const std::string& what)
    : std::runtime_error(std::string(source) + ":" + std::to_string(line) + ": " + what),
      line_(line) {}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::string_view next_token(std::string_view& rest) {
  std::size_t b = 0;
  while (b < rest.size() && is_space(rest[b])) ++b;
  std::size_t e = b;
  while (e < rest.size() && !is_space(rest[e])) ++e;
  auto tok = rest.substr(b, e - b);
  rest.remove_prefix(e);
  return tok;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

SparseDataset read_libsvm(std::istream& in, std::string_view source, std::size_t num_features) {
  std::vector<std::vector<SparseEntry>> rows;
  std::vector<double> labels;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest(line);
    auto label_tok = next_token(rest);
    if (label_tok.empty() || label_tok.front() == '#') continue;
    double label = 0.0;
    if (!parse_number(label_tok, label) || !std::isfinite(label))
      throw ParseError(source, line_no, "bad label '" + std::string(label_tok) + "'");

    std::vector<SparseEntry> row;
    std::size_t prev = 0;
    for (auto tok = next_token(rest); !tok.empty(); tok = next_token(rest)) {
      if (tok.front() == '#') break;
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw ParseError(source, line_no, "expected idx:val, got '" + std::string(tok) + "'");
      std::size_t idx = 0;
      double val = 0.0;
      if (!parse_number(tok.substr(0, colon), idx) || idx == 0)
        throw ParseError(source, line_no, "bad feature index in '" + std::string(tok) + "'");
      if (!parse_number(tok.substr(colon + 1), val) || !std::isfinite(val))
        throw ParseError(source, line_no, "bad feature value in '" + std::string(tok) + "'");
      if (idx <= prev)
        throw ParseError(source, line_no, "feature indices must be strictly increasing");
      if (num_features != 0 && idx > num_features)
        throw ParseError(source, line_no, "feature index " + std::to_string(idx) +
                                              " exceeds declared count " +
                                              std::to_string(num_features));
      prev = idx;
      max_index = std::max(max_index, idx);
      if (val != 0.0) row.push_back({static_cast<std::uint32_t>(idx - 1), val});
    }
    rows.push_back(std::move(row));
    labels.push_back(label);
  }
  if (in.bad()) throw std::runtime_error(std::string(source) + ": read error");
  if (rows.empty()) throw ParseError(source, line_no, "no examples");
  return SparseDataset::from_rows(std::move(rows), std::move(labels),
                                  num_features != 0 ? num_features : max_index);
}

SparseDataset read_libsvm_file(const std::string& path, std::size_t num_features) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_libsvm(in, path, num_features);
}

void write_libsvm(std::ostream& out, const SparseDataset& data) {
  std::ostringstream buf;
  buf.precision(17);
  for (std::size_t i = 0; i < data.num_examples(); ++i) {
    buf << data.label(i);
    for (const auto& e : data.row(i))
      buf << ' ' << data.original_column(e.index) + 1 << ':' << e.value;
    buf << '\n';
  }
  out << buf.str();
}

SparseDataset generate_dataset(const GeneratorParams& params) {
  if (params.n == 0 || params.d == 0)
    throw std::invalid_argument("generator needs n > 0 and d > 0");
  if (!(params.density > 0.0 && params.density <= 1.0))
    throw std::invalid_argument("density must lie in (0, 1]");
  if (!(params.scale > 0.0) || !std::isfinite(params.scale))
    throw std::invalid_argument("scale must be positive");
  if (!(params.noise >= 0.0)) throw std::invalid_argument("noise must be nonnegative");

  Rng rng(params.seed, streams::kGenerator);
  std::vector<double> w(params.d);
  for (auto& wj : w) wj = rng.normal();

  std::vector<std::vector<SparseEntry>> rows(params.n);
  std::vector<double> labels(params.n);
  for (std::size_t i = 0; i < params.n; ++i) {
    auto& row = rows[i];
    for (std::size_t j = 0; j < params.d; ++j)
      if (rng.uniform01() < params.density)
        row.push_back({static_cast<std::uint32_t>(j), params.scale * rng.normal()});
    if (row.empty())
      row.push_back({static_cast<std::uint32_t>(rng.uniform_index(params.d)),
                     params.scale * rng.normal()});
    double score = 0.0;
    for (const auto& e : row) score += e.value * w[e.index];
    const double noisy = score + params.noise * rng.normal();
    labels[i] = params.labels == LabelModel::Regression ? noisy : (noisy >= 0.0 ? 1.0 : -1.0);
  }
  return SparseDataset::from_rows(std::move(rows), std::move(labels), params.d);
}

}  // namespace s2cd
