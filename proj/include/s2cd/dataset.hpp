#ifndef S2CD_DATASET_HPP
#define S2CD_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace s2cd {

/// One stored nonzero. In a row view `index` is the feature; in a column
/// view it is the example.
struct SparseEntry {
  std::uint32_t index;
  double value;
};

/// Sparse design matrix A (n x d) with labels b, stored both row-major and
/// column-major.
///
/// Invariants established by the factory:
///  * both views encode the same matrix;
///  * no explicit zeros, indices strictly increasing inside every row/column;
///  * every column has at least one nonzero (empty columns are pruned and the
///    surviving columns renumbered; `original_column` maps back).
class SparseDataset {
 public:
  SparseDataset() = default;

  /// Builds from per-example rows over `num_features` declared features.
  /// Explicit zeros are dropped. Throws std::invalid_argument on an index
  /// outside [0, num_features), an unsorted/duplicate index, a non-finite
  /// value, an empty dataset, or a label count mismatch.
  static SparseDataset from_rows(std::vector<std::vector<SparseEntry>> rows,
                                 std::vector<double> labels,
                                 std::size_t num_features);

  std::size_t num_examples() const noexcept { return labels_.size(); }
  std::size_t num_features() const noexcept { return col_ptr_.empty() ? 0 : col_ptr_.size() - 1; }
  std::size_t nnz() const noexcept { return row_entries_.size(); }

  std::span<const SparseEntry> row(std::size_t i) const noexcept {
    return {row_entries_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::span<const SparseEntry> col(std::size_t j) const noexcept {
    return {col_entries_.data() + col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]};
  }
  std::size_t col_count(std::size_t j) const noexcept {
    return col_ptr_[j + 1] - col_ptr_[j];
  }

  double label(std::size_t i) const noexcept { return labels_[i]; }
  std::span<const double> labels() const noexcept { return labels_; }

  /// Mean number of nonzeros per example (d-bar).
  double mean_row_support() const noexcept;

  /// Value a_ij, or 0 when (i, j) is not stored. O(log |row i|).
  double at(std::size_t i, std::size_t j) const noexcept;

  /// Feature index in the caller's numbering for compacted column j.
  std::size_t original_column(std::size_t j) const noexcept { return original_columns_[j]; }
  std::size_t declared_features() const noexcept { return declared_features_; }
  /// Declared features that had no nonzero and were removed.
  const std::vector<std::size_t>& pruned_columns() const noexcept { return pruned_; }

  /// Inner product <a_i, x>.
  double row_dot(std::size_t i, std::span<const double> x) const noexcept;

 private:
  std::vector<std::size_t> row_ptr_;
  std::vector<SparseEntry> row_entries_;
  std::vector<std::size_t> col_ptr_;
  std::vector<SparseEntry> col_entries_;
  std::vector<double> labels_;
  std::vector<std::size_t> original_columns_;
  std::vector<std::size_t> pruned_;
  std::size_t declared_features_ = 0;
};

/// Malformed LibSVM input. `line()` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string_view source, std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Reads "label idx:val idx:val ..." lines with 1-based, strictly increasing
/// feature indices. Blank lines and lines starting with '#' are skipped.
/// The feature count is the largest index seen, unless `num_features` is
/// nonzero, in which case larger indices are an error.
SparseDataset read_libsvm(std::istream& in, std::string_view source = "<stream>",
                          std::size_t num_features = 0);
SparseDataset read_libsvm_file(const std::string& path, std::size_t num_features = 0);

/// Writes in LibSVM format using the original column numbering; values are
/// printed with round-trip precision.
void write_libsvm(std::ostream& out, const SparseDataset& data);

enum class LabelModel { Regression, Classification };

struct GeneratorParams {
  std::size_t n = 100;
  std::size_t d = 20;
  double density = 0.1;
  double scale = 1.0;
  LabelModel labels = LabelModel::Regression;
  double noise = 0.1;
  std::uint64_t seed = 0;
};

/// Random sparse instance. Each entry is present independently with
/// probability `density` and drawn as scale * N(0,1); an example left empty
/// receives one entry at a uniformly random feature. Labels come from a
/// hidden weight vector w ~ N(0, I): <a_i, w> + noise * N(0,1) for
/// regression, sign(<a_i, w> + noise * N(0,1)) for classification (ties map
/// to +1).
SparseDataset generate_dataset(const GeneratorParams& params);

}  // namespace s2cd

#endif  // S2CD_DATASET_HPP
