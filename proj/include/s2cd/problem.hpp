#ifndef S2CD_PROBLEM_HPP
#define S2CD_PROBLEM_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "s2cd/dataset.hpp"

namespace s2cd {

/// Scalar loss phi(t; b) applied to the margin t = <a_i, x>.
enum class LossKind {
  Squared,   // 1/2 (t - b)^2, curvature bound 1
  Logistic,  // log(1 + exp(-b t)), curvature bound 1/4
};

/// How the L2 term (mu/2)||x||^2 is split across the components f_i.
enum class RegMode {
  /// f_i carries (mu/2) sum_{j in supp(a_i)} (n/n_j) x_j^2; keeps f_i sparse.
  SupportDistributed,
  /// f_i carries the full (mu/2)||x||^2; every f_i depends on every x_j.
  Dense,
};

std::string_view to_string(LossKind loss) noexcept;
std::string_view to_string(RegMode mode) noexcept;
/// Accepts "squared" / "logistic". Throws std::invalid_argument otherwise.
LossKind parse_loss(std::string_view name);
/// Accepts "support" / "dense". Throws std::invalid_argument otherwise.
RegMode parse_reg_mode(std::string_view name);

double loss_value(LossKind loss, double t, double b) noexcept;
double loss_derivative(LossKind loss, double t, double b) noexcept;
double loss_second_derivative(LossKind loss, double t, double b) noexcept;
/// Global upper bound gamma on phi''.
double curvature_bound(LossKind loss) noexcept;

/// One (i, j) pair with L_ij > 0, stored under column j.
struct LipschitzEntry {
  std::uint32_t example;
  double a;          // data value a_ij (0 for Dense-mode fill-in)
  double lipschitz;  // L_ij
  double reg;        // coefficient c_ij of (c_ij/2) x_j^2 inside f_i
};

/// Column-major table of the positive coordinate Lipschitz constants.
class LipschitzTable {
 public:
  LipschitzTable() = default;
  LipschitzTable(std::size_t num_components, std::size_t dim, std::vector<std::size_t> col_ptr,
                 std::vector<LipschitzEntry> entries);

  /// Test helper: table from a dense n x d matrix of constants; zeros are
  /// left out. Data values and regularizer coefficients are set to 0.
  static LipschitzTable from_dense(const std::vector<std::vector<double>>& lipschitz);

  std::size_t num_components() const noexcept { return n_; }
  std::size_t dim() const noexcept { return col_ptr_.empty() ? 0 : col_ptr_.size() - 1; }
  std::size_t size() const noexcept { return entries_.size(); }

  std::span<const LipschitzEntry> column(std::size_t j) const noexcept {
    return {entries_.data() + col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]};
  }
  /// Position of example i inside column j, if L_ij > 0.
  std::optional<std::size_t> find(std::size_t i, std::size_t j) const noexcept;
  /// L_ij, or 0 if not stored.
  double at(std::size_t i, std::size_t j) const noexcept;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> col_ptr_;
  std::vector<LipschitzEntry> entries_;
};

/// Sampling weights derived from a Lipschitz table:
///   omega_i = |{j : L_ij != 0}|,  v_j = sum_i omega_i L_ij,
///   p_j = v_j / sum_s v_s,        q_ij = omega_i L_ij / v_j,
///   L_hat = (1/n) sum_j v_j.
struct SamplingQuantities {
  std::vector<std::size_t> omega;
  std::vector<double> v;
  std::vector<double> p;
  double v_total = 0.0;
  double L_hat = 0.0;
};

/// Throws std::invalid_argument if some column has v_j = 0.
SamplingQuantities compute_sampling_quantities(const LipschitzTable& table);

struct BuildOptions {
  /// mu = 0 is rejected unless set; only meaningful for identity checks on
  /// problems that are not used for rate statements.
  bool allow_zero_mu = false;
};

/// Finite-sum objective f(x) = (1/n) sum_i f_i(x) with
/// f_i(x) = phi(<a_i, x>; b_i) + sum_j (c_ij/2) x_j^2,
/// its coordinate Lipschitz table, and the derived sampling quantities.
///
/// Immutable after construction; copies share the underlying tables.
class Problem {
 public:
  const SparseDataset& data() const noexcept { return *data_; }
  const std::shared_ptr<const SparseDataset>& data_ptr() const noexcept { return data_; }
  LossKind loss() const noexcept { return loss_; }
  RegMode reg_mode() const noexcept { return reg_mode_; }
  double mu() const noexcept { return mu_; }
  double curvature() const noexcept { return curvature_bound(loss_); }

  /// Number of components f_i seen by the sampler (1 when collapsed).
  std::size_t num_components() const noexcept { return table_->num_components(); }
  std::size_t num_examples() const noexcept { return data_->num_examples(); }
  std::size_t dim() const noexcept { return data_->num_features(); }
  bool collapsed() const noexcept { return collapsed_; }

  /// Table the sampler draws from (one row per component).
  const LipschitzTable& lipschitz() const noexcept { return *table_; }
  /// Per-example table used for evaluation; equals lipschitz() unless collapsed.
  const LipschitzTable& model_table() const noexcept { return *model_; }

  const SamplingQuantities& sampling() const noexcept { return sampling_; }
  std::span<const std::size_t> omega() const noexcept { return sampling_.omega; }
  std::span<const double> v() const noexcept { return sampling_.v; }
  std::span<const double> p() const noexcept { return sampling_.p; }
  double L_hat() const noexcept { return sampling_.L_hat; }
  double kappa_hat() const noexcept { return sampling_.L_hat / mu_; }
  /// q_ij for the entry at position `pos` of column j of lipschitz().
  double q(std::size_t j, std::size_t pos) const noexcept;

  /// Averaged regularizer weight (1/n) sum_i c_ij; equals mu up to rounding.
  std::span<const double> reg_weight() const noexcept { return reg_weight_; }
  /// c_ij for example i (the collapsed component uses reg_weight).
  double reg_coefficient(std::size_t i, std::size_t j) const noexcept;
  /// c_ij shared by every example in the support of column j.
  double column_reg(std::size_t j) const noexcept { return col_reg_[j]; }

  /// Smoothness bound L_i of the whole component gradient:
  /// gamma ||a_i||^2 + max_j c_ij.
  std::span<const double> component_smoothness() const noexcept { return component_smoothness_; }

 private:
  friend Problem build_problem(std::shared_ptr<const SparseDataset>, LossKind, double, RegMode,
                               BuildOptions);
  friend Problem collapse(const Problem&);

  std::shared_ptr<const SparseDataset> data_;
  LossKind loss_ = LossKind::Squared;
  RegMode reg_mode_ = RegMode::SupportDistributed;
  double mu_ = 0.0;
  bool collapsed_ = false;
  std::shared_ptr<const LipschitzTable> table_;
  std::shared_ptr<const LipschitzTable> model_;
  SamplingQuantities sampling_;
  std::vector<double> col_reg_;  // c_ij for examples in the support of column j
  std::vector<double> reg_weight_;
  std::vector<double> component_smoothness_;
};

/// Builds the objective and every derived table. Throws std::invalid_argument
/// for mu < 0 (or mu = 0 without allow_zero_mu), non-finite mu, or logistic
/// loss with labels outside {-1, +1}.
Problem build_problem(std::shared_ptr<const SparseDataset> data, LossKind loss, double mu,
                      RegMode mode = RegMode::SupportDistributed, BuildOptions options = {});
Problem build_problem(SparseDataset data, LossKind loss, double mu,
                      RegMode mode = RegMode::SupportDistributed, BuildOptions options = {});

/// Same objective viewed as a single component f_1 = f, with
/// L_1j = (1/n) sum_i L_ij. Sampling then reduces to plain coordinate
/// descent with p_j proportional to L_1j.
Problem collapse(const Problem& problem);

/// f(x). Throws std::invalid_argument on dimension mismatch.
double value(const Problem& problem, std::span<const double> x);
/// grad f(x) = (1/n) sum_i grad f_i(x).
std::vector<double> full_gradient(const Problem& problem, std::span<const double> x);
/// f_i(x) for component i of the sampler's decomposition.
double component_value(const Problem& problem, std::size_t i, std::span<const double> x);
/// grad f_i(x) as a dense vector.
std::vector<double> component_gradient(const Problem& problem, std::size_t i,
                                        std::span<const double> x);

/// Point y together with the margins r_i = <a_i, y>, kept current under
/// single-coordinate updates. Refreshes itself from scratch every n
/// coordinate steps to bound accumulated rounding.
class ResidualCache {
 public:
  ResidualCache(const Problem& problem, std::vector<double> y);

  std::span<const double> point() const noexcept { return y_; }
  std::span<const double> residuals() const noexcept { return r_; }
  double coordinate(std::size_t j) const noexcept { return y_[j]; }
  double residual(std::size_t i) const noexcept { return r_[i]; }
  const SparseDataset* owner() const noexcept { return data_.get(); }

  /// y_j += delta and r_i += a_ij delta for i in column j.
  void apply_coordinate_step(std::size_t j, double delta);
  void recompute();
  /// max_i |r_i - <a_i, y>| / max(1, sum_j |a_ij y_j|).
  double residual_drift() const;

  std::uint64_t column_touches() const noexcept { return column_touches_; }
  std::uint64_t refreshes() const noexcept { return refreshes_; }

 private:
  std::shared_ptr<const SparseDataset> data_;
  std::vector<double> y_;
  std::vector<double> r_;
  std::uint64_t steps_since_refresh_ = 0;
  std::uint64_t column_touches_ = 0;
  std::uint64_t refreshes_ = 0;
};

/// grad_j f_i(y) for the entry at `pos` of column j of problem.lipschitz().
/// O(1) given the cache (O(n_j) for a collapsed problem).
double partial_at(const Problem& problem, std::size_t j, std::size_t pos,
                  const ResidualCache& cache);
/// grad_j f_i(y) located by (i, j). Throws std::invalid_argument if L_ij = 0
/// and std::logic_error if the cache belongs to a different dataset.
double partial(const Problem& problem, std::size_t i, std::size_t j, const ResidualCache& cache);

/// grad f(y) using the cached margins.
std::vector<double> full_gradient(const Problem& problem, const ResidualCache& cache);
double value(const Problem& problem, const ResidualCache& cache);

}  // namespace s2cd

#endif  // S2CD_PROBLEM_HPP
