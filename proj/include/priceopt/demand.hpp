#pragma once

// Per-product linear sales-forecast regressions:
//
//   q_m(p, g) = alpha_m + sum_{m', d} beta_{m m' d} f_d(p_{m'}) + sum_d gamma_{m d} g_d
//
// with one coefficient set per time step. Fitting routines work product by
// product on a shared design matrix whose columns are
//
//   [1, f_1(p_1) .. f_D(p_1), ..., f_1(p_M) .. f_D(p_M), g_1 .. g_{D'}].

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace priceopt {

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// A named univariate price transform f_d.
struct PriceTransform {
  std::string name;
  double (*fn)(double) = nullptr;
  bool requires_positive = false;  // undefined for p <= 0

  /// Looks up one of "x", "x^2", "1/x", "log", "sqrt".
  static PriceTransform by_name(const std::string& name);
};

class FeatureBank {
 public:
  FeatureBank() = default;
  FeatureBank(std::vector<PriceTransform> transforms, std::size_t external_dim);

  /// {x, x^2, 1/x}, the bank used by the simulation model.
  static FeatureBank standard(std::size_t external_dim = 0);
  static FeatureBank from_names(const std::vector<std::string>& names, std::size_t external_dim);

  std::size_t transform_count() const { return transforms_.size(); }
  std::size_t external_dim() const { return external_dim_; }
  const std::vector<PriceTransform>& transforms() const { return transforms_; }
  std::vector<std::string> names() const;

  double apply(std::size_t d, double price) const;
  /// Writes f_1(price)..f_D(price) into out[0..D).
  void apply_all(double price, double* out) const;

 private:
  std::vector<PriceTransform> transforms_;
  std::size_t external_dim_ = 0;
};

struct Dataset {
  Eigen::MatrixXd prices;          // N x M
  Eigen::MatrixXd externals;       // N x D'
  Eigen::MatrixXd quantities;      // N x M
  std::vector<int> time_steps;     // empty (untagged) or N tags, 1-based
  std::vector<std::string> dates;  // optional, N entries

  std::size_t size() const { return static_cast<std::size_t>(prices.rows()); }
  std::size_t products() const { return static_cast<std::size_t>(prices.cols()); }
  std::size_t external_dim() const { return static_cast<std::size_t>(externals.cols()); }
  /// Number of distinct time steps (1 when untagged).
  std::size_t horizon() const;

  void validate() const;
  /// Rows tagged with time step `step` (0-based); all rows when untagged.
  Dataset for_step(std::size_t step) const;
};

/// Coefficients of the M regressions for one time step.
struct StepCoefficients {
  Eigen::VectorXd alpha;      // M
  Eigen::MatrixXd beta;       // M x (M*D), column m' * D + d
  Eigen::MatrixXd gamma;      // M x D'
  BoolMatrix beta_active;     // false => structurally zero
  BoolMatrix gamma_active;
};

class DemandModel {
 public:
  DemandModel() = default;
  DemandModel(FeatureBank bank, std::size_t products, std::size_t horizon);

  const FeatureBank& bank() const { return bank_; }
  std::size_t products() const { return products_; }
  std::size_t horizon() const { return steps_.size(); }
  std::size_t transform_count() const { return bank_.transform_count(); }
  std::size_t external_dim() const { return bank_.external_dim(); }

  StepCoefficients& step(std::size_t t) { return steps_.at(t); }
  const StepCoefficients& step(std::size_t t) const { return steps_.at(t); }

  double alpha(std::size_t t, std::size_t m) const { return steps_[t].alpha(m); }
  double beta(std::size_t t, std::size_t m, std::size_t m2, std::size_t d) const {
    return steps_[t].beta(m, m2 * transform_count() + d);
  }
  double gamma(std::size_t t, std::size_t m, std::size_t d) const { return steps_[t].gamma(m, d); }

  /// Number of active (non-masked) regressors of product m at step t, bias excluded.
  std::size_t support_size(std::size_t t, std::size_t m) const;

  void validate() const;

 private:
  FeatureBank bank_;
  std::size_t products_ = 0;
  std::vector<StepCoefficients> steps_;
};

/// Column layout helpers for the design matrix.
inline std::size_t price_column(std::size_t m, std::size_t d, std::size_t transforms) {
  return 1 + m * transforms + d;
}
inline std::size_t external_column(std::size_t d, std::size_t products, std::size_t transforms) {
  return 1 + products * transforms + d;
}

Eigen::MatrixXd design_matrix(const Dataset& data, const FeatureBank& bank);

/// Ordinary least squares, one regression per product and time step. Throws
/// SingularDesign when the design is numerically rank deficient, unless a
/// ridge fallback strength is supplied.
DemandModel fit_ols(const Dataset& data, const FeatureBank& bank,
                    std::optional<double> ridge_fallback = std::nullopt);

/// L2-regularized least squares; the bias is not penalized.
DemandModel fit_ridge(const Dataset& data, const FeatureBank& bank, double lambda);

/// Orthogonal matching pursuit with at most k_max regressors (bias excluded).
DemandModel fit_omp(const Dataset& data, const FeatureBank& bank, std::size_t k_max);

/// Least squares on the price features of `forced_products` (0-based), then
/// OMP with k_extra atoms on the residual, then a joint refit on the union.
DemandModel fit_ls_omp(const Dataset& data, const FeatureBank& bank,
                       const std::vector<std::size_t>& forced_products, std::size_t k_extra);

/// Products sorted by total historical revenue sum_n p_nm q_nm, largest first.
std::vector<std::size_t> top_revenue_products(const Dataset& data, std::size_t count);

/// Evaluates all M regressions at step t (0-based).
Eigen::VectorXd predict(const DemandModel& model, const Eigen::VectorXd& prices,
                        const Eigen::VectorXd& externals, std::size_t t);

/// ||q_m - q_hat_m|| / ||q_m|| per product, over all samples.
Eigen::VectorXd relative_errors(const DemandModel& model, const Dataset& data);

}  // namespace priceopt
