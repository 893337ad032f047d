#pragma once

// Gross-profit objective over a discrete price grid and its encoding as a BQP
// with one-of-K blocks (variable index m*K + k selects price P_{m,k}).

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "priceopt/bqp.hpp"
#include "priceopt/demand.hpp"

namespace priceopt {

struct PricingInstance {
  DemandModel model;
  Eigen::MatrixXd grid;       // M x K, each row strictly descending, column 0 = list price
  Eigen::VectorXd costs;      // M
  Eigen::MatrixXd externals;  // T x D', row t = g^(t)
  bool revenue_mode = false;  // treat all costs as zero

  std::size_t products() const { return static_cast<std::size_t>(grid.rows()); }
  std::size_t candidates() const { return static_cast<std::size_t>(grid.cols()); }
  std::size_t horizon() const { return model.horizon(); }
  double cost(std::size_t m) const { return revenue_mode ? 0.0 : costs(static_cast<Eigen::Index>(m)); }
  std::size_t variable(std::size_t m, std::size_t k) const { return m * candidates() + k; }

  void validate() const;
};

/// A business requirement over the K*M price indicators.
struct BusinessConstraint {
  enum class Kind { MaxDiscountCount, LinearEq, LinearIneq };
  struct Term {
    std::size_t product;    // 0-based m
    std::size_t candidate;  // 0-based k
    double coefficient;
  };

  Kind kind = Kind::LinearIneq;
  std::size_t max_discounted = 0;  // L for MaxDiscountCount
  std::vector<Term> terms;         // sparse (m, k) coefficients
  Eigen::VectorXd dense;           // alternative: flat coefficients of length K*M
  double rhs = 0.0;
  std::string label;

  static BusinessConstraint max_discount_count(std::size_t L);
  static BusinessConstraint linear_eq(std::vector<Term> terms, double rhs, std::string label = {});
  static BusinessConstraint linear_ineq(std::vector<Term> terms, double rhs, std::string label = {});
};

/// sum_t (price - c_m)(alpha_m^(t) + sum_d gamma_md^(t) g_d^(t)); m is 0-based.
double xi(const PricingInstance& inst, std::size_t m, double price);

/// sum_t (price_m - c_m) sum_d beta_{m m2 d}^(t) f_d(price_m2).
double zeta(const PricingInstance& inst, std::size_t m, std::size_t m2, double price_m,
            double price_m2);

/// Q blocks Q_ij[k,l] = zeta_ij(P_ik, P_jl), r_i[k] = xi_i(P_ik), contiguous
/// blocks of size K, and the business constraints lowered to linear rows.
BqpProblem build_bqp(const PricingInstance& inst,
                     const std::vector<BusinessConstraint>& constraints = {});

/// Direct evaluation of sum_t sum_m (p_m - c_m) q_m^(t)(p, g^(t)) through predict.
double gross_profit(const PricingInstance& inst, const Eigen::VectorXd& prices);

/// Price vector selected by a feasible binary z.
Eigen::VectorXd prices_from_binary(const PricingInstance& inst, const BinaryVector& z);

/// Chosen candidate index per product; throws unless z is one-hot per block.
std::vector<std::size_t> candidates_from_binary(std::size_t products, std::size_t K,
                                                const BinaryVector& z);

/// K candidates equally splitting [low, high], descending from high.
Eigen::VectorXd split_range(double high, double low, std::size_t K);

/// Grid from the historical max/min price of each product.
Eigen::MatrixXd split_grid_from_history(const Dataset& data, std::size_t K = 5);

/// Same candidate row for every product.
Eigen::MatrixXd uniform_grid(std::size_t products, const Eigen::VectorXd& candidates);

/// c_m = fraction * P_m1.
Eigen::VectorXd costs_from_list_price(const Eigen::MatrixXd& grid, double fraction = 0.3);

}  // namespace priceopt
