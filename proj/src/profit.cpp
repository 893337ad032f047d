#include "priceopt/profit.hpp"

#include <cmath>
#include <sstream>

#include "priceopt/error.hpp"

namespace priceopt {

void PricingInstance::validate() const {
  model.validate();
  const std::size_t M = products();
  const std::size_t K = candidates();
  if (M != model.products()) {
    throw Error(ErrorCode::DimensionMismatch, "grid has " + std::to_string(M) +
                                                  " rows but the model has " +
                                                  std::to_string(model.products()) + " products");
  }
  if (K == 0) throw Error(ErrorCode::InvalidArgument, "grid needs at least one candidate");
  if (static_cast<std::size_t>(costs.size()) != M) {
    throw Error(ErrorCode::DimensionMismatch, "cost vector length differs from M");
  }
  if (static_cast<std::size_t>(externals.rows()) != horizon() ||
      static_cast<std::size_t>(externals.cols()) != model.external_dim()) {
    std::ostringstream os;
    os << "external values must be " << horizon() << " x " << model.external_dim() << ", got "
       << externals.rows() << " x " << externals.cols();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t k = 0; k < K; ++k) {
      const double p = grid(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
      if (!(p > 0.0) || !std::isfinite(p)) {
        throw Error(ErrorCode::NonPositivePrice, "grid price for product " +
                                                     std::to_string(m + 1) + " is not positive");
      }
      if (k > 0 && !(p < grid(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k - 1)))) {
        throw Error(ErrorCode::InvalidArgument, "grid row " + std::to_string(m + 1) +
                                                    " is not strictly descending");
      }
    }
  }
  if (!costs.allFinite() || !externals.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "costs and externals must be finite");
  }
}

BusinessConstraint BusinessConstraint::max_discount_count(std::size_t L) {
  BusinessConstraint c;
  c.kind = Kind::MaxDiscountCount;
  c.max_discounted = L;
  c.label = "max_discount_" + std::to_string(L);
  return c;
}

BusinessConstraint BusinessConstraint::linear_eq(std::vector<Term> terms, double rhs,
                                                 std::string label) {
  BusinessConstraint c;
  c.kind = Kind::LinearEq;
  c.terms = std::move(terms);
  c.rhs = rhs;
  c.label = std::move(label);
  return c;
}

BusinessConstraint BusinessConstraint::linear_ineq(std::vector<Term> terms, double rhs,
                                                   std::string label) {
  BusinessConstraint c;
  c.kind = Kind::LinearIneq;
  c.terms = std::move(terms);
  c.rhs = rhs;
  c.label = std::move(label);
  return c;
}

double xi(const PricingInstance& inst, std::size_t m, double price) {
  const auto& model = inst.model;
  const double margin = price - inst.cost(m);
  double total = 0.0;
  for (std::size_t t = 0; t < model.horizon(); ++t) {
    double base = model.alpha(t, m);
    for (std::size_t d = 0; d < model.external_dim(); ++d) {
      base += model.gamma(t, m, d) *
              inst.externals(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d));
    }
    total += margin * base;
  }
  return total;
}

double zeta(const PricingInstance& inst, std::size_t m, std::size_t m2, double price_m,
            double price_m2) {
  const auto& model = inst.model;
  const std::size_t D = model.transform_count();
  std::vector<double> f(D);
  model.bank().apply_all(price_m2, f.data());
  const double margin = price_m - inst.cost(m);
  double total = 0.0;
  for (std::size_t t = 0; t < model.horizon(); ++t) {
    double effect = 0.0;
    for (std::size_t d = 0; d < D; ++d) effect += model.beta(t, m, m2, d) * f[d];
    total += margin * effect;
  }
  return total;
}

BqpProblem build_bqp(const PricingInstance& inst,
                     const std::vector<BusinessConstraint>& constraints) {
  inst.validate();
  const std::size_t M = inst.products();
  const std::size_t K = inst.candidates();
  const std::size_t n = M * K;
  const auto N = static_cast<Eigen::Index>(n);

  BqpProblem prob;
  prob.Q = Eigen::MatrixXd::Zero(N, N);
  prob.r = Eigen::VectorXd::Zero(N);
  prob.blocks.resize(M);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      const double p_ik = inst.grid(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      const auto row = static_cast<Eigen::Index>(inst.variable(i, k));
      prob.r(row) = xi(inst, i, p_ik);
      prob.blocks[i].push_back(inst.variable(i, k));
      for (std::size_t j = 0; j < M; ++j) {
        for (std::size_t l = 0; l < K; ++l) {
          const double p_jl = inst.grid(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l));
          prob.Q(row, static_cast<Eigen::Index>(inst.variable(j, l))) = zeta(inst, i, j, p_ik, p_jl);
        }
      }
    }
  }

  std::size_t constraint_index = 0;
  for (const auto& bc : constraints) {
    ++constraint_index;
    LinearConstraint row;
    row.label = bc.label.empty() ? "c" + std::to_string(constraint_index) : bc.label;
    row.coefficients = Eigen::VectorXd::Zero(N);
    if (bc.kind == BusinessConstraint::Kind::MaxDiscountCount) {
      if (bc.max_discounted > M) {
        throw Error(ErrorCode::InvalidArgument, "discount limit L=" +
                                                    std::to_string(bc.max_discounted) +
                                                    " exceeds M=" + std::to_string(M));
      }
      // sum_m z_{m1} >= M - L, stored as -sum_m z_{m1} <= -(M - L).
      for (std::size_t m = 0; m < M; ++m) row.coefficients(static_cast<Eigen::Index>(inst.variable(m, 0))) = -1.0;
      row.rhs = -static_cast<double>(M - bc.max_discounted);
      prob.inequalities.push_back(std::move(row));
      continue;
    }
    if (bc.dense.size() > 0) {
      if (static_cast<std::size_t>(bc.dense.size()) != n) {
        throw Error(ErrorCode::ConstraintDimensionMismatch,
                    "constraint '" + row.label + "' has " + std::to_string(bc.dense.size()) +
                        " coefficients, expected " + std::to_string(n));
      }
      row.coefficients = bc.dense;
    }
    for (const auto& term : bc.terms) {
      if (term.product >= M || term.candidate >= K) {
        throw Error(ErrorCode::ConstraintDimensionMismatch,
                    "constraint '" + row.label + "' references (m=" +
                        std::to_string(term.product + 1) + ", k=" +
                        std::to_string(term.candidate + 1) + ") outside the " +
                        std::to_string(M) + "x" + std::to_string(K) + " grid");
      }
      row.coefficients(static_cast<Eigen::Index>(inst.variable(term.product, term.candidate))) +=
          term.coefficient;
    }
    if (!row.coefficients.allFinite() || !std::isfinite(bc.rhs)) {
      throw Error(ErrorCode::InvalidArgument, "constraint '" + row.label + "' is not finite");
    }
    row.rhs = bc.rhs;
    if (bc.kind == BusinessConstraint::Kind::LinearEq) {
      prob.equalities.push_back(std::move(row));
    } else {
      prob.inequalities.push_back(std::move(row));
    }
  }
  return prob;
}

double gross_profit(const PricingInstance& inst, const Eigen::VectorXd& prices) {
  double total = 0.0;
  for (std::size_t t = 0; t < inst.horizon(); ++t) {
    const Eigen::VectorXd q =
        predict(inst.model, prices, inst.externals.row(static_cast<Eigen::Index>(t)).transpose(), t);
    for (std::size_t m = 0; m < inst.products(); ++m) {
      total += (prices(static_cast<Eigen::Index>(m)) - inst.cost(m)) * q(static_cast<Eigen::Index>(m));
    }
  }
  return total;
}

std::vector<std::size_t> candidates_from_binary(std::size_t products, std::size_t K,
                                                const BinaryVector& z) {
  if (z.size() != products * K) {
    throw Error(ErrorCode::DimensionMismatch, "z has the wrong length for the grid");
  }
  std::vector<std::size_t> out(products);
  for (std::size_t m = 0; m < products; ++m) {
    int hits = 0;
    for (std::size_t k = 0; k < K; ++k) {
      if (z[m * K + k]) {
        out[m] = k;
        ++hits;
      }
    }
    if (hits != 1) {
      throw Error(ErrorCode::InvalidArgument, "z does not pick exactly one price for product " +
                                                  std::to_string(m + 1));
    }
  }
  return out;
}

Eigen::VectorXd prices_from_binary(const PricingInstance& inst, const BinaryVector& z) {
  const auto picks = candidates_from_binary(inst.products(), inst.candidates(), z);
  Eigen::VectorXd p(static_cast<Eigen::Index>(inst.products()));
  for (std::size_t m = 0; m < picks.size(); ++m) {
    p(static_cast<Eigen::Index>(m)) =
        inst.grid(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(picks[m]));
  }
  return p;
}

Eigen::VectorXd split_range(double high, double low, std::size_t K) {
  if (K == 0) throw Error(ErrorCode::InvalidArgument, "K must be positive");
  if (!(high > low) && K > 1) {
    throw Error(ErrorCode::InvalidArgument, "price range is empty; cannot split into " +
                                                std::to_string(K) + " candidates");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(K));
  for (std::size_t k = 0; k < K; ++k) {
    out(static_cast<Eigen::Index>(k)) =
        K == 1 ? high : high - (high - low) * static_cast<double>(k) / static_cast<double>(K - 1);
  }
  return out;
}

Eigen::MatrixXd split_grid_from_history(const Dataset& data, std::size_t K) {
  const auto M = static_cast<Eigen::Index>(data.products());
  Eigen::MatrixXd grid(M, static_cast<Eigen::Index>(K));
  for (Eigen::Index m = 0; m < M; ++m) {
    grid.row(m) = split_range(data.prices.col(m).maxCoeff(), data.prices.col(m).minCoeff(), K)
                      .transpose();
  }
  return grid;
}

Eigen::MatrixXd uniform_grid(std::size_t products, const Eigen::VectorXd& candidates) {
  return candidates.transpose().replicate(static_cast<Eigen::Index>(products), 1);
}

Eigen::VectorXd costs_from_list_price(const Eigen::MatrixXd& grid, double fraction) {
  return fraction * grid.col(0);
}

}  // namespace priceopt
