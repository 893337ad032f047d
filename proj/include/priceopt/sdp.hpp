#pragma once

// Dense primal-dual interior-point solver for
//
//   maximize   A • Y
//   subject to B_j • Y  = b_j   (j = 1..m)
//              C_l • Y <= d_l   (l = 1..p)
//              Y symmetric positive semidefinite
//
// with the dual
//
//   minimize   b^T lambda + d^T mu
//   subject to S = sum_j lambda_j B_j + sum_l mu_l C_l - A  PSD,  mu >= 0.
//
// Inequalities get nonnegative scalar slacks kept as a diagonal block next
// to Y. Search direction is HKM with Mehrotra predictor-corrector.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "priceopt/error.hpp"

namespace priceopt {

/// Symmetric matrix stored as its upper-triangle nonzeros.
class SparseSymMatrix {
 public:
  struct Entry {
    std::size_t row;  // row <= col
    std::size_t col;
    double value;
  };

  /// Adds v at (i, j) and at (j, i); for i == j adds v once.
  void add(std::size_t i, std::size_t j, double v);
  /// Sorts entries and merges duplicates; drops exact zeros.
  void compress();

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t nonzeros() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// sum_{a,b} M_ab G_ab, valid for any square G.
  double dot(const Eigen::MatrixXd& G) const;
  /// G += s * M.
  void add_to(Eigen::MatrixXd& G, double s) const;
  Eigen::MatrixXd dense(std::size_t dim) const;
  double frobenius_norm() const;

 private:
  std::vector<Entry> entries_;
};

struct SdpConstraint {
  SparseSymMatrix matrix;
  double rhs = 0.0;
  std::string label;
};

struct SdpProblem {
  std::size_t dim = 0;
  Eigen::MatrixXd objective;  // A, symmetric
  std::vector<SdpConstraint> equalities;
  std::vector<SdpConstraint> inequalities;  // matrix • Y <= rhs

  std::size_t constraint_count() const { return equalities.size() + inequalities.size(); }
  void validate() const;
};

enum class SdpStatus { Optimal, Infeasible, Unbounded, IterLimit, NumericalFailure };
std::string_view to_string(SdpStatus status);

struct SdpOptions {
  double tol = 1e-7;
  int max_iter = 200;
  double step_fraction = 0.98;
  int max_halvings = 30;
  /// Called once per iteration with (iteration, primal res, dual res, gap).
  std::function<void(int, double, double, double)> on_iteration;
};

struct SdpResiduals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double max() const;
};

struct SdpDuals {
  Eigen::VectorXd equality;    // lambda
  Eigen::VectorXd inequality;  // mu >= 0
  Eigen::MatrixXd slack;       // S
};

struct SdpSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  int iterations = 0;
  Eigen::MatrixXd Y;
  Eigen::VectorXd inequality_slack;  // d - C • Y at the final iterate
  SdpDuals duals;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  SdpResiduals residuals;
  std::vector<double> gap_history;  // relative gap at the start of each iteration
  std::vector<std::size_t> dropped_equalities;  // redundant rows removed before solving
};

class SdpSolveError : public Error {
 public:
  SdpSolveError(SdpStatus status, const std::string& what)
      : Error(ErrorCode::SdpSolveFailure, what), status_(status) {}
  SdpStatus status() const noexcept { return status_; }

 private:
  SdpStatus status_;
};

/// Never throws for solver trouble; the outcome is in SdpSolution::status.
SdpSolution solve(const SdpProblem& prob, const SdpOptions& opts = {});

/// primal = worst of |B_j • Y - b_j| / (1 + |b_j|) and max(0, C_l • Y - d_l) / (1 + |d_l|);
/// dual   = ||sum lambda_j B_j + sum mu_l C_l - A - S||_F / (1 + ||A||_F), also counting mu < 0;
/// gap    = |A • Y - (b^T lambda + d^T mu)| / (1 + |A • Y|).
SdpResiduals residuals(const SdpProblem& prob, const Eigen::MatrixXd& Y, const SdpDuals& duals);

double min_eigenvalue(const Eigen::MatrixXd& symmetric);

/// SDPA sparse format (.dat-s). Y is the SDPA dual variable; inequality
/// slacks become a diagonal (LP) block.
void write_sdpa(const SdpProblem& prob, std::ostream& out, std::string_view comment = {});
SdpProblem read_sdpa(std::istream& in);

}  // namespace priceopt
