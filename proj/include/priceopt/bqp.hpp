#pragma once

// Binary quadratic program
//
//   maximize  f(z) = z^T Q z + r^T z
//   s.t.      z in {0,1}^n, sum_{i in I_m} z_i = 1 for every block I_m,
//             a_u^T z = b_u,  c_v^T z <= d_v.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace priceopt {

using BinaryVector = std::vector<std::uint8_t>;

struct LinearConstraint {
  Eigen::VectorXd coefficients;
  double rhs = 0.0;
  std::string label;
};

struct BqpProblem {
  Eigen::MatrixXd Q;                               // n x n, not necessarily symmetric
  Eigen::VectorXd r;                               // n
  std::vector<std::vector<std::size_t>> blocks;    // partition of {0..n-1}
  std::vector<LinearConstraint> equalities;        // a^T z = b
  std::vector<LinearConstraint> inequalities;      // c^T z <= d

  std::size_t size() const { return static_cast<std::size_t>(r.size()); }
  /// Throws unless the blocks partition {0..n-1} and all data is finite.
  void validate() const;
  /// Same problem with Q replaced by (Q + Q^T) / 2.
  BqpProblem symmetrized() const;
  /// Block index of every variable.
  std::vector<std::size_t> block_of() const;
};

struct BqpSolution {
  BinaryVector z;
  double objective = 0.0;
  bool feasible = false;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<std::size_t> violated_blocks;
  std::vector<std::size_t> violated_equalities;
  std::vector<std::size_t> violated_inequalities;

  /// Human-readable list of what is violated, e.g. "block 1; inequality max_discount".
  std::string describe(const BqpProblem& prob) const;
};

inline constexpr double kFeasibilityTolerance = 1e-9;
inline constexpr double kBruteForceLimit = 1e7;

double objective(const BqpProblem& prob, const BinaryVector& z);

/// Evaluates f for a one-hot choice per block: choice[m] is the variable
/// index selected in block m.
double objective_of_choice(const BqpProblem& prob, const std::vector<std::size_t>& choice);

FeasibilityReport check_feasibility(const BqpProblem& prob, const BinaryVector& z);
inline bool is_feasible(const BqpProblem& prob, const BinaryVector& z) {
  return check_feasibility(prob, z).feasible;
}

/// True iff every linear constraint (blocks excluded) holds at z.
bool satisfies_linear(const BqpProblem& prob, const BinaryVector& z);

/// Indicator vector of a per-block choice.
BinaryVector choice_to_binary(const BqpProblem& prob, const std::vector<std::size_t>& choice);

/// Strict total order used for ties: higher objective wins, then the
/// lexicographically smaller z.
bool better_candidate(double f_a, const BinaryVector& a, double f_b, const BinaryVector& b);

/// Exhaustive search over all one-hot assignments. Throws TooLarge when the
/// number of assignments exceeds kBruteForceLimit and Infeasible when none
/// satisfies the linear constraints. `threads` > 1 splits the enumeration;
/// the answer is identical to the sequential one.
BqpSolution brute_force(const BqpProblem& prob, unsigned threads = 1);

/// Number of one-hot assignments (product of block sizes), as a double.
double assignment_count(const BqpProblem& prob);

}  // namespace priceopt
