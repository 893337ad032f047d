#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "priceopt/bqp.hpp"

namespace priceopt::testing {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

/// Gaussian Q and r with M contiguous blocks of size K and no general constraints.
inline BqpProblem random_bqp(std::size_t M, std::size_t K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto n = static_cast<Eigen::Index>(M * K);
  BqpProblem prob;
  prob.Q = random_matrix(n, n, rng);
  prob.r = random_matrix(n, 1, rng).col(0);
  for (std::size_t m = 0; m < M; ++m) {
    std::vector<std::size_t> block;
    for (std::size_t k = 0; k < K; ++k) block.push_back(m * K + k);
    prob.blocks.push_back(block);
  }
  return prob;
}

/// Every one-of-K assignment, in lexicographic order of the per-block choices.
inline std::vector<BinaryVector> all_assignments(const BqpProblem& prob) {
  std::vector<BinaryVector> out;
  std::vector<std::size_t> choice(prob.blocks.size(), 0);
  while (true) {
    BinaryVector z(prob.size(), 0);
    for (std::size_t b = 0; b < choice.size(); ++b) z[prob.blocks[b][choice[b]]] = 1;
    out.push_back(std::move(z));
    std::size_t b = prob.blocks.size();
    while (b > 0) {
      --b;
      if (++choice[b] < prob.blocks[b].size()) break;
      choice[b] = 0;
      if (b == 0) return out;
    }
    if (prob.blocks.empty()) return out;
  }
}

inline std::vector<BinaryVector> feasible_points(const BqpProblem& prob) {
  std::vector<BinaryVector> out;
  for (auto& z : all_assignments(prob)) {
    if (is_feasible(prob, z)) out.push_back(std::move(z));
  }
  return out;
}

inline double relative_error(double value, double reference) {
  return std::abs(value - reference) / std::max(1.0, std::abs(reference));
}

}  // namespace priceopt::testing
