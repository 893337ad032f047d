#include "priceopt/milp.hpp"

#include <cmath>

#include "priceopt/error.hpp"

namespace priceopt {

namespace {

void require_contiguous(const BqpProblem& prob) {
  std::size_t expected = 0;
  for (std::size_t m = 0; m < prob.blocks.size(); ++m) {
    for (std::size_t i : prob.blocks[m]) {
      if (i != expected) {
        throw Error(ErrorCode::NonContiguousPartition,
                    "block " + std::to_string(m + 1) + " is not a run of consecutive variables");
      }
      ++expected;
    }
  }
}

}  // namespace

std::string MilpModel::variable_name(std::size_t variable) const {
  if (variable < binaries) return "z_" + std::to_string(variable + 1);
  const auto& [i, j] = pairs.at(variable - binaries);
  return "zb_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
}

std::size_t MilpModel::pair_variable(std::size_t i, std::size_t j) const {
  if (!(i < j && j < binaries)) throw Error(ErrorCode::InvalidArgument, "pair index out of range");
  // Pairs (i, *) start after sum_{a<i} (n - 1 - a) entries.
  const std::size_t before = i * (2 * binaries - i - 1) / 2;
  return binaries + before + (j - i - 1);
}

MilpModel linearize(const BqpProblem& prob) {
  prob.validate();
  require_contiguous(prob);
  const std::size_t n = prob.size();
  MilpModel model;
  model.binaries = n;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) model.pairs.emplace_back(i, j);
  }
  model.objective.assign(model.variable_count(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = static_cast<Eigen::Index>(i);
    model.objective[i] = prob.r(a) + prob.Q(a, a);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto b = static_cast<Eigen::Index>(j);
      model.objective[model.pair_variable(i, j)] = prob.Q(a, b) + prob.Q(b, a);
    }
  }

  for (std::size_t m = 0; m < prob.blocks.size(); ++m) {
    MilpRow row;
    row.name = "block_" + std::to_string(m + 1);
    for (std::size_t i : prob.blocks[m]) row.terms.push_back({i, 1.0});
    row.rhs = 1.0;
    model.rows.push_back(std::move(row));
  }
  for (std::size_t k = 0; k < model.pairs.size(); ++k) {
    const auto [i, j] = model.pairs[k];
    const std::string suffix = std::to_string(i + 1) + "_" + std::to_string(j + 1);
    model.rows.push_back({"lo_" + suffix, {{n + k, 1.0}, {i, -1.0}}, RowSense::LessEqual, 0.0});
    model.rows.push_back({"hi_" + suffix, {{n + k, 1.0}, {j, -1.0}}, RowSense::LessEqual, 0.0});
  }
  // (sum_{i in I_m} z_i - 1) z_j = 0 for j in I_m, i.e. the products of two
  // distinct indicators of one block vanish.
  for (std::size_t m = 0; m < prob.blocks.size(); ++m) {
    const auto& block = prob.blocks[m];
    if (block.size() < 2) continue;
    for (std::size_t j : block) {
      MilpRow row;
      row.name = "zs_" + std::to_string(m + 1) + "_" + std::to_string(j + 1);
      for (std::size_t i : block) {
        if (i != j) row.terms.push_back({model.pair_variable(std::min(i, j), std::max(i, j)), 1.0});
      }
      row.rhs = 0.0;
      model.rows.push_back(std::move(row));
    }
  }
  auto carry = [&](const LinearConstraint& c, const std::string& name, RowSense sense) {
    MilpRow row;
    row.name = name;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = c.coefficients(static_cast<Eigen::Index>(i));
      if (v != 0.0) row.terms.push_back({i, v});
    }
    row.sense = sense;
    row.rhs = c.rhs;
    model.rows.push_back(std::move(row));
  };
  for (std::size_t u = 0; u < prob.equalities.size(); ++u) {
    carry(prob.equalities[u], "eq_" + std::to_string(u + 1), RowSense::Equal);
  }
  for (std::size_t v = 0; v < prob.inequalities.size(); ++v) {
    carry(prob.inequalities[v], "ineq_" + std::to_string(v + 1), RowSense::LessEqual);
  }
  return model;
}

std::vector<double> implied_point(const MilpModel& model, const BinaryVector& z) {
  if (z.size() != model.binaries) throw Error(ErrorCode::DimensionMismatch, "z has the wrong length");
  std::vector<double> x(model.variable_count(), 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) x[i] = z[i] ? 1.0 : 0.0;
  for (std::size_t k = 0; k < model.pairs.size(); ++k) {
    const auto [i, j] = model.pairs[k];
    x[model.binaries + k] = (z[i] && z[j]) ? 1.0 : 0.0;
  }
  return x;
}

double milp_objective(const MilpModel& model, const std::vector<double>& values) {
  if (values.size() != model.variable_count()) {
    throw Error(ErrorCode::DimensionMismatch, "value vector has the wrong length");
  }
  double total = 0.0;
  for (std::size_t v = 0; v < values.size(); ++v) total += model.objective[v] * values[v];
  return total;
}

bool milp_feasible(const MilpModel& model, const std::vector<double>& values, double tolerance) {
  if (values.size() != model.variable_count()) {
    throw Error(ErrorCode::DimensionMismatch, "value vector has the wrong length");
  }
  for (std::size_t i = 0; i < model.binaries; ++i) {
    if (values[i] != 0.0 && values[i] != 1.0) return false;
  }
  for (std::size_t k = model.binaries; k < values.size(); ++k) {
    if (values[k] < -tolerance) return false;
  }
  for (const auto& row : model.rows) {
    double lhs = 0.0;
    for (const auto& t : row.terms) lhs += t.coefficient * values[t.variable];
    const double diff = lhs - row.rhs;
    switch (row.sense) {
      case RowSense::LessEqual:
        if (diff > tolerance) return false;
        break;
      case RowSense::Equal:
        if (std::abs(diff) > tolerance) return false;
        break;
      case RowSense::GreaterEqual:
        if (diff < -tolerance) return false;
        break;
    }
  }
  return true;
}

}  // namespace priceopt
