#pragma once

// Linearization of a block-structured BQP into a mixed-integer LP with one
// continuous variable zb_ij (i < j) standing for z_i z_j, plus a CPLEX LP
// writer and the matching reader.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "priceopt/bqp.hpp"

namespace priceopt {

struct MilpTerm {
  std::size_t variable;
  double coefficient;
  bool operator==(const MilpTerm&) const = default;
};

enum class RowSense { LessEqual, Equal, GreaterEqual };

struct MilpRow {
  std::string name;
  std::vector<MilpTerm> terms;
  RowSense sense = RowSense::Equal;
  double rhs = 0.0;
  bool operator==(const MilpRow&) const = default;
};

/// Variables 0..n-1 are the binaries z_1..z_n; variable n + k is the k-th
/// pair (i, j), i < j, in lexicographic order, named zb_{i+1}_{j+1}.
struct MilpModel {
  std::size_t binaries = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<double> objective;  // one coefficient per variable
  std::vector<MilpRow> rows;

  std::size_t variable_count() const { return binaries + pairs.size(); }
  std::string variable_name(std::size_t variable) const;
  /// Index of zb_ij for 0-based i < j.
  std::size_t pair_variable(std::size_t i, std::size_t j) const;
  bool operator==(const MilpModel&) const = default;
};

/// Requires blocks of consecutive indices laid out in order (as build_bqp
/// produces); throws NonContiguousPartition otherwise.
MilpModel linearize(const BqpProblem& prob);

/// Full variable vector with zb_ij = z_i z_j.
std::vector<double> implied_point(const MilpModel& model, const BinaryVector& z);
double milp_objective(const MilpModel& model, const std::vector<double>& values);
bool milp_feasible(const MilpModel& model, const std::vector<double>& values,
                   double tolerance = kFeasibilityTolerance);

/// CPLEX LP text. Zero coefficients are omitted, numbers use 17 significant
/// digits and the Bounds section lists every variable in model order.
void export_lp(const MilpModel& model, std::ostream& out);
void export_lp(const MilpModel& model, const std::filesystem::path& path);

/// Reads files written by export_lp (and the common subset of the format
/// they use). Throws Parse on malformed input.
MilpModel parse_lp(std::istream& in);

}  // namespace priceopt
