#include "priceopt/bqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include "priceopt/error.hpp"

namespace priceopt {

namespace {

bool is_integral(double v) {
  return std::isfinite(v) && std::floor(v) == v && std::abs(v) < 9.0e15;
}

bool all_integral(const LinearConstraint& c) {
  if (!is_integral(c.rhs)) return false;
  for (Eigen::Index i = 0; i < c.coefficients.size(); ++i) {
    if (!is_integral(c.coefficients(i))) return false;
  }
  return true;
}

// Returns a^T z - b, computed exactly when all coefficients are integers.
struct LhsValue {
  bool exact;
  long long exact_diff;
  double diff;
};

LhsValue evaluate(const LinearConstraint& c, const BinaryVector& z) {
  if (all_integral(c)) {
    long long sum = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (z[i]) sum += static_cast<long long>(c.coefficients(static_cast<Eigen::Index>(i)));
    }
    const long long diff = sum - static_cast<long long>(c.rhs);
    return {true, diff, static_cast<double>(diff)};
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i]) sum += c.coefficients(static_cast<Eigen::Index>(i));
  }
  return {false, 0, sum - c.rhs};
}

bool equality_holds(const LinearConstraint& c, const BinaryVector& z) {
  const auto v = evaluate(c, z);
  return v.exact ? v.exact_diff == 0 : std::abs(v.diff) <= kFeasibilityTolerance;
}

bool inequality_holds(const LinearConstraint& c, const BinaryVector& z) {
  const auto v = evaluate(c, z);
  return v.exact ? v.exact_diff <= 0 : v.diff <= kFeasibilityTolerance;
}

std::string constraint_name(const LinearConstraint& c, const char* kind, std::size_t index) {
  if (!c.label.empty()) return std::string(kind) + " " + c.label;
  return std::string(kind) + " " + std::to_string(index + 1);
}

struct Incumbent {
  bool found = false;
  double f = -std::numeric_limits<double>::infinity();
  BinaryVector z;
};

void offer(Incumbent& inc, double f, BinaryVector&& z) {
  if (!inc.found || better_candidate(f, z, inc.f, inc.z)) {
    inc.found = true;
    inc.f = f;
    inc.z = std::move(z);
  }
}

// Enumerates assignments with linear rank in [begin, end). Rank digits run
// with the last block fastest.
Incumbent enumerate_range(const BqpProblem& prob, unsigned long long begin,
                          unsigned long long end) {
  Incumbent inc;
  const std::size_t M = prob.blocks.size();
  std::vector<std::size_t> digit(M, 0);
  unsigned long long rest = begin;
  for (std::size_t m = M; m-- > 0;) {
    const auto base = prob.blocks[m].size();
    digit[m] = static_cast<std::size_t>(rest % base);
    rest /= base;
  }
  std::vector<std::size_t> choice(M);
  const bool has_linear = !prob.equalities.empty() || !prob.inequalities.empty();
  for (unsigned long long rank = begin; rank < end; ++rank) {
    for (std::size_t m = 0; m < M; ++m) choice[m] = prob.blocks[m][digit[m]];
    BinaryVector z = choice_to_binary(prob, choice);
    if (!has_linear || satisfies_linear(prob, z)) {
      offer(inc, objective_of_choice(prob, choice), std::move(z));
    }
    for (std::size_t m = M; m-- > 0;) {
      if (++digit[m] < prob.blocks[m].size()) break;
      digit[m] = 0;
    }
  }
  return inc;
}

}  // namespace

void BqpProblem::validate() const {
  const std::size_t n = size();
  if (static_cast<std::size_t>(Q.rows()) != n || static_cast<std::size_t>(Q.cols()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "Q must be " + std::to_string(n) + "x" +
                                                  std::to_string(n));
  }
  if (!Q.allFinite() || !r.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "Q and r must be finite");
  }
  std::vector<int> seen(n, 0);
  for (std::size_t m = 0; m < blocks.size(); ++m) {
    if (blocks[m].empty()) {
      throw Error(ErrorCode::InvalidArgument, "block " + std::to_string(m + 1) + " is empty");
    }
    for (std::size_t i : blocks[m]) {
      if (i >= n) throw Error(ErrorCode::DimensionMismatch, "block index out of range");
      if (seen[i]++) {
        throw Error(ErrorCode::InvalidArgument, "variable " + std::to_string(i + 1) +
                                                    " appears in more than one block");
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) {
      throw Error(ErrorCode::InvalidArgument, "variable " + std::to_string(i + 1) +
                                                  " is not covered by any block");
    }
  }
  auto check = [&](const std::vector<LinearConstraint>& list) {
    for (const auto& c : list) {
      if (static_cast<std::size_t>(c.coefficients.size()) != n) {
        throw Error(ErrorCode::ConstraintDimensionMismatch,
                    "linear constraint has " + std::to_string(c.coefficients.size()) +
                        " coefficients, expected " + std::to_string(n));
      }
      if (!c.coefficients.allFinite() || !std::isfinite(c.rhs)) {
        throw Error(ErrorCode::InvalidArgument, "linear constraint is not finite");
      }
    }
  };
  check(equalities);
  check(inequalities);
}

BqpProblem BqpProblem::symmetrized() const {
  BqpProblem out = *this;
  out.Q = 0.5 * (Q + Q.transpose());
  return out;
}

std::vector<std::size_t> BqpProblem::block_of() const {
  std::vector<std::size_t> out(size(), 0);
  for (std::size_t m = 0; m < blocks.size(); ++m) {
    for (std::size_t i : blocks[m]) out[i] = m;
  }
  return out;
}

std::string FeasibilityReport::describe(const BqpProblem& prob) const {
  if (feasible) return "feasible";
  std::ostringstream os;
  const char* sep = "";
  for (std::size_t m : violated_blocks) {
    os << sep << "block " << (m + 1);
    sep = "; ";
  }
  for (std::size_t u : violated_equalities) {
    os << sep << constraint_name(prob.equalities[u], "equality", u);
    sep = "; ";
  }
  for (std::size_t v : violated_inequalities) {
    os << sep << constraint_name(prob.inequalities[v], "inequality", v);
    sep = "; ";
  }
  return os.str();
}

double objective(const BqpProblem& prob, const BinaryVector& z) {
  if (z.size() != prob.size()) {
    throw Error(ErrorCode::DimensionMismatch, "z has length " + std::to_string(z.size()) +
                                                  ", expected " + std::to_string(prob.size()));
  }
  std::vector<Eigen::Index> ones;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] > 1) throw Error(ErrorCode::InvalidArgument, "z must be binary");
    if (z[i]) ones.push_back(static_cast<Eigen::Index>(i));
  }
  double f = 0.0;
  for (Eigen::Index i : ones) {
    double row = 0.0;
    for (Eigen::Index j : ones) row += prob.Q(i, j);
    f += row + prob.r(i);
  }
  return f;
}

double objective_of_choice(const BqpProblem& prob, const std::vector<std::size_t>& choice) {
  double f = 0.0;
  for (std::size_t a : choice) {
    const auto i = static_cast<Eigen::Index>(a);
    double row = 0.0;
    for (std::size_t b : choice) row += prob.Q(i, static_cast<Eigen::Index>(b));
    f += row + prob.r(i);
  }
  return f;
}

FeasibilityReport check_feasibility(const BqpProblem& prob, const BinaryVector& z) {
  if (z.size() != prob.size()) {
    throw Error(ErrorCode::DimensionMismatch, "z has the wrong length");
  }
  FeasibilityReport rep;
  for (std::size_t m = 0; m < prob.blocks.size(); ++m) {
    int count = 0;
    for (std::size_t i : prob.blocks[m]) count += z[i] ? 1 : 0;
    if (count != 1) rep.violated_blocks.push_back(m);
  }
  for (std::size_t u = 0; u < prob.equalities.size(); ++u) {
    if (!equality_holds(prob.equalities[u], z)) rep.violated_equalities.push_back(u);
  }
  for (std::size_t v = 0; v < prob.inequalities.size(); ++v) {
    if (!inequality_holds(prob.inequalities[v], z)) rep.violated_inequalities.push_back(v);
  }
  rep.feasible = rep.violated_blocks.empty() && rep.violated_equalities.empty() &&
                 rep.violated_inequalities.empty();
  return rep;
}

bool satisfies_linear(const BqpProblem& prob, const BinaryVector& z) {
  for (const auto& c : prob.equalities) {
    if (!equality_holds(c, z)) return false;
  }
  for (const auto& c : prob.inequalities) {
    if (!inequality_holds(c, z)) return false;
  }
  return true;
}

BinaryVector choice_to_binary(const BqpProblem& prob, const std::vector<std::size_t>& choice) {
  BinaryVector z(prob.size(), 0);
  for (std::size_t i : choice) z[i] = 1;
  return z;
}

bool better_candidate(double f_a, const BinaryVector& a, double f_b, const BinaryVector& b) {
  if (f_a != f_b) return f_a > f_b;
  return a < b;
}

double assignment_count(const BqpProblem& prob) {
  double count = 1.0;
  for (const auto& b : prob.blocks) count *= static_cast<double>(b.size());
  return count;
}

BqpSolution brute_force(const BqpProblem& prob, unsigned threads) {
  prob.validate();
  const double count = assignment_count(prob);
  if (count > kBruteForceLimit) {
    std::ostringstream os;
    os << "exhaustive search over " << count << " assignments exceeds the limit of "
       << kBruteForceLimit;
    throw Error(ErrorCode::TooLarge, os.str());
  }
  const auto total = static_cast<unsigned long long>(count);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max(1ull, total))));

  Incumbent best;
  if (threads == 1) {
    best = enumerate_range(prob, 0, total);
  } else {
    std::vector<Incumbent> parts(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      const unsigned long long lo = total * t / threads;
      const unsigned long long hi = total * (t + 1) / threads;
      pool.emplace_back([&, t, lo, hi] { parts[t] = enumerate_range(prob, lo, hi); });
    }
    for (auto& th : pool) th.join();
    for (auto& p : parts) {
      if (p.found) offer(best, p.f, std::move(p.z));
    }
  }
  if (!best.found) {
    throw Error(ErrorCode::Infeasible, "no assignment satisfies the linear constraints");
  }
  return {std::move(best.z), best.f, true};
}

}  // namespace priceopt
