#include <doctest.h>

#include <random>
#include <sstream>

#include "priceopt/sdp.hpp"
#include "test_support.hpp"

using namespace priceopt;

namespace {

SdpConstraint entry_constraint(std::size_t i, std::size_t j, double value, double rhs) {
  SdpConstraint c;
  c.matrix.add(i, j, value);
  c.rhs = rhs;
  return c;
}

SdpProblem unit_diagonal(const Eigen::MatrixXd& objective) {
  SdpProblem prob;
  prob.dim = static_cast<std::size_t>(objective.rows());
  prob.objective = objective;
  for (std::size_t i = 0; i < prob.dim; ++i) prob.equalities.push_back(entry_constraint(i, i, 1.0, 1.0));
  return prob;
}

Eigen::MatrixXd triangle_laplacian_quarter() {
  Eigen::MatrixXd L(3, 3);
  L << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  return L / 4.0;
}

void check_invariants(const SdpProblem& prob, const SdpSolution& sol, double tol) {
  REQUIRE(sol.status == SdpStatus::Optimal);
  CHECK(sol.residuals.max() <= tol);
  CHECK(sol.dual_objective >= sol.primal_objective - 10 * tol * (1 + std::abs(sol.primal_objective)));
  CHECK(min_eigenvalue(sol.Y) >= -1e-8 * (1 + sol.Y.norm()));
  const SdpResiduals again = residuals(prob, sol.Y, sol.duals);
  CHECK(again.max() <= tol * 1.0001);
}

SdpProblem random_diagonal_problem(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd A = testing::random_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), rng);
  return unit_diagonal((A + A.transpose()) / 2);
}

}  // namespace

TEST_CASE("trace objective with unit diagonal") {
  const SdpProblem prob = unit_diagonal(Eigen::MatrixXd::Identity(2, 2));
  const SdpSolution sol = solve(prob);
  check_invariants(prob, sol, 1e-7);
  CHECK(std::abs(sol.primal_objective - 2.0) <= 1e-6);
}

TEST_CASE("two by two closed form") {
  const SdpProblem prob = unit_diagonal((Eigen::MatrixXd(2, 2) << 0, 1, 1, 0).finished());
  const SdpSolution sol = solve(prob);
  check_invariants(prob, sol, 1e-7);
  CHECK(std::abs(sol.primal_objective - 2.0) <= 1e-6);
  CHECK(std::abs(sol.Y(0, 1) - 1.0) <= 1e-6);
}

TEST_CASE("triangle max-cut") {
  // Grid oracle over the correlations (a, b, c) of a 3x3 unit-diagonal PSD matrix.
  const Eigen::MatrixXd A = triangle_laplacian_quarter();
  double grid_best = -1.0;
  const int steps = 80;
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps; ++j) {
      for (int k = 0; k <= steps; ++k) {
        const double a = -1 + 2.0 * i / steps, b = -1 + 2.0 * j / steps, c = -1 + 2.0 * k / steps;
        const double det = 1 + 2 * a * b * c - a * a - b * b - c * c;
        if (det < 0) continue;
        Eigen::Matrix3d Y;
        Y << 1, a, b, a, 1, c, b, c, 1;
        grid_best = std::max(grid_best, (A.array() * Y.array()).sum());
      }
    }
  }
  CHECK(std::abs(grid_best - 2.25) < 1e-2);

  const SdpProblem prob = unit_diagonal(A);
  const SdpSolution sol = solve(prob);
  check_invariants(prob, sol, 1e-7);
  CHECK(std::abs(sol.primal_objective - 2.25) <= 1e-6);
  CHECK(sol.primal_objective >= grid_best - 1e-6);
}

TEST_CASE("residuals at a hand-built KKT point") {
  const SdpProblem prob = unit_diagonal((Eigen::MatrixXd(2, 2) << 0, 1, 1, 0).finished());
  SdpDuals duals;
  duals.equality = Eigen::Vector2d(1, 1);
  duals.inequality = Eigen::VectorXd(0);
  duals.slack = (Eigen::MatrixXd(2, 2) << 1, -1, -1, 1).finished();
  const SdpResiduals r = residuals(prob, Eigen::MatrixXd::Ones(2, 2), duals);
  CHECK(r.primal <= 1e-9);
  CHECK(r.dual <= 1e-9);
  CHECK(r.gap <= 1e-9);

  const SdpResiduals identity = residuals(prob, Eigen::MatrixXd::Identity(2, 2), duals);
  CHECK(identity.primal == 0.0);

  SdpProblem shifted = prob;
  shifted.equalities[0].rhs += 1e-3;
  const SdpResiduals moved = residuals(shifted, Eigen::MatrixXd::Ones(2, 2), duals);
  CHECK(moved.primal == doctest::Approx(1e-3 / (1 + shifted.equalities[0].rhs)).epsilon(1e-9));
}

TEST_CASE("inequality constraints") {
  SdpProblem prob = unit_diagonal((Eigen::MatrixXd(2, 2) << 0, 1, 1, 0).finished());
  prob.inequalities.push_back(entry_constraint(0, 1, 0.5, 0.25));  // y01 <= 0.25
  const SdpSolution sol = solve(prob);
  check_invariants(prob, sol, 1e-7);
  CHECK(std::abs(sol.primal_objective - 0.5) <= 1e-6);
  CHECK(sol.duals.inequality(0) >= 0.0);
  CHECK(sol.inequality_slack(0) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("infeasible and unbounded problems") {
  SdpProblem infeasible = unit_diagonal(Eigen::MatrixXd::Identity(2, 2));
  infeasible.equalities[0].rhs = -1.0;
  CHECK(solve(infeasible).status == SdpStatus::Infeasible);

  SdpProblem unbounded;
  unbounded.dim = 2;
  unbounded.objective = Eigen::MatrixXd::Identity(2, 2);
  unbounded.equalities.push_back(entry_constraint(0, 0, 1.0, 1.0));
  CHECK(solve(unbounded).status == SdpStatus::Unbounded);
}

TEST_CASE("redundant equalities are dropped") {
  SdpProblem prob = unit_diagonal(triangle_laplacian_quarter());
  prob.equalities.push_back(prob.equalities[1]);
  const SdpSolution sol = solve(prob);
  REQUIRE(sol.status == SdpStatus::Optimal);
  CHECK(sol.dropped_equalities.size() == 1);
  CHECK(std::abs(sol.primal_objective - 2.25) <= 1e-6);
}

TEST_CASE("random problems satisfy the solver invariants") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SdpProblem prob = random_diagonal_problem(8 + seed, seed);
    const SdpSolution sol = solve(prob);
    check_invariants(prob, sol, 1e-7);
    // the relative gap shrinks over every window of five iterations
    for (std::size_t k = 0; k + 5 < sol.gap_history.size(); ++k) {
      CHECK(sol.gap_history[k + 5] < sol.gap_history[k]);
    }
  }
}

TEST_CASE("objective scaling scales the optimum") {
  const SdpProblem prob = random_diagonal_problem(6, 99);
  const double base = solve(prob).primal_objective;
  for (double alpha : {0.01, 3.0, 250.0}) {
    SdpProblem scaled = prob;
    scaled.objective *= alpha;
    const SdpSolution sol = solve(scaled);
    REQUIRE(sol.status == SdpStatus::Optimal);
    CHECK(testing::relative_error(sol.primal_objective, alpha * base) <= 1e-6);
  }
}

TEST_CASE("sdpa round trip") {
  SdpProblem prob = unit_diagonal(triangle_laplacian_quarter());
  SdpConstraint mixed;
  mixed.matrix.add(0, 1, 0.5);
  mixed.matrix.add(1, 2, -0.25);
  mixed.rhs = 0.125;
  prob.inequalities.push_back(mixed);
  std::stringstream text;
  write_sdpa(prob, text, "round trip");
  const SdpProblem back = read_sdpa(text);
  REQUIRE(back.dim == prob.dim);
  CHECK(back.objective == prob.objective);
  REQUIRE(back.equalities.size() == prob.equalities.size());
  REQUIRE(back.inequalities.size() == 1);
  for (std::size_t j = 0; j < prob.equalities.size(); ++j) {
    CHECK(back.equalities[j].rhs == prob.equalities[j].rhs);
    CHECK(back.equalities[j].matrix.dense(3) == prob.equalities[j].matrix.dense(3));
  }
  CHECK(back.inequalities[0].rhs == 0.125);
  CHECK(back.inequalities[0].matrix.dense(3) == mixed.matrix.dense(3));
  CHECK(text.str().find("round trip") != std::string::npos);

  std::istringstream broken("3\n1\n");
  CHECK_THROWS_AS(read_sdpa(broken), Error);
}

TEST_CASE("problem validation") {
  SdpProblem prob = unit_diagonal(Eigen::MatrixXd::Identity(2, 2));
  prob.objective(0, 1) = 1.0;
  CHECK_THROWS_AS(solve(prob), Error);
  prob = unit_diagonal(Eigen::MatrixXd::Identity(2, 2));
  prob.equalities.push_back(entry_constraint(0, 5, 1.0, 0.0));
  CHECK_THROWS_AS(solve(prob), Error);
}
