#include <doctest.h>

#include <fstream>
#include <sstream>

#include "priceopt/error.hpp"
#include "priceopt/io.hpp"
#include "priceopt/milp.hpp"
#include "test_support.hpp"

using namespace priceopt;

namespace {

std::string golden(const std::string& name) { return read_text_file(std::string(PRICEOPT_GOLDEN_DIR) + "/" + name); }

BqpProblem toy() {
  std::istringstream in(golden("toy_bqp.json"));
  return read_bqp_json(in);
}

// Integer data keeps every partial sum exact.
BqpProblem integer_bqp(std::size_t M, std::size_t K, std::uint64_t seed) {
  BqpProblem prob = testing::random_bqp(M, K, seed);
  prob.Q = (prob.Q * 8).array().round().matrix();
  prob.r = (prob.r * 8).array().round().matrix();
  return prob;
}

std::string lp_text(const MilpModel& model) {
  std::ostringstream os;
  export_lp(model, os);
  return os.str();
}

}  // namespace

TEST_CASE("single block with two candidates") {
  const MilpModel model = linearize(toy());
  CHECK(model.binaries == 2);
  CHECK(model.pairs.size() == 1);
  CHECK(model.variable_count() == 3);
  CHECK(model.variable_name(2) == "zb_1_2");
  std::vector<double> point{1.0, 0.0, 0.0};
  CHECK(milp_feasible(model, point));
  point = {1.0, 1.0, 1.0};
  CHECK_FALSE(milp_feasible(model, point));
  point = {1.0, 0.0, 1.0};
  CHECK_FALSE(milp_feasible(model, point));
}

TEST_CASE("variable layout") {
  const BqpProblem prob = testing::random_bqp(3, 3, 1);
  const MilpModel model = linearize(prob);
  const std::size_t n = 9;
  CHECK(model.variable_count() == n + n * (n - 1) / 2);
  std::size_t expected = n;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      CHECK(model.pair_variable(i, j) == expected);
      CHECK(model.pairs[expected - n] == std::make_pair(i, j));
      ++expected;
    }
  }
  CHECK(model.variable_name(0) == "z_1");
  CHECK(model.variable_name(model.pair_variable(2, 7)) == "zb_3_8");
}

TEST_CASE("milp objective equals the bqp objective on every feasible point") {
  for (std::size_t M = 1; M <= 3; ++M) {
    for (std::size_t K = 1; K <= 3; ++K) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const BqpProblem real = testing::random_bqp(M, K, 100 * M + 10 * K + seed);
        const BqpProblem exact = integer_bqp(M, K, 100 * M + 10 * K + seed);
        const MilpModel real_model = linearize(real);
        const MilpModel exact_model = linearize(exact);
        for (const auto& z : testing::feasible_points(real)) {
          const auto point = implied_point(real_model, z);
          CHECK(milp_feasible(real_model, point));
          CHECK(std::abs(milp_objective(real_model, point) - objective(real, z)) <=
                1e-12 * (1 + std::abs(objective(real, z))));
          CHECK(milp_objective(exact_model, implied_point(exact_model, z)) == objective(exact, z));
        }
      }
    }
  }
}

TEST_CASE("milp optimum over feasible points equals brute force") {
  const BqpProblem prob = testing::random_bqp(2, 3, 7);
  const MilpModel model = linearize(prob);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& z : testing::feasible_points(prob)) {
    best = std::max(best, milp_objective(model, implied_point(model, z)));
  }
  CHECK(best == doctest::Approx(brute_force(prob).objective).epsilon(1e-12));
}

TEST_CASE("general constraints are carried over") {
  BqpProblem prob = testing::random_bqp(2, 2, 3);
  prob.equalities.push_back({Eigen::Vector4d(1, 0, 1, 0), 1.0, "pick"});
  prob.inequalities.push_back({Eigen::Vector4d(0, 1, 0, 1), 1.0, ""});
  const MilpModel model = linearize(prob);
  const auto has_row = [&](const std::string& name) {
    for (const auto& row : model.rows) {
      if (row.name == name) return true;
    }
    return false;
  };
  CHECK(has_row("eq_1"));
  CHECK(has_row("ineq_1"));
  CHECK(has_row("zs_2_4"));
  for (const auto& z : testing::all_assignments(prob)) {
    CHECK(milp_feasible(model, implied_point(model, z)) == is_feasible(prob, z));
  }
}

TEST_CASE("non-contiguous blocks are rejected") {
  BqpProblem prob = testing::random_bqp(2, 2, 4);
  prob.blocks = {{0, 2}, {1, 3}};
  try {
    linearize(prob);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonContiguousPartition);
  }
}

TEST_CASE("lp export matches the golden file") {
  CHECK(lp_text(linearize(toy())) == golden("toy.lp"));
}

TEST_CASE("lp round trip") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    BqpProblem prob = testing::random_bqp(2 + seed % 2, 3, seed);
    prob.inequalities.push_back({Eigen::VectorXd::Constant(static_cast<Eigen::Index>(prob.size()), 0.1 * static_cast<double>(seed) - 0.35), -0.5, "lim"});
    const MilpModel model = linearize(prob);
    const std::string text = lp_text(model);
    std::istringstream in(text);
    const MilpModel back = parse_lp(in);
    CHECK(back == model);
    CHECK(lp_text(back) == text);
  }
}

TEST_CASE("lp export of a zero objective") {
  BqpProblem prob;
  prob.Q = Eigen::MatrixXd::Zero(2, 2);
  prob.r = Eigen::VectorXd::Zero(2);
  prob.blocks = {{0, 1}};
  const MilpModel model = linearize(prob);
  const std::string text = lp_text(model);
  CHECK(text.find("objective is the constant 0") != std::string::npos);
  CHECK(text.find("0 z_1") == std::string::npos);
  std::istringstream in(text);
  CHECK(parse_lp(in) == model);
}

TEST_CASE("lp parser rejects malformed input") {
  std::istringstream missing_end("Maximize\n obj: 1 z_1\nSubject To\n");
  CHECK_THROWS_AS(parse_lp(missing_end), Error);
  std::istringstream junk("Minimize\n obj: x\nEnd\n");
  CHECK_THROWS_AS(parse_lp(junk), Error);
}

TEST_CASE("lp export to a file") {
  const std::string path = "test_milp_export.lp";
  const MilpModel model = linearize(toy());
  export_lp(model, path);
  CHECK(read_text_file(path) == lp_text(model));
  std::remove(path.c_str());
  CHECK_THROWS_AS(export_lp(model, std::filesystem::path("/nonexistent/dir/out.lp")), Error);
}
