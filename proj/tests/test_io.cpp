#include <doctest.h>

#include <functional>
#include <sstream>

#include "priceopt/error.hpp"
#include "priceopt/io.hpp"
#include "priceopt/sim.hpp"
#include "test_support.hpp"

using namespace priceopt;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("dataset csv round trip") {
  Dataset data = sample_dataset(generate(3, 1, 0.5), 25, 2);
  data.externals = Eigen::MatrixXd::Constant(25, 2, 0.125);
  data.time_steps.assign(25, 1);
  data.time_steps[3] = 2;
  data.dates.assign(25, "2024-01-01");
  std::stringstream text;
  write_dataset_csv(text, data);
  const Dataset back = read_dataset_csv(text);
  CHECK(back.prices == data.prices);
  CHECK(back.quantities == data.quantities);
  CHECK(back.externals == data.externals);
  CHECK(back.time_steps == data.time_steps);
  CHECK(back.dates == data.dates);
}

TEST_CASE("dataset csv tolerates column order and extra columns") {
  std::istringstream in("q_1,store,p_1,g_1\n3,a,1.5,7\n4,b,1.25,8\n");
  const Dataset data = read_dataset_csv(in);
  CHECK(data.products() == 1);
  CHECK(data.external_dim() == 1);
  CHECK(data.prices(1, 0) == 1.25);
  CHECK(data.quantities(0, 0) == 3.0);
  CHECK(data.externals(1, 0) == 8.0);
}

TEST_CASE("dataset csv errors name the problem") {
  std::istringstream missing("p_1,p_2,p_3,q_1,q_2\n1,1,1,1,1\n");
  try {
    read_dataset_csv(missing);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find("q_3") != std::string::npos);
  }
  std::istringstream bad_number("p_1,q_1\n1,abc\n");
  CHECK(code_of([&] { read_dataset_csv(bad_number); }) == ErrorCode::Parse);
  std::istringstream short_row("p_1,q_1\n1\n");
  CHECK(code_of([&] { read_dataset_csv(short_row); }) == ErrorCode::Parse);
  std::istringstream empty("");
  CHECK(code_of([&] { read_dataset_csv(empty); }) == ErrorCode::Parse);
  std::istringstream bad_step("p_1,q_1,t\n1,1,0\n");
  CHECK(code_of([&] { read_dataset_csv(bad_step); }) == ErrorCode::Parse);
}

TEST_CASE("model json round trip") {
  DemandModel model = fit_ls_omp(sample_dataset(generate(4, 3, 1.0), 200, 4), FeatureBank::standard(), {0, 1}, 3);
  std::stringstream text;
  write_model_json(text, model);
  const DemandModel back = read_model_json(text);
  REQUIRE(back.products() == 4);
  CHECK(back.bank().names() == model.bank().names());
  CHECK(back.step(0).alpha == model.step(0).alpha);
  CHECK(back.step(0).beta == model.step(0).beta);
  CHECK((back.step(0).beta_active == model.step(0).beta_active).all());

  std::istringstream wrong_tag(R"({"format": "other"})");
  CHECK(code_of([&] { read_model_json(wrong_tag); }) == ErrorCode::Parse);
  std::istringstream not_json("{");
  CHECK(code_of([&] { read_model_json(not_json); }) == ErrorCode::Parse);
}

TEST_CASE("bqp json round trip is bit exact") {
  BqpProblem prob = testing::random_bqp(3, 2, 5);
  prob.Q(0, 1) = 0.1;
  prob.equalities.push_back({Eigen::VectorXd::Constant(6, 1.0 / 3.0), 1.0, "third"});
  prob.inequalities.push_back({Eigen::VectorXd::Constant(6, -0.7), -0.7, ""});
  std::stringstream text;
  write_bqp_json(text, prob);
  const BqpProblem back = read_bqp_json(text);
  CHECK(back.Q == prob.Q);
  CHECK(back.r == prob.r);
  CHECK(back.blocks == prob.blocks);
  REQUIRE(back.equalities.size() == 1);
  CHECK(back.equalities[0].coefficients == prob.equalities[0].coefficients);
  CHECK(back.equalities[0].label == "third");
  CHECK(back.inequalities[0].rhs == -0.7);

  std::istringstream bad_blocks(R"({"Q": [[1]], "r": [1], "blocks": [[0, 1]]})");
  CHECK_THROWS_AS(read_bqp_json(bad_blocks), Error);
}

TEST_CASE("constraints json") {
  std::istringstream in(R"({"constraints": [
    {"type": "max_discount", "L": 2},
    {"type": "eq", "rhs": 1, "label": "pair", "terms": [{"product": 1, "candidate": 2}, {"product": 2, "candidate": 1, "coefficient": 2}]},
    {"type": "ge", "rhs": 1, "terms": [{"product": 3, "candidate": 1}]}
  ]})");
  const auto cons = read_constraints_json(in);
  REQUIRE(cons.size() == 3);
  CHECK(cons[0].kind == BusinessConstraint::Kind::MaxDiscountCount);
  CHECK(cons[0].max_discounted == 2);
  CHECK(cons[1].kind == BusinessConstraint::Kind::LinearEq);
  CHECK(cons[1].label == "pair");
  CHECK(cons[1].terms[0].product == 0);
  CHECK(cons[1].terms[0].candidate == 1);
  CHECK(cons[1].terms[1].coefficient == 2.0);
  CHECK(cons[2].kind == BusinessConstraint::Kind::LinearIneq);
  CHECK(cons[2].terms[0].coefficient == -1.0);
  CHECK(cons[2].rhs == -1.0);

  std::istringstream zero_index(R"([{"type": "le", "rhs": 1, "terms": [{"product": 0, "candidate": 1}]}])");
  CHECK(code_of([&] { read_constraints_json(zero_index); }) == ErrorCode::Parse);
  std::istringstream unknown(R"([{"type": "between", "rhs": 1, "terms": []}])");
  CHECK(code_of([&] { read_constraints_json(unknown); }) == ErrorCode::Parse);
}

TEST_CASE("grid and externals json") {
  std::istringstream bare("[[1.0, 0.9], [2.0, 1.5]]");
  const Eigen::MatrixXd grid = read_grid_json(bare);
  CHECK(grid == (Eigen::MatrixXd(2, 2) << 1.0, 0.9, 2.0, 1.5).finished());
  std::istringstream keyed(R"({"externals": [[1, 2, 3]]})");
  CHECK(read_externals_json(keyed).cols() == 3);
  std::istringstream ragged("[[1, 2], [3]]");
  CHECK_THROWS_AS(read_grid_json(ragged), Error);
}

TEST_CASE("file helpers report io errors") {
  CHECK(code_of([] { read_text_file("/nonexistent/file.json"); }) == ErrorCode::Io);
  CHECK(code_of([] { write_text_file("/nonexistent/dir/file.json", "x"); }) == ErrorCode::Io);
}
