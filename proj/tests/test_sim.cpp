#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "priceopt/error.hpp"
#include "priceopt/sim.hpp"
#include "test_support.hpp"

using namespace priceopt;

namespace {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  std::size_t count = 0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  m.count = v.size();
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.variance += (x - m.mean) * (x - m.mean);
  m.variance /= static_cast<double>(v.size() - 1);
  return m;
}

}  // namespace

TEST_CASE("child seeds are deterministic and distinct") {
  CHECK(child_seed(7, 3) == child_seed(7, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 20; ++s) {
    for (std::uint64_t i = 0; i < 20; ++i) seen.insert(child_seed(s, i));
  }
  CHECK(seen.size() == 400);
}

TEST_CASE("generator is seeded") {
  const GroundTruth a = generate(6, 99);
  const GroundTruth b = generate(6, 99);
  CHECK(a.alpha == b.alpha);
  CHECK(a.beta == b.beta);
  CHECK(generate(6, 100).alpha != a.alpha);
  CHECK(a.candidates == default_candidates());
  CHECK(a.cost == 0.7);
  CHECK(default_candidates() == (Eigen::VectorXd(5) << 1.0, 0.95, 0.9, 0.85, 0.8).finished());
}

TEST_CASE("generator moments") {
  const std::size_t M = 120;
  const GroundTruth truth = generate(M, 5);
  std::vector<double> alpha(truth.alpha.data(), truth.alpha.data() + M);
  std::vector<double> own, cross;
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t j = 0; j < M; ++j) {
      for (std::size_t d = 0; d < 3; ++d) {
        const double v = truth.beta(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(3 * j + d));
        (m == j ? own : cross).push_back(v);
      }
    }
  }
  const Moments a = moments(alpha), o = moments(own), c = moments(cross);
  // means within four standard errors, variances within a chi-square style band
  CHECK(std::abs(a.mean - 4.0 * M) < 4.0 / std::sqrt(static_cast<double>(a.count)));
  CHECK(std::abs(o.mean + 1.0) < 4.0 / std::sqrt(static_cast<double>(o.count)));
  CHECK(std::abs(c.mean) < 4.0 / std::sqrt(static_cast<double>(c.count)));
  for (const Moments* m : {&a, &o, &c}) {
    CHECK(std::abs(m->variance - 1.0) < 4.0 * std::sqrt(2.0 / static_cast<double>(m->count - 1)));
  }
}

TEST_CASE("noiseless samples follow the model exactly") {
  const GroundTruth truth = generate(4, 8);
  const DemandModel model = truth.model();
  for (std::uint64_t seed : {1, 2}) {
    const Dataset data = sample_dataset(truth, 50, seed);
    for (Eigen::Index n = 0; n < 50; ++n) {
      const Eigen::VectorXd q = predict(model, data.prices.row(n).transpose(), Eigen::VectorXd(0), 0);
      CHECK((q - data.quantities.row(n).transpose()).cwiseAbs().maxCoeff() == 0.0);
      for (Eigen::Index m = 0; m < 4; ++m) {
        CHECK((truth.candidates.array() == data.prices(n, m)).any());
      }
    }
  }
  CHECK(sample_dataset(truth, 20, 3).prices == sample_dataset(truth, 20, 3).prices);
}

TEST_CASE("noiseless data are recovered by least squares") {
  const GroundTruth truth = generate(5, 9);
  const DemandModel fitted = fit_ols(sample_dataset(truth, 400, 10), FeatureBank::standard());
  const auto& s = fitted.step(0);
  CHECK((s.alpha - truth.alpha).cwiseAbs().maxCoeff() <= 1e-6 * truth.alpha.cwiseAbs().maxCoeff());
  CHECK((s.beta - truth.beta).cwiseAbs().maxCoeff() <= 1e-6 * (1 + truth.beta.cwiseAbs().maxCoeff()));
}

TEST_CASE("noise level arithmetic") {
  CHECK(noise_level(0.0, 100.0) == 0.0);
  CHECK(noise_level(2.0, 100.0) == doctest::Approx(0.2).epsilon(1e-15));
  for (double delta : {0.05, 0.2, 0.5}) {
    const double e0 = 123.0;
    const double sigma = sigma_for_noise_level(delta, e0);
    CHECK(noise_level(sigma, e0 + sigma * sigma) == doctest::Approx(delta).epsilon(1e-12));
  }
  CHECK(sigma_for_noise_level(0.0, 50.0) == 0.0);
  CHECK_THROWS_AS(sigma_for_noise_level(1.0, 50.0), Error);
}

TEST_CASE("monte-carlo mean square matches the closed form") {
  const GroundTruth truth = generate(6, 11);
  const double exact = exact_mean_square_demand(truth);
  const double sampled = mean_square_demand(truth, 100000, 12);
  CHECK(std::abs(sampled - exact) < 0.01 * exact);
}

TEST_CASE("calibrated noise gives the requested relative error") {
  GroundTruth truth = generate(10, 13);
  truth.sigma = sigma_for_noise_level(0.2, exact_mean_square_demand(truth));
  const Dataset data = sample_dataset(truth, 1000, 14);
  const Eigen::VectorXd err = relative_errors(truth.model(), data);
  CHECK(std::abs(err.mean() - 0.2) < 0.05);
  const DemandModel fitted = fit_ols(data, FeatureBank::standard());
  CHECK(std::abs(relative_errors(fitted, data).mean() - 0.2) < 0.05);
}

TEST_CASE("expected profit matches the bqp objective") {
  const GroundTruth truth = generate(3, 15);
  const PricingInstance inst = truth.instance();
  const BqpProblem prob = build_bqp(inst);
  for (const auto& z : testing::feasible_points(prob)) {
    CHECK(testing::relative_error(truth.expected_profit(prices_from_binary(inst, z)), objective(prob, z)) <= 1e-9);
  }
}

TEST_CASE("sparse generator structure") {
  const SparseTruthShape shape;
  const GroundTruth truth = generate_sparse(20, 16, 0.0, shape);
  CHECK(generate_sparse(20, 16, 0.0, shape).beta == truth.beta);
  for (Eigen::Index m = 0; m < 20; ++m) {
    std::size_t products_used = 0;
    for (Eigen::Index j = 0; j < 20; ++j) {
      if (truth.beta.block(m, 3 * j, 1, 3).cwiseAbs().maxCoeff() > 0.0) ++products_used;
    }
    CHECK(products_used <= 1 + shape.dominant + shape.minor_per_product);
    CHECK(truth.beta.block(m, 3 * m, 1, 3).cwiseAbs().maxCoeff() > 0.0);
  }
}

TEST_CASE("log-log slope") {
  const std::vector<double> sizes{10, 20, 40, 80};
  std::vector<double> times;
  for (double m : sizes) times.push_back(0.002 * m * m * m);
  CHECK(loglog_slope(sizes, times) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_THROWS_AS(loglog_slope({1.0, 2.0}, {0.0, 1.0}), Error);
}

TEST_CASE("mean and sample standard deviation") {
  const MeanStd s = mean_std({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.std == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
  CHECK(mean_std({}).mean == 0.0);
}

TEST_CASE("scalability rows") {
  const auto rows = run_scalability({2, 3}, {1, 2});
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    REQUIRE(r.optimum.has_value());
    CHECK(r.objective <= *r.optimum + 1e-9);
    CHECK(*r.optimum <= r.upper_bound + 1e-6 * (1 + std::abs(r.upper_bound)));
    REQUIRE(r.delta.has_value());
    CHECK(*r.delta <= 1.0 + 1e-6);
  }
  std::ostringstream os;
  write_scalability_csv(os, rows);
  CHECK(os.str().rfind("M,seed,sdp_seconds", 0) == 0);
}

TEST_CASE("estimation study without noise") {
  EstimationSettings settings;
  settings.products = 3;
  settings.samples = 200;
  settings.noise = 0.0;
  settings.trials = 3;
  const EstimationStudy study = run_estimation_study(settings);
  for (const auto& t : study.trials) {
    CHECK(std::abs(t.true_ratio() - 1.0) <= 1e-3);
    CHECK(std::abs(t.estimated_ratio() - 1.0) <= 1e-3);
  }
}

TEST_CASE("estimation study reports are recomputable and deterministic") {
  EstimationSettings settings;
  settings.products = 3;
  settings.samples = 300;
  settings.trials = 3;
  settings.seed = 17;
  const EstimationStudy a = run_estimation_study(settings);
  const EstimationStudy b = run_estimation_study(settings);
  std::ostringstream ca, cb;
  write_estimation_csv(ca, a);
  write_estimation_csv(cb, b);
  CHECK(ca.str() == cb.str());

  for (const auto& t : a.trials) {
    const GroundTruth truth = generate(3, child_seed(t.seed, 0));
    const BqpProblem prob = build_bqp(truth.instance());
    CHECK(testing::relative_error(objective(prob, t.estimated_solution), t.true_at_estimate) <= 1e-9);
    CHECK(testing::relative_error(objective(prob, t.true_solution), t.true_optimum) <= 1e-9);
    CHECK(t.true_at_estimate <= brute_force(prob).objective + 1e-9);
  }
  const EstimationSummary s = summarize(a.trials);
  CHECK(s.true_ratio.mean == a.summary.true_ratio.mean);
  CHECK_THROWS_AS(run_estimation_study([] {
                    EstimationSettings one;
                    one.trials = 1;
                    return one;
                  }()),
                  Error);
}
