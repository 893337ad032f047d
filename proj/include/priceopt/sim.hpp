#pragma once

// Synthetic ground-truth demand, seeded data sampling and the two
// experiment drivers (solver scalability and the effect of estimation error
// on the optimized profit).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "priceopt/demand.hpp"
#include "priceopt/profit.hpp"
#include "priceopt/sdprelax.hpp"

namespace priceopt {

/// Deterministic child seed for stream `index` of a parent seed (splitmix64).
std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index);

/// Single-step demand q_m = alpha_m + sum_{m', d} beta_{m m' d} f_d(p_m') + eps,
/// eps ~ N(0, sigma^2), f = {x, x^2, 1/x}, prices drawn from a common grid.
struct GroundTruth {
  Eigen::VectorXd alpha;       // M
  Eigen::MatrixXd beta;        // M x 3M, column m' * 3 + d
  double sigma = 0.0;
  Eigen::VectorXd candidates;  // descending price grid shared by all products
  double cost = 0.7;

  std::size_t products() const { return static_cast<std::size_t>(alpha.size()); }
  DemandModel model() const;
  PricingInstance instance() const;
  /// Expected profit sum_m (p_m - cost) E[q_m(p)].
  double expected_profit(const Eigen::VectorXd& prices) const;
};

/// {1, 0.95, 0.9, 0.85, 0.8}.
Eigen::VectorXd default_candidates();

/// alpha ~ N(4M, 1); own-price beta ~ N(-1, 1); cross beta ~ N(0, 1).
GroundTruth generate(std::size_t M, std::uint64_t seed, double sigma = 0.0);

struct SparseTruthShape {
  std::size_t dominant = 5;           // products with large sales that affect everyone
  double dominant_alpha_factor = 3.0;  // their alpha is this multiple of 4M
  std::size_t minor_per_product = 2;  // extra random cross effects per product
};

/// Each product depends on its own price, the dominant products' prices and a
/// few random minor products; every other coefficient is exactly zero.
GroundTruth generate_sparse(std::size_t M, std::uint64_t seed, double sigma,
                            const SparseTruthShape& shape = {});

/// N rows with prices i.i.d. uniform over the candidates.
Dataset sample_dataset(const GroundTruth& truth, std::size_t N, std::uint64_t seed);

/// Mean over products of E[q_m^2] without noise, by Monte-Carlo over uniform prices.
double mean_square_demand(const GroundTruth& truth, std::size_t draws, std::uint64_t seed);
/// Same quantity in closed form (prices are independent and uniform).
double exact_mean_square_demand(const GroundTruth& truth);

/// sqrt(sigma^2 / E[q^2]) where E[q^2] includes the noise.
double noise_level(double sigma, double mean_square);
/// Inverse of noise_level given the noiseless E[q^2]: sigma = delta sqrt(E/(1 - delta^2)).
double sigma_for_noise_level(double delta, double mean_square_noiseless);

struct ScalabilityRow {
  std::size_t products = 0;
  std::uint64_t seed = 0;
  double sdp_seconds = 0.0;
  double rounding_seconds = 0.0;
  int iterations = 0;
  double objective = 0.0;    // f(z~)
  double upper_bound = 0.0;  // g(Y~)
  std::optional<double> delta;
  std::optional<double> optimum;  // brute force, when affordable
};

/// Solves the true-profit BQP for every (M, seed) pair. Brute force is run
/// when K^M <= oracle_limit.
std::vector<ScalabilityRow> run_scalability(const std::vector<std::size_t>& sizes,
                                            const std::vector<std::uint64_t>& seeds,
                                            const PipelineOptions& opts = {},
                                            double oracle_limit = 1e5);
void write_scalability_csv(std::ostream& out, const std::vector<ScalabilityRow>& rows);

/// Least-squares slope of log(time) against log(M).
double loglog_slope(const std::vector<double>& sizes, const std::vector<double>& times);

enum class FitMethod { LeastSquares, LsOmp };

struct EstimationSettings {
  std::size_t products = 10;
  std::size_t samples = 1000;
  double noise = 0.2;  // delta
  std::size_t trials = 30;
  std::uint64_t seed = 1;
  FitMethod fit = FitMethod::LeastSquares;
  bool sparse_truth = false;
  SparseTruthShape sparse_shape;
  std::size_t forced_products = 5;  // LS-OMP stage one
  std::size_t extra_features = 10;  // LS-OMP stage two
  std::size_t calibration_draws = 100000;
  PipelineOptions pipeline;
};

struct TrialReport {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  double true_optimum = 0.0;          // f*(z*)
  double true_at_estimate = 0.0;      // f*(z^)
  double estimated_at_estimate = 0.0; // f^(z^)
  BinaryVector true_solution;
  BinaryVector estimated_solution;
  double fit_seconds = 0.0;
  double solve_seconds = 0.0;

  double true_ratio() const { return true_at_estimate / true_optimum; }
  double estimated_ratio() const { return estimated_at_estimate / true_optimum; }
  double overestimation() const { return estimated_at_estimate - true_at_estimate; }
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
};
MeanStd mean_std(const std::vector<double>& values);

struct EstimationSummary {
  MeanStd true_optimum;
  MeanStd true_at_estimate;
  MeanStd estimated_at_estimate;
  MeanStd true_ratio;
  MeanStd estimated_ratio;
  MeanStd overestimation;
};

struct EstimationStudy {
  std::vector<TrialReport> trials;
  EstimationSummary summary;
};

/// Each trial draws its own ground truth and data, fits a model, solves the
/// true and the estimated BQP through the relaxation and records the three
/// profits.
EstimationStudy run_estimation_study(const EstimationSettings& settings);
EstimationSummary summarize(const std::vector<TrialReport>& trials);
void write_estimation_csv(std::ostream& out, const EstimationStudy& study, bool timings = false);

}  // namespace priceopt
