#include "priceopt/sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

#include "priceopt/error.hpp"

namespace priceopt {

namespace {

constexpr std::size_t kTransforms = 3;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string binary_string(const BinaryVector& z) {
  std::string s;
  for (auto b : z) s.push_back(b ? '1' : '0');
  return s;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t count) {
  return std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
}

// Sum over m' of the price effect on product m at the given prices.
double price_effect(const GroundTruth& truth, std::size_t m, const Eigen::VectorXd& prices) {
  const FeatureBank bank = FeatureBank::standard();
  double f[kTransforms];
  double total = 0.0;
  for (std::size_t m2 = 0; m2 < truth.products(); ++m2) {
    bank.apply_all(prices(static_cast<Eigen::Index>(m2)), f);
    for (std::size_t d = 0; d < kTransforms; ++d) {
      total += truth.beta(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m2 * kTransforms + d)) * f[d];
    }
  }
  return total;
}

GroundTruth empty_truth(std::size_t M, double sigma) {
  if (M == 0) throw Error(ErrorCode::InvalidArgument, "need at least one product");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise level must be nonnegative");
  GroundTruth truth;
  truth.alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(M));
  truth.beta = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M * kTransforms));
  truth.sigma = sigma;
  truth.candidates = default_candidates();
  return truth;
}

}  // namespace

std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Eigen::VectorXd default_candidates() {
  Eigen::VectorXd c(5);
  c << 1.0, 0.95, 0.9, 0.85, 0.8;
  return c;
}

DemandModel GroundTruth::model() const {
  const std::size_t M = products();
  DemandModel model(FeatureBank::standard(), M, 1);
  auto& step = model.step(0);
  step.alpha = alpha;
  step.beta = beta;
  step.beta_active = beta.array() != 0.0;
  return model;
}

PricingInstance GroundTruth::instance() const {
  PricingInstance inst;
  inst.model = model();
  inst.grid = uniform_grid(products(), candidates);
  inst.costs = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(products()), cost);
  inst.externals = Eigen::MatrixXd::Zero(1, 0);
  return inst;
}

double GroundTruth::expected_profit(const Eigen::VectorXd& prices) const {
  double total = 0.0;
  for (std::size_t m = 0; m < products(); ++m) {
    total += (prices(static_cast<Eigen::Index>(m)) - cost) *
             (alpha(static_cast<Eigen::Index>(m)) + price_effect(*this, m, prices));
  }
  return total;
}

GroundTruth generate(std::size_t M, std::uint64_t seed, double sigma) {
  GroundTruth truth = empty_truth(M, sigma);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double base = 4.0 * static_cast<double>(M);
  for (std::size_t m = 0; m < M; ++m) {
    truth.alpha(static_cast<Eigen::Index>(m)) = base + normal(rng);
    for (std::size_t m2 = 0; m2 < M; ++m2) {
      for (std::size_t d = 0; d < kTransforms; ++d) {
        truth.beta(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m2 * kTransforms + d)) =
            (m == m2 ? -1.0 : 0.0) + normal(rng);
      }
    }
  }
  return truth;
}

GroundTruth generate_sparse(std::size_t M, std::uint64_t seed, double sigma,
                            const SparseTruthShape& shape) {
  if (shape.dominant > M) throw Error(ErrorCode::InvalidArgument, "more dominant products than products");
  GroundTruth truth = empty_truth(M, sigma);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double base = 4.0 * static_cast<double>(M);
  auto set_effect = [&](std::size_t m, std::size_t m2, double mean) {
    for (std::size_t d = 0; d < kTransforms; ++d) {
      truth.beta(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m2 * kTransforms + d)) = mean + normal(rng);
    }
  };
  for (std::size_t m = 0; m < M; ++m) {
    const bool dominant = m < shape.dominant;
    truth.alpha(static_cast<Eigen::Index>(m)) = (dominant ? shape.dominant_alpha_factor : 1.0) * base + normal(rng);
    set_effect(m, m, -1.0);
    for (std::size_t m2 = 0; m2 < shape.dominant; ++m2) {
      if (m2 != m) set_effect(m, m2, 0.0);
    }
    std::vector<std::size_t> pool;
    for (std::size_t m2 = shape.dominant; m2 < M; ++m2) {
      if (m2 != m) pool.push_back(m2);
    }
    for (std::size_t k = 0; k < shape.minor_per_product && !pool.empty(); ++k) {
      const std::size_t pick = uniform_index(rng, pool.size());
      set_effect(m, pool[pick], 0.0);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
  }
  return truth;
}

Dataset sample_dataset(const GroundTruth& truth, std::size_t N, std::uint64_t seed) {
  if (N == 0) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
  const std::size_t M = truth.products();
  const std::size_t K = static_cast<std::size_t>(truth.candidates.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset data;
  data.prices.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(M));
  data.quantities.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(M));
  data.externals.resize(static_cast<Eigen::Index>(N), 0);
  for (std::size_t n = 0; n < N; ++n) {
    const auto row = static_cast<Eigen::Index>(n);
    for (std::size_t m = 0; m < M; ++m) {
      data.prices(row, static_cast<Eigen::Index>(m)) = truth.candidates(static_cast<Eigen::Index>(uniform_index(rng, K)));
    }
    const Eigen::VectorXd p = data.prices.row(row).transpose();
    for (std::size_t m = 0; m < M; ++m) {
      const double eps = truth.sigma > 0.0 ? truth.sigma * noise(rng) : 0.0;
      data.quantities(row, static_cast<Eigen::Index>(m)) =
          truth.alpha(static_cast<Eigen::Index>(m)) + price_effect(truth, m, p) + eps;
    }
  }
  return data;
}

double mean_square_demand(const GroundTruth& truth, std::size_t draws, std::uint64_t seed) {
  if (draws == 0) throw Error(ErrorCode::InvalidArgument, "need at least one draw");
  GroundTruth noiseless = truth;
  noiseless.sigma = 0.0;
  const Dataset data = sample_dataset(noiseless, draws, seed);
  return data.quantities.squaredNorm() / static_cast<double>(data.quantities.size());
}

double exact_mean_square_demand(const GroundTruth& truth) {
  const std::size_t M = truth.products();
  const auto K = truth.candidates.size();
  const FeatureBank bank = FeatureBank::standard();
  double total = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    double mean = truth.alpha(static_cast<Eigen::Index>(m));
    double variance = 0.0;
    for (std::size_t m2 = 0; m2 < M; ++m2) {
      double s1 = 0.0;
      double s2 = 0.0;
      for (Eigen::Index k = 0; k < K; ++k) {
        double f[kTransforms];
        bank.apply_all(truth.candidates(k), f);
        double h = 0.0;
        for (std::size_t d = 0; d < kTransforms; ++d) {
          h += truth.beta(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m2 * kTransforms + d)) * f[d];
        }
        s1 += h;
        s2 += h * h;
      }
      const double mu = s1 / static_cast<double>(K);
      mean += mu;
      variance += s2 / static_cast<double>(K) - mu * mu;
    }
    total += mean * mean + variance;
  }
  return total / static_cast<double>(M);
}

double noise_level(double sigma, double mean_square) {
  if (!(mean_square > 0.0)) throw Error(ErrorCode::InvalidArgument, "E[q^2] must be positive");
  return std::sqrt(sigma * sigma / mean_square);
}

double sigma_for_noise_level(double delta, double mean_square_noiseless) {
  if (!(delta >= 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidArgument, "noise level must lie in [0, 1)");
  if (!(mean_square_noiseless > 0.0)) throw Error(ErrorCode::InvalidArgument, "E[q^2] must be positive");
  return delta * std::sqrt(mean_square_noiseless / (1.0 - delta * delta));
}

std::vector<ScalabilityRow> run_scalability(const std::vector<std::size_t>& sizes,
                                            const std::vector<std::uint64_t>& seeds,
                                            const PipelineOptions& opts, double oracle_limit) {
  std::vector<ScalabilityRow> rows;
  for (std::size_t M : sizes) {
    for (std::uint64_t seed : seeds) {
      const GroundTruth truth = generate(M, seed);
      const BqpProblem prob = build_bqp(truth.instance());
      const PipelineResult res = solve_relaxed(prob, opts);
      ScalabilityRow row;
      row.products = M;
      row.seed = seed;
      row.sdp_seconds = res.timings.sdp_seconds;
      row.rounding_seconds = res.timings.rounding_seconds;
      row.iterations = res.relaxation.solution.iterations;
      row.objective = res.rounding.bound.objective;
      row.upper_bound = res.rounding.bound.upper_bound;
      row.delta = res.rounding.bound.delta;
      if (assignment_count(prob) <= oracle_limit) row.optimum = brute_force(prob).objective;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_scalability_csv(std::ostream& out, const std::vector<ScalabilityRow>& rows) {
  out << "M,seed,sdp_seconds,rounding_seconds,iterations,objective,upper_bound,delta,optimum\n";
  for (const auto& r : rows) {
    out << r.products << ',' << r.seed << ',' << num(r.sdp_seconds) << ',' << num(r.rounding_seconds)
        << ',' << r.iterations << ',' << num(r.objective) << ',' << num(r.upper_bound) << ','
        << (r.delta ? num(*r.delta) : "") << ',' << (r.optimum ? num(*r.optimum) : "") << '\n';
  }
}

double loglog_slope(const std::vector<double>& sizes, const std::vector<double>& times) {
  if (sizes.size() != times.size() || sizes.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "slope needs at least two matching points");
  }
  const auto n = static_cast<Eigen::Index>(sizes.size());
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(sizes[static_cast<std::size_t>(i)] > 0.0) || !(times[static_cast<std::size_t>(i)] > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "slope needs positive sizes and times");
    }
    X(i, 0) = 1.0;
    X(i, 1) = std::log(sizes[static_cast<std::size_t>(i)]);
    y(i) = std::log(times[static_cast<std::size_t>(i)]);
  }
  return X.colPivHouseholderQr().solve(y)(1);
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

EstimationSummary summarize(const std::vector<TrialReport>& trials) {
  auto collect = [&](auto getter) {
    std::vector<double> v;
    for (const auto& t : trials) v.push_back(getter(t));
    return mean_std(v);
  };
  EstimationSummary s;
  s.true_optimum = collect([](const TrialReport& t) { return t.true_optimum; });
  s.true_at_estimate = collect([](const TrialReport& t) { return t.true_at_estimate; });
  s.estimated_at_estimate = collect([](const TrialReport& t) { return t.estimated_at_estimate; });
  s.true_ratio = collect([](const TrialReport& t) { return t.true_ratio(); });
  s.estimated_ratio = collect([](const TrialReport& t) { return t.estimated_ratio(); });
  s.overestimation = collect([](const TrialReport& t) { return t.overestimation(); });
  return s;
}

EstimationStudy run_estimation_study(const EstimationSettings& settings) {
  if (settings.trials < 2) throw Error(ErrorCode::InvalidArgument, "estimation study needs at least two trials");
  const FeatureBank bank = FeatureBank::standard();
  EstimationStudy study;
  for (std::size_t trial = 0; trial < settings.trials; ++trial) {
    TrialReport rep;
    rep.trial = trial;
    rep.seed = child_seed(settings.seed, trial);
    GroundTruth truth = settings.sparse_truth
                            ? generate_sparse(settings.products, child_seed(rep.seed, 0), 0.0, settings.sparse_shape)
                            : generate(settings.products, child_seed(rep.seed, 0));
    if (settings.noise > 0.0) {
      const double e0 = mean_square_demand(truth, settings.calibration_draws, child_seed(rep.seed, 1));
      truth.sigma = sigma_for_noise_level(settings.noise, e0);
    }
    rep.sigma = truth.sigma;
    const Dataset data = sample_dataset(truth, settings.samples, child_seed(rep.seed, 2));

    auto start = Clock::now();
    DemandModel fitted;
    if (settings.fit == FitMethod::LeastSquares) {
      fitted = fit_ols(data, bank);
    } else {
      fitted = fit_ls_omp(data, bank, top_revenue_products(data, settings.forced_products),
                          settings.extra_features);
    }
    rep.fit_seconds = seconds_since(start);

    const PricingInstance true_inst = truth.instance();
    PricingInstance est_inst = true_inst;
    est_inst.model = std::move(fitted);
    const BqpProblem true_prob = build_bqp(true_inst);
    const BqpProblem est_prob = build_bqp(est_inst);

    start = Clock::now();
    PipelineOptions opts = settings.pipeline;
    opts.seed = child_seed(rep.seed, 3);
    rep.true_solution = solve_relaxed(true_prob, opts).rounding.z;
    rep.estimated_solution = solve_relaxed(est_prob, opts).rounding.z;
    rep.solve_seconds = seconds_since(start);

    rep.true_optimum = objective(true_prob, rep.true_solution);
    rep.true_at_estimate = objective(true_prob, rep.estimated_solution);
    rep.estimated_at_estimate = objective(est_prob, rep.estimated_solution);
    study.trials.push_back(std::move(rep));
  }
  study.summary = summarize(study.trials);
  return study;
}

void write_estimation_csv(std::ostream& out, const EstimationStudy& study, bool timings) {
  out << "trial,seed,sigma,true_optimum,true_at_estimate,estimated_at_estimate,true_ratio,"
         "estimated_ratio,true_solution,estimated_solution";
  if (timings) out << ",fit_seconds,solve_seconds";
  out << '\n';
  for (const auto& t : study.trials) {
    out << t.trial << ',' << t.seed << ',' << num(t.sigma) << ',' << num(t.true_optimum) << ','
        << num(t.true_at_estimate) << ',' << num(t.estimated_at_estimate) << ',' << num(t.true_ratio())
        << ',' << num(t.estimated_ratio()) << ',' << binary_string(t.true_solution) << ','
        << binary_string(t.estimated_solution);
    if (timings) out << ',' << num(t.fit_seconds) << ',' << num(t.solve_seconds);
    out << '\n';
  }
}

}  // namespace priceopt
