#include "priceopt/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "priceopt/bqp.hpp"
#include "priceopt/demand.hpp"
#include "priceopt/io.hpp"
#include "priceopt/milp.hpp"
#include "priceopt/profit.hpp"
#include "priceopt/sdprelax.hpp"
#include "priceopt/sim.hpp"

namespace priceopt {

namespace {

using nlohmann::json;

// A failure with an explicit exit code, e.g. any error raised while fitting.
struct CommandFailure : std::runtime_error {
  CommandFailure(int exit, std::string code, const std::string& what)
      : std::runtime_error(what), exit(exit), code(std::move(code)) {}
  int exit;
  std::string code;
};

Error usage(const std::string& what) { return Error(ErrorCode::InvalidArgument, what); }

struct Settings {
  std::string config;
  // inputs
  std::string data;
  std::string model;
  std::string bqp;
  std::string grid;
  std::string costs = "fraction:0.3";
  std::string externals;
  std::string constraints;
  // outputs
  std::string out;
  std::string report;
  std::string bqp_out;
  std::string lp;
  std::string sdpa;
  std::string truth_out;
  // fitting
  std::string method = "ols";
  std::string transforms = "x,x^2,1/x";
  double lambda = 1.0;
  std::size_t k = 10;
  std::size_t forced = 5;
  // solving
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double tol = 1e-7;
  std::size_t t_search = kDefaultSearchBudget;
  int max_restarts = kDefaultMaxRestarts;
  std::size_t samples = 1;
  bool timings = false;
  bool revenue = false;
  bool brute_force = false;
  // simulation
  std::string sizes = "10,20";
  std::string seeds = "1";
  std::size_t products = 10;
  std::size_t rows = 1000;
  double noise = 0.2;
  std::size_t trials = 30;
  bool sparse = false;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep)) {
    const auto a = item.find_first_not_of(' ');
    const auto b = item.find_last_not_of(' ');
    out.push_back(a == std::string::npos ? std::string() : item.substr(a, b - a + 1));
  }
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw usage(what + ": '" + s + "' is not a number");
  return v;
}

std::vector<double> parse_doubles(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_double(item, what));
  if (out.empty()) throw usage(what + " is empty");
  return out;
}

std::vector<std::uint64_t> parse_unsigned_list(const std::string& s, const std::string& what) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split(s, ',')) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(item.c_str(), &end, 10);
    if (item.empty() || item[0] == '-' || end != item.c_str() + item.size()) {
      throw usage(what + ": '" + item + "' is not a nonnegative integer");
    }
    out.push_back(v);
  }
  if (out.empty()) throw usage(what + " is empty");
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

bool has_prefix(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

template <typename Reader>
auto read_file(const std::string& path, Reader reader) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return reader(in);
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_text_file(path, content);
  }
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---------------------------------------------------------------- problem set-up

Eigen::MatrixXd build_grid(const Settings& s, std::size_t products, const std::optional<Dataset>& data) {
  if (s.grid.empty() || has_prefix(s.grid, "split:")) {
    const std::size_t K = s.grid.empty() ? 5 : static_cast<std::size_t>(parse_double(s.grid.substr(6), "--grid"));
    if (!data) throw usage("a split grid needs --data with the price history");
    if (data->products() != products) throw usage("--data has a different number of products than the model");
    return split_grid_from_history(*data, K);
  }
  if (has_prefix(s.grid, "values:")) {
    auto values = parse_doubles(s.grid.substr(7), "--grid");
    return uniform_grid(products, to_vector(values));
  }
  return read_file(s.grid, read_grid_json);
}

Eigen::VectorXd build_costs(const Settings& s, const Eigen::MatrixXd& grid) {
  const auto M = grid.rows();
  if (has_prefix(s.costs, "fraction:")) return costs_from_list_price(grid, parse_double(s.costs.substr(9), "--costs"));
  if (has_prefix(s.costs, "const:")) return Eigen::VectorXd::Constant(M, parse_double(s.costs.substr(6), "--costs"));
  if (has_prefix(s.costs, "values:")) {
    const auto v = parse_doubles(s.costs.substr(7), "--costs");
    if (static_cast<Eigen::Index>(v.size()) != M) {
      throw Error(ErrorCode::DimensionMismatch, "--costs lists " + std::to_string(v.size()) +
                                                    " values for " + std::to_string(M) + " products");
    }
    return to_vector(v);
  }
  throw usage("--costs must be fraction:F, const:C or values:c1,c2,...");
}

struct Problem {
  std::optional<PricingInstance> instance;
  BqpProblem bqp;
};

Problem build_problem(const Settings& s) {
  Problem p;
  if (!s.bqp.empty()) {
    if (!s.model.empty()) throw usage("give either --bqp or --model, not both");
    p.bqp = read_file(s.bqp, read_bqp_json);
    return p;
  }
  if (s.model.empty()) throw usage("--model (or --bqp) is required");
  PricingInstance inst;
  inst.model = read_file(s.model, read_model_json);
  std::optional<Dataset> data;
  if (!s.data.empty()) data = read_file(s.data, read_dataset_csv);
  inst.grid = build_grid(s, inst.model.products(), data);
  inst.costs = build_costs(s, inst.grid);
  inst.revenue_mode = s.revenue;
  if (inst.model.external_dim() > 0) {
    if (s.externals.empty()) {
      throw usage("the model uses " + std::to_string(inst.model.external_dim()) +
                  " external features; pass their planned values with --externals");
    }
    inst.externals = read_file(s.externals, read_externals_json);
  } else {
    inst.externals = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(inst.model.horizon()), 0);
  }
  std::vector<BusinessConstraint> cons;
  if (!s.constraints.empty()) cons = read_file(s.constraints, read_constraints_json);
  p.bqp = build_bqp(inst, cons);
  p.instance = std::move(inst);
  return p;
}

// ---------------------------------------------------------------- subcommands

int cmd_fit(const Settings& s, std::ostream& out) {
  if (s.data.empty()) throw usage("fit requires --data");
  if (s.out.empty()) throw usage("fit requires --out for the model file");
  const Dataset data = read_file(s.data, read_dataset_csv);
  const FeatureBank bank = FeatureBank::from_names(split(s.transforms, ','), data.external_dim());
  DemandModel model;
  try {
    if (s.method == "ols") {
      model = fit_ols(data, bank);
    } else if (s.method == "ridge") {
      model = fit_ridge(data, bank, s.lambda);
    } else if (s.method == "omp") {
      model = fit_omp(data, bank, s.k);
    } else if (s.method == "lsomp") {
      model = fit_ls_omp(data, bank, top_revenue_products(data, s.forced), s.k);
    } else {
      throw usage("--method must be ols, ridge, omp or lsomp");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument && has_prefix(e.what(), "--method")) throw;
    throw CommandFailure(kExitFit, std::string(to_string(e.code())), e.what());
  }
  std::ostringstream model_text;
  write_model_json(model_text, model);
  write_text_file(s.out, model_text.str());

  const Eigen::VectorXd errors = relative_errors(model, data);
  json report;
  report["method"] = s.method;
  report["samples"] = data.size();
  report["products"] = data.products();
  report["horizon"] = model.horizon();
  report["relative_errors"] = std::vector<double>(errors.data(), errors.data() + errors.size());
  report["mean_relative_error"] = errors.mean();
  json support = json::array();
  for (std::size_t t = 0; t < model.horizon(); ++t) {
    json row = json::array();
    for (std::size_t m = 0; m < model.products(); ++m) row.push_back(model.support_size(t, m));
    support.push_back(std::move(row));
  }
  report["support_sizes"] = std::move(support);
  emit(s.report, report.dump(2) + "\n", out);
  return kExitOk;
}

json sdp_summary(const SdpSolution& sol) {
  return {{"status", std::string(to_string(sol.status))},
          {"iterations", sol.iterations},
          {"primal_residual", sol.residuals.primal},
          {"dual_residual", sol.residuals.dual},
          {"gap", sol.residuals.gap}};
}

json product_table(const PricingInstance& inst, const Eigen::VectorXd& optimal) {
  const Eigen::VectorXd original = inst.grid.col(0);
  Eigen::VectorXd units_before = Eigen::VectorXd::Zero(original.size());
  Eigen::VectorXd units_after = Eigen::VectorXd::Zero(original.size());
  for (std::size_t t = 0; t < inst.horizon(); ++t) {
    const Eigen::VectorXd g = inst.externals.row(static_cast<Eigen::Index>(t)).transpose();
    units_before += predict(inst.model, original, g, t);
    units_after += predict(inst.model, optimal, g, t);
  }
  auto rate = [](double before, double after) { return before != 0.0 ? json((after - before) / before) : json(nullptr); };
  json rows = json::array();
  for (Eigen::Index m = 0; m < original.size(); ++m) {
    const double rev_before = original(m) * units_before(m);
    const double rev_after = optimal(m) * units_after(m);
    rows.push_back({{"product", m + 1},
                    {"original_price", original(m)},
                    {"optimal_price", optimal(m)},
                    {"price_increase_rate", rate(original(m), optimal(m))},
                    {"original_units", units_before(m)},
                    {"optimal_units", units_after(m)},
                    {"units_increase_rate", rate(units_before(m), units_after(m))},
                    {"original_revenue", rev_before},
                    {"optimal_revenue", rev_after},
                    {"revenue_increase_rate", rate(rev_before, rev_after)}});
  }
  return rows;
}

int cmd_optimize(const Settings& s, std::ostream& out, std::ostream& err) {
  const Problem problem = build_problem(s);
  const BqpProblem& prob = problem.bqp;
  if (!s.bqp_out.empty()) {
    std::ostringstream os;
    write_bqp_json(os, prob);
    write_text_file(s.bqp_out, os.str());
  }
  PipelineOptions opts;
  opts.sdp.tol = s.tol;
  opts.t_search = s.t_search;
  opts.max_restarts = s.max_restarts;
  opts.seed = s.seed;
  opts.samples = s.samples;
  const PipelineResult res = solve_relaxed(prob, opts);
  if (res.rounding.method == RoundingMethod::Randomized) {
    err << json{{"level", "info"}, {"event", "randomized_fallback"},
                {"message", "no deterministic candidate was feasible; used randomized rounding"}}.dump()
        << '\n';
  }

  const auto& z = res.rounding.z;
  json report;
  report["method"] = std::string(to_string(res.rounding.method));
  report["seed"] = res.rounding.seed ? json(*res.rounding.seed) : json(nullptr);
  report["objective"] = res.rounding.bound.objective;
  report["upper_bound"] = res.rounding.bound.upper_bound;
  report["delta"] = optional_number(res.rounding.bound.delta);
  report["z"] = std::vector<int>(z.begin(), z.end());
  json chosen = json::array();
  for (const auto& block : prob.blocks) {
    for (std::size_t k = 0; k < block.size(); ++k) {
      if (z[block[k]]) chosen.push_back(k + 1);
    }
  }
  report["candidates"] = std::move(chosen);
  report["sdp"] = sdp_summary(res.relaxation.solution);
  if (problem.instance) {
    const auto& inst = *problem.instance;
    const Eigen::VectorXd prices = prices_from_binary(inst, z);
    report["prices"] = std::vector<double>(prices.data(), prices.data() + prices.size());
    report["products"] = product_table(inst, prices);
    const double before = gross_profit(inst, inst.grid.col(0));
    report["profit"] = {{"original", before},
                        {"optimal", res.rounding.bound.objective},
                        {"increase_rate", before != 0.0 ? json((res.rounding.bound.objective - before) / before) : json(nullptr)}};
  }
  if (s.brute_force) {
    const BqpSolution best = brute_force(prob, s.threads);
    report["optimum"] = best.objective;
    report["optimal_z"] = std::vector<int>(best.z.begin(), best.z.end());
  }
  if (s.timings) {
    report["timings"] = {{"lift_seconds", res.timings.lift_seconds},
                         {"sdp_seconds", res.timings.sdp_seconds},
                         {"rounding_seconds", res.timings.rounding_seconds}};
  }
  emit(s.out, report.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_export(const Settings& s, std::ostream& out) {
  if (s.lp.empty() && s.sdpa.empty() && s.bqp_out.empty()) {
    throw usage("export needs at least one of --lp, --sdpa, --bqp-out");
  }
  const Problem problem = build_problem(s);
  if (!s.bqp_out.empty()) {
    std::ostringstream os;
    write_bqp_json(os, problem.bqp);
    emit(s.bqp_out, os.str(), out);
  }
  if (!s.lp.empty()) {
    std::ostringstream os;
    export_lp(linearize(problem.bqp), os);
    emit(s.lp, os.str(), out);
  }
  if (!s.sdpa.empty()) {
    std::ostringstream os;
    write_sdpa(lift(problem.bqp).sdp, os, "lifted price optimization relaxation");
    emit(s.sdpa, os.str(), out);
  }
  return kExitOk;
}

int cmd_simulate_dataset(const Settings& s, std::ostream& out) {
  GroundTruth truth = s.sparse ? generate_sparse(s.products, child_seed(s.seed, 0), 0.0)
                               : generate(s.products, child_seed(s.seed, 0));
  if (s.noise > 0.0) {
    truth.sigma = sigma_for_noise_level(s.noise, mean_square_demand(truth, 100000, child_seed(s.seed, 1)));
  }
  std::ostringstream os;
  write_dataset_csv(os, sample_dataset(truth, s.rows, child_seed(s.seed, 2)));
  emit(s.out, os.str(), out);
  if (!s.truth_out.empty()) {
    std::ostringstream ms;
    write_model_json(ms, truth.model());
    write_text_file(s.truth_out, ms.str());
  }
  return kExitOk;
}

int cmd_simulate_scalability(const Settings& s, std::ostream& out) {
  std::vector<std::size_t> sizes;
  for (auto v : parse_unsigned_list(s.sizes, "--sizes")) sizes.push_back(static_cast<std::size_t>(v));
  PipelineOptions opts;
  opts.sdp.tol = s.tol;
  opts.t_search = s.t_search;
  opts.max_restarts = s.max_restarts;
  const auto rows = run_scalability(sizes, parse_unsigned_list(s.seeds, "--seeds"), opts);
  std::ostringstream os;
  write_scalability_csv(os, rows);
  emit(s.out, os.str(), out);
  if (!s.out.empty() && s.out != "-") {
    json summary;
    summary["rows"] = rows.size();
    std::vector<double> m, t;
    for (const auto& r : rows) {
      m.push_back(static_cast<double>(r.products));
      t.push_back(std::max(r.sdp_seconds, 1e-9));
    }
    std::vector<double> distinct = m;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    summary["loglog_slope"] = distinct.size() >= 2 ? json(loglog_slope(m, t)) : json(nullptr);
    out << summary.dump(2) << '\n';
  }
  return kExitOk;
}

json mean_std_json(const MeanStd& v) { return {{"mean", v.mean}, {"std", v.std}}; }

int cmd_simulate_estimation(const Settings& s, std::ostream& out) {
  EstimationSettings es;
  es.products = s.products;
  es.samples = s.rows;
  es.noise = s.noise;
  es.trials = s.trials;
  es.seed = s.seed;
  es.sparse_truth = s.sparse;
  es.forced_products = s.forced;
  es.extra_features = s.k;
  if (s.method == "ols") {
    es.fit = FitMethod::LeastSquares;
  } else if (s.method == "lsomp") {
    es.fit = FitMethod::LsOmp;
  } else {
    throw usage("simulate estimation supports --method ols or lsomp");
  }
  es.pipeline.sdp.tol = s.tol;
  es.pipeline.t_search = s.t_search;
  es.pipeline.max_restarts = s.max_restarts;
  const EstimationStudy study = run_estimation_study(es);
  std::ostringstream os;
  write_estimation_csv(os, study, s.timings);
  emit(s.out, os.str(), out);
  if (!s.out.empty() && s.out != "-") {
    const auto& sum = study.summary;
    const json summary = {{"trials", study.trials.size()},
                          {"true_optimum", mean_std_json(sum.true_optimum)},
                          {"true_at_estimate", mean_std_json(sum.true_at_estimate)},
                          {"estimated_at_estimate", mean_std_json(sum.estimated_at_estimate)},
                          {"true_ratio", mean_std_json(sum.true_ratio)},
                          {"estimated_ratio", mean_std_json(sum.estimated_ratio)},
                          {"overestimation", mean_std_json(sum.overestimation)}};
    out << summary.dump(2) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- configuration

std::string find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (has_prefix(args[i], "--config=")) return args[i].substr(9);
  }
  return {};
}

// Top-level keys apply everywhere; an object under a subcommand name
// overrides them for that subcommand.
json config_for(const json& cfg, const std::string& command) {
  json merged = json::object();
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    if (!it.value().is_object()) merged[it.key()] = it.value();
  }
  if (cfg.contains(command) && cfg.at(command).is_object()) {
    for (auto it = cfg.at(command).begin(); it != cfg.at(command).end(); ++it) merged[it.key()] = it.value();
  }
  return merged;
}

class OptionBinder {
 public:
  OptionBinder(CLI::App* app, const json& cfg) : app_(app), cfg_(cfg) {}

  template <typename T>
  OptionBinder& add(const std::string& name, T& var, const std::string& help) {
    app_->add_option("--" + name, var, help);
    apply(name, var);
    return *this;
  }
  OptionBinder& flag(const std::string& name, bool& var, const std::string& help) {
    app_->add_flag("--" + name, var, help);
    apply(name, var);
    return *this;
  }

 private:
  template <typename T>
  void apply(const std::string& name, T& var) {
    if (!cfg_.contains(name)) return;
    try {
      var = cfg_.at(name).get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::Parse, "config key '" + name + "' has the wrong type");
    }
  }

  CLI::App* app_;
  const json& cfg_;
};

void add_problem_options(OptionBinder& b, Settings& s) {
  b.add("model", s.model, "demand model JSON written by 'fit'")
      .add("bqp", s.bqp, "BQP instance JSON (instead of --model)")
      .add("data", s.data, "price history CSV, used by split grids")
      .add("grid", s.grid, "split:K | values:p1,p2,... | grid JSON file")
      .add("costs", s.costs, "fraction:F | const:C | values:c1,c2,...")
      .add("externals", s.externals, "JSON rows of planned external features, one per time step")
      .add("constraints", s.constraints, "business constraints JSON")
      .flag("revenue", s.revenue, "maximize revenue (all costs zero)");
}

void add_solver_options(OptionBinder& b, Settings& s) {
  b.add("tol", s.tol, "SDP stopping tolerance")
      .add("t-search", s.t_search, "candidate budget of deterministic rounding")
      .add("max-restarts", s.max_restarts, "restarts of randomized rounding")
      .add("seed", s.seed, "random seed")
      .add("threads", s.threads, "worker threads for exhaustive search");
}

void report_error(std::ostream& err, int exit, const std::string& code, const std::string& message) {
  err << json{{"level", "error"}, {"exit", exit}, {"code", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularDesign: return kExitFit;
    case ErrorCode::SdpSolveFailure:
    case ErrorCode::Infeasible: return kExitSdp;
    case ErrorCode::NoFeasibleFound: return kExitNoFeasible;
    case ErrorCode::Io: return kExitIo;
    default: return kExitUsage;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings s;
  json cfg = json::object();
  try {
    s.config = find_config(args);
    if (!s.config.empty()) {
      const std::string text = read_text_file(s.config);
      try {
        cfg = json::parse(text);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, "config: " + std::string(e.what()));
      }
      if (!cfg.is_object()) throw Error(ErrorCode::Parse, "config must be a JSON object");
    }

    CLI::App app{"Price optimization over discrete price grids"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", s.config, "JSON file with option values; flags take precedence");

    auto* fit = app.add_subcommand("fit", "fit demand regressions to a price history");
    const json fit_cfg = config_for(cfg, "fit");
    OptionBinder(fit, fit_cfg)
        .add("data", s.data, "price history CSV")
        .add("out", s.out, "model JSON to write")
        .add("report", s.report, "fit report JSON (default: stdout)")
        .add("method", s.method, "ols | ridge | omp | lsomp")
        .add("transforms", s.transforms, "comma-separated price transforms")
        .add("lambda", s.lambda, "ridge strength")
        .add("k", s.k, "OMP atoms (lsomp: atoms added after the forced products)")
        .add("forced", s.forced, "lsomp: number of top-revenue products fitted first");

    auto* optimize = app.add_subcommand("optimize", "choose prices through the SDP relaxation");
    const json opt_cfg = config_for(cfg, "optimize");
    OptionBinder ob(optimize, opt_cfg);
    add_problem_options(ob, s);
    add_solver_options(ob, s);
    ob.add("out", s.out, "report JSON (default: stdout)")
        .add("bqp-out", s.bqp_out, "also write the BQP instance")
        .add("samples", s.samples, "feasible samples kept by randomized rounding")
        .flag("timings", s.timings, "include wall-clock times in the report")
        .flag("brute-force", s.brute_force, "also solve exactly by enumeration");

    auto* exporter = app.add_subcommand("export", "write LP, SDPA or BQP files");
    const json exp_cfg = config_for(cfg, "export");
    OptionBinder eb(exporter, exp_cfg);
    add_problem_options(eb, s);
    eb.add("lp", s.lp, "CPLEX LP file of the linearized model ('-' for stdout)")
        .add("sdpa", s.sdpa, "SDPA sparse file of the lifted relaxation ('-' for stdout)")
        .add("bqp-out", s.bqp_out, "BQP instance JSON ('-' for stdout)");

    auto* simulate = app.add_subcommand("simulate", "synthetic experiments");
    simulate->require_subcommand(1);
    simulate->fallthrough();
    const json sim_cfg = config_for(cfg, "simulate");
    auto* sim_data = simulate->add_subcommand("dataset", "sample a synthetic price history");
    OptionBinder(sim_data, sim_cfg)
        .add("products", s.products, "number of products")
        .add("samples", s.rows, "number of rows")
        .add("noise", s.noise, "relative noise level")
        .add("seed", s.seed, "random seed")
        .add("out", s.out, "CSV to write (default: stdout)")
        .add("truth-out", s.truth_out, "also write the true model JSON")
        .flag("sparse", s.sparse, "sparse cross-price structure");
    auto* sim_scale = simulate->add_subcommand("scalability", "solve time and certificate versus size");
    OptionBinder sb(sim_scale, sim_cfg);
    sb.add("sizes", s.sizes, "comma-separated product counts")
        .add("seeds", s.seeds, "comma-separated seeds")
        .add("tol", s.tol, "SDP stopping tolerance")
        .add("t-search", s.t_search, "candidate budget of deterministic rounding")
        .add("max-restarts", s.max_restarts, "restarts of randomized rounding")
        .add("out", s.out, "CSV to write (default: stdout)");
    auto* sim_est = simulate->add_subcommand("estimation", "effect of estimation error on optimized profit");
    OptionBinder(sim_est, sim_cfg)
        .add("products", s.products, "number of products")
        .add("samples", s.rows, "rows per training set")
        .add("noise", s.noise, "relative noise level")
        .add("trials", s.trials, "number of trials")
        .add("seed", s.seed, "random seed")
        .add("method", s.method, "ols | lsomp")
        .add("forced", s.forced, "lsomp: number of top-revenue products fitted first")
        .add("k", s.k, "lsomp: atoms added after the forced products")
        .add("tol", s.tol, "SDP stopping tolerance")
        .add("t-search", s.t_search, "candidate budget of deterministic rounding")
        .add("max-restarts", s.max_restarts, "restarts of randomized rounding")
        .add("out", s.out, "CSV to write (default: stdout)")
        .flag("sparse", s.sparse, "sparse ground truth")
        .flag("timings", s.timings, "add timing columns");

    try {
      std::vector<std::string> reversed(args.rbegin(), args.rend());
      app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      report_error(err, kExitUsage, "Usage", e.what());
      return kExitUsage;
    }

    if (fit->parsed()) return cmd_fit(s, out);
    if (optimize->parsed()) return cmd_optimize(s, out, err);
    if (exporter->parsed()) return cmd_export(s, out);
    if (sim_data->parsed()) return cmd_simulate_dataset(s, out);
    if (sim_scale->parsed()) return cmd_simulate_scalability(s, out);
    if (sim_est->parsed()) return cmd_simulate_estimation(s, out);
    report_error(err, kExitUsage, "Usage", "no subcommand");
    return kExitUsage;
  } catch (const CommandFailure& e) {
    report_error(err, e.exit, e.code, e.what());
    return e.exit;
  } catch (const SdpSolveError& e) {
    report_error(err, kExitSdp, std::string(to_string(e.status())), e.what());
    return kExitSdp;
  } catch (const Error& e) {
    const int exit = exit_code_for(e.code());
    report_error(err, exit, std::string(to_string(e.code())), e.what());
    return exit;
  } catch (const std::exception& e) {
    report_error(err, kExitUsage, "Internal", e.what());
    return kExitUsage;
  }
}

}  // namespace priceopt
