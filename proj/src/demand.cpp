#include "priceopt/demand.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "priceopt/error.hpp"

namespace priceopt {

namespace {

double identity(double x) { return x; }
double square(double x) { return x * x; }
double reciprocal(double x) { return 1.0 / x; }
double natural_log(double x) { return std::log(x); }
double square_root(double x) { return std::sqrt(x); }

constexpr double kMaxCondition = 1e12;
constexpr double kOmpStopCorrelation = 1e-10;

struct LeastSquares {
  Eigen::VectorXd coef;
  double condition = 1.0;
  bool singular = false;
};

// Rank-revealing QR on a column-equilibrated copy of X.
LeastSquares least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  LeastSquares out;
  const Eigen::Index cols = X.cols();
  if (cols == 0) {
    out.coef.resize(0);
    return out;
  }
  Eigen::VectorXd scale = X.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (scale(j) == 0.0) {
      scale(j) = 1.0;
      out.singular = true;
    }
  }
  const Eigen::MatrixXd scaled = X * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  const auto& R = qr.matrixR();
  const Eigen::Index diag = std::min(X.rows(), cols);
  const double largest = std::abs(R(0, 0));
  const double smallest = diag > 0 ? std::abs(R(diag - 1, diag - 1)) : 0.0;
  out.condition = smallest > 0.0 ? largest / smallest : std::numeric_limits<double>::infinity();
  if (X.rows() < cols || qr.rank() < cols || out.condition > kMaxCondition) out.singular = true;
  out.coef = qr.solve(y).cwiseQuotient(scale);
  return out;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& cols) {
  return X(Eigen::all, cols);
}

StepCoefficients empty_step(std::size_t products, std::size_t transforms, std::size_t externals) {
  StepCoefficients s;
  const auto M = static_cast<Eigen::Index>(products);
  const auto MD = static_cast<Eigen::Index>(products * transforms);
  const auto E = static_cast<Eigen::Index>(externals);
  s.alpha = Eigen::VectorXd::Zero(M);
  s.beta = Eigen::MatrixXd::Zero(M, MD);
  s.gamma = Eigen::MatrixXd::Zero(M, E);
  s.beta_active = BoolMatrix::Constant(M, MD, false);
  s.gamma_active = BoolMatrix::Constant(M, E, false);
  return s;
}

// Scatters a regression over the design columns `support` into row m.
void store_row(StepCoefficients& step, std::size_t m, const std::vector<Eigen::Index>& support,
               const Eigen::VectorXd& coef, std::size_t products, std::size_t transforms) {
  const auto price_cols = static_cast<Eigen::Index>(products * transforms);
  const auto row = static_cast<Eigen::Index>(m);
  for (std::size_t i = 0; i < support.size(); ++i) {
    const Eigen::Index col = support[i];
    if (col == 0) {
      step.alpha(row) = coef(static_cast<Eigen::Index>(i));
    } else if (col <= price_cols) {
      step.beta(row, col - 1) = coef(static_cast<Eigen::Index>(i));
      step.beta_active(row, col - 1) = true;
    } else {
      step.gamma(row, col - 1 - price_cols) = coef(static_cast<Eigen::Index>(i));
      step.gamma_active(row, col - 1 - price_cols) = true;
    }
  }
}

// Greedy OMP selection on `target`. The refit at each step uses `base` plus
// the atoms selected so far. Returns the selected atoms in selection order.
std::vector<Eigen::Index> omp_select(const Eigen::MatrixXd& X, const Eigen::VectorXd& target,
                                     const std::vector<Eigen::Index>& base,
                                     const std::vector<Eigen::Index>& candidates,
                                     std::size_t k) {
  std::vector<Eigen::Index> support = base;
  std::vector<Eigen::Index> selected;
  std::vector<bool> taken(static_cast<std::size_t>(X.cols()), false);
  for (Eigen::Index c : base) taken[static_cast<std::size_t>(c)] = true;

  // Candidate norms after removing the mean (the bias is always in the refit).
  Eigen::VectorXd norms(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double mean = X.col(j).mean();
    norms(j) = (X.col(j).array() - mean).matrix().norm();
  }
  const double target_scale = std::max(target.norm(), 1e-300);

  Eigen::VectorXd residual = target;
  if (!support.empty()) {
    const auto fit = least_squares(select_columns(X, support), target);
    residual = target - select_columns(X, support) * fit.coef;
  }
  while (selected.size() < k) {
    const double res_norm = residual.norm();
    if (res_norm <= 1e-14 * target_scale) break;
    Eigen::Index best = -1;
    double best_corr = 0.0;
    for (Eigen::Index j : candidates) {
      if (taken[static_cast<std::size_t>(j)]) continue;
      if (norms(j) <= 1e-12 * std::max(1.0, X.col(j).norm())) continue;
      const double corr = std::abs(X.col(j).dot(residual)) / (norms(j) * res_norm);
      if (corr > best_corr) {  // strict: ties keep the lowest column
        best_corr = corr;
        best = j;
      }
    }
    if (best < 0 || best_corr < kOmpStopCorrelation) break;
    taken[static_cast<std::size_t>(best)] = true;
    support.push_back(best);
    selected.push_back(best);
    const Eigen::MatrixXd Xs = select_columns(X, support);
    const auto fit = least_squares(Xs, target);
    residual = target - Xs * fit.coef;
  }
  return selected;
}

template <typename PerStep>
DemandModel fit_by_step(const Dataset& data, const FeatureBank& bank, PerStep&& per_step) {
  data.validate();
  if (data.external_dim() != bank.external_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "dataset has " + std::to_string(data.external_dim()) +
                    " external features but the feature bank expects " +
                    std::to_string(bank.external_dim()));
  }
  const std::size_t T = data.horizon();
  DemandModel model(bank, data.products(), T);
  for (std::size_t t = 0; t < T; ++t) {
    const Dataset sub = data.for_step(t);
    if (sub.size() == 0) {
      throw Error(ErrorCode::InvalidArgument, "no samples for time step " + std::to_string(t + 1));
    }
    const Eigen::MatrixXd X = design_matrix(sub, bank);
    StepCoefficients step =
        empty_step(data.products(), bank.transform_count(), bank.external_dim());
    for (std::size_t m = 0; m < data.products(); ++m) {
      per_step(X, sub.quantities.col(static_cast<Eigen::Index>(m)).eval(), step, m);
    }
    model.step(t) = std::move(step);
  }
  return model;
}

std::vector<Eigen::Index> all_columns(Eigen::Index cols) {
  std::vector<Eigen::Index> v(static_cast<std::size_t>(cols));
  std::iota(v.begin(), v.end(), Eigen::Index{0});
  return v;
}

void throw_singular(std::size_t m, double condition) {
  std::ostringstream os;
  os << "design for product " << (m + 1) << " is numerically singular (condition estimate "
     << condition << ")";
  throw Error(ErrorCode::SingularDesign, os.str());
}

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + p - 1, p);
  aug.topRows(n) = X;
  const double s = std::sqrt(lambda);
  for (Eigen::Index j = 1; j < p; ++j) aug(n + j - 1, j) = s;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + p - 1);
  rhs.head(n) = y;
  return aug.colPivHouseholderQr().solve(rhs);
}

}  // namespace

PriceTransform PriceTransform::by_name(const std::string& name) {
  if (name == "x") return {"x", &identity, false};
  if (name == "x^2") return {"x^2", &square, false};
  if (name == "1/x") return {"1/x", &reciprocal, true};
  if (name == "log") return {"log", &natural_log, true};
  if (name == "sqrt") return {"sqrt", &square_root, true};
  throw Error(ErrorCode::InvalidArgument, "unknown price transform '" + name + "'");
}

FeatureBank::FeatureBank(std::vector<PriceTransform> transforms, std::size_t external_dim)
    : transforms_(std::move(transforms)), external_dim_(external_dim) {
  if (transforms_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "feature bank needs at least one price transform");
  }
  std::set<std::string> seen;
  for (const auto& t : transforms_) {
    if (!seen.insert(t.name).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate price transform '" + t.name + "'");
    }
  }
}

FeatureBank FeatureBank::standard(std::size_t external_dim) {
  return from_names({"x", "x^2", "1/x"}, external_dim);
}

FeatureBank FeatureBank::from_names(const std::vector<std::string>& names,
                                    std::size_t external_dim) {
  std::vector<PriceTransform> transforms;
  transforms.reserve(names.size());
  for (const auto& n : names) transforms.push_back(PriceTransform::by_name(n));
  return FeatureBank(std::move(transforms), external_dim);
}

std::vector<std::string> FeatureBank::names() const {
  std::vector<std::string> out;
  for (const auto& t : transforms_) out.push_back(t.name);
  return out;
}

double FeatureBank::apply(std::size_t d, double price) const {
  const auto& t = transforms_.at(d);
  if (t.requires_positive && !(price > 0.0)) {
    throw Error(ErrorCode::NonPositivePrice,
                "transform '" + t.name + "' needs a positive price, got " + std::to_string(price));
  }
  return t.fn(price);
}

void FeatureBank::apply_all(double price, double* out) const {
  for (std::size_t d = 0; d < transforms_.size(); ++d) out[d] = apply(d, price);
}

std::size_t Dataset::horizon() const {
  if (time_steps.empty()) return 1;
  return static_cast<std::size_t>(*std::max_element(time_steps.begin(), time_steps.end()));
}

void Dataset::validate() const {
  const auto N = prices.rows();
  if (N == 0) throw Error(ErrorCode::InvalidArgument, "dataset is empty");
  if (quantities.rows() != N || externals.rows() != N) {
    throw Error(ErrorCode::DimensionMismatch, "dataset blocks disagree on the sample count");
  }
  if (quantities.cols() != prices.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "price and quantity columns disagree on M");
  }
  if (!time_steps.empty()) {
    if (static_cast<Eigen::Index>(time_steps.size()) != N) {
      throw Error(ErrorCode::DimensionMismatch, "time-step tags do not cover every sample");
    }
    for (int t : time_steps) {
      if (t < 1) throw Error(ErrorCode::InvalidArgument, "time-step tags are 1-based");
    }
  }
  if (!dates.empty() && static_cast<Eigen::Index>(dates.size()) != N) {
    throw Error(ErrorCode::DimensionMismatch, "dates do not cover every sample");
  }
  if (!prices.allFinite() || !quantities.allFinite() || !externals.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "dataset contains non-finite values");
  }
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index m = 0; m < prices.cols(); ++m) {
      if (!(prices(i, m) > 0.0)) {
        throw Error(ErrorCode::NonPositivePrice, "price p_" + std::to_string(m + 1) + " in row " +
                                                     std::to_string(i + 1) + " is not positive");
      }
    }
  }
}

Dataset Dataset::for_step(std::size_t step) const {
  if (time_steps.empty()) return *this;
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < time_steps.size(); ++i) {
    if (static_cast<std::size_t>(time_steps[i]) == step + 1) rows.push_back(static_cast<Eigen::Index>(i));
  }
  Dataset out;
  out.prices = prices(rows, Eigen::all);
  out.externals = externals(rows, Eigen::all);
  out.quantities = quantities(rows, Eigen::all);
  return out;
}

DemandModel::DemandModel(FeatureBank bank, std::size_t products, std::size_t horizon)
    : bank_(std::move(bank)), products_(products) {
  if (horizon == 0) throw Error(ErrorCode::InvalidArgument, "horizon must be at least 1");
  steps_.assign(horizon, empty_step(products, bank_.transform_count(), bank_.external_dim()));
}

std::size_t DemandModel::support_size(std::size_t t, std::size_t m) const {
  const auto& s = steps_.at(t);
  const auto row = static_cast<Eigen::Index>(m);
  return static_cast<std::size_t>(s.beta_active.row(row).count() + s.gamma_active.row(row).count());
}

void DemandModel::validate() const {
  const auto M = static_cast<Eigen::Index>(products_);
  const auto MD = static_cast<Eigen::Index>(products_ * transform_count());
  const auto E = static_cast<Eigen::Index>(external_dim());
  for (const auto& s : steps_) {
    if (s.alpha.size() != M || s.beta.rows() != M || s.beta.cols() != MD ||
        s.gamma.rows() != M || s.gamma.cols() != E || s.beta_active.rows() != M ||
        s.beta_active.cols() != MD || s.gamma_active.rows() != M || s.gamma_active.cols() != E) {
      throw Error(ErrorCode::DimensionMismatch, "coefficient tensors have inconsistent shapes");
    }
    for (Eigen::Index i = 0; i < M; ++i) {
      for (Eigen::Index j = 0; j < MD; ++j) {
        if (!s.beta_active(i, j) && s.beta(i, j) != 0.0) {
          throw Error(ErrorCode::InvalidArgument, "masked beta entry is not zero");
        }
      }
      for (Eigen::Index j = 0; j < E; ++j) {
        if (!s.gamma_active(i, j) && s.gamma(i, j) != 0.0) {
          throw Error(ErrorCode::InvalidArgument, "masked gamma entry is not zero");
        }
      }
    }
  }
}

Eigen::MatrixXd design_matrix(const Dataset& data, const FeatureBank& bank) {
  if (data.size() == 0) throw Error(ErrorCode::InvalidArgument, "dataset is empty");
  if (data.external_dim() != bank.external_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "external feature count does not match the bank");
  }
  const std::size_t M = data.products();
  const std::size_t D = bank.transform_count();
  const std::size_t E = bank.external_dim();
  const auto N = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd X(N, static_cast<Eigen::Index>(1 + M * D + E));
  std::vector<double> buf(D);
  for (Eigen::Index n = 0; n < N; ++n) {
    X(n, 0) = 1.0;
    for (std::size_t m = 0; m < M; ++m) {
      bank.apply_all(data.prices(n, static_cast<Eigen::Index>(m)), buf.data());
      for (std::size_t d = 0; d < D; ++d) {
        X(n, static_cast<Eigen::Index>(price_column(m, d, D))) = buf[d];
      }
    }
    for (std::size_t d = 0; d < E; ++d) {
      X(n, static_cast<Eigen::Index>(external_column(d, M, D))) =
          data.externals(n, static_cast<Eigen::Index>(d));
    }
  }
  return X;
}

DemandModel fit_ols(const Dataset& data, const FeatureBank& bank,
                    std::optional<double> ridge_fallback) {
  const std::size_t M = data.products();
  const std::size_t D = bank.transform_count();
  return fit_by_step(data, bank, [&](const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     StepCoefficients& step, std::size_t m) {
    const auto cols = all_columns(X.cols());
    auto fit = least_squares(X, y);
    if (fit.singular) {
      if (!ridge_fallback) throw_singular(m, fit.condition);
      fit.coef = ridge_solve(X, y, *ridge_fallback);
    }
    store_row(step, m, cols, fit.coef, M, D);
  });
}

DemandModel fit_ridge(const Dataset& data, const FeatureBank& bank, double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "ridge strength must be >= 0");
  if (lambda == 0.0) return fit_ols(data, bank);
  const std::size_t M = data.products();
  const std::size_t D = bank.transform_count();
  return fit_by_step(data, bank, [&](const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     StepCoefficients& step, std::size_t m) {
    store_row(step, m, all_columns(X.cols()), ridge_solve(X, y, lambda), M, D);
  });
}

DemandModel fit_omp(const Dataset& data, const FeatureBank& bank, std::size_t k_max) {
  const std::size_t M = data.products();
  const std::size_t D = bank.transform_count();
  const std::size_t atoms = M * D + bank.external_dim();
  if (k_max < 1 || k_max > atoms) {
    throw Error(ErrorCode::InvalidArgument, "k_max must lie in [1, " + std::to_string(atoms) + "]");
  }
  return fit_by_step(data, bank, [&](const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     StepCoefficients& step, std::size_t m) {
    std::vector<Eigen::Index> candidates = all_columns(X.cols());
    candidates.erase(candidates.begin());
    std::vector<Eigen::Index> support{0};
    const auto selected = omp_select(X, y, support, candidates, k_max);
    support.insert(support.end(), selected.begin(), selected.end());
    std::sort(support.begin(), support.end());
    const auto fit = least_squares(select_columns(X, support), y);
    store_row(step, m, support, fit.coef, M, D);
  });
}

DemandModel fit_ls_omp(const Dataset& data, const FeatureBank& bank,
                       const std::vector<std::size_t>& forced_products, std::size_t k_extra) {
  const std::size_t M = data.products();
  const std::size_t D = bank.transform_count();
  std::vector<Eigen::Index> stage1{0};
  for (std::size_t p : forced_products) {
    if (p >= M) {
      throw Error(ErrorCode::InvalidArgument, "forced product " + std::to_string(p + 1) +
                                                  " exceeds M=" + std::to_string(M));
    }
    for (std::size_t d = 0; d < D; ++d) {
      stage1.push_back(static_cast<Eigen::Index>(price_column(p, d, D)));
    }
  }
  std::sort(stage1.begin(), stage1.end());
  stage1.erase(std::unique(stage1.begin(), stage1.end()), stage1.end());

  return fit_by_step(data, bank, [&](const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     StepCoefficients& step, std::size_t m) {
    const Eigen::MatrixXd X1 = select_columns(X, stage1);
    const auto first = least_squares(X1, y);
    if (first.singular) throw_singular(m, first.condition);
    const Eigen::VectorXd residual = y - X1 * first.coef;

    std::vector<Eigen::Index> candidates;
    for (Eigen::Index j = 1; j < X.cols(); ++j) {
      if (!std::binary_search(stage1.begin(), stage1.end(), j)) candidates.push_back(j);
    }
    const auto extra = omp_select(X, residual, {0}, candidates, k_extra);

    std::vector<Eigen::Index> support = stage1;
    support.insert(support.end(), extra.begin(), extra.end());
    std::sort(support.begin(), support.end());
    const auto joint = least_squares(select_columns(X, support), y);
    if (joint.singular) throw_singular(m, joint.condition);
    store_row(step, m, support, joint.coef, M, D);
  });
}

std::vector<std::size_t> top_revenue_products(const Dataset& data, std::size_t count) {
  const Eigen::VectorXd revenue =
      data.prices.cwiseProduct(data.quantities).colwise().sum().transpose();
  std::vector<std::size_t> order(data.products());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return revenue(static_cast<Eigen::Index>(a)) > revenue(static_cast<Eigen::Index>(b));
  });
  order.resize(std::min(count, order.size()));
  return order;
}

Eigen::VectorXd predict(const DemandModel& model, const Eigen::VectorXd& prices,
                        const Eigen::VectorXd& externals, std::size_t t) {
  const std::size_t M = model.products();
  const std::size_t D = model.transform_count();
  if (static_cast<std::size_t>(prices.size()) != M ||
      static_cast<std::size_t>(externals.size()) != model.external_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "price or external vector has the wrong length");
  }
  if (t >= model.horizon()) {
    throw Error(ErrorCode::DimensionMismatch, "time step " + std::to_string(t + 1) +
                                                  " exceeds the model horizon");
  }
  Eigen::VectorXd features(static_cast<Eigen::Index>(M * D));
  for (std::size_t m = 0; m < M; ++m) {
    model.bank().apply_all(prices(static_cast<Eigen::Index>(m)),
                           features.data() + static_cast<Eigen::Index>(m * D));
  }
  const auto& s = model.step(t);
  return s.alpha + s.beta * features + s.gamma * externals;
}

Eigen::VectorXd relative_errors(const DemandModel& model, const Dataset& data) {
  const std::size_t M = data.products();
  Eigen::VectorXd resid_sq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(M));
  Eigen::VectorXd q_sq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(M));
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto row = static_cast<Eigen::Index>(n);
    const std::size_t t = data.time_steps.empty() ? 0 : static_cast<std::size_t>(data.time_steps[n] - 1);
    const Eigen::VectorXd q_hat =
        predict(model, data.prices.row(row).transpose(), data.externals.row(row).transpose(), t);
    const Eigen::VectorXd q = data.quantities.row(row).transpose();
    resid_sq += (q - q_hat).cwiseAbs2();
    q_sq += q.cwiseAbs2();
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(M));
  for (Eigen::Index m = 0; m < out.size(); ++m) {
    out(m) = q_sq(m) > 0.0 ? std::sqrt(resid_sq(m) / q_sq(m)) : std::sqrt(resid_sq(m));
  }
  return out;
}

}  // namespace priceopt
