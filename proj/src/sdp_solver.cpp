#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "priceopt/sdp.hpp"

namespace priceopt {

namespace {

constexpr double kInfeasibilityCertificateTol = 1e-8;
constexpr double kDivergenceLimit = 1e14;

struct FullEntry {
  Eigen::Index a;
  Eigen::Index b;
  double v;
};

// One constraint row of the internal standard form B • Y + [slack] = rhs.
struct Row {
  std::vector<FullEntry> full;       // both triangles
  std::vector<Eigen::Index> support;  // distinct row indices of `full`
  Eigen::Index slack = -1;            // LP-block index with coefficient 1, if any
  double rhs = 0.0;
};

Row make_row(const SparseSymMatrix& mat, double rhs, Eigen::Index slack) {
  Row row;
  row.rhs = rhs;
  row.slack = slack;
  for (const auto& e : mat.entries()) {
    const auto a = static_cast<Eigen::Index>(e.row);
    const auto b = static_cast<Eigen::Index>(e.col);
    row.full.push_back({a, b, e.value});
    if (a != b) row.full.push_back({b, a, e.value});
    row.support.push_back(a);
    row.support.push_back(b);
  }
  std::sort(row.support.begin(), row.support.end());
  row.support.erase(std::unique(row.support.begin(), row.support.end()), row.support.end());
  return row;
}

double dot_full(const Row& row, const Eigen::MatrixXd& G) {
  double s = 0.0;
  for (const auto& e : row.full) s += e.v * G(e.a, e.b);
  return s;
}

// sum_i y_i B_i on the dense block.
Eigen::MatrixXd adjoint_dense(const std::vector<Row>& rows, const Eigen::VectorXd& y, Eigen::Index n) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double yi = y(static_cast<Eigen::Index>(i));
    if (yi == 0.0) continue;
    for (const auto& e : rows[i].full) out(e.a, e.b) += yi * e.v;
  }
  return out;
}

Eigen::VectorXd adjoint_lp(const std::vector<Row>& rows, const Eigen::VectorXd& y, Eigen::Index p) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].slack >= 0) out(rows[i].slack) += y(static_cast<Eigen::Index>(i));
  }
  return out;
}

// HKM Schur complement M_ij = tr(B_i X B_j Z^{-1}) + slack terms. Column j is
// built entry-wise from the sparse supports or through the dense product
// X B_j Z^{-1}, whichever is cheaper.
Eigen::MatrixXd schur_complement(const std::vector<Row>& rows, const Eigen::MatrixXd& X,
                                 const Eigen::MatrixXd& Zinv, const Eigen::VectorXd& s,
                                 const Eigen::VectorXd& w) {
  const auto m = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index n = X.rows();
  double total_full = 0.0;
  for (const auto& r : rows) total_full += static_cast<double>(r.full.size());

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Row& rj = rows[static_cast<std::size_t>(j)];
    if (rj.full.empty()) continue;
    const double entry_cost = static_cast<double>(rj.full.size()) * total_full;
    const double dense_cost =
        static_cast<double>(n) * static_cast<double>(n) * static_cast<double>(rj.support.size()) +
        total_full;
    if (entry_cost <= dense_cost) {
      for (Eigen::Index i = j; i < m; ++i) {
        const Row& ri = rows[static_cast<std::size_t>(i)];
        double sum = 0.0;
        for (const auto& ei : ri.full) {
          for (const auto& ej : rj.full) sum += ei.v * ej.v * X(ei.b, ej.a) * Zinv(ej.b, ei.a);
        }
        M(i, j) = sum;
        M(j, i) = sum;
      }
    } else {
      const auto k = static_cast<Eigen::Index>(rj.support.size());
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, n);  // (B_j Z^{-1}) restricted to support rows
      for (const auto& e : rj.full) {
        const auto pos = std::lower_bound(rj.support.begin(), rj.support.end(), e.a) - rj.support.begin();
        T.row(pos) += e.v * Zinv.row(e.b);
      }
      const Eigen::MatrixXd G = X(Eigen::all, rj.support) * T;  // X B_j Z^{-1}
      for (Eigen::Index i = j; i < m; ++i) {
        const Row& ri = rows[static_cast<std::size_t>(i)];
        double sum = 0.0;
        for (const auto& e : ri.full) sum += e.v * G(e.b, e.a);
        M(i, j) = sum;
        M(j, i) = sum;
      }
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index si = rows[static_cast<std::size_t>(i)].slack;
    if (si >= 0) M(i, i) += s(si) / w(si);
  }
  return M;
}

// Largest alpha with X + alpha dX still PSD (infinity if unbounded).
bool nearly_singular(const Eigen::LLT<Eigen::MatrixXd>& chol, const Eigen::MatrixXd& M) {
  if (M.rows() == 0) return false;
  const double pivot = chol.matrixLLT().diagonal().cwiseAbs().minCoeff();
  return pivot * pivot <= 1e-13 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
}

double max_psd_step(const Eigen::LLT<Eigen::MatrixXd>& chol, const Eigen::MatrixXd& dX) {
  Eigen::MatrixXd W = chol.matrixL().solve(dX);
  W = chol.matrixL().solve(W.transpose()).eval();
  W = 0.5 * (W + W.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(W, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  return lo >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lo;
}

double max_ratio_step(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) {
  double step = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (dx(i) < 0.0) step = std::min(step, -x(i) / dx(i));
  }
  return step;
}

bool is_positive_definite(const Eigen::MatrixXd& X) {
  Eigen::LLT<Eigen::MatrixXd> llt(X);
  return llt.info() == Eigen::Success;
}

// Fraction-to-boundary step, confirmed by a Cholesky test with bisection.
double safe_step(const Eigen::MatrixXd& X, const Eigen::LLT<Eigen::MatrixXd>& chol,
                 const Eigen::MatrixXd& dX, const Eigen::VectorXd& x, const Eigen::VectorXd& dx,
                 double fraction, int max_halvings) {
  const double boundary = std::min(max_psd_step(chol, dX), max_ratio_step(x, dx));
  double alpha = std::min(1.0, fraction * boundary);
  for (int h = 0; h < max_halvings; ++h) {
    if (is_positive_definite(X + alpha * dX) && ((x + alpha * dx).array() > 0.0).all()) return alpha;
    alpha *= 0.5;
  }
  return 0.0;
}

struct Presolve {
  bool inconsistent = false;
  std::vector<std::size_t> keep;
  std::vector<std::size_t> dropped;
};

// Finds equality rows that are linear combinations of others. Inequality rows
// own a private slack column, so they can never be dependent.
Presolve presolve_equalities(const SdpProblem& prob) {
  Presolve out;
  const std::size_t m = prob.equalities.size();
  std::vector<std::pair<std::size_t, std::size_t>> keys;
  for (const auto& c : prob.equalities) {
    for (const auto& e : c.matrix.entries()) keys.emplace_back(e.row, e.col);
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(keys.size()),
                                            static_cast<Eigen::Index>(m));
  Eigen::VectorXd b(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    b(static_cast<Eigen::Index>(j)) = prob.equalities[j].rhs;
    for (const auto& e : prob.equalities[j].matrix.entries()) {
      const auto pos = std::lower_bound(keys.begin(), keys.end(), std::make_pair(e.row, e.col)) - keys.begin();
      E(pos, static_cast<Eigen::Index>(j)) = e.value;
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(E);
  qr.setThreshold(1e-10);
  const Eigen::Index rank = qr.rank();
  const auto& perm = qr.colsPermutation().indices();
  std::vector<std::size_t> independent;
  for (Eigen::Index i = 0; i < rank; ++i) independent.push_back(static_cast<std::size_t>(perm(i)));
  std::sort(independent.begin(), independent.end());

  std::vector<Eigen::Index> ind_cols(independent.begin(), independent.end());
  const Eigen::MatrixXd basis = E(Eigen::all, ind_cols);
  const Eigen::VectorXd b_basis = b(ind_cols);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> basis_qr(basis);
  for (Eigen::Index i = rank; i < static_cast<Eigen::Index>(m); ++i) {
    const auto j = static_cast<Eigen::Index>(perm(i));
    const Eigen::VectorXd coef = basis_qr.solve(E.col(j));
    const double implied = b_basis.dot(coef);
    const double scale = 1.0 + std::abs(b(j)) + b_basis.cwiseAbs().dot(coef.cwiseAbs());
    if (std::abs(implied - b(j)) > 1e-8 * scale) out.inconsistent = true;
    out.dropped.push_back(static_cast<std::size_t>(j));
  }
  std::sort(out.dropped.begin(), out.dropped.end());
  out.keep = std::move(independent);
  return out;
}

struct IpmOutcome {
  SdpSolution solution;
  bool initial_schur_failure = false;
};

IpmOutcome run_ipm(const SdpProblem& prob, const std::vector<std::size_t>& keep,
                   const SdpOptions& opts) {
  IpmOutcome outcome;
  SdpSolution& sol = outcome.solution;
  const auto n = static_cast<Eigen::Index>(prob.dim);
  const auto p = static_cast<Eigen::Index>(prob.inequalities.size());

  std::vector<Row> rows;
  for (std::size_t j : keep) rows.push_back(make_row(prob.equalities[j].matrix, prob.equalities[j].rhs, -1));
  for (Eigen::Index l = 0; l < p; ++l) {
    const auto& c = prob.inequalities[static_cast<std::size_t>(l)];
    rows.push_back(make_row(c.matrix, c.rhs, l));
  }
  const auto m = static_cast<Eigen::Index>(rows.size());
  const auto n_eq = static_cast<Eigen::Index>(keep.size());
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) b(i) = rows[static_cast<std::size_t>(i)].rhs;

  const Eigen::MatrixXd& A = prob.objective;
  const double normA = A.norm();
  const double tau = 1.0 + (m > 0 ? b.cwiseAbs().maxCoeff() : 0.0);
  const double eta = std::max({1.0, std::sqrt(static_cast<double>(n)), normA});
  const double N = static_cast<double>(n + p);

  Eigen::MatrixXd X = tau * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd Z = eta * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd s = Eigen::VectorXd::Constant(p, tau);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(p, eta);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  auto finish = [&](SdpStatus status, int iterations) {
    sol.status = status;
    sol.iterations = iterations;
    sol.Y = X;
    sol.duals.equality = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(prob.equalities.size()));
    for (Eigen::Index i = 0; i < n_eq; ++i) {
      sol.duals.equality(static_cast<Eigen::Index>(keep[static_cast<std::size_t>(i)])) = y(i);
    }
    sol.duals.inequality = y.tail(p);
    sol.duals.slack = Z;
    sol.inequality_slack.resize(p);
    for (Eigen::Index l = 0; l < p; ++l) {
      sol.inequality_slack(l) = prob.inequalities[static_cast<std::size_t>(l)].rhs -
                                prob.inequalities[static_cast<std::size_t>(l)].matrix.dot(X);
    }
    sol.primal_objective = A.cwiseProduct(X).sum();
    sol.dual_objective = b.dot(y);
    sol.residuals = residuals(prob, sol.Y, sol.duals);
  };

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    // Residuals of the current iterate.
    Eigen::VectorXd BX(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Row& r = rows[static_cast<std::size_t>(i)];
      BX(i) = dot_full(r, X) + (r.slack >= 0 ? s(r.slack) : 0.0);
    }
    const Eigen::VectorXd rp = b - BX;
    const Eigen::MatrixXd Rd = adjoint_dense(rows, y, n) - A - Z;
    const Eigen::VectorXd rd_lp = adjoint_lp(rows, y, p) - w;

    const double pobj = A.cwiseProduct(X).sum();
    const double dobj = b.dot(y);
    double pres = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const Row& r = rows[static_cast<std::size_t>(i)];
      const double viol = r.slack >= 0 ? std::max(0.0, BX(i) - s(r.slack) - b(i)) : std::abs(rp(i));
      pres = std::max(pres, viol / (1.0 + std::abs(b(i))));
    }
    const double negative_mu = p > 0 ? y.tail(p).cwiseMin(0.0).norm() : 0.0;
    const double dres = std::sqrt(Rd.squaredNorm() + rd_lp.squaredNorm() + negative_mu * negative_mu) /
                        (1.0 + normA);
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    sol.gap_history.push_back(gap);
    if (opts.on_iteration) opts.on_iteration(iter, pres, dres, gap);
    if (std::max({pres, dres, gap}) <= opts.tol) {
      finish(SdpStatus::Optimal, iter);
      return outcome;
    }

    // Farkas-type certificates from diverging iterates.
    if (dobj < 0.0) {
      const double cert = std::sqrt((A + Rd).squaredNorm() + rd_lp.squaredNorm()) / -dobj;
      if (cert < kInfeasibilityCertificateTol || -dobj > kDivergenceLimit * (1.0 + std::abs(pobj))) {
        finish(SdpStatus::Infeasible, iter);
        return outcome;
      }
    }
    if (pobj > 0.0) {
      const double cert = (BX).norm() / pobj;
      if (cert < kInfeasibilityCertificateTol && X.norm() > 1e8 * tau) {
        finish(SdpStatus::Unbounded, iter);
        return outcome;
      }
    }
    if (!X.allFinite() || !Z.allFinite() || X.norm() > kDivergenceLimit || Z.norm() > kDivergenceLimit) {
      finish(SdpStatus::NumericalFailure, iter);
      return outcome;
    }

    const double mu = (X.cwiseProduct(Z).sum() + s.dot(w)) / N;

    Eigen::LLT<Eigen::MatrixXd> z_chol(Z);
    Eigen::LLT<Eigen::MatrixXd> x_chol(X);
    if (z_chol.info() != Eigen::Success || x_chol.info() != Eigen::Success) {
      finish(SdpStatus::NumericalFailure, iter);
      return outcome;
    }
    const Eigen::MatrixXd Zinv = z_chol.solve(Eigen::MatrixXd::Identity(n, n));

    Eigen::MatrixXd M = schur_complement(rows, X, Zinv, s, w);
    Eigen::LLT<Eigen::MatrixXd> m_chol(M);
    if (iter == 0 && (m_chol.info() != Eigen::Success || nearly_singular(m_chol, M))) {
      // Dependent equality rows; the caller presolves and retries.
      outcome.initial_schur_failure = true;
      finish(SdpStatus::NumericalFailure, iter);
      return outcome;
    }
    if (m_chol.info() != Eigen::Success) {
      const double base = std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
      bool ok = false;
      for (double boost : {1e-12, 1e-10, 1e-8}) {
        M.diagonal().array() += boost * base;
        m_chol.compute(M);
        if (m_chol.info() == Eigen::Success) {
          ok = true;
          break;
        }
      }
      if (!ok) {
        finish(SdpStatus::NumericalFailure, iter);
        return outcome;
      }
    }

    struct Direction {
      Eigen::MatrixXd dX, dZ;
      Eigen::VectorXd dy, ds, dw;
    };
    auto direction = [&](const Eigen::MatrixXd& Rc, const Eigen::VectorXd& rc) {
      Direction d;
      const Eigen::MatrixXd G = (Rc - X * Rd) * Zinv;
      Eigen::VectorXd rhs(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        const Row& r = rows[static_cast<std::size_t>(i)];
        rhs(i) = dot_full(r, G) - rp(i);
        if (r.slack >= 0) {
          const Eigen::Index l = r.slack;
          rhs(i) += (rc(l) - s(l) * rd_lp(l)) / w(l);
        }
      }
      d.dy = m_chol.solve(rhs);
      d.dZ = adjoint_dense(rows, d.dy, n) + Rd;
      d.dX = (Rc - X * d.dZ) * Zinv;
      d.dX = 0.5 * (d.dX + d.dX.transpose()).eval();
      d.dw = adjoint_lp(rows, d.dy, p) + rd_lp;
      d.ds = (rc - s.cwiseProduct(d.dw)).cwiseQuotient(w);
      return d;
    };

    // Predictor.
    const Eigen::MatrixXd XZ = X * Z;
    const Direction aff = direction(-XZ, -s.cwiseProduct(w));
    const double ap_aff = std::min(1.0, std::min(max_psd_step(x_chol, aff.dX), max_ratio_step(s, aff.ds)));
    const double ad_aff = std::min(1.0, std::min(max_psd_step(z_chol, aff.dZ), max_ratio_step(w, aff.dw)));
    const double mu_aff = ((X + ap_aff * aff.dX).cwiseProduct(Z + ad_aff * aff.dZ).sum() +
                           (s + ap_aff * aff.ds).dot(w + ad_aff * aff.dw)) / N;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // Corrector.
    Eigen::MatrixXd Rc = -XZ - aff.dX * aff.dZ;
    Rc.diagonal().array() += sigma * mu;
    Eigen::VectorXd rc = (-s.cwiseProduct(w) - aff.ds.cwiseProduct(aff.dw)).array() + sigma * mu;
    const Direction dir = direction(Rc, rc);

    const double ap = safe_step(X, x_chol, dir.dX, s, dir.ds, opts.step_fraction, opts.max_halvings);
    const double ad = safe_step(Z, z_chol, dir.dZ, w, dir.dw, opts.step_fraction, opts.max_halvings);
    if (ap == 0.0 && ad == 0.0) {
      finish(SdpStatus::NumericalFailure, iter);
      return outcome;
    }
    X += ap * dir.dX;
    s += ap * dir.ds;
    y += ad * dir.dy;
    Z += ad * dir.dZ;
    w += ad * dir.dw;
    X = 0.5 * (X + X.transpose()).eval();
    Z = 0.5 * (Z + Z.transpose()).eval();
  }
  finish(SdpStatus::IterLimit, opts.max_iter);
  return outcome;
}

}  // namespace

void SparseSymMatrix::add(std::size_t i, std::size_t j, double v) {
  if (i > j) std::swap(i, j);
  entries_.push_back({i, j, v});
}

void SparseSymMatrix::compress() {
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Entry> merged;
  for (const auto& e : entries_) {
    if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col) {
      merged.back().value += e.value;
    } else {
      merged.push_back(e);
    }
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(), [](const Entry& e) { return e.value == 0.0; }),
               merged.end());
  entries_ = std::move(merged);
}

double SparseSymMatrix::dot(const Eigen::MatrixXd& G) const {
  double s = 0.0;
  for (const auto& e : entries_) {
    const auto a = static_cast<Eigen::Index>(e.row);
    const auto b = static_cast<Eigen::Index>(e.col);
    s += a == b ? e.value * G(a, a) : e.value * (G(a, b) + G(b, a));
  }
  return s;
}

void SparseSymMatrix::add_to(Eigen::MatrixXd& G, double s) const {
  for (const auto& e : entries_) {
    const auto a = static_cast<Eigen::Index>(e.row);
    const auto b = static_cast<Eigen::Index>(e.col);
    G(a, b) += s * e.value;
    if (a != b) G(b, a) += s * e.value;
  }
}

Eigen::MatrixXd SparseSymMatrix::dense(std::size_t dim) const {
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  add_to(out, 1.0);
  return out;
}

double SparseSymMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& e : entries_) s += (e.row == e.col ? 1.0 : 2.0) * e.value * e.value;
  return std::sqrt(s);
}

void SdpProblem::validate() const {
  const auto n = static_cast<Eigen::Index>(dim);
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "SDP dimension must be positive");
  if (objective.rows() != n || objective.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "objective matrix has the wrong shape");
  }
  if (!objective.allFinite()) throw Error(ErrorCode::InvalidArgument, "objective is not finite");
  if ((objective - objective.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + objective.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::InvalidArgument, "objective matrix is not symmetric");
  }
  if (constraint_count() == 0) {
    throw Error(ErrorCode::InvalidArgument, "SDP needs at least one constraint");
  }
  auto check = [&](const std::vector<SdpConstraint>& list) {
    for (const auto& c : list) {
      if (!std::isfinite(c.rhs)) throw Error(ErrorCode::InvalidArgument, "constraint rhs is not finite");
      for (const auto& e : c.matrix.entries()) {
        if (e.row > e.col || e.col >= dim || !std::isfinite(e.value)) {
          throw Error(ErrorCode::DimensionMismatch, "constraint entry out of range");
        }
      }
    }
  };
  check(equalities);
  check(inequalities);
}

std::string_view to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::Infeasible: return "Infeasible";
    case SdpStatus::Unbounded: return "Unbounded";
    case SdpStatus::IterLimit: return "IterLimit";
    case SdpStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

double SdpResiduals::max() const { return std::max({primal, dual, gap}); }

SdpResiduals residuals(const SdpProblem& prob, const Eigen::MatrixXd& Y, const SdpDuals& duals) {
  SdpResiduals res;
  const auto n = static_cast<Eigen::Index>(prob.dim);
  if (Y.rows() != n || Y.cols() != n || duals.slack.rows() != n || duals.slack.cols() != n ||
      static_cast<std::size_t>(duals.equality.size()) != prob.equalities.size() ||
      static_cast<std::size_t>(duals.inequality.size()) != prob.inequalities.size()) {
    throw Error(ErrorCode::DimensionMismatch, "residuals: shapes do not match the problem");
  }
  Eigen::MatrixXd dual_matrix = -prob.objective - duals.slack;
  double dobj = 0.0;
  for (std::size_t j = 0; j < prob.equalities.size(); ++j) {
    const auto& c = prob.equalities[j];
    res.primal = std::max(res.primal, std::abs(c.matrix.dot(Y) - c.rhs) / (1.0 + std::abs(c.rhs)));
    const double lambda = duals.equality(static_cast<Eigen::Index>(j));
    c.matrix.add_to(dual_matrix, lambda);
    dobj += lambda * c.rhs;
  }
  double negative = 0.0;
  for (std::size_t l = 0; l < prob.inequalities.size(); ++l) {
    const auto& c = prob.inequalities[l];
    res.primal = std::max(res.primal, std::max(0.0, c.matrix.dot(Y) - c.rhs) / (1.0 + std::abs(c.rhs)));
    const double mu = duals.inequality(static_cast<Eigen::Index>(l));
    c.matrix.add_to(dual_matrix, mu);
    dobj += mu * c.rhs;
    negative += std::min(mu, 0.0) * std::min(mu, 0.0);
  }
  const double pobj = prob.objective.cwiseProduct(Y).sum();
  res.dual = std::sqrt(dual_matrix.squaredNorm() + negative) / (1.0 + prob.objective.norm());
  res.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
  return res;
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

SdpSolution solve(const SdpProblem& prob, const SdpOptions& opts) {
  prob.validate();
  std::vector<std::size_t> keep(prob.equalities.size());
  for (std::size_t j = 0; j < keep.size(); ++j) keep[j] = j;

  IpmOutcome first = run_ipm(prob, keep, opts);
  if (!first.initial_schur_failure) return std::move(first.solution);

  // Singular Schur complement at the start means dependent equality rows.
  const Presolve pre = presolve_equalities(prob);
  if (pre.inconsistent) {
    SdpSolution sol = std::move(first.solution);
    sol.status = SdpStatus::Infeasible;
    sol.dropped_equalities = pre.dropped;
    return sol;
  }
  if (pre.dropped.empty()) return std::move(first.solution);
  IpmOutcome second = run_ipm(prob, pre.keep, opts);
  second.solution.dropped_equalities = pre.dropped;
  return std::move(second.solution);
}

}  // namespace priceopt
