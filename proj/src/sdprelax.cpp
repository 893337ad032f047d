#include "priceopt/sdprelax.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

#include "priceopt/error.hpp"

namespace priceopt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_relaxed_point(const Eigen::MatrixXd& Y, const BqpProblem& prob) {
  const auto dim = static_cast<Eigen::Index>(prob.size() + 1);
  if (Y.rows() != dim || Y.cols() != dim) {
    throw Error(ErrorCode::DimensionMismatch, "relaxed Y must be " + std::to_string(dim) + "x" +
                                                  std::to_string(dim));
  }
}

double first_row(const Eigen::MatrixXd& Y, std::size_t variable) {
  return Y(0, static_cast<Eigen::Index>(LiftedSdp::row_of(variable)));
}

std::size_t block_argmax(const Eigen::MatrixXd& Y, const std::vector<std::size_t>& block) {
  std::size_t best = block.front();
  for (std::size_t i : block) {
    const double v = first_row(Y, i);
    const double b = first_row(Y, best);
    if (v > b || (v == b && i < best)) best = i;
  }
  return best;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t draw_from_block(const std::vector<double>& weights, std::mt19937_64& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) {
    return std::min(weights.size() - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(weights.size())));
  }
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return k;
  }
  for (std::size_t k = weights.size(); k-- > 0;) {
    if (weights[k] > 0.0) return k;
  }
  return 0;
}

// Blocks touched by at least one violated general constraint.
std::vector<std::size_t> violating_blocks(const BqpProblem& prob, const FeasibilityReport& rep,
                                          const std::vector<std::size_t>& block_of) {
  std::vector<char> hit(prob.blocks.size(), 0);
  auto mark = [&](const LinearConstraint& c) {
    for (Eigen::Index i = 0; i < c.coefficients.size(); ++i) {
      if (c.coefficients(i) != 0.0) hit[block_of[static_cast<std::size_t>(i)]] = 1;
    }
  };
  for (std::size_t u : rep.violated_equalities) mark(prob.equalities[u]);
  for (std::size_t v : rep.violated_inequalities) mark(prob.inequalities[v]);
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < hit.size(); ++m) {
    if (hit[m]) out.push_back(m);
  }
  return out;
}

}  // namespace

LiftedSdp lift(const BqpProblem& prob) {
  prob.validate();
  const std::size_t n = prob.size();
  const auto N = static_cast<Eigen::Index>(n);
  const Eigen::MatrixXd Qbar = 0.5 * (prob.Q + prob.Q.transpose());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(N);
  const Eigen::VectorXd linear = prob.r + Qbar * ones;

  LiftedSdp out;
  out.variables = n;
  out.blocks = prob.blocks;
  out.equality_kernel = Eigen::MatrixXd::Zero(N + 1, static_cast<Eigen::Index>(prob.equalities.size()));
  SdpProblem& sdp = out.sdp;
  sdp.dim = n + 1;
  sdp.objective.resize(N + 1, N + 1);
  sdp.objective(0, 0) = ones.dot(Qbar * ones) + 2.0 * prob.r.sum();
  sdp.objective.block(0, 1, 1, N) = linear.transpose();
  sdp.objective.block(1, 0, N, 1) = linear;
  sdp.objective.block(1, 1, N, N) = Qbar;
  sdp.objective *= 0.25;

  for (std::size_t i = 0; i <= n; ++i) {
    SdpConstraint c;
    c.matrix.add(i, i, 1.0);
    c.rhs = 1.0;
    c.label = "diag_" + std::to_string(i);
    sdp.equalities.push_back(std::move(c));
  }
  for (std::size_t m = 0; m < prob.blocks.size(); ++m) {
    const auto& block = prob.blocks[m];
    const double target = 2.0 - static_cast<double>(block.size());
    SdpConstraint sum;
    SdpConstraint square;
    for (std::size_t a = 0; a < block.size(); ++a) {
      sum.matrix.add(0, LiftedSdp::row_of(block[a]), 0.5);
      for (std::size_t b = a; b < block.size(); ++b) {
        square.matrix.add(LiftedSdp::row_of(block[a]), LiftedSdp::row_of(block[b]), 1.0);
      }
    }
    sum.matrix.compress();
    square.matrix.compress();
    sum.rhs = target;
    square.rhs = target * target;
    sum.label = "block_" + std::to_string(m + 1);
    square.label = "block_" + std::to_string(m + 1) + "_sq";
    sdp.equalities.push_back(std::move(sum));
    sdp.equalities.push_back(std::move(square));
  }
  for (std::size_t u = 0; u < prob.equalities.size(); ++u) {
    const auto& lc = prob.equalities[u];
    const double target = 2.0 * lc.rhs - lc.coefficients.sum();
    SdpConstraint sum;
    SdpConstraint square;
    for (std::size_t a = 0; a < n; ++a) {
      const double ca = lc.coefficients(static_cast<Eigen::Index>(a));
      if (ca == 0.0) continue;
      sum.matrix.add(0, LiftedSdp::row_of(a), 0.5 * ca);
      for (std::size_t b = a; b < n; ++b) {
        const double cb = lc.coefficients(static_cast<Eigen::Index>(b));
        if (cb != 0.0) square.matrix.add(LiftedSdp::row_of(a), LiftedSdp::row_of(b), ca * cb);
      }
    }
    sum.matrix.compress();
    square.matrix.compress();
    sum.rhs = target;
    square.rhs = target * target;
    const auto col = static_cast<Eigen::Index>(u);
    out.equality_kernel(0, col) = -target;
    out.equality_kernel.block(1, col, N, 1) = lc.coefficients;
    const std::string name = lc.label.empty() ? "eq_" + std::to_string(u + 1) : lc.label;
    sum.label = name;
    square.label = name + "_sq";
    sdp.equalities.push_back(std::move(sum));
    sdp.equalities.push_back(std::move(square));
  }
  for (std::size_t v = 0; v < prob.inequalities.size(); ++v) {
    const auto& lc = prob.inequalities[v];
    SdpConstraint c;
    for (std::size_t a = 0; a < n; ++a) {
      const double ca = lc.coefficients(static_cast<Eigen::Index>(a));
      if (ca != 0.0) c.matrix.add(0, LiftedSdp::row_of(a), 0.5 * ca);
    }
    c.matrix.compress();
    c.rhs = 2.0 * lc.rhs - lc.coefficients.sum();
    c.label = lc.label.empty() ? "ineq_" + std::to_string(v + 1) : lc.label;
    sdp.inequalities.push_back(std::move(c));
  }
  return out;
}

Eigen::MatrixXd lifted_point(const BinaryVector& z) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(z.size() + 1));
  x(0) = 1.0;
  for (std::size_t i = 0; i < z.size(); ++i) x(static_cast<Eigen::Index>(i + 1)) = z[i] ? 1.0 : -1.0;
  return x * x.transpose();
}

double lifted_objective(const LiftedSdp& lifted, const Eigen::MatrixXd& Y) {
  return lifted.sdp.objective.cwiseProduct(Y).sum();
}

ReducedSdp reduce_face(const LiftedSdp& lifted) {
  const auto dim = static_cast<Eigen::Index>(lifted.sdp.dim);
  Eigen::Index cols = 1;
  for (const auto& block : lifted.blocks) cols += static_cast<Eigen::Index>(block.size()) - 1;

  // Column 0 is orthogonal to every block kernel (-(2 - |I|), 1_I); the rest
  // are differences inside a block.
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(dim, cols);
  basis(0, 0) = 1.0;
  Eigen::Index next = 1;
  for (const auto& block : lifted.blocks) {
    const double size = static_cast<double>(block.size());
    const auto first = static_cast<Eigen::Index>(LiftedSdp::row_of(block.front()));
    for (std::size_t k = 0; k < block.size(); ++k) {
      basis(static_cast<Eigen::Index>(LiftedSdp::row_of(block[k])), 0) = (2.0 - size) / size;
      if (k == 0) continue;
      basis(first, next) = 1.0;
      basis(static_cast<Eigen::Index>(LiftedSdp::row_of(block[k])), next) = -1.0;
      ++next;
    }
  }
  if (lifted.equality_kernel.cols() > 0) {
    const Eigen::MatrixXd projected = basis.transpose() * lifted.equality_kernel;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(projected);
    qr.setThreshold(1e-10);
    const Eigen::Index rank = qr.rank();
    const Eigen::MatrixXd q = qr.householderQ();
    basis = (basis * q.rightCols(cols - rank)).eval();
    cols -= rank;
  }

  ReducedSdp out;
  out.basis = basis;
  if (cols == 0) {
    out.empty = true;
    return out;
  }
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (basis(i, c) != 0.0) rows[static_cast<std::size_t>(i)].emplace_back(static_cast<std::size_t>(c), basis(i, c));
    }
  }
  auto transform = [&](const SparseSymMatrix& mat) {
    SparseSymMatrix reduced;
    for (const auto& e : mat.entries()) {
      const auto& ra = rows[e.row];
      const auto& rb = rows[e.col];
      if (e.row == e.col) {
        for (const auto& [p, vp] : ra) {
          for (const auto& [q, vq] : ra) {
            if (p <= q) reduced.add(p, q, e.value * vp * vq);
          }
        }
      } else {
        for (const auto& [p, vp] : ra) {
          for (const auto& [q, vq] : rb) reduced.add(p, q, (p == q ? 2.0 : 1.0) * e.value * vp * vq);
        }
      }
    }
    reduced.compress();
    return reduced;
  };

  SdpProblem& sdp = out.sdp;
  sdp.dim = static_cast<std::size_t>(cols);
  sdp.objective = basis.transpose() * lifted.sdp.objective * basis;
  sdp.objective = 0.5 * (sdp.objective + sdp.objective.transpose()).eval();
  // The unit diagonal comes first in the lifted list; block and general
  // equality rows hold identically on the face.
  for (std::size_t i = 0; i < lifted.sdp.dim; ++i) {
    const auto& c = lifted.sdp.equalities[i];
    sdp.equalities.push_back({transform(c.matrix), c.rhs, c.label});
  }
  for (const auto& c : lifted.sdp.inequalities) sdp.inequalities.push_back({transform(c.matrix), c.rhs, c.label});
  return out;
}

Relaxation relax_and_solve(const LiftedSdp& lifted, const SdpOptions& opts, bool facial_reduction) {
  Relaxation out;
  Eigen::MatrixXd basis;
  if (facial_reduction) {
    ReducedSdp reduced = reduce_face(lifted);
    if (reduced.empty) {
      throw SdpSolveError(SdpStatus::Infeasible, "SDP relaxation is infeasible: the equality constraints admit no point");
    }
    out.solution = solve(reduced.sdp, opts);
    basis = std::move(reduced.basis);
  } else {
    out.solution = solve(lifted.sdp, opts);
  }
  if (out.solution.status != SdpStatus::Optimal) {
    throw SdpSolveError(out.solution.status,
                        "SDP relaxation ended with status " + std::string(to_string(out.solution.status)) +
                            " after " + std::to_string(out.solution.iterations) + " iterations");
  }
  out.Y = facial_reduction ? Eigen::MatrixXd(basis * out.solution.Y * basis.transpose()) : out.solution.Y;
  out.upper_bound = lifted_objective(lifted, out.Y);
  return out;
}

Relaxation relax_and_solve(const BqpProblem& prob, const SdpOptions& opts, bool facial_reduction) {
  return relax_and_solve(lift(prob), opts, facial_reduction);
}

std::string_view to_string(RoundingMethod method) {
  switch (method) {
    case RoundingMethod::Simple: return "simple";
    case RoundingMethod::Deterministic: return "deterministic";
    case RoundingMethod::Randomized: return "randomized";
  }
  return "unknown";
}

Certificate certificate(const BqpProblem& prob, const BinaryVector& z, double upper_bound) {
  Certificate c;
  c.objective = objective(prob, z);
  c.upper_bound = upper_bound;
  if (upper_bound > 0.0) c.delta = c.objective / upper_bound;
  return c;
}

BqpSolution round_simple(const Eigen::MatrixXd& Y, const BqpProblem& prob) {
  prob.validate();
  check_relaxed_point(Y, prob);
  BqpSolution out;
  out.z.assign(prob.size(), 0);
  for (const auto& block : prob.blocks) out.z[block_argmax(Y, block)] = 1;
  out.objective = objective(prob, out.z);
  out.feasible = is_feasible(prob, out.z);
  return out;
}

RoundingResult round_deterministic(const Eigen::MatrixXd& Y, const BqpProblem& prob,
                                   std::size_t t_search, double upper_bound) {
  prob.validate();
  check_relaxed_point(Y, prob);
  if (t_search == 0) throw Error(ErrorCode::InvalidArgument, "search budget must be at least 1");
  const std::size_t M = prob.blocks.size();
  const auto block_of = prob.block_of();

  std::vector<std::vector<std::size_t>> cand(M);
  std::vector<char> taken(prob.size(), 0);
  for (std::size_t m = 0; m < M; ++m) {
    const std::size_t i = block_argmax(Y, prob.blocks[m]);
    cand[m].push_back(i);
    taken[i] = 1;
  }
  std::vector<std::size_t> order(prob.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return first_row(Y, a) > first_row(Y, b);
  });
  double product = 1.0;
  auto next = order.begin();
  while (product < static_cast<double>(t_search)) {
    while (next != order.end() && taken[*next]) ++next;
    if (next == order.end()) break;
    const std::size_t m = block_of[*next];
    product = product / static_cast<double>(cand[m].size()) * static_cast<double>(cand[m].size() + 1);
    cand[m].push_back(*next);
    taken[*next] = 1;
  }

  bool found = false;
  double best_f = 0.0;
  BinaryVector best_z;
  std::vector<std::size_t> digit(M, 0);
  std::vector<std::size_t> choice(M);
  std::size_t evaluated = 0;
  while (true) {
    for (std::size_t m = 0; m < M; ++m) choice[m] = cand[m][digit[m]];
    ++evaluated;
    BinaryVector z = choice_to_binary(prob, choice);
    if (satisfies_linear(prob, z)) {
      const double f = objective_of_choice(prob, choice);
      if (!found || better_candidate(f, z, best_f, best_z)) {
        found = true;
        best_f = f;
        best_z = std::move(z);
      }
    }
    std::size_t m = M;
    while (m-- > 0) {
      if (++digit[m] < cand[m].size()) break;
      digit[m] = 0;
    }
    if (m == static_cast<std::size_t>(-1)) break;
  }
  if (!found) {
    throw Error(ErrorCode::NoFeasibleFound, "deterministic rounding: none of the " +
                                                std::to_string(evaluated) +
                                                " candidate combinations is feasible");
  }
  RoundingResult out;
  out.bound = certificate(prob, best_z, upper_bound);
  out.z = std::move(best_z);
  out.method = RoundingMethod::Deterministic;
  out.candidates = evaluated;
  return out;
}

RoundingResult round_randomized(const Eigen::MatrixXd& Y, const BqpProblem& prob,
                                std::uint64_t seed, int max_restarts, double upper_bound,
                                std::size_t samples) {
  prob.validate();
  check_relaxed_point(Y, prob);
  if (max_restarts < 1) throw Error(ErrorCode::InvalidArgument, "max_restarts must be at least 1");
  samples = std::max<std::size_t>(samples, 1);
  const std::size_t M = prob.blocks.size();
  const auto block_of = prob.block_of();
  const std::size_t redraw_cap = prob.size() * 100;

  std::vector<std::vector<double>> weights(M);
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t i : prob.blocks[m]) {
      weights[m].push_back(std::clamp((first_row(Y, i) + 1.0) / 2.0, 0.0, 1.0));
    }
  }

  std::mt19937_64 rng(seed);
  RoundingResult out;
  out.method = RoundingMethod::Randomized;
  out.seed = seed;
  bool found = false;
  double best_f = 0.0;
  std::size_t collected = 0;
  std::vector<std::size_t> choice(M);

  for (int restart = 0; restart < max_restarts && collected < samples; ++restart) {
    out.restarts = restart + 1;
    for (std::size_t m = 0; m < M; ++m) choice[m] = prob.blocks[m][draw_from_block(weights[m], rng)];
    std::size_t redraws = 0;
    while (true) {
      BinaryVector z = choice_to_binary(prob, choice);
      const FeasibilityReport rep = check_feasibility(prob, z);
      if (rep.feasible) {
        const double f = objective_of_choice(prob, choice);
        if (!found || better_candidate(f, z, best_f, out.z)) {
          found = true;
          best_f = f;
          out.z = std::move(z);
        }
        ++collected;
        break;
      }
      const auto blocks = violating_blocks(prob, rep, block_of);
      if (blocks.empty() || redraws >= redraw_cap) break;
      const std::size_t pick = std::min(blocks.size() - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(blocks.size())));
      const std::size_t m = blocks[pick];
      choice[m] = prob.blocks[m][draw_from_block(weights[m], rng)];
      ++redraws;
    }
    out.redraws += redraws;
  }
  if (!found) {
    throw Error(ErrorCode::NoFeasibleFound, "randomized rounding found no feasible point in " +
                                                std::to_string(max_restarts) + " restarts");
  }
  out.bound = certificate(prob, out.z, upper_bound);
  return out;
}

PipelineResult solve_relaxed(const BqpProblem& prob, const PipelineOptions& opts) {
  PipelineResult out;
  auto start = Clock::now();
  const LiftedSdp lifted = lift(prob);
  out.timings.lift_seconds = seconds_since(start);

  start = Clock::now();
  out.relaxation = relax_and_solve(lifted, opts.sdp, opts.facial_reduction);
  out.timings.sdp_seconds = seconds_since(start);

  start = Clock::now();
  try {
    out.rounding = round_deterministic(out.relaxation.Y, prob, opts.t_search, out.relaxation.upper_bound);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoFeasibleFound) throw;
    out.rounding = round_randomized(out.relaxation.Y, prob, opts.seed, opts.max_restarts,
                                    out.relaxation.upper_bound, opts.samples);
  }
  out.timings.rounding_seconds = seconds_since(start);
  return out;
}

}  // namespace priceopt
