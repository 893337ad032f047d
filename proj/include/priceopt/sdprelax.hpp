#pragma once

// Semidefinite relaxation of a BqpProblem in +-1 coordinates and the
// rounding schemes that turn a relaxed solution back into a feasible z.
//
// Row/column 0 of Y is the homogenizing coordinate; row i + 1 belongs to z_i.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "priceopt/bqp.hpp"
#include "priceopt/sdp.hpp"

namespace priceopt {

struct LiftedSdp {
  SdpProblem sdp;
  std::size_t variables = 0;
  std::vector<std::vector<std::size_t>> blocks;
  /// Columns u with u^T Y u = 0 forced by the equality constraints (general
  /// equalities only; block kernels follow from `blocks`).
  Eigen::MatrixXd equality_kernel;

  static std::size_t row_of(std::size_t variable) { return variable + 1; }
};

LiftedSdp lift(const BqpProblem& prob);

/// Rank-one Y = x x^T with x = (1, 2z - 1).
Eigen::MatrixXd lifted_point(const BinaryVector& z);

/// g(Y) = A • Y.
double lifted_objective(const LiftedSdp& lifted, const Eigen::MatrixXd& Y);

struct Relaxation {
  Eigen::MatrixXd Y;
  double upper_bound = 0.0;  // g(Y)
  SdpSolution solution;
};

/// The lifted constraints confine Y to the face {V W V^T : W PSD}. Solving
/// over W keeps a strictly feasible interior, which the lifted problem lacks.
struct ReducedSdp {
  Eigen::MatrixXd basis;  // V, (n + 1) x r
  SdpProblem sdp;         // diagonal constraints and inequalities in W
  bool empty = false;     // r == 0: the equalities admit no point
};

ReducedSdp reduce_face(const LiftedSdp& lifted);

/// Throws SdpSolveError unless the solver reports Optimal. With
/// facial_reduction the problem is solved over W and Y = V W V^T is returned.
Relaxation relax_and_solve(const BqpProblem& prob, const SdpOptions& opts = {},
                           bool facial_reduction = true);
Relaxation relax_and_solve(const LiftedSdp& lifted, const SdpOptions& opts = {},
                           bool facial_reduction = true);

enum class RoundingMethod { Simple, Deterministic, Randomized };
std::string_view to_string(RoundingMethod method);

struct Certificate {
  double objective = 0.0;    // f(z)
  double upper_bound = 0.0;  // g(Y)
  std::optional<double> delta;  // f / g, absent when g <= 0
};

Certificate certificate(const BqpProblem& prob, const BinaryVector& z, double upper_bound);

struct RoundingResult {
  BinaryVector z;
  Certificate bound;
  RoundingMethod method = RoundingMethod::Simple;
  std::optional<std::uint64_t> seed;
  std::size_t candidates = 0;  // deterministic: size of the enumerated product set
  std::size_t redraws = 0;     // randomized: block redraws over all restarts
  int restarts = 0;            // randomized: restarts used
};

inline constexpr std::size_t kDefaultSearchBudget = 1000;
inline constexpr int kDefaultMaxRestarts = 100;

/// Per block, the variable with the largest y_0i (ties: lowest index). May
/// violate general constraints; the feasible flag says so.
BqpSolution round_simple(const Eigen::MatrixXd& Y, const BqpProblem& prob);

/// Grows candidate sets per block by decreasing y_0i until their product
/// reaches t_search, then returns the best feasible combination. Throws
/// NoFeasibleFound if none of the combinations is feasible.
RoundingResult round_deterministic(const Eigen::MatrixXd& Y, const BqpProblem& prob,
                                   std::size_t t_search, double upper_bound);

/// Block-wise sampling with probabilities (y_0i + 1) / 2, redrawing violating
/// blocks until feasible. Each restart stops after n * 100 redraws. Collects
/// `samples` feasible points and keeps the best. Throws NoFeasibleFound when
/// max_restarts restarts fail.
RoundingResult round_randomized(const Eigen::MatrixXd& Y, const BqpProblem& prob,
                                std::uint64_t seed, int max_restarts, double upper_bound,
                                std::size_t samples = 1);

struct PipelineOptions {
  SdpOptions sdp;
  bool facial_reduction = true;
  std::size_t t_search = kDefaultSearchBudget;
  int max_restarts = kDefaultMaxRestarts;
  std::uint64_t seed = 0;
  std::size_t samples = 1;
};

struct PipelineTimings {
  double lift_seconds = 0.0;
  double sdp_seconds = 0.0;
  double rounding_seconds = 0.0;
};

struct PipelineResult {
  RoundingResult rounding;
  Relaxation relaxation;
  PipelineTimings timings;
};

/// lift -> solve -> deterministic rounding, falling back to randomized
/// rounding when no candidate combination is feasible.
PipelineResult solve_relaxed(const BqpProblem& prob, const PipelineOptions& opts = {});

}  // namespace priceopt
