#pragma once

#include "foliated/energy.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace foliated {

struct FlowConfig {
  double tol_grad = 1e-10;
  int max_iters = 20000;
  double step_max = 1.0;  // steps above 1 leave the invariant cone
  double backtrack = 0.5;
  double armijo = 1e-4;
  int max_backtracks = 60;
  /// Seeds with |u^-|_theta <= alpha count as inside the cone, and their
  /// trajectories abort if |u^-|_theta grows.
  double alpha = 0.0;
  /// Duplicate threshold as a fraction of |u|_{L^2}.
  double dedup_rel = 1e-3;
  std::uint64_t seed = 1;
  int restarts = 1;
  /// Start every sign pattern with a negative piece instead of a positive one.
  bool flip_seeds = false;
  bool parallel = true;

  void validate() const;
};

/// What is held fixed while descending.
///  None:   plain gradient step on J.
///  Nehari: each iterate rescaled onto the Nehari manifold (minimizes J o sigma).
///  Nodal:  each sign piece rescaled jointly so that J'(u)u_i = 0 for every piece.
enum class Constraint { None, Nehari, Nodal };

enum class SignClass { Positive, Negative, SignChanging, Zero };
const char* to_string(SignClass s);

struct StepResult {
  Field field;
  double step = 0.0;
  double decrease = 0.0;   // J(new) - J(old), negative for accepted steps
  double grad_norm = 0.0;  // at the input point
  int backtracks = 0;
  bool terminal = false;   // input already critical; field returned unchanged
};

/// One Armijo-backtracked step of u - eta grad J(u). Throws LineSearch when
/// no step decreases J.
StepResult flow_step(const Problem& problem, const Field& u, const FlowConfig& config,
                     Constraint constraint = Constraint::None);

struct FlowTrace {
  std::vector<double> decreases;        // J change of every accepted step
  std::vector<double> grad_norms;
  std::vector<double> negative_norms;   // |u^-|_theta after every step
  std::string stop_reason;
};

struct FlowResult {
  Field field;
  int iters = 0;
  double grad_norm = 0.0;
  bool converged = false;
  FlowTrace trace;
};

FlowResult run_flow(const Problem& problem, Field u0, const FlowConfig& config,
                    Constraint constraint);

/// Sign changes between consecutive nonzero values (cyclically on periodic domains).
int nodal_count(const Field& u, bool periodic);
SignClass sign_class(const Field& u);

/// Maximal runs of one strict sign, as fields supported on each run. On a
/// periodic domain a run crossing the wrap is one piece.
std::vector<Field> sign_pieces(const Field& u, bool periodic);

/// Rescales every sign piece by t_i > 0 so that J'(sum t_j u_j) u_i = 0 for all i.
/// Returns nullopt if the piece count differs from `expected_pieces` (when
/// positive) or the scaling system has no positive solution.
std::optional<Field> project_nodal_nehari(const Problem& problem, const Field& u,
                                          int expected_pieces = -1);

/// k nonnegative C^1 bumps with disjoint, non-adjacent supports.
std::vector<Field> seed_bumps(const WeightedDomain& domain, int k);

/// sum_i sign_i sigma(phi_i), where phi_i are the nodal domains of a cosine with
/// k sign runs. The pieces reach the domain ends, so no zero gaps are left
/// for a step to turn into extra sign runs.
Field seed_sign_changing(const Problem& problem, const std::vector<int>& pattern);

struct NegativePartNorms {
  double theta = 0.0;  // |u^-|_theta, upper bound for dist_theta(u, P)
  double cp = 0.0;     // |u^-|_{c,p}
};
NegativePartNorms negative_part_norm(const Problem& problem, const Field& u);

/// sup |u|_{c,p} / |u|_theta over discrete u, by fixed-point iteration of G.
double sobolev_constant(const Problem& problem);

/// ((2p/(p-2)) tau)^{1/p} / C: lower bound for |u^+|_theta and |u^-|_theta at a
/// sign-changing critical point.
double cone_gap_threshold(const Problem& problem, double tau);

struct SolutionRecord {
  Field field;
  double energy = 0.0;
  double grad_norm = 0.0;
  double nehari_residual = 0.0;
  double strong_residual = 0.0;
  int nodal_count = 0;
  SignClass sign = SignClass::Zero;
  std::string seed;
  int iters = 0;
  bool converged = false;
  FlowTrace trace;
};

SolutionRecord make_record(const Problem& problem, const FlowResult& flow, std::string seed);

/// Least-energy positive solution: Nehari-constrained descent from a bump
/// (plus config.restarts - 1 random positive seeds); best energy wins.
SolutionRecord find_least_energy(const Problem& problem, const FlowConfig& config);

/// The positive record followed by k - 1 sign-changing attempts with
/// 2..k nodal domains (2, 4, ..., 2(k-1) on periodic domains), deduplicated.
std::vector<SolutionRecord> find_sign_changing(const Problem& problem, int k,
                                               const FlowConfig& config);

/// Same field up to sign, by L^2 distance relative to dedup_rel. On periodic
/// domains, records with equal nodal count and energy are translates and also match.
bool same_solution(const WeightedDomain& domain, const SolutionRecord& a, const SolutionRecord& b,
                   double dedup_rel);

}  // namespace foliated
