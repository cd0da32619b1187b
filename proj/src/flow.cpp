#include "foliated/flow.hpp"

#include "foliated/verify.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <random>

namespace foliated {

namespace {

template <class F>
auto parallel_map(int n, bool parallel, F f) -> std::vector<decltype(f(0))> {
  std::vector<decltype(f(0))> out;
  out.reserve(n);
  if (!parallel || n <= 1) {
    for (int i = 0; i < n; ++i) out.push_back(f(i));
    return out;
  }
  std::vector<std::future<decltype(f(0))>> jobs;
  for (int i = 0; i < n; ++i) jobs.push_back(std::async(std::launch::async, f, i));
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

std::optional<Field> constrain(const Problem& problem, const Field& v, Constraint constraint,
                               int pieces) {
  switch (constraint) {
    case Constraint::None:
      return v;
    case Constraint::Nehari:
      try {
        return project_nehari(problem, v).field;
      } catch (const Error&) {
        return std::nullopt;
      }
    case Constraint::Nodal:
      return project_nodal_nehari(problem, v, pieces);
  }
  return std::nullopt;
}

double l2_norm(const Eigen::VectorXd& m, const Field& u) {
  return std::sqrt((m.array() * u.array().square()).sum());
}

Field random_positive_seed(const WeightedDomain& domain, std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{seed, index, std::uint64_t{0x5eed}};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 0.4);
  const double period = domain.periodic() ? 2.0 * std::numbers::pi : std::numbers::pi;
  Field u = Field::Zero(domain.size());
  for (int k = 1; k <= 4; ++k) {
    const double a = normal(rng) / k;
    const double b = domain.periodic() ? normal(rng) / k : 0.0;
    for (Eigen::Index i = 0; i < domain.size(); ++i) {
      const double s = (domain.nodes(i) - domain.lower) / domain.length();
      u(i) += a * std::cos(k * period * s) + b * std::sin(k * period * s);
    }
  }
  return u.array().exp().matrix();
}

}  // namespace

void FlowConfig::validate() const {
  require(tol_grad > 0.0, ErrorKind::InvalidArgument, "tol_grad must be positive");
  require(max_iters > 0, ErrorKind::InvalidArgument, "max_iters must be positive");
  require(step_max > 0.0, ErrorKind::InvalidArgument, "step_max must be positive");
  require(backtrack > 0.0 && backtrack < 1.0, ErrorKind::InvalidArgument,
          "backtracking factor must lie in (0, 1)");
  require(armijo > 0.0 && armijo < 1.0, ErrorKind::InvalidArgument,
          "Armijo constant must lie in (0, 1)");
  require(max_backtracks > 0, ErrorKind::InvalidArgument, "max_backtracks must be positive");
  require(alpha >= 0.0, ErrorKind::InvalidArgument, "cone radius must be nonnegative");
  require(dedup_rel > 0.0, ErrorKind::InvalidArgument, "dedup threshold must be positive");
  require(restarts >= 1, ErrorKind::InvalidArgument, "restarts must be at least 1");
}

const char* to_string(SignClass s) {
  switch (s) {
    case SignClass::Positive: return "positive";
    case SignClass::Negative: return "negative";
    case SignClass::SignChanging: return "sign-changing";
    case SignClass::Zero: return "zero";
  }
  return "zero";
}

StepResult flow_step(const Problem& problem, const Field& u, const FlowConfig& config,
                     Constraint constraint) {
  require(u.allFinite(), ErrorKind::InvalidArgument, "flow_step needs a finite field");
  const Gradient g = compute_gradient(problem, u);
  StepResult result;
  result.grad_norm = g.norm;
  if (g.norm <= config.tol_grad) {
    result.field = u;
    result.terminal = true;
    return result;
  }
  const double slope = g.norm * g.norm;
  const int pieces = constraint == Constraint::Nodal
                         ? static_cast<int>(sign_pieces(u, problem.domain().periodic()).size())
                         : -1;
  double eta = config.step_max;
  for (int bt = 0; bt <= config.max_backtracks; ++bt, eta *= config.backtrack) {
    const auto v = constrain(problem, u - eta * g.field, constraint, pieces);
    if (!v || !v->allFinite()) continue;
    const double drop = energy_difference(problem, u, *v);
    if (drop < 0.0 && drop <= -config.armijo * eta * slope) {
      result.field = *v;
      result.step = eta;
      result.decrease = drop;
      result.backtracks = bt;
      return result;
    }
  }
  fail(ErrorKind::LineSearch,
       "no decreasing step after " + std::to_string(config.max_backtracks) +
           " backtracks (gradient norm " + std::to_string(g.norm) + ")");
}

FlowResult run_flow(const Problem& problem, Field u0, const FlowConfig& config,
                    Constraint constraint) {
  config.validate();
  FlowResult result;
  auto start = constrain(problem, u0, constraint, -1);
  require(start.has_value(), ErrorKind::InvalidArgument, "seed cannot be projected");
  Field u = std::move(*start);

  const double initial_negative = negative_part_norm(problem, u).theta;
  const bool in_cone = constraint != Constraint::Nodal && initial_negative <= config.alpha;

  result.trace.stop_reason = "max-iters";
  for (; result.iters < config.max_iters; ++result.iters) {
    StepResult step;
    try {
      step = flow_step(problem, u, config, constraint);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::LineSearch) throw;
      result.trace.stop_reason = "line-search";
      break;
    }
    result.trace.grad_norms.push_back(step.grad_norm);
    if (step.terminal) {
      result.trace.stop_reason = "converged";
      break;
    }
    u = std::move(step.field);
    result.trace.decreases.push_back(step.decrease);
    const double negative = negative_part_norm(problem, u).theta;
    result.trace.negative_norms.push_back(negative);
    if (in_cone && negative > initial_negative + 1e-8) {
      result.trace.stop_reason = "left-invariant-cone";
      ++result.iters;
      break;
    }
  }
  result.grad_norm = compute_gradient(problem, u).norm;
  result.converged = result.grad_norm <= config.tol_grad;
  result.field = std::move(u);
  return result;
}

int nodal_count(const Field& u, bool periodic) {
  int first = 0;
  int last = 0;
  int changes = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const int s = (u(i) > 0.0) - (u(i) < 0.0);
    if (s == 0) continue;
    if (first == 0) first = s;
    else if (s != last) ++changes;
    last = s;
  }
  if (periodic && first != 0 && first != last) ++changes;
  return changes;
}

SignClass sign_class(const Field& u) {
  const bool pos = (u.array() > 0.0).any();
  const bool neg = (u.array() < 0.0).any();
  if (pos && neg) return SignClass::SignChanging;
  if (pos) return SignClass::Positive;
  if (neg) return SignClass::Negative;
  return SignClass::Zero;
}

std::vector<Field> sign_pieces(const Field& u, bool periodic) {
  std::vector<std::vector<Eigen::Index>> runs;
  std::vector<int> signs;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const int s = (u(i) > 0.0) - (u(i) < 0.0);
    if (s == 0) continue;
    if (signs.empty() || signs.back() != s) {
      runs.emplace_back();
      signs.push_back(s);
    }
    runs.back().push_back(i);
  }
  if (periodic && runs.size() > 1 && signs.front() == signs.back()) {
    runs.front().insert(runs.front().end(), runs.back().begin(), runs.back().end());
    runs.pop_back();
  }
  std::vector<Field> pieces;
  for (const auto& run : runs) {
    Field piece = Field::Zero(u.size());
    for (auto i : run) piece(i) = u(i);
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

std::optional<Field> project_nodal_nehari(const Problem& problem, const Field& u,
                                          int expected_pieces) {
  const auto pieces = sign_pieces(u, problem.domain().periodic());
  const auto k = static_cast<Eigen::Index>(pieces.size());
  if (k == 0 || (expected_pieces > 0 && k != expected_pieces)) return std::nullopt;

  const double p = problem.p();
  Eigen::MatrixXd B(k, k);
  Eigen::VectorXd P(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) B(i, j) = inner_b(problem, pieces[i], pieces[j]);
    P(i) = (problem.mass().array() * problem.spec().c.array() * pieces[i].array().abs().pow(p))
               .sum();
    if (!(B(i, i) > 0.0) || !(P(i) > 0.0)) return std::nullopt;
  }

  // Solve F(t) = B t - P t^{p-1} = 0 by damped Newton from the decoupled scales.
  Eigen::VectorXd t = (B.diagonal().array() / P.array()).pow(1.0 / (p - 2.0)).matrix();
  auto residual = [&](const Eigen::VectorXd& s) {
    return (B * s - (P.array() * s.array().pow(p - 1.0)).matrix()).eval();
  };
  auto scaled = [&](const Eigen::VectorXd& f, const Eigen::VectorXd& s) {
    return (f.array().abs() / (B.diagonal().array() * s.array())).maxCoeff();
  };
  Eigen::VectorXd f = residual(t);
  for (int it = 0; it < 100 && scaled(f, t) > 1e-15; ++it) {
    Eigen::MatrixXd jac = B;
    jac.diagonal() -= ((p - 1.0) * P.array() * t.array().pow(p - 2.0)).matrix();
    const Eigen::VectorXd delta = jac.partialPivLu().solve(-f);
    if (!delta.allFinite()) return std::nullopt;
    double lambda = 1.0;
    while (((t + lambda * delta).array() <= 0.1 * t.array()).any() && lambda > 1e-8) lambda *= 0.5;
    const Eigen::VectorXd next = t + lambda * delta;
    const bool stalled = (lambda * delta).cwiseAbs().maxCoeff() <= 1e-16 * t.maxCoeff();
    t = next;
    f = residual(t);
    if (stalled) break;
  }
  if (!t.allFinite() || (t.array() <= 0.0).any() || scaled(f, t) > 1e-11) return std::nullopt;

  Field out = Field::Zero(u.size());
  for (Eigen::Index i = 0; i < k; ++i) out += t(i) * pieces[i];
  return out;
}

std::vector<Field> seed_bumps(const WeightedDomain& domain, int k) {
  require(k >= 1, ErrorKind::InvalidArgument, "need at least one bump");
  const Eigen::Index first = domain.periodic() ? 0 : 1;
  const Eigen::Index last = domain.periodic() ? domain.size() - 1 : domain.size() - 2;
  const Eigen::Index interior = last - first + 1;
  require(interior >= 4 * k, ErrorKind::InvalidArgument,
          "domain too coarse for " + std::to_string(k) + " bumps (" + std::to_string(interior) +
              " interior nodes)");
  std::vector<Field> bumps;
  for (int j = 0; j < k; ++j) {
    const Eigen::Index a = first + interior * j / k;
    const Eigen::Index b = first + interior * (j + 1) / k - 1;
    Field bump = Field::Zero(domain.size());
    const double ta = domain.nodes(a);
    const double tb = domain.nodes(b);
    for (Eigen::Index i = a + 1; i < b; ++i) {
      const double s = (domain.nodes(i) - ta) / (tb - ta);
      bump(i) = 16.0 * s * s * (1.0 - s) * (1.0 - s);
    }
    bumps.push_back(std::move(bump));
  }
  return bumps;
}

Field seed_sign_changing(const Problem& problem, const std::vector<int>& pattern) {
  const int k = static_cast<int>(pattern.size());
  require(k >= 2, ErrorKind::InvalidArgument, "a sign pattern needs two entries");
  const WeightedDomain& d = problem.domain();
  require(!d.periodic() || k % 2 == 0, ErrorKind::InvalidArgument,
          "a periodic sign pattern needs an even number of entries");
  require(d.size() >= 4 * k, ErrorKind::InvalidArgument, "domain too coarse for the sign pattern");
  // Nodal domains of cos((k-1) pi s) on an interval, cos(k pi s) on a circle.
  const double freq = (d.periodic() ? k : k - 1) * std::numbers::pi;
  const Field profile = d.nodes.unaryExpr(
      [&](double t) { return std::cos(freq * (t - d.lower) / d.length()); });
  const auto pieces = sign_pieces(profile, d.periodic());
  require(static_cast<int>(pieces.size()) == k, ErrorKind::InvalidArgument,
          "domain too coarse for the sign pattern");
  Field u = Field::Zero(problem.size());
  for (int i = 0; i < k; ++i) {
    require(pattern[i] == 1 || pattern[i] == -1, ErrorKind::InvalidArgument,
            "pattern entries must be +1 or -1");
    u += pattern[i] * project_nehari(problem, pieces[i].cwiseAbs()).field;
  }
  return u;
}

NegativePartNorms negative_part_norm(const Problem& problem, const Field& u) {
  const Field neg = negative_part(u);
  return {norm_theta(problem, neg), norm_cp(problem, neg)};
}

double sobolev_constant(const Problem& problem) {
  const WeightedDomain& d = problem.domain();
  std::vector<Field> starts = {Field::Ones(problem.size())};
  for (int k : {1, 2, 4, 8, 16}) {
    if ((d.periodic() ? d.size() : d.size() - 2) < 4 * k) break;
    starts.push_back(seed_bumps(d, k).front());
    starts.push_back(seed_bumps(d, k).back());
  }
  double best = 0.0;
  for (Field u : starts) {
    u /= norm_theta(problem, u);
    double ratio = norm_cp(problem, u);
    for (int it = 0; it < 2000; ++it) {
      Field v = apply_G(problem, u);
      v /= norm_theta(problem, v);
      const double next = norm_cp(problem, v);
      u = std::move(v);
      const bool done = std::abs(next - ratio) <= 1e-12 * next;
      ratio = std::max(ratio, next);
      if (done) break;
    }
    best = std::max(best, ratio);
  }
  return best;
}

double cone_gap_threshold(const Problem& problem, double tau) {
  const double p = problem.p();
  return std::pow(2.0 * p / (p - 2.0) * tau, 1.0 / p) / sobolev_constant(problem);
}

SolutionRecord make_record(const Problem& problem, const FlowResult& flow, std::string seed) {
  SolutionRecord r;
  r.field = flow.field;
  r.energy = energy(problem, flow.field);
  r.grad_norm = flow.grad_norm;
  r.nehari_residual = nehari_residual(problem, flow.field);
  r.strong_residual = strong_residual(problem, flow.field);
  r.nodal_count = nodal_count(flow.field, problem.domain().periodic());
  r.sign = sign_class(flow.field);
  r.seed = std::move(seed);
  r.iters = flow.iters;
  r.converged = flow.converged;
  r.trace = flow.trace;
  return r;
}

SolutionRecord find_least_energy(const Problem& problem, const FlowConfig& config) {
  config.validate();
  const auto runs = parallel_map(config.restarts, config.parallel, [&](int r) {
    Field seed = r == 0 ? seed_bumps(problem.domain(), 1).front()
                        : random_positive_seed(problem.domain(), config.seed, r);
    if (config.flip_seeds) seed = -seed;
    const std::string name = r == 0 ? "bump" : "random(" + std::to_string(config.seed) + "," +
                                                   std::to_string(r) + ")";
    return make_record(problem, run_flow(problem, seed, config, Constraint::Nehari), name);
  });
  const SolutionRecord* best = nullptr;
  for (const auto& r : runs) {
    const bool better = best == nullptr || (r.converged && !best->converged) ||
                        (r.converged == best->converged && r.energy < best->energy);
    if (better) best = &r;
  }
  SolutionRecord out = *best;
  if (out.sign == SignClass::Negative) {
    out.field = -out.field;
    out.sign = SignClass::Positive;
  }
  return out;
}

std::vector<SolutionRecord> find_sign_changing(const Problem& problem, int k,
                                               const FlowConfig& config) {
  require(k >= 2, ErrorKind::InvalidArgument, "find_sign_changing needs k >= 2");
  config.validate();
  const bool periodic = problem.domain().periodic();
  const SolutionRecord positive = find_least_energy(problem, config);

  const auto runs = parallel_map(k - 1, config.parallel, [&](int j) {
    const int pieces = periodic ? 2 * (j + 1) : j + 2;
    std::vector<int> pattern(pieces);
    std::string name = "pattern(";
    for (int i = 0; i < pieces; ++i) {
      pattern[i] = ((i % 2 == 0) != config.flip_seeds) ? 1 : -1;
      name += pattern[i] > 0 ? '+' : '-';
    }
    name += ")";
    try {
      const Field seed = seed_sign_changing(problem, pattern);
      return make_record(problem, run_flow(problem, seed, config, Constraint::Nodal), name);
    } catch (const Error& e) {
      SolutionRecord failed;
      failed.seed = name;
      failed.trace.stop_reason = e.what();
      return failed;
    }
  });

  std::vector<SolutionRecord> out = {positive};
  for (const auto& r : runs) {
    const bool duplicate =
        r.converged && std::any_of(out.begin(), out.end(), [&](const SolutionRecord& kept) {
          return kept.converged && same_solution(problem.domain(), kept, r, config.dedup_rel);
        });
    if (!duplicate) out.push_back(r);
  }
  return out;
}

bool same_solution(const WeightedDomain& domain, const SolutionRecord& a, const SolutionRecord& b,
                   double dedup_rel) {
  if (a.field.size() != b.field.size() || a.field.size() != domain.size()) return false;
  const Eigen::VectorXd m = lumped_mass(domain);
  const double scale = std::max(l2_norm(m, a.field), l2_norm(m, b.field));
  const double dist = std::min(l2_norm(m, a.field - b.field), l2_norm(m, a.field + b.field));
  if (dist <= dedup_rel * scale) return true;
  if (domain.periodic() && a.nodal_count == b.nodal_count) {
    const double e = std::max(std::abs(a.energy), std::abs(b.energy));
    return std::abs(a.energy - b.energy) <= 1e-8 * e;
  }
  return false;
}

}  // namespace foliated
