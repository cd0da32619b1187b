#include "foliated/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace foliated {

namespace {

void check_size(const WeightedDomain& domain, const Field& u) {
  require(u.size() == domain.size(), ErrorKind::DimensionMismatch,
          "field has " + std::to_string(u.size()) + " values, domain has " +
              std::to_string(domain.size()) + " nodes");
}

SparseMatrix with_diagonal(const SparseMatrix& a, const Eigen::VectorXd& diag) {
  SparseMatrix d(a.rows(), a.cols());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(diag.size());
  for (Eigen::Index i = 0; i < diag.size(); ++i) t.emplace_back(i, i, diag(i));
  d.setFromTriplets(t.begin(), t.end());
  SparseMatrix out = a + d;
  out.makeCompressed();
  return out;
}

// Number of generalized eigenvalues of (K_b, K_1) below lambda, from the
// inertia of K_b - lambda K_1; nullopt when a pivot vanishes.
std::optional<int> count_below(Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower,
                                                     Eigen::NaturalOrdering<int>>& ldlt,
                               const SparseMatrix& a, const Eigen::VectorXd& m,
                               const Field& b, double lambda) {
  const Eigen::VectorXd diag = (m.array() * (b.array() - lambda)).matrix();
  const SparseMatrix shifted = with_diagonal((1.0 - lambda) * a, diag);
  ldlt.factorize(shifted);
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd d = ldlt.vectorD();
  int negative = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) == 0.0 || !std::isfinite(d(i))) return std::nullopt;
    if (d(i) < 0.0) ++negative;
  }
  return negative;
}

}  // namespace

Eigen::VectorXd lumped_mass(const WeightedDomain& domain) {
  return (domain.cell_widths().array() * domain.weights.array()).matrix();
}

SparseMatrix stiffness_matrix(const WeightedDomain& domain) {
  const Eigen::Index n = domain.size();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * n);
  auto edge = [&](Eigen::Index i, Eigen::Index j, double h) {
    const double k = 0.5 * (domain.weights(i) + domain.weights(j)) / h;
    t.emplace_back(i, i, k);
    t.emplace_back(j, j, k);
    t.emplace_back(i, j, -k);
    t.emplace_back(j, i, -k);
  };
  for (Eigen::Index i = 0; i + 1 < n; ++i) edge(i, i + 1, domain.nodes(i + 1) - domain.nodes(i));
  if (domain.periodic()) edge(n - 1, 0, domain.nodes(0) + domain.length() - domain.nodes(n - 1));
  SparseMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  return a;
}

Eigen::VectorXd apply_stiffness(const SparseMatrix& a, const Field& u) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
  for (Eigen::Index col = 0; col < a.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(a, col); it; ++it)
      if (it.row() != it.col()) out(it.row()) -= it.value() * (u(it.row()) - u(it.col()));
  return out;
}

double stiffness_form(const SparseMatrix& a, const Field& u, const Field& v) {
  double sum = 0.0;
  for (Eigen::Index col = 0; col < a.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(a, col); it; ++it)
      if (it.row() > it.col()) sum -= it.value() * (u(it.row()) - u(it.col())) * (v(it.row()) - v(it.col()));
  return sum;
}

double inner_h1(const WeightedDomain& domain, const Field& u, const Field& v) {
  check_size(domain, u);
  check_size(domain, v);
  const Eigen::VectorXd m = lumped_mass(domain);
  return stiffness_form(stiffness_matrix(domain), u, v) + (m.array() * u.array() * v.array()).sum();
}

double estimate_mu(const WeightedDomain& domain, const Field& b, double tol) {
  check_size(domain, b);
  const SparseMatrix a = stiffness_matrix(domain);
  const Eigen::VectorXd m = lumped_mass(domain);
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> ldlt;
  ldlt.analyzePattern(with_diagonal(a, m));

  double lo = std::min(1.0, b.minCoeff()) - 1.0;
  double hi = std::max(1.0, b.maxCoeff()) + 1.0;
  auto count = [&](double lambda) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      const double nudge = attempt * 1e-14 * (1.0 + std::abs(lambda));
      if (auto k = count_below(ldlt, a, m, b, lambda + nudge)) return *k;
    }
    fail(ErrorKind::NonConvergence, "inertia count failed near lambda = " + std::to_string(lambda));
  };
  require(count(lo) == 0 && count(hi) >= 1, ErrorKind::NonConvergence,
          "eigenvalue bracket for mu is inconsistent");
  for (int it = 0; it < 200 && hi - lo > tol * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (count(mid) == 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ProblemSpec make_spec(const WeightedDomain& domain, const std::function<double(double)>& b,
                      const std::function<double(double)>& c, double p,
                      std::optional<double> theta) {
  ProblemSpec spec;
  spec.p = p;
  spec.b = domain.nodes.unaryExpr(b);
  spec.c = domain.nodes.unaryExpr(c);
  spec.mu = estimate_mu(domain, spec.b);
  spec.theta = theta.value_or(1.5 * std::max({1.0, spec.mu, spec.b.cwiseAbs().maxCoeff()}));
  validate(spec, domain);
  return spec;
}

void validate(const ProblemSpec& spec, const WeightedDomain& domain) {
  require(spec.b.size() == domain.size() && spec.c.size() == domain.size(),
          ErrorKind::DimensionMismatch, "coefficients do not match the domain");
  require(std::isfinite(spec.p) && spec.p > 2.0, ErrorKind::ParameterDomain, "need p > 2");
  require(spec.b.allFinite() && spec.c.allFinite(), ErrorKind::ParameterDomain,
          "non-finite coefficient");
  require(spec.c.minCoeff() > 0.0, ErrorKind::ParameterDomain, "need c > 0");
  require(spec.mu > 0.0, ErrorKind::NonCoercive,
          "the b-form is not coercive (mu = " + std::to_string(spec.mu) + ")");
  const double floor = std::max({1.0, spec.mu, spec.b.cwiseAbs().maxCoeff()});
  require(spec.theta > floor, ErrorKind::ParameterDomain,
          "theta must exceed max{1, mu, max|b|} = " + std::to_string(floor));
}

Problem::Problem(WeightedDomain domain, ProblemSpec spec)
    : domain_(std::move(domain)), spec_(std::move(spec)) {
  domain_.validate();
  validate(spec_, domain_);
  mass_ = lumped_mass(domain_);
  stiffness_ = stiffness_matrix(domain_);
  form_b_ = with_diagonal(stiffness_, (mass_.array() * spec_.b.array()).matrix());
  form_theta_ = with_diagonal(stiffness_, spec_.theta * mass_);
  theta_solver_ = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(form_theta_);
  require(theta_solver_->info() == Eigen::Success, ErrorKind::SingularSystem,
          "K_theta factorization failed");
}

Field Problem::solve_theta(const Eigen::VectorXd& rhs) const {
  require(rhs.size() == size(), ErrorKind::DimensionMismatch, "right-hand side has wrong size");
  Field v = theta_solver_->solve(rhs);
  require(theta_solver_->info() == Eigen::Success && v.allFinite(), ErrorKind::SingularSystem,
          "K_theta solve failed");
  return v;
}

Problem make_problem(const WeightedDomain& domain, const FoliationPreset& preset, double p,
                     std::optional<double> theta) {
  return Problem(domain, make_spec(domain, preset.b, preset.c, p, theta));
}

double inner_b(const Problem& problem, const Field& u, const Field& v) {
  check_size(problem.domain(), u);
  check_size(problem.domain(), v);
  return stiffness_form(problem.stiffness(), u, v) +
         (problem.mass().array() * problem.spec().b.array() * u.array() * v.array()).sum();
}

double inner_theta(const Problem& problem, const Field& u, const Field& v) {
  check_size(problem.domain(), u);
  check_size(problem.domain(), v);
  return stiffness_form(problem.stiffness(), u, v) +
         problem.theta() * (problem.mass().array() * u.array() * v.array()).sum();
}

double norm_b(const Problem& problem, const Field& u) {
  return std::sqrt(std::max(0.0, inner_b(problem, u, u)));
}

double norm_theta(const Problem& problem, const Field& u) {
  return std::sqrt(std::max(0.0, inner_theta(problem, u, u)));
}

double norm_cp(const Problem& problem, const Field& u) {
  check_size(problem.domain(), u);
  const double p = problem.p();
  const double s =
      (problem.mass().array() * problem.spec().c.array() * u.array().abs().pow(p)).sum();
  return std::pow(s, 1.0 / p);
}

double norm_lp(const WeightedDomain& domain, const Field& u, double p) {
  check_size(domain, u);
  return std::pow((lumped_mass(domain).array() * u.array().abs().pow(p)).sum(), 1.0 / p);
}

Field helmholtz_solve(const Problem& problem, const Field& f) {
  check_size(problem.domain(), f);
  return problem.solve_theta((problem.mass().array() * f.array()).matrix());
}

Field positive_part(const Field& u) { return u.cwiseMax(0.0); }
Field negative_part(const Field& u) { return u.cwiseMin(0.0); }

}  // namespace foliated
