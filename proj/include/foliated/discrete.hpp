#pragma once

#include "foliated/quotient.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <functional>
#include <memory>
#include <optional>

namespace foliated {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Coefficients of -Δu + bu = c|u|^{p-2}u sampled on the quotient nodes.
struct ProblemSpec {
  double p = 4.0;
  Field b;
  Field c;
  double theta = 0.0;
  double mu = 0.0;
};

/// Samples b and c on the domain, estimates mu and picks the default theta
/// 1.5 * max{1, mu, max|b|} unless one is given.
ProblemSpec make_spec(const WeightedDomain& domain, const std::function<double(double)>& b,
                      const std::function<double(double)>& c, double p,
                      std::optional<double> theta = std::nullopt);

/// Throws ParameterDomain / NonCoercive / DimensionMismatch on a bad spec.
void validate(const ProblemSpec& spec, const WeightedDomain& domain);

/// Lumped masses m_i = q_i w_i, so that integrate(f) = m . f.
Eigen::VectorXd lumped_mass(const WeightedDomain& domain);

/// Weighted P1 stiffness: edge conductance ((w_i + w_{i+1}) / 2) / h, periodic wrap when needed.
SparseMatrix stiffness_matrix(const WeightedDomain& domain);

/// A u for a stiffness matrix with zero row sums, assembled from the edge
/// differences u_i - u_j so that round-off scales with the differences.
Eigen::VectorXd apply_stiffness(const SparseMatrix& a, const Field& u);

/// u^T A v from edge differences.
double stiffness_form(const SparseMatrix& a, const Field& u, const Field& v);

double inner_h1(const WeightedDomain& domain, const Field& u, const Field& v);

/// Smallest generalized eigenvalue of the b-form against the H^1 form, found by
/// bisection on the inertia of K_b - lambda K_1. May be <= 0 (non-coercive b).
double estimate_mu(const WeightedDomain& domain, const Field& b, double tol = 1e-12);

/// A domain and spec with the assembled forms and a factorized K_theta.
class Problem {
public:
  Problem(WeightedDomain domain, ProblemSpec spec);

  const WeightedDomain& domain() const { return domain_; }
  const ProblemSpec& spec() const { return spec_; }
  Eigen::Index size() const { return domain_.size(); }
  double p() const { return spec_.p; }
  double theta() const { return spec_.theta; }

  const Eigen::VectorXd& mass() const { return mass_; }
  const SparseMatrix& stiffness() const { return stiffness_; }
  /// K_b = A + diag(m b)
  const SparseMatrix& form_b() const { return form_b_; }
  /// K_theta = A + theta M
  const SparseMatrix& form_theta() const { return form_theta_; }

  /// Solves K_theta v = rhs (a dual vector).
  Field solve_theta(const Eigen::VectorXd& rhs) const;

private:
  WeightedDomain domain_;
  ProblemSpec spec_;
  Eigen::VectorXd mass_;
  SparseMatrix stiffness_;
  SparseMatrix form_b_;
  SparseMatrix form_theta_;
  std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> theta_solver_;
};

Problem make_problem(const WeightedDomain& domain, const FoliationPreset& preset, double p,
                     std::optional<double> theta = std::nullopt);

double inner_b(const Problem& problem, const Field& u, const Field& v);
double inner_theta(const Problem& problem, const Field& u, const Field& v);
double norm_b(const Problem& problem, const Field& u);
double norm_theta(const Problem& problem, const Field& u);
/// (integral of c|u|^p)^{1/p}
double norm_cp(const Problem& problem, const Field& u);
/// (integral of |u|^p)^{1/p}
double norm_lp(const WeightedDomain& domain, const Field& u, double p);

/// v with <v, phi>_theta = integral f phi for every hat function phi.
Field helmholtz_solve(const Problem& problem, const Field& f);

Field positive_part(const Field& u);
Field negative_part(const Field& u);

}  // namespace foliated
