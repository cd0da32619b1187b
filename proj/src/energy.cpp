#include "foliated/energy.hpp"

#include <cmath>

namespace foliated {

namespace {

double power_term(const Problem& problem, const Field& u) {
  return (problem.mass().array() * problem.spec().c.array() * u.array().abs().pow(problem.p()))
      .sum();
}

// |a + d|^p - |a|^p without cancellation when a + d has the sign of a.
double power_difference(double a, double d, double p) {
  if (a != 0.0 && (a + d) / a > 0.0)
    return std::pow(std::abs(a), p) * std::expm1(p * std::log1p(d / a));
  return std::pow(std::abs(a + d), p) - std::pow(std::abs(a), p);
}

}  // namespace

Field nonlinearity(const Field& u, double p) {
  return u.unaryExpr([p](double x) {
    return x == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(x), p - 1.0), x);
  });
}

double energy(const Problem& problem, const Field& u) {
  return 0.5 * inner_b(problem, u, u) - power_term(problem, u) / problem.p();
}

double energy_difference(const Problem& problem, const Field& u, const Field& v) {
  require(u.size() == problem.size() && v.size() == problem.size(), ErrorKind::DimensionMismatch,
          "fields do not match the domain");
  const Field delta = v - u;
  const Field s = u + v;
  const double p = problem.p();
  double sum = 0.5 * stiffness_form(problem.stiffness(), delta, s);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double m = problem.mass()(i);
    sum += 0.5 * m * problem.spec().b(i) * delta(i) * s(i) -
           m * problem.spec().c(i) * power_difference(u(i), delta(i), p) / p;
  }
  return sum;
}

double derivative(const Problem& problem, const Field& u, const Field& v) {
  require(u.size() == problem.size() && v.size() == problem.size(), ErrorKind::DimensionMismatch,
          "fields do not match the domain");
  return stiffness_form(problem.stiffness(), u, v) +
         (problem.mass().array() * (problem.spec().b.array() * u.array() -
                                    problem.spec().c.array() * nonlinearity(u, problem.p()).array()) *
          v.array())
             .sum();
}

Eigen::VectorXd dual_residual(const Problem& problem, const Field& u) {
  require(u.size() == problem.size(), ErrorKind::DimensionMismatch, "field does not match domain");
  const Field n = nonlinearity(u, problem.p());
  return apply_stiffness(problem.stiffness(), u) +
         (problem.mass().array() * (problem.spec().b.array() * u.array() - problem.spec().c.array() * n.array()))
             .matrix();
}

Field apply_L(const Problem& problem, const Field& u) {
  return helmholtz_solve(problem, ((problem.theta() - problem.spec().b.array()) * u.array()).matrix());
}

Field apply_G(const Problem& problem, const Field& u) {
  return helmholtz_solve(
      problem, (problem.spec().c.array() * nonlinearity(u, problem.p()).array()).matrix());
}

Field gradient_theta(const Problem& problem, const Field& u) {
  return problem.solve_theta(dual_residual(problem, u));
}

Gradient compute_gradient(const Problem& problem, const Field& u) {
  Gradient g;
  g.residual = dual_residual(problem, u);
  g.field = problem.solve_theta(g.residual);
  g.norm = std::sqrt(std::max(0.0, g.field.dot(g.residual)));
  return g;
}

double nehari_scale(const Problem& problem, const Field& u) {
  const double b2 = inner_b(problem, u, u);
  const double cp = power_term(problem, u);
  require(b2 > 0.0 && cp > 0.0, ErrorKind::InvalidArgument,
          "Nehari projection is undefined for the zero field");
  return std::pow(b2 / cp, 1.0 / (problem.p() - 2.0));
}

NehariPoint project_nehari(const Problem& problem, const Field& u) {
  NehariPoint point;
  point.field = nehari_scale(problem, u) * u;
  point.energy = energy(problem, point.field);
  point.nehari_residual = nehari_residual(problem, point.field);
  return point;
}

double nehari_residual(const Problem& problem, const Field& u) {
  const double b2 = inner_b(problem, u, u);
  require(b2 > 0.0, ErrorKind::InvalidArgument, "Nehari residual is undefined for the zero field");
  return (b2 - power_term(problem, u)) / b2;
}

}  // namespace foliated
