#pragma once

#include "foliated/discrete.hpp"

namespace foliated {

/// sign(u)|u|^{p-1}, the nonlinearity |u|^{p-2}u without 0^{negative} trouble.
Field nonlinearity(const Field& u, double p);

/// J(u) = 1/2 |u|_b^2 - 1/p |u|_{c,p}^p
double energy(const Problem& problem, const Field& u);

/// J(v) - J(u), evaluated term by term so that tiny decreases near a critical
/// point are not lost to cancellation.
double energy_difference(const Problem& problem, const Field& u, const Field& v);

/// J'(u)v = <u, v>_b - integral c|u|^{p-2}u v
double derivative(const Problem& problem, const Field& u, const Field& v);

/// The dual vector phi -> J'(u)phi on hat functions: K_b u - M c N(u).
Eigen::VectorXd dual_residual(const Problem& problem, const Field& u);

/// Helmholtz solution with source (theta - b)u.
Field apply_L(const Problem& problem, const Field& u);
/// Helmholtz solution with source c|u|^{p-2}u.
Field apply_G(const Problem& problem, const Field& u);

/// u - Lu - Gu, computed as K_theta^{-1} of the dual residual.
Field gradient_theta(const Problem& problem, const Field& u);

struct Gradient {
  Field field;
  Eigen::VectorXd residual;  // dual residual at u
  double norm = 0.0;         // |grad J(u)|_theta
};
Gradient compute_gradient(const Problem& problem, const Field& u);

struct NehariPoint {
  Field field;
  double energy = 0.0;
  double nehari_residual = 0.0;
};

/// t_u = (|u|_b^2 / |u|_{c,p}^p)^{1/(p-2)}
double nehari_scale(const Problem& problem, const Field& u);
NehariPoint project_nehari(const Problem& problem, const Field& u);

/// (|u|_b^2 - |u|_{c,p}^p) / |u|_b^2
double nehari_residual(const Problem& problem, const Field& u);

}  // namespace foliated
