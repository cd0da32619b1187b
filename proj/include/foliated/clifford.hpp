#pragma once

#include "foliated/quotient.hpp"

#include <vector>

namespace foliated {

/// Symmetric integer matrices P_0..P_q on R^n with P_i P_j + P_j P_i = 2 delta_ij Id.
struct CliffordSystem {
  int q = 0;
  int copies = 1;
  int n = 0;
  std::vector<Eigen::MatrixXi> matrices;
};

/// Dimension of the irreducible representation used for q (2, 4, 8, 8, 16 for q = 1..5).
int clifford_minimal_dimension(int q);

/// Table construction for q in 1..5, repeated block-diagonally `copies` times.
CliffordSystem build_clifford_system(int q, int copies);

/// Largest entry of |P_i P_j + P_j P_i - 2 delta_ij Id| over all pairs; zero for a valid system.
int anticommutation_defect(const CliffordSystem& system);

/// Matrix of (1/n) tr(P_i P_j); the identity for a valid system.
Eigen::MatrixXd trace_gram(const CliffordSystem& system);

/// Components <P_i x, x>; x must be a unit vector.
Eigen::VectorXd pi_rho(const CliffordSystem& system, const Eigen::VectorXd& x);

/// 1 - 2 |pi_rho(x)|^2.
double fkm_value(const CliffordSystem& system, const Eigen::VectorXd& x);

/// Quotient coordinate t = arccos(f) / 4 on [0, pi/4]; |grad t| = 1 on the sphere.
double fkm_coordinate(double f);

/// Leaf multiplicities (m1, m2) = (q, n/2 - q - 1); m2 < 0 means f o pi_rho is constant.
std::pair<int, int> fkm_multiplicities(const CliffordSystem& system);
bool is_degenerate(const CliffordSystem& system);

/// Monte-Carlo quotient of S^{n-1} by the level sets of f o pi_rho.
WeightedDomain fkm_quotient_domain(const CliffordSystem& system, int bins, std::int64_t samples,
                                   std::uint64_t seed = 1);

}  // namespace foliated
