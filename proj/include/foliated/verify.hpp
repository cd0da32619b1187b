#pragma once

#include "foliated/energy.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace foliated {

/// max over interior nodes of |-(w u')'/w + b u - c|u|^{p-2}u|, with the
/// conservative three-point stencil of the stiffness matrix.
double strong_residual(const Problem& problem, const Field& u);

/// Foliated critical Sobolev exponent for H^{1,s}: infinite when s >= m - kappa,
/// otherwise s(m - kappa)/(m - kappa - s). Requires s >= 1 and 1 <= kappa < m.
double critical_exponent(double s, int m, int kappa);

/// The same formula in terms of the transverse dimension d = m - kappa (d >= 1).
double transverse_exponent(double s, int d);

// Sobolev embedding ratio ------------------------------------------------------

struct EmbeddingRow {
  int resolution = 0;
  double ratio = 0.0;  // sup |u|_{L^p} / |u|_{H^1} over the sample family
};

struct EmbeddingTable {
  double p = 0.0;
  std::vector<EmbeddingRow> rows;
  double drift = 0.0;  // relative change on the last doubling
  bool unbounded_trend = false;
};

/// The j-th sample is the same function at every resolution except that its
/// concentrated bumps have width proportional to the mesh size.
EmbeddingTable embedding_ratio(const FoliationPreset& preset, double p, int n_samples,
                               const std::vector<int>& resolutions, std::uint64_t seed = 1,
                               double drift_tolerance = 0.05);

// Shooting oracle --------------------------------------------------------------

struct ShootingOptions {
  double s_min = 0.05;
  double s_max = 4.0;
  int scan = 400;
  double rtol = 1e-12;
  double atol = 1e-14;
  /// Fraction of the interval used to step off a singular left end.
  double start_fraction = 1e-4;
  /// Distance from a singular right end where the flux is measured.
  double end_gap = 1e-6;
};

struct ShootingSolution {
  double s = 0.0;        // u at the left end (t = lower)
  int nodes = 0;         // sign changes on the quotient
  double flux = 0.0;     // terminal shooting function at convergence
  double lower = 0.0;
  double upper = 0.0;
  bool periodic = false;
  // Dense output: knots with state (u, u') and its derivative.
  std::vector<double> knots;
  std::vector<Eigen::Vector2d> states;
  std::vector<Eigen::Vector2d> slopes;
  double series_coefficient = 0.0;  // u ~ s + a t^2 near a singular left end
  double end_coefficient = 0.0;     // u ~ u(T) + a (T - t)^2 near a singular right end
  double start = 0.0;
  double stop = 0.0;
  /// Re-integrates the trajectory, landing exactly on the given sorted times in [start, stop].
  std::function<std::vector<double>(const std::vector<double>&)> exact;

  /// u(t) by Hermite interpolation, extended periodically on periodic quotients.
  double operator()(double t) const;
  /// u at the given times without interpolation error (for residual checks).
  Field sample(const Eigen::VectorXd& t) const;
};

using Coefficient = std::function<double(double)>;

/// Solutions of -(w u')'/w + b u = c|u|^{p-2}u with u'(lower) = 0 and the
/// natural condition at the far end (u'(T) = 0 and u(T) = u(0) on periodic
/// quotients) that have exactly target_nodes sign changes, sorted by s.
std::vector<ShootingSolution> shooting_oracle(const FoliationPreset& preset, const Coefficient& b,
                                              const Coefficient& c, double p, int target_nodes,
                                              const ShootingOptions& options = {});

/// Richardson-extrapolated discrete residual (4 r_{2N} - r_N)/3 of an oracle
/// profile, evaluated at the nodes of the N grid.
double oracle_residual(const FoliationPreset& preset, const Coefficient& b, const Coefficient& c,
                       double p, const ShootingSolution& solution, int resolution);

/// Sup-norm distance between a discrete field and an oracle profile after
/// sign alignment (and phase alignment on periodic quotients).
double oracle_distance(const WeightedDomain& domain, const Field& u, const ShootingSolution& oracle);

/// 1/2 integral (w u'^2 + b u^2) - 1/p integral c |u|^p of an oracle profile,
/// by composite Simpson on a fine grid.
double oracle_energy(const FoliationPreset& preset, const Coefficient& b, const Coefficient& c,
                     double p, const ShootingSolution& solution, int resolution = 20000);

// Symmetric criticality --------------------------------------------------------

enum class AmbientKind { Torus, Sphere };

/// Product grid on a two-dimensional ambient model: the flat torus
/// [0, 2pi)^2 foliated by circles {x} x S^1, or S^2 in polar coordinates
/// (cell-centred in the polar angle) foliated by latitude circles.
struct AmbientGrid {
  AmbientKind kind = AmbientKind::Torus;
  int n_quotient = 0;
  int n_leaf = 0;
  Eigen::VectorXd quotient_nodes;  // quotient coordinate of each grid row

  double h_quotient() const;
  double h_leaf() const;
};

AmbientGrid torus_grid(int n);
AmbientGrid sphere_grid(int n_polar, int n_azimuth);

/// Lifts u (given on the quotient domain) to the grid, constant along leaves;
/// rows are quotient indices, columns leaf indices.
Eigen::MatrixXd lift(const WeightedDomain& domain, const Field& u, const AmbientGrid& grid);

/// J'(U)V / |V|_{H^1} on the grid, with U the lift of u.
double ambient_derivative(const WeightedDomain& domain, const ProblemSpec& spec, const Field& u,
                          const AmbientGrid& grid, const Eigen::MatrixXd& V);

/// max |J'(U)V| over n_tests random non-invariant test functions V with unit
/// discrete H^1 norm, where U is the lift of u and J the grid energy.
double symmetric_criticality_check(const WeightedDomain& domain, const ProblemSpec& spec,
                                   const Field& u, const AmbientGrid& grid, int n_tests,
                                   std::uint64_t seed = 1);

/// max |<V - leaf average of V, U>_{L^2}| over random V with unit L^2 norm.
double orthogonality_shadow(const WeightedDomain& domain, const Field& u, const AmbientGrid& grid,
                            int n_tests, std::uint64_t seed = 1);

// Reports ------------------------------------------------------------------------

struct Check {
  std::string check;
  nlohmann::json inputs;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// value <= threshold
Check check_at_most(std::string name, nlohmann::json inputs, double value, double threshold);

}  // namespace foliated
