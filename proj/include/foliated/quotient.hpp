#pragma once

#include "foliated/core.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace foliated {

enum class EndpointKind { SingularLeaf, Periodic, Regular };

/// How the nodal samples are turned into a quadrature rule.
///  Trapezoid: nodes include both interval ends (analytic presets).
///  Midpoint:  nodes are bin midpoints of [lower, upper] (Monte-Carlo domains).
enum class Quadrature { Trapezoid, Midpoint };

const char* to_string(EndpointKind kind);
EndpointKind endpoint_kind_from_string(const std::string& s);

/// The leaf space M/F as a weighted interval (or circle) carrying the
/// pushforward of the Riemannian volume.
struct WeightedDomain {
  std::string name;
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  Eigen::VectorXd standard_error;  // empty unless estimated by sampling
  double lower = 0.0;
  double upper = 0.0;
  EndpointKind left = EndpointKind::Regular;
  EndpointKind right = EndpointKind::Regular;
  Quadrature quadrature = Quadrature::Trapezoid;
  int ambient_dim = 0;
  int kappa = 0;
  double volume = 0.0;  // vol(M) as supplied by the registry or the user

  Eigen::Index size() const { return nodes.size(); }
  double length() const { return upper - lower; }
  bool periodic() const { return left == EndpointKind::Periodic; }

  /// Quadrature widths q_i; integrate(f) = sum_i q_i w_i f_i.
  Eigen::VectorXd cell_widths() const;

  /// Throws on broken invariants (ordering, weight signs, sizes).
  void validate() const;

  /// Minimal leaf dimension is at least one (points as leaves excluded).
  bool has_positive_dimensional_leaves() const { return kappa >= 1; }
};

/// Analytic description of a cohomogeneity-one quotient.
struct FoliationPreset {
  std::string id;
  std::string construction;  // homogeneous / isoparametric / RFKM / product
  int ambient_dim = 0;
  int kappa = 0;
  double lower = 0.0;
  double upper = 0.0;
  EndpointKind left = EndpointKind::Regular;
  EndpointKind right = EndpointKind::Regular;
  double volume = 0.0;
  std::function<double(double)> weight;
  /// d/dt log w(t); used by the shooting oracle.
  std::function<double(double)> log_weight_derivative;
  /// Exponents a with w(t) ~ (t - lower)^a, w(t) ~ (upper - t)^a near the ends.
  double left_exponent = 0.0;
  double right_exponent = 0.0;
  std::function<double(double)> b;
  std::function<double(double)> c;

  double length() const { return upper - lower; }
};

/// Parses ids like "suspension-sphere(2)", "okon-sphere(2,2)", "torus-factor",
/// "fkm(2,2)" (q, copies).
FoliationPreset get_preset(const std::string& id);

/// Registry listing: ids with their default parameters.
std::vector<std::string> preset_ids();

WeightedDomain make_preset(const std::string& id, int resolution);
WeightedDomain discretize(const FoliationPreset& preset, int resolution);

/// Quadrature of f against the pushforward measure.
double integrate(const WeightedDomain& domain, const Field& f);

// Monte-Carlo pushforward ----------------------------------------------------

using PointSampler = std::function<Eigen::VectorXd(std::mt19937_64&)>;
using QuotientMap = std::function<double(const Eigen::VectorXd&)>;

/// Uniform samples of S^{n-1} in R^n.
PointSampler uniform_sphere_sampler(int n);

struct Histogram {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::int64_t> counts;
  std::int64_t samples = 0;
  double volume = 0.0;

  int bins() const { return static_cast<int>(counts.size()); }
  double bin_width() const { return (upper - lower) / bins(); }
  double midpoint(int i) const { return lower + (i + 0.5) * bin_width(); }
  /// Density of the pushforward measure, normalised to total mass `volume`.
  Eigen::VectorXd density() const;
  /// Binomial standard error of each density value.
  Eigen::VectorXd standard_error() const;
  int occupied_bins() const;
};

struct PushforwardOptions {
  int bins = 200;
  std::int64_t samples = 1'000'000;
  std::uint64_t seed = 1;
  int batches = 8;  // independent streams, fixed so results are reproducible
};

/// Histogram of quotient_map over `samples` ambient points on [lower, upper].
/// Values outside the range (or non-finite) are rejected as unbounded.
Histogram pushforward_histogram(const PointSampler& sampler, const QuotientMap& quotient_map,
                                double lower, double upper, double volume,
                                const PushforwardOptions& options);

struct DomainMeta {
  std::string name;
  int ambient_dim = 0;
  int kappa = 0;
  EndpointKind left = EndpointKind::Regular;
  EndpointKind right = EndpointKind::Regular;
};

/// Midpoint-node domain from a histogram; empty interior bins are an error.
WeightedDomain to_domain(const Histogram& histogram, const DomainMeta& meta);

WeightedDomain pushforward_mc(const PointSampler& sampler, const QuotientMap& quotient_map,
                              double lower, double upper, double volume, const DomainMeta& meta,
                              const PushforwardOptions& options);

}  // namespace foliated
