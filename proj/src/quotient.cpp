#include "foliated/quotient.hpp"

#include "foliated/clifford.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

namespace foliated {

namespace {

constexpr double kPi = std::numbers::pi;

struct ParsedId {
  std::string name;
  std::vector<int> args;
};

ParsedId parse_id(const std::string& id) {
  ParsedId parsed;
  const auto open = id.find('(');
  if (open == std::string::npos) {
    parsed.name = id;
    return parsed;
  }
  const auto close = id.find(')', open);
  require(close != std::string::npos && close == id.size() - 1, ErrorKind::UnknownPreset,
          "malformed preset id '" + id + "'");
  parsed.name = id.substr(0, open);
  std::stringstream list(id.substr(open + 1, close - open - 1));
  std::string item;
  while (std::getline(list, item, ',')) {
    try {
      std::size_t used = 0;
      parsed.args.push_back(std::stoi(item, &used));
      require(used == item.size(), ErrorKind::UnknownPreset, "bad preset argument '" + item + "'");
    } catch (const std::logic_error&) {
      fail(ErrorKind::UnknownPreset, "bad preset argument '" + item + "' in '" + id + "'");
    }
  }
  return parsed;
}

EndpointKind end_kind(double exponent) {
  return exponent > 0.0 ? EndpointKind::SingularLeaf : EndpointKind::Regular;
}

FoliationPreset suspension_sphere(int m) {
  require(m >= 2, ErrorKind::UnknownPreset, "suspension-sphere needs m >= 2");
  FoliationPreset p;
  p.id = "suspension-sphere(" + std::to_string(m) + ")";
  p.construction = "homogeneous";
  p.ambient_dim = m;
  p.kappa = 0;  // the two poles are point leaves
  p.lower = 0.0;
  p.upper = kPi;
  p.left = p.right = EndpointKind::SingularLeaf;
  p.volume = sphere_volume(m);
  const double leaf = sphere_volume(m - 1);
  const double a = m - 1;
  p.weight = [leaf, a](double t) { return leaf * std::pow(std::sin(t), a); };
  p.log_weight_derivative = [a](double t) { return a * std::cos(t) / std::sin(t); };
  p.left_exponent = p.right_exponent = a;
  return p;
}

FoliationPreset okon_sphere(int k, int n) {
  require(k >= 2 && n >= 2, ErrorKind::UnknownPreset, "okon-sphere needs k, n >= 2");
  FoliationPreset p;
  p.id = "okon-sphere(" + std::to_string(k) + "," + std::to_string(n) + ")";
  p.construction = "homogeneous";
  p.ambient_dim = k + n - 1;
  p.kappa = std::min(k, n) - 1;
  p.lower = 0.0;
  p.upper = kPi / 2.0;
  p.volume = sphere_volume(k + n - 1);
  const double scale = sphere_volume(k - 1) * sphere_volume(n - 1);
  const double ak = k - 1;
  const double an = n - 1;
  // t = arccos |x_{1..k}|; t = 0 is the leaf S^{k-1} x {0}.
  p.weight = [scale, ak, an](double t) {
    return scale * std::pow(std::cos(t), ak) * std::pow(std::sin(t), an);
  };
  p.log_weight_derivative = [ak, an](double t) {
    return -ak * std::tan(t) + an * std::cos(t) / std::sin(t);
  };
  p.left_exponent = an;
  p.right_exponent = ak;
  p.left = end_kind(an);
  p.right = end_kind(ak);
  return p;
}

FoliationPreset torus_factor() {
  FoliationPreset p;
  p.id = "torus-factor";
  p.construction = "product";
  p.ambient_dim = 2;
  p.kappa = 1;
  p.lower = 0.0;
  p.upper = 2.0 * kPi;
  p.left = p.right = EndpointKind::Periodic;
  p.volume = 4.0 * kPi * kPi;
  p.weight = [](double) { return 2.0 * kPi; };
  p.log_weight_derivative = [](double) { return 0.0; };
  return p;
}

FoliationPreset fkm(int q, int copies) {
  require(copies >= 1, ErrorKind::UnknownPreset, "fkm needs copies >= 1");
  const int n = copies * clifford_minimal_dimension(q);
  const int m1 = q;
  const int m2 = n / 2 - q - 1;
  require(m2 >= 0, ErrorKind::Degenerate,
          "fkm(" + std::to_string(q) + "," + std::to_string(copies) +
              ") has constant f o pi_rho (one-leaf foliation)");
  FoliationPreset p;
  p.id = "fkm(" + std::to_string(q) + "," + std::to_string(copies) + ")";
  p.construction = "RFKM";
  p.ambient_dim = n - 1;
  p.kappa = std::min(n - 2 - m1, n - 2 - m2);
  p.lower = 0.0;
  p.upper = kPi / 4.0;
  p.volume = sphere_volume(n - 1);
  const double a = m1;
  const double b = m2;
  const double norm = 0.25 * std::beta(0.5 * (a + 1.0), 0.5 * (b + 1.0));
  const double scale = p.volume / norm;
  p.weight = [scale, a, b](double t) {
    return scale * std::pow(std::sin(2.0 * t), a) * std::pow(std::cos(2.0 * t), b);
  };
  p.log_weight_derivative = [a, b](double t) {
    return 2.0 * a * std::cos(2.0 * t) / std::sin(2.0 * t) - 2.0 * b * std::tan(2.0 * t);
  };
  p.left_exponent = a;
  p.right_exponent = b;
  p.left = end_kind(a);
  p.right = end_kind(b);
  return p;
}

}  // namespace

const char* to_string(EndpointKind kind) {
  switch (kind) {
    case EndpointKind::SingularLeaf: return "singular-leaf";
    case EndpointKind::Periodic: return "periodic";
    case EndpointKind::Regular: return "regular";
  }
  return "regular";
}

EndpointKind endpoint_kind_from_string(const std::string& s) {
  if (s == "singular-leaf") return EndpointKind::SingularLeaf;
  if (s == "periodic") return EndpointKind::Periodic;
  if (s == "regular") return EndpointKind::Regular;
  fail(ErrorKind::InvalidArgument, "unknown endpoint kind '" + s + "'");
}

Eigen::VectorXd WeightedDomain::cell_widths() const {
  const Eigen::Index n = size();
  Eigen::VectorXd q(n);
  if (periodic()) {
    const double period = length();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double prev = i == 0 ? nodes(n - 1) - period : nodes(i - 1);
      const double next = i == n - 1 ? nodes(0) + period : nodes(i + 1);
      q(i) = 0.5 * (next - prev);
    }
    return q;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double left_edge;
    double right_edge;
    if (quadrature == Quadrature::Midpoint) {
      left_edge = i == 0 ? lower : 0.5 * (nodes(i - 1) + nodes(i));
      right_edge = i == n - 1 ? upper : 0.5 * (nodes(i) + nodes(i + 1));
    } else {
      left_edge = i == 0 ? nodes(0) : 0.5 * (nodes(i - 1) + nodes(i));
      right_edge = i == n - 1 ? nodes(n - 1) : 0.5 * (nodes(i) + nodes(i + 1));
    }
    q(i) = right_edge - left_edge;
  }
  return q;
}

void WeightedDomain::validate() const {
  const Eigen::Index n = size();
  require(n >= 3, ErrorKind::InvalidArgument, "domain needs at least 3 nodes");
  require(weights.size() == n, ErrorKind::DimensionMismatch, "weights and nodes differ in size");
  require(standard_error.size() == 0 || standard_error.size() == n, ErrorKind::DimensionMismatch,
          "standard errors and nodes differ in size");
  require(upper > lower, ErrorKind::InvalidArgument, "empty quotient interval");
  require((left == EndpointKind::Periodic) == (right == EndpointKind::Periodic),
          ErrorKind::InvalidArgument, "periodic ends must come in pairs");
  for (Eigen::Index i = 0; i < n; ++i) {
    require(std::isfinite(nodes(i)) && std::isfinite(weights(i)), ErrorKind::InvalidArgument,
            "non-finite node or weight");
    require(weights(i) >= 0.0, ErrorKind::InvalidArgument, "negative weight");
    if (i > 0)
      require(nodes(i) > nodes(i - 1), ErrorKind::InvalidArgument, "nodes not increasing");
    const bool interior = periodic() || (i > 0 && i < n - 1);
    if (interior)
      require(weights(i) > 0.0, ErrorKind::InvalidArgument,
              "interior weight must be positive (node " + std::to_string(i) + ")");
  }
  const double slack = 1e-12 * length();
  require(nodes(0) >= lower - slack && nodes(n - 1) <= upper + slack, ErrorKind::InvalidArgument,
          "nodes outside the quotient interval");
  if (periodic())
    require(nodes(n - 1) < upper - slack, ErrorKind::InvalidArgument,
            "periodic domains must not repeat the wrap node");
  require(ambient_dim >= 1 && kappa >= 0 && kappa < ambient_dim, ErrorKind::InvalidArgument,
          "leaf dimension must satisfy 0 <= kappa < m");
  require(volume > 0.0, ErrorKind::InvalidArgument, "ambient volume must be positive");
}

FoliationPreset get_preset(const std::string& id) {
  const ParsedId parsed = parse_id(id);
  const auto& a = parsed.args;
  auto arity = [&](std::size_t n) {
    require(a.size() == n, ErrorKind::UnknownPreset,
            "preset '" + parsed.name + "' takes " + std::to_string(n) + " argument(s)");
  };
  FoliationPreset preset;
  if (parsed.name == "suspension-sphere") {
    arity(1);
    preset = suspension_sphere(a[0]);
  } else if (parsed.name == "okon-sphere") {
    arity(2);
    preset = okon_sphere(a[0], a[1]);
  } else if (parsed.name == "torus-factor") {
    arity(0);
    preset = torus_factor();
  } else if (parsed.name == "fkm") {
    arity(2);
    preset = fkm(a[0], a[1]);
  } else if (parsed.name == "custom") {
    fail(ErrorKind::UnknownPreset, "custom quotients are read from a domain file");
  } else {
    fail(ErrorKind::UnknownPreset, "unknown preset '" + id + "'");
  }
  preset.b = [](double) { return 2.0; };
  preset.c = [](double) { return 1.0; };
  return preset;
}

std::vector<std::string> preset_ids() {
  return {"suspension-sphere(2)", "okon-sphere(2,2)", "torus-factor", "fkm(1,2)", "fkm(2,2)",
          "custom"};
}

WeightedDomain discretize(const FoliationPreset& preset, int resolution) {
  require(resolution >= 8, ErrorKind::InvalidArgument, "resolution must be at least 8");
  WeightedDomain d;
  d.name = preset.id;
  d.lower = preset.lower;
  d.upper = preset.upper;
  d.left = preset.left;
  d.right = preset.right;
  d.quadrature = Quadrature::Trapezoid;
  d.ambient_dim = preset.ambient_dim;
  d.kappa = preset.kappa;
  d.volume = preset.volume;
  const bool periodic = preset.left == EndpointKind::Periodic;
  const Eigen::Index n = periodic ? resolution : resolution + 1;
  const double h = preset.length() / resolution;
  d.nodes.resize(n);
  d.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.nodes(i) = preset.lower + static_cast<double>(i) * h;
    d.weights(i) = std::max(0.0, preset.weight(d.nodes(i)));
  }
  if (!periodic) {
    d.nodes(n - 1) = preset.upper;
    // Exact zeros at the singular leaves rather than pow round-off.
    if (preset.left_exponent > 0.0) d.weights(0) = 0.0;
    d.weights(n - 1) = preset.right_exponent > 0.0 ? 0.0 : preset.weight(preset.upper);
  }
  d.validate();
  return d;
}

WeightedDomain make_preset(const std::string& id, int resolution) {
  return discretize(get_preset(id), resolution);
}

double integrate(const WeightedDomain& domain, const Field& f) {
  require(f.size() == domain.size(), ErrorKind::DimensionMismatch,
          "field has " + std::to_string(f.size()) + " values, domain has " +
              std::to_string(domain.size()) + " nodes");
  return (domain.cell_widths().array() * domain.weights.array() * f.array()).sum();
}

PointSampler uniform_sphere_sampler(int n) {
  require(n >= 2, ErrorKind::InvalidArgument, "sphere sampler needs n >= 2");
  return [n](std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd x(n);
    double norm2 = 0.0;
    do {
      for (int i = 0; i < n; ++i) x(i) = normal(rng);
      norm2 = x.squaredNorm();
    } while (norm2 < 1e-24);
    return Eigen::VectorXd(x / std::sqrt(norm2));
  };
}

Eigen::VectorXd Histogram::density() const {
  Eigen::VectorXd d(bins());
  const double scale = volume / (static_cast<double>(samples) * bin_width());
  for (int i = 0; i < bins(); ++i) d(i) = scale * static_cast<double>(counts[i]);
  return d;
}

Eigen::VectorXd Histogram::standard_error() const {
  Eigen::VectorXd e(bins());
  const double s = static_cast<double>(samples);
  const double scale = volume / (s * bin_width());
  for (int i = 0; i < bins(); ++i) {
    const double k = static_cast<double>(counts[i]);
    e(i) = scale * std::sqrt(k * (1.0 - k / s));
  }
  return e;
}

int Histogram::occupied_bins() const {
  return static_cast<int>(std::count_if(counts.begin(), counts.end(), [](auto k) { return k > 0; }));
}

Histogram pushforward_histogram(const PointSampler& sampler, const QuotientMap& quotient_map,
                                double lower, double upper, double volume,
                                const PushforwardOptions& options) {
  require(upper > lower, ErrorKind::InvalidArgument, "quotient map range is empty");
  require(options.bins >= 1, ErrorKind::InvalidArgument, "need at least one bin");
  require(options.samples >= 10'000, ErrorKind::UnderSampled, "need at least 1e4 samples");
  require(volume > 0.0, ErrorKind::InvalidArgument, "ambient volume must be positive");
  const int batches = std::max(1, options.batches);

  Histogram h;
  h.lower = lower;
  h.upper = upper;
  h.samples = options.samples;
  h.volume = volume;
  h.counts.assign(options.bins, 0);

  std::vector<std::vector<std::int64_t>> partial(batches, std::vector<std::int64_t>(options.bins, 0));
  std::vector<std::exception_ptr> errors(batches);
  const double width = (upper - lower) / options.bins;
  const double slack = 1e-12 * (upper - lower);

  auto run_batch = [&](int b) {
    try {
      std::seed_seq seq{static_cast<std::uint64_t>(options.seed), static_cast<std::uint64_t>(b)};
      std::mt19937_64 rng(seq);
      std::int64_t count = options.samples / batches + (b < options.samples % batches ? 1 : 0);
      auto& local = partial[b];
      for (std::int64_t s = 0; s < count; ++s) {
        const double v = quotient_map(sampler(rng));
        if (!std::isfinite(v) || v < lower - slack || v > upper + slack)
          fail(ErrorKind::InvalidArgument, "quotient map value " + std::to_string(v) +
                                               " outside [" + std::to_string(lower) + ", " +
                                               std::to_string(upper) + "] (unbounded map)");
        int bin = static_cast<int>(std::floor((v - lower) / width));
        bin = std::clamp(bin, 0, options.bins - 1);
        ++local[bin];
      }
    } catch (...) {
      errors[b] = std::current_exception();
    }
  };

  std::vector<std::thread> workers;
  workers.reserve(batches);
  for (int b = 0; b < batches; ++b) workers.emplace_back(run_batch, b);
  for (auto& w : workers) w.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (const auto& local : partial)
    for (int i = 0; i < options.bins; ++i) h.counts[i] += local[i];
  return h;
}

WeightedDomain to_domain(const Histogram& histogram, const DomainMeta& meta) {
  const int bins = histogram.bins();
  for (int i = 1; i + 1 < bins; ++i)
    require(histogram.counts[i] > 0, ErrorKind::UnderSampled,
            "empty interior bin " + std::to_string(i) + " of " + std::to_string(bins));
  WeightedDomain d;
  d.name = meta.name;
  d.lower = histogram.lower;
  d.upper = histogram.upper;
  d.left = meta.left;
  d.right = meta.right;
  d.quadrature = Quadrature::Midpoint;
  d.ambient_dim = meta.ambient_dim;
  d.kappa = meta.kappa;
  d.volume = histogram.volume;
  d.nodes.resize(bins);
  for (int i = 0; i < bins; ++i) d.nodes(i) = histogram.midpoint(i);
  d.weights = histogram.density();
  d.standard_error = histogram.standard_error();
  d.validate();
  return d;
}

WeightedDomain pushforward_mc(const PointSampler& sampler, const QuotientMap& quotient_map,
                              double lower, double upper, double volume, const DomainMeta& meta,
                              const PushforwardOptions& options) {
  return to_domain(pushforward_histogram(sampler, quotient_map, lower, upper, volume, options), meta);
}

}  // namespace foliated
