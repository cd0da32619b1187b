#include "foliated/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace foliated {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// r_i / m_i of the dual residual at interior nodes with positive mass, 0 elsewhere.
Eigen::VectorXd pointwise_residual(const WeightedDomain& domain, const SparseMatrix& stiffness,
                                   const Eigen::VectorXd& mass, const Field& b, const Field& c,
                                   double p, const Field& u) {
  const Eigen::VectorXd r =
      apply_stiffness(stiffness, u) +
      (mass.array() * (b.array() * u.array() - c.array() * nonlinearity(u, p).array())).matrix();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
  const Eigen::Index first = domain.periodic() ? 0 : 1;
  const Eigen::Index last = domain.periodic() ? u.size() - 1 : u.size() - 2;
  for (Eigen::Index i = first; i <= last; ++i)
    if (mass(i) > 0.0) out(i) = r(i) / mass(i);
  return out;
}

Eigen::VectorXd pointwise_residual(const WeightedDomain& domain, const Coefficient& b,
                                   const Coefficient& c, double p, const Field& u) {
  const Eigen::VectorXd mass = lumped_mass(domain);
  const Field bf = domain.nodes.unaryExpr(b);
  const Field cf = domain.nodes.unaryExpr(c);
  return pointwise_residual(domain, stiffness_matrix(domain), mass, bf, cf, p, u);
}

double signed_power(double x, double p) {
  return x == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(x), p - 1.0), x);
}

// Linear interpolation of nodal values, periodic when the domain is.
double interpolate(const WeightedDomain& domain, const Field& u, double t) {
  const auto& x = domain.nodes;
  const Eigen::Index n = x.size();
  if (domain.periodic()) {
    t = domain.lower + std::fmod(std::fmod(t - domain.lower, domain.length()) + domain.length(),
                                 domain.length());
    if (t < x(0)) t += domain.length();
    const auto it = std::upper_bound(x.data(), x.data() + n, t);
    const Eigen::Index hi = it - x.data();
    const Eigen::Index lo = hi - 1;
    const double xl = x(lo);
    const double xh = hi == n ? x(0) + domain.length() : x(hi);
    const double ul = u(lo);
    const double uh = hi == n ? u(0) : u(hi);
    const double s = (t - xl) / (xh - xl);
    return (1.0 - s) * ul + s * uh;
  }
  if (t <= x(0)) return u(0);
  if (t >= x(n - 1)) return u(n - 1);
  const Eigen::Index hi = std::upper_bound(x.data(), x.data() + n, t) - x.data();
  const Eigen::Index lo = hi - 1;
  const double s = (t - x(lo)) / (x(hi) - x(lo));
  if (s < 1e-12) return u(lo);
  if (s > 1.0 - 1e-12) return u(hi);
  return (1.0 - s) * u(lo) + s * u(hi);
}

// Sample family for the embedding ratio ------------------------------------------

double bump(double distance, double radius) {
  if (distance >= radius) return 0.0;
  const double z = distance / radius;
  return (1.0 - z * z) * (1.0 - z * z);
}

Field embedding_sample(const FoliationPreset& preset, const WeightedDomain& domain, int j,
                       std::uint64_t seed) {
  std::seed_seq seq{seed, static_cast<std::uint64_t>(j)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> octave(1, 5);

  const bool periodic = domain.periodic();
  const double T = domain.length();
  const double h = periodic ? T / domain.size() : T / (domain.size() - 1);
  Field u(domain.size());
  const int kind = j % 3;
  if (kind == 0) {
    std::vector<double> a(7), b(7);
    for (int k = 0; k < 7; ++k) {
      a[k] = normal(rng) / (1.0 + k);
      b[k] = normal(rng) / (1.0 + k);
    }
    const double freq = periodic ? 2.0 * kPi : kPi;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const double s = (domain.nodes(i) - domain.lower) / T;
      double v = 0.0;
      for (int k = 0; k < 7; ++k)
        v += a[k] * std::cos(k * freq * s) + (periodic ? b[k] * std::sin(k * freq * s) : 0.0);
      u(i) = v;
    }
    return u;
  }

  const double radius = std::min(0.5 * T, std::ldexp(h, octave(rng)));
  const bool left = preset.left_exponent > 0.0;
  const bool right = preset.right_exponent > 0.0;
  const double pick = unit(rng);
  double centre;
  if (kind == 1 && (left || right)) {
    centre = (left && (!right || pick < 0.5)) ? domain.lower : domain.upper;
  } else {
    centre = domain.lower + (0.1 + 0.8 * pick) * T;
  }
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    double d = std::abs(domain.nodes(i) - centre);
    if (periodic) d = std::min(d, T - d);
    u(i) = bump(d, radius);
  }
  return u;
}

// Dormand-Prince 5(4) ---------------------------------------------------------------

using State = Eigen::Vector2d;

struct Ode {
  Coefficient log_weight;
  Coefficient b;
  Coefficient c;
  double p;

  State operator()(double t, const State& y) const {
    return {y(1), -log_weight(t) * y(1) + b(t) * y(0) - c(t) * signed_power(y(0), p)};
  }
  double source(double t, double u) const { return b(t) * u - c(t) * signed_power(u, p); }
};

struct Trajectory {
  State end;
  int nodes = 0;
  std::vector<double> knots;
  std::vector<State> states;
  std::vector<State> slopes;
  std::vector<double> values;  // u at the requested output times
};

// `outputs` are sorted times in [t0, t1] that the steps land on exactly.
Trajectory integrate(const Ode& ode, double t0, double t1, State y, double hmax,
                     const ShootingOptions& options, bool dense,
                     const std::vector<double>& outputs = {}) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695,
                          e4 = b4 - 393.0 / 640, e5 = b5 - -92097.0 / 339200,
                          e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

  Trajectory out;
  double t = t0;
  State k1 = ode(t, y);
  if (dense) {
    out.knots.push_back(t);
    out.states.push_back(y);
    out.slopes.push_back(k1);
  }
  std::size_t next_out = 0;
  while (next_out < outputs.size() && outputs[next_out] <= t) {
    out.values.push_back(y(0));
    ++next_out;
  }
  int last_sign = (y(0) > 0) - (y(0) < 0);
  double h = std::min(hmax, 1e-3 * (t1 - t0));
  int steps = 0;
  while (t < t1) {
    require(++steps < 5'000'000, ErrorKind::NonConvergence, "shooting integration stalled");
    double target = t1;
    if (next_out < outputs.size()) target = std::min(target, outputs[next_out]);
    const double proposed = h;
    const bool lands = t + h >= target;
    if (lands) h = target - t;
    const State k2 = ode(t + h / 5, y + h * a21 * k1);
    const State k3 = ode(t + 3 * h / 10, y + h * (a31 * k1 + a32 * k2));
    const State k4 = ode(t + 4 * h / 5, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const State k5 = ode(t + 8 * h / 9, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const State k6 = ode(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const State next = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const State k7 = ode(t + h, next);
    const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double ratio = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double scale = options.atol + options.rtol * std::max(std::abs(y(i)), std::abs(next(i)));
      ratio = std::max(ratio, std::abs(err(i)) / scale);
    }
    if (!next.allFinite()) ratio = kInf;
    if (ratio <= 1.0) {
      t = lands ? target : t + h;
      y = next;
      while (next_out < outputs.size() && outputs[next_out] <= t) {
        out.values.push_back(y(0));
        ++next_out;
      }
      k1 = k7;
      const int s = (y(0) > 0) - (y(0) < 0);
      if (s != 0) {
        if (last_sign != 0 && s != last_sign) ++out.nodes;
        last_sign = s;
      }
      if (dense) {
        out.knots.push_back(t);
        out.states.push_back(y);
        out.slopes.push_back(k1);
      }
    }
    const double factor = ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
    h = std::min(hmax, h * (std::isfinite(ratio) ? factor : 0.1));
    if (lands && ratio <= 1.0) h = std::max(h, std::min(proposed, hmax));
    require(h > 1e-18 * (t1 - t0), ErrorKind::NonConvergence, "shooting step size underflow");
  }
  out.end = y;
  return out;
}

struct Shot {
  double flux = 0.0;
  int nodes = 0;
  double mismatch = 0.0;  // |u(T) - u(0)| on periodic quotients
  Trajectory trajectory;
  State initial;
  double series = 0.0;
  double end_series = 0.0;
  double start = 0.0;
  double stop = 0.0;
};

Shot shoot(const FoliationPreset& preset, const Ode& ode, double s, const ShootingOptions& options,
           bool dense) {
  const double T = preset.length();
  const bool periodic = preset.left == EndpointKind::Periodic;
  Shot shot;
  State y(s, 0.0);
  shot.start = preset.lower;
  if (!periodic && preset.left_exponent > 0.0) {
    const double dt = options.start_fraction * T;
    shot.series = ode.source(preset.lower, s) / (2.0 * (1.0 + preset.left_exponent));
    shot.start = preset.lower + dt;
    y = State(s + shot.series * dt * dt, 2.0 * shot.series * dt);
  }
  shot.stop = (!periodic && preset.right_exponent > 0.0) ? preset.upper - options.end_gap
                                                          : preset.upper;
  shot.initial = y;
  shot.trajectory = integrate(ode, shot.start, shot.stop, y, T / 2000.0, options, dense);
  const State& end = shot.trajectory.end;
  shot.nodes = shot.trajectory.nodes;
  if (periodic) {
    shot.flux = end(1);
    shot.mismatch = std::abs(end(0) - s);
    const int s0 = (s > 0) - (s < 0);
    const int s1 = (end(0) > 0) - (end(0) < 0);
    if (s0 != 0 && s1 != 0 && s0 != s1) ++shot.nodes;
  } else if (shot.stop < preset.upper) {
    // Regular solutions satisfy u ~ u(T) + a (T - t)^2 with the same series rule
    // as at the left end; the shooting function measures the departure from it.
    const double gap = preset.upper - shot.stop;
    shot.end_series = ode.source(preset.upper, end(0)) / (2.0 * (1.0 + preset.right_exponent));
    shot.flux = preset.weight(shot.stop) * (end(1) + 2.0 * shot.end_series * gap);
  } else {
    shot.flux = preset.weight(shot.stop) * end(1);
  }
  return shot;
}

ShootingSolution to_solution(const FoliationPreset& preset, const Ode& ode,
                             const ShootingOptions& options, double s, Shot shot) {
  ShootingSolution sol;
  sol.s = s;
  sol.nodes = shot.nodes;
  sol.flux = shot.flux;
  sol.lower = preset.lower;
  sol.upper = preset.upper;
  sol.periodic = preset.left == EndpointKind::Periodic;
  sol.knots = std::move(shot.trajectory.knots);
  sol.states = std::move(shot.trajectory.states);
  sol.slopes = std::move(shot.trajectory.slopes);
  sol.series_coefficient = shot.series;
  sol.start = shot.start;
  sol.stop = shot.stop;
  sol.end_coefficient = shot.end_series;
  const double hmax = preset.length() / 2000.0;
  sol.exact = [ode, options, hmax, start = shot.start, stop = shot.stop,
               initial = shot.initial](const std::vector<double>& times) {
    return integrate(ode, start, stop, initial, hmax, options, false, times).values;
  };
  return sol;
}

// Ambient grids ------------------------------------------------------------------------

struct GridForms {
  Eigen::VectorXd cond_quotient;  // between rows i and i+1 (last entry wraps on the torus)
  Eigen::VectorXd cond_leaf;      // between columns j and j+1 in row i
  Eigen::VectorXd mass;           // per node in row i
  bool wrap = false;
};

GridForms grid_forms(const AmbientGrid& g) {
  GridForms f;
  const int n = g.n_quotient;
  const double hq = g.h_quotient();
  const double hl = g.h_leaf();
  if (g.kind == AmbientKind::Torus) {
    f.wrap = true;
    f.cond_quotient = Eigen::VectorXd::Constant(n, hl / hq);
    f.cond_leaf = Eigen::VectorXd::Constant(n, hq / hl);
    f.mass = Eigen::VectorXd::Constant(n, hq * hl);
    return f;
  }
  f.cond_quotient.resize(n - 1);
  for (int i = 0; i + 1 < n; ++i) f.cond_quotient(i) = std::sin((i + 1) * hq) * hl / hq;
  f.cond_leaf.resize(n);
  f.mass.resize(n);
  for (int i = 0; i < n; ++i) {
    const double st = std::sin(g.quotient_nodes(i));
    f.cond_leaf(i) = hq / (st * hl);
    f.mass(i) = st * hq * hl;
  }
  return f;
}

// sum over edges of cond * dU * dV, plus sum of mass * (coef_u * V).
double grid_pairing(const GridForms& f, const Eigen::MatrixXd& U, const Eigen::MatrixXd& V) {
  const Eigen::Index n = U.rows();
  const Eigen::Index m = U.cols();
  double s = 0.0;
  for (Eigen::Index i = 0; i < f.cond_quotient.size(); ++i) {
    const Eigen::Index k = (i + 1) % n;
    s += f.cond_quotient(i) * ((U.row(k) - U.row(i)).array() * (V.row(k) - V.row(i)).array()).sum();
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::Index k = (j + 1) % m;
      s += f.cond_leaf(i) * (U(i, k) - U(i, j)) * (V(i, k) - V(i, j));
    }
  return s;
}

double grid_mass_pairing(const GridForms& f, const Eigen::MatrixXd& U, const Eigen::MatrixXd& V) {
  return (f.mass.asDiagonal() * (U.array() * V.array()).matrix()).sum();
}

Eigen::MatrixXd random_test_function(const AmbientGrid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::uniform_int_distribution<int> mode(0, 6);
  std::uniform_int_distribution<int> leaf_mode(1, 6);
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(g.n_quotient, g.n_leaf);
  const double qscale = g.kind == AmbientKind::Torus ? 1.0 : 2.0;  // full periods on [0, pi]
  for (int term = 0; term < 6; ++term) {
    const int kx = mode(rng);
    const int ky = term < 2 ? 0 : leaf_mode(rng);
    const double a = normal(rng);
    const double ph = phase(rng);
    for (int i = 0; i < g.n_quotient; ++i)
      for (int j = 0; j < g.n_leaf; ++j) {
        const double x = qscale * g.quotient_nodes(i);
        const double y = j * g.h_leaf();
        V(i, j) += a * std::cos(kx * x + ky * y + ph);
      }
  }
  return V;
}

}  // namespace

double strong_residual(const Problem& problem, const Field& u) {
  require(u.size() == problem.size(), ErrorKind::DimensionMismatch, "field does not match domain");
  return pointwise_residual(problem.domain(), problem.stiffness(), problem.mass(), problem.spec().b,
                            problem.spec().c, problem.p(), u)
      .cwiseAbs()
      .maxCoeff();
}

double transverse_exponent(double s, int d) {
  require(s >= 1.0 && d >= 1, ErrorKind::ParameterDomain, "need s >= 1 and d >= 1");
  if (s >= d) return kInf;
  return s * d / (d - s);
}

double critical_exponent(double s, int m, int kappa) {
  require(s >= 1.0, ErrorKind::ParameterDomain, "need s >= 1");
  require(kappa >= 1 && kappa < m, ErrorKind::ParameterDomain, "need 1 <= kappa < m");
  return transverse_exponent(s, m - kappa);
}

EmbeddingTable embedding_ratio(const FoliationPreset& preset, double p, int n_samples,
                               const std::vector<int>& resolutions, std::uint64_t seed,
                               double drift_tolerance) {
  require(p >= 1.0, ErrorKind::ParameterDomain, "need p >= 1");
  require(n_samples >= 1 && !resolutions.empty(), ErrorKind::InvalidArgument,
          "need samples and resolutions");
  EmbeddingTable table;
  table.p = p;
  for (int n : resolutions) {
    const WeightedDomain domain = discretize(preset, n);
    const Eigen::VectorXd mass = lumped_mass(domain);
    const SparseMatrix a = stiffness_matrix(domain);
    double best = 0.0;
    for (int j = 0; j < n_samples; ++j) {
      const Field u = embedding_sample(preset, domain, j, seed);
      const double h1 = std::sqrt(u.dot(a * u) + (mass.array() * u.array().square()).sum());
      if (h1 <= 0.0) continue;
      best = std::max(best, norm_lp(domain, u, p) / h1);
    }
    table.rows.push_back({n, best});
  }
  if (table.rows.size() >= 2) {
    const double prev = table.rows[table.rows.size() - 2].ratio;
    const double last = table.rows.back().ratio;
    table.drift = std::abs(last - prev) / prev;
    table.unbounded_trend = (last - prev) / prev > drift_tolerance;
  }
  return table;
}

double ShootingSolution::operator()(double t) const {
  if (periodic) {
    const double T = upper - lower;
    t = lower + std::fmod(std::fmod(t - lower, T) + T, T);
  }
  if (t <= start) {
    const double dt = t - lower;
    return s + series_coefficient * dt * dt;
  }
  if (t >= stop) {
    const double gap = upper - stop;
    const double rest = upper - t;
    return states.back()(0) + end_coefficient * (rest * rest - gap * gap);
  }
  const auto it = std::upper_bound(knots.begin(), knots.end(), t);
  const std::size_t hi = std::min<std::size_t>(it - knots.begin(), knots.size() - 1);
  const std::size_t lo = hi - 1;
  const double h = knots[hi] - knots[lo];
  const double z = (t - knots[lo]) / h;
  const double h00 = (1 + 2 * z) * (1 - z) * (1 - z);
  const double h10 = z * (1 - z) * (1 - z);
  const double h01 = z * z * (3 - 2 * z);
  const double h11 = z * z * (z - 1);
  return h00 * states[lo](0) + h10 * h * slopes[lo](0) + h01 * states[hi](0) +
         h11 * h * slopes[hi](0);
}

Field ShootingSolution::sample(const Eigen::VectorXd& t) const {
  const double T = upper - lower;
  Field out(t.size());
  std::vector<std::pair<double, Eigen::Index>> inside;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    double x = t(i);
    if (periodic) x = lower + std::fmod(std::fmod(x - lower, T) + T, T);
    if (x <= start || x >= stop || !exact) out(i) = (*this)(x);
    else inside.emplace_back(x, i);
  }
  if (inside.empty()) return out;
  std::sort(inside.begin(), inside.end());
  std::vector<double> times;
  times.reserve(inside.size());
  for (const auto& [x, i] : inside) times.push_back(x);
  const std::vector<double> values = exact(times);
  for (std::size_t k = 0; k < inside.size(); ++k) out(inside[k].second) = values[k];
  return out;
}

std::vector<ShootingSolution> shooting_oracle(const FoliationPreset& preset, const Coefficient& b,
                                              const Coefficient& c, double p, int target_nodes,
                                              const ShootingOptions& options) {
  require(p > 2.0, ErrorKind::ParameterDomain, "need p > 2");
  require(target_nodes >= 0, ErrorKind::InvalidArgument, "target_nodes must be nonnegative");
  require(options.scan >= 2 && options.s_max > options.s_min, ErrorKind::InvalidArgument,
          "bad shooting scan range");
  const Ode ode{preset.log_weight_derivative, b, c, p};
  const bool periodic = preset.left == EndpointKind::Periodic;

  std::vector<double> grid(options.scan);
  std::vector<Shot> shots;
  shots.reserve(options.scan);
  for (int k = 0; k < options.scan; ++k) {
    grid[k] = options.s_min + (options.s_max - options.s_min) * k / (options.scan - 1);
    shots.push_back(shoot(preset, ode, grid[k], options, false));
  }

  std::vector<ShootingSolution> found;
  for (int k = 0; k + 1 < options.scan; ++k) {
    const Shot& a = shots[k];
    const Shot& z = shots[k + 1];
    if (!(a.flux * z.flux <= 0.0)) continue;
    if (a.nodes != target_nodes && z.nodes != target_nodes) continue;
    double lo = grid[k];
    double hi = grid[k + 1];
    double flo = a.flux;
    for (int it = 0; it < 200 && hi - lo > 4e-16 * std::abs(hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = shoot(preset, ode, mid, options, false).flux;
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    const double s = 0.5 * (lo + hi);
    Shot final_shot = shoot(preset, ode, s, options, true);
    if (final_shot.nodes != target_nodes) continue;
    if (periodic && final_shot.mismatch > 1e-6 * std::max(1.0, std::abs(s))) continue;
    const bool seen = std::any_of(found.begin(), found.end(), [&](const ShootingSolution& f) {
      return std::abs(f.s - s) <= 1e-9 * std::max(1.0, std::abs(s));
    });
    if (!seen) found.push_back(to_solution(preset, ode, options, s, std::move(final_shot)));
  }
  require(!found.empty(), ErrorKind::NonConvergence,
          "no shooting bracket with " + std::to_string(target_nodes) + " sign changes in [" +
              std::to_string(options.s_min) + ", " + std::to_string(options.s_max) + "]");
  return found;
}

double oracle_residual(const FoliationPreset& preset, const Coefficient& b, const Coefficient& c,
                       double p, const ShootingSolution& solution, int resolution) {
  const WeightedDomain coarse = discretize(preset, resolution);
  const WeightedDomain fine = discretize(preset, 2 * resolution);
  const Eigen::VectorXd rc = pointwise_residual(coarse, b, c, p, solution.sample(coarse.nodes));
  const Eigen::VectorXd rf = pointwise_residual(fine, b, c, p, solution.sample(fine.nodes));
  double worst = 0.0;
  for (Eigen::Index i = 0; i < rc.size(); ++i) {
    if (rc(i) == 0.0 && rf(2 * i) == 0.0) continue;
    worst = std::max(worst, std::abs((4.0 * rf(2 * i) - rc(i)) / 3.0));
  }
  return worst;
}

double oracle_distance(const WeightedDomain& domain, const Field& u, const ShootingSolution& oracle) {
  require(u.size() == domain.size(), ErrorKind::DimensionMismatch, "field does not match domain");
  auto distance = [&](double shift) {
    const Field v = domain.nodes.unaryExpr([&](double t) { return oracle(t - shift); });
    return std::min((u - v).cwiseAbs().maxCoeff(), (u + v).cwiseAbs().maxCoeff());
  };
  if (!oracle.periodic) return distance(0.0);

  const int j = std::max(1, oracle.nodes / 2);
  const Field v0 = oracle.sample(domain.nodes);
  std::complex<double> cu = 0.0;
  std::complex<double> cv = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const std::complex<double> e = std::polar(1.0, -j * domain.nodes(i));
    cu += u(i) * e;
    cv += v0(i) * e;
  }
  const double base = (std::arg(cv) - std::arg(cu)) / j;
  double best_shift = 0.0;
  double best = kInf;
  for (int l = 0; l < 2 * j; ++l) {
    const double shift = base + kPi * l / j;
    const double d = distance(shift);
    if (d < best) {
      best = d;
      best_shift = shift;
    }
  }
  // Golden-section refinement within one mesh width.
  const double h = domain.length() / domain.size();
  double a = best_shift - h;
  double z = best_shift + h;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = z - g * (z - a);
  double x2 = a + g * (z - a);
  double f1 = distance(x1);
  double f2 = distance(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      z = x2;
      x2 = x1;
      f2 = f1;
      x1 = z - g * (z - a);
      f1 = distance(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (z - a);
      f2 = distance(x2);
    }
  }
  return std::min({best, f1, f2});
}

double oracle_energy(const FoliationPreset& preset, const Coefficient& b, const Coefficient& c,
                     double p, const ShootingSolution& solution, int resolution) {
  const int n = resolution + resolution % 2;
  const double h = preset.length() / n;
  const double eps = 1e-7 * preset.length();
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = preset.lower + i * h;
    const double tl = std::max(preset.lower, t - eps);
    const double tr = std::min(preset.upper, t + eps);
    const double du = (solution(tr) - solution(tl)) / (tr - tl);
    const double u = solution(t);
    const double density =
        preset.weight(t) * (0.5 * (du * du + b(t) * u * u) - c(t) * std::pow(std::abs(u), p) / p);
    const double coef = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += coef * density;
  }
  return sum * h / 3.0;
}

double AmbientGrid::h_quotient() const {
  return (kind == AmbientKind::Torus ? 2.0 * kPi : kPi) / n_quotient;
}

double AmbientGrid::h_leaf() const { return 2.0 * kPi / n_leaf; }

AmbientGrid torus_grid(int n) {
  require(n >= 4, ErrorKind::InvalidArgument, "torus grid needs n >= 4");
  AmbientGrid g;
  g.kind = AmbientKind::Torus;
  g.n_quotient = g.n_leaf = n;
  g.quotient_nodes = Eigen::VectorXd::LinSpaced(n, 0.0, 2.0 * kPi * (n - 1) / n);
  return g;
}

AmbientGrid sphere_grid(int n_polar, int n_azimuth) {
  require(n_polar >= 4 && n_azimuth >= 4, ErrorKind::InvalidArgument, "sphere grid is too coarse");
  AmbientGrid g;
  g.kind = AmbientKind::Sphere;
  g.n_quotient = n_polar;
  g.n_leaf = n_azimuth;
  g.quotient_nodes.resize(n_polar);
  for (int i = 0; i < n_polar; ++i) g.quotient_nodes(i) = (i + 0.5) * kPi / n_polar;
  return g;
}

Eigen::MatrixXd lift(const WeightedDomain& domain, const Field& u, const AmbientGrid& grid) {
  require(u.size() == domain.size(), ErrorKind::DimensionMismatch, "field does not match domain");
  Eigen::MatrixXd U(grid.n_quotient, grid.n_leaf);
  for (int i = 0; i < grid.n_quotient; ++i)
    U.row(i).setConstant(interpolate(domain, u, grid.quotient_nodes(i)));
  return U;
}

namespace {

Eigen::MatrixXd grid_source(const WeightedDomain& domain, const ProblemSpec& spec,
                            const AmbientGrid& grid, const Eigen::MatrixXd& U) {
  // Zeroth-order part of J'(U): b U - c |U|^{p-2} U.
  Eigen::MatrixXd source(U.rows(), U.cols());
  for (int i = 0; i < grid.n_quotient; ++i) {
    const double t = grid.quotient_nodes(i);
    const double b = interpolate(domain, spec.b, t);
    const double c = interpolate(domain, spec.c, t);
    for (int j = 0; j < grid.n_leaf; ++j) source(i, j) = b * U(i, j) - c * signed_power(U(i, j), spec.p);
  }
  return source;
}

}  // namespace

double ambient_derivative(const WeightedDomain& domain, const ProblemSpec& spec, const Field& u,
                          const AmbientGrid& grid, const Eigen::MatrixXd& V) {
  require(V.rows() == grid.n_quotient && V.cols() == grid.n_leaf, ErrorKind::DimensionMismatch,
          "test function does not match the grid");
  const GridForms forms = grid_forms(grid);
  const Eigen::MatrixXd U = lift(domain, u, grid);
  const Eigen::MatrixXd source = grid_source(domain, spec, grid, U);
  const double norm = std::sqrt(grid_pairing(forms, V, V) + grid_mass_pairing(forms, V, V));
  return (grid_pairing(forms, U, V) + grid_mass_pairing(forms, source, V)) / norm;
}

double symmetric_criticality_check(const WeightedDomain& domain, const ProblemSpec& spec,
                                   const Field& u, const AmbientGrid& grid, int n_tests,
                                   std::uint64_t seed) {
  require(n_tests >= 1, ErrorKind::InvalidArgument, "need at least one test function");
  const GridForms forms = grid_forms(grid);
  const Eigen::MatrixXd U = lift(domain, u, grid);
  const Eigen::MatrixXd source = grid_source(domain, spec, grid, U);
  std::seed_seq seq{seed, std::uint64_t{7}};
  std::mt19937_64 rng(seq);
  double worst = 0.0;
  for (int k = 0; k < n_tests; ++k) {
    const Eigen::MatrixXd V = random_test_function(grid, rng);
    const double norm = std::sqrt(grid_pairing(forms, V, V) + grid_mass_pairing(forms, V, V));
    const double value = grid_pairing(forms, U, V) + grid_mass_pairing(forms, source, V);
    worst = std::max(worst, std::abs(value) / norm);
  }
  return worst;
}

double orthogonality_shadow(const WeightedDomain& domain, const Field& u, const AmbientGrid& grid,
                            int n_tests, std::uint64_t seed) {
  const GridForms forms = grid_forms(grid);
  const Eigen::MatrixXd U = lift(domain, u, grid);
  std::seed_seq seq{seed, std::uint64_t{11}};
  std::mt19937_64 rng(seq);
  double worst = 0.0;
  for (int k = 0; k < n_tests; ++k) {
    Eigen::MatrixXd V = random_test_function(grid, rng);
    V /= std::sqrt(grid_mass_pairing(forms, V, V));
    const Eigen::VectorXd leaf_mean = V.rowwise().mean();
    const Eigen::MatrixXd f = V.colwise() - leaf_mean;
    worst = std::max(worst, std::abs(grid_mass_pairing(forms, f, U)));
  }
  return worst;
}

Check check_at_most(std::string name, nlohmann::json inputs, double value, double threshold) {
  Check c;
  c.check = std::move(name);
  c.inputs = std::move(inputs);
  c.value = value;
  c.threshold = threshold;
  c.pass = std::isfinite(value) && value <= threshold;
  return c;
}

}  // namespace foliated
