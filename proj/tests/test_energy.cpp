#include <doctest.h>

#include "foliated/energy.hpp"

#include <cmath>
#include <random>

using namespace foliated;

namespace {

using Fn = std::function<double(double)>;

Fn constant(double v) {
  return [v](double) { return v; };
}

Field random_field(const WeightedDomain& d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Field u = Field::Constant(d.size(), normal(rng));
  for (int k = 1; k <= 6; ++k) u += (normal(rng) / k) * (k * d.nodes.array() + normal(rng)).cos().matrix();
  return u;
}

Problem problem_on(const std::string& id, const Fn& b, const Fn& c, double p = 4.0, int n = 256,
                   std::optional<double> theta = std::nullopt) {
  const WeightedDomain d = make_preset(id, n);
  return Problem(d, make_spec(d, b, c, p, theta));
}

const char* kPresets[] = {"suspension-sphere(2)", "okon-sphere(2,2)", "torus-factor"};

}  // namespace

TEST_CASE("energy of simple fields") {
  const Problem pr = problem_on("okon-sphere(2,2)", constant(1.0), constant(1.0));
  CHECK(energy(pr, Field::Zero(pr.size())) == 0.0);
  const double V = integrate(pr.domain(), Field::Ones(pr.size()));
  for (double a : {0.3, 1.0, 1.7}) {
    const Field u = Field::Constant(pr.size(), a);
    CHECK(energy(pr, u) == doctest::Approx(0.5 * a * a * V - 0.25 * a * a * a * a * V).epsilon(1e-12));
  }
}

TEST_CASE("energy on the Nehari manifold") {
  std::mt19937_64 rng(3);
  for (const char* id : kPresets) {
    const Problem pr = problem_on(id, [](double t) { return 2.0 + 0.3 * std::cos(t); },
                                  [](double t) { return 1.0 + 0.2 * std::sin(t); }, 3.6);
    for (int k = 0; k < 10; ++k) {
      const NehariPoint np = project_nehari(pr, random_field(pr.domain(), rng));
      const double cp = std::pow(norm_cp(pr, np.field), pr.p());
      CHECK(np.energy == doctest::Approx((pr.p() - 2) / (2 * pr.p()) * cp).epsilon(1e-12));
      CHECK(np.energy > 0.0);
      CHECK(std::abs(np.nehari_residual) <= 1e-12);
    }
  }
}

TEST_CASE("derivative identities") {
  std::mt19937_64 rng(4);
  const Problem pr = problem_on("suspension-sphere(2)", constant(2.0), constant(1.0));
  for (int k = 0; k < 10; ++k) {
    const Field u = random_field(pr.domain(), rng);
    const double expect = inner_b(pr, u, u) - std::pow(norm_cp(pr, u), 4.0);
    CHECK(derivative(pr, u, u) == doctest::Approx(expect).epsilon(1e-11));
  }
  const Field star = Field::Constant(pr.size(), std::sqrt(2.0));
  for (int k = 0; k < 10; ++k) {
    const Field v = random_field(pr.domain(), rng);
    CHECK(std::abs(derivative(pr, star, v)) <= 1e-12 * norm_theta(pr, v));
  }
  CHECK(compute_gradient(pr, star).norm <= 1e-12);
}

TEST_CASE("centered differences converge at second order") {
  std::mt19937_64 rng(5);
  const Problem pr = problem_on("okon-sphere(2,2)", constant(2.0), constant(1.0), 3.3);
  for (int k = 0; k < 10; ++k) {
    const Field u = random_field(pr.domain(), rng), v = random_field(pr.domain(), rng);
    const double exact = derivative(pr, u, v);
    std::vector<double> err;
    for (double eps : {1e-2, 5e-3, 2.5e-3}) {
      const double fd = energy_difference(pr, u - eps * v, u + eps * v) / (2 * eps);
      err.push_back(std::abs(fd - exact));
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.05));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.05));
  }
}

TEST_CASE("energy_difference avoids cancellation") {
  std::mt19937_64 rng(6);
  const Problem pr = problem_on("torus-factor", constant(2.0), constant(1.0));
  const Field u = random_field(pr.domain(), rng), v = random_field(pr.domain(), rng);
  const Field w = u + 1e-3 * v;
  CHECK(energy_difference(pr, u, w) == doctest::Approx(energy(pr, w) - energy(pr, u)).epsilon(1e-8));
  // Far below the round-off of J itself the difference is still first-order accurate.
  const Field tiny = u + 1e-12 * v;
  const Field delta = tiny - u;
  CHECK(energy_difference(pr, u, tiny) == doctest::Approx(derivative(pr, u, delta)).epsilon(1e-6));
}

TEST_CASE("L and G operators") {
  std::mt19937_64 rng(7);
  // theta approaching b from above sends L to zero linearly.
  const Problem near = problem_on("suspension-sphere(2)", constant(2.0), constant(1.0), 4.0, 256, 2.0 + 1e-9);
  const Field u = random_field(near.domain(), rng);
  CHECK(norm_theta(near, apply_L(near, u)) <= 2e-9 * norm_theta(near, u));

  for (const char* id : kPresets) {
    const Problem pr = problem_on(id, [](double t) { return 2.0 + 0.5 * std::cos(t); }, constant(1.0));
    const double bound = (pr.theta() - pr.spec().mu) / (pr.theta() + pr.spec().mu);
    for (int k = 0; k < 20; ++k) {
      const Field w = random_field(pr.domain(), rng);
      CHECK(norm_theta(pr, apply_L(pr, w)) <= bound * norm_theta(pr, w) * (1 + 1e-12));
      CHECK(apply_G(pr, w.cwiseAbs()).minCoeff() >= -1e-14);
    }
  }
}

TEST_CASE("constants attain the theta contraction bound") {
  // b = 1 gives mu = 1, and L acts on constants as (theta - 1) / theta,
  // which exceeds (theta - mu) / (theta + mu) for every theta > 1.
  for (double theta : {1.5, 3.0}) {
    const Problem pr = problem_on("okon-sphere(2,2)", constant(1.0), constant(1.0), 4.0, 256, theta);
    const Field one = Field::Ones(pr.size());
    const double ratio = norm_theta(pr, apply_L(pr, one)) / norm_theta(pr, one);
    CHECK(ratio == doctest::Approx((theta - 1.0) / theta).epsilon(1e-10));
    CHECK(ratio <= (theta - pr.spec().mu) / theta * (1 + 1e-9));
    CHECK(ratio > (theta - pr.spec().mu) / (theta + pr.spec().mu));
  }
}

TEST_CASE("gradient is the Riesz representative of J'") {
  std::mt19937_64 rng(8);
  const Problem pr = problem_on("okon-sphere(2,2)", constant(2.0), constant(1.0), 4.0, 128);
  CHECK(gradient_theta(pr, Field::Zero(pr.size())).cwiseAbs().maxCoeff() == 0.0);
  for (int k = 0; k < 5; ++k) {
    const Field u = random_field(pr.domain(), rng);
    const Field g = gradient_theta(pr, u);
    const Field direct = u - apply_L(pr, u) - apply_G(pr, u);
    CHECK((g - direct).cwiseAbs().maxCoeff() <= 1e-10 * (1 + u.cwiseAbs().maxCoeff()));
    double worst = 0.0;
    for (Eigen::Index i = 0; i < pr.size(); ++i) {
      const Field e = Field::Unit(pr.size(), i);
      worst = std::max(worst, std::abs(inner_theta(pr, g, e) - derivative(pr, u, e)));
    }
    CHECK(worst <= 1e-10);
    const Gradient gr = compute_gradient(pr, u);
    CHECK(gr.norm == doctest::Approx(norm_theta(pr, g)).epsilon(1e-10));
  }
}

TEST_CASE("Nehari scaling") {
  std::mt19937_64 rng(9);
  const Problem pr = problem_on("suspension-sphere(2)", constant(2.0), constant(1.0), 3.0);
  for (int k = 0; k < 10; ++k) {
    const Field u = random_field(pr.domain(), rng);
    const NehariPoint np = project_nehari(pr, u);
    CHECK(nehari_scale(pr, np.field) == doctest::Approx(1.0).epsilon(1e-12));
    for (double lambda : {0.1, 10.0}) {
      const NehariPoint scaled = project_nehari(pr, lambda * u);
      CHECK((scaled.field - np.field).cwiseAbs().maxCoeff() <= 1e-12 * np.field.cwiseAbs().maxCoeff());
      CHECK(nehari_scale(pr, lambda * u) == doctest::Approx(nehari_scale(pr, u) / lambda).epsilon(1e-12));
    }
    for (int i = 0; i <= 60; ++i) {
      const double s = 3.0 * i / 60;
      CHECK(energy(pr, s * np.field) <= np.energy * (1 + 1e-13));
    }
  }
  CHECK_THROWS_AS(nehari_scale(pr, Field::Zero(pr.size())), Error);
}

TEST_CASE("nonlinearity is odd") {
  Field u(4);
  u << -2.0, 0.0, 0.5, 3.0;
  const Field n = nonlinearity(u, 4.0);
  CHECK(n(0) == doctest::Approx(-8.0));
  CHECK(n(1) == 0.0);
  CHECK(n(2) == doctest::Approx(0.125));
  CHECK(n(3) == doctest::Approx(27.0));
}
