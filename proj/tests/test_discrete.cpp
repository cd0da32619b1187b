#include <doctest.h>

#include "foliated/discrete.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace foliated;
using std::numbers::pi;

namespace {

using Fn = std::function<double(double)>;

Fn constant(double v) {
  return [v](double) { return v; };
}

Field random_field(const WeightedDomain& d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Field u = Field::Constant(d.size(), normal(rng));
  for (int k = 1; k <= 5; ++k) u += (normal(rng) / k) * (k * d.nodes.array()).cos().matrix();
  return u;
}

Problem problem_on(const std::string& id, int n, const Fn& b, const Fn& c,
                   double p = 4.0) {
  const WeightedDomain d = make_preset(id, n);
  return Problem(d, make_spec(d, b, c, p));
}

}  // namespace

TEST_CASE("lumped mass integrates the weight") {
  const WeightedDomain d = make_preset("suspension-sphere(2)", 256);
  const Eigen::VectorXd m = lumped_mass(d);
  CHECK(m.sum() == doctest::Approx(integrate(d, Field::Ones(d.size()))).epsilon(1e-14));
  CHECK((m.array() >= 0.0).all());
}

TEST_CASE("inner_h1 on the round sphere") {
  const WeightedDomain d = make_preset("suspension-sphere(2)", 1024);
  const Field one = Field::Ones(d.size());
  const double h = pi / 1024;
  CHECK(std::abs(inner_h1(d, one, one) - 4 * pi) <= 4 * pi * h * h);
  const Field c = d.nodes.array().cos();
  CHECK(inner_h1(d, c, c) == doctest::Approx(4 * pi).epsilon(1e-5));

  Field a = Field::Zero(d.size()), b = Field::Zero(d.size());
  a.segment(100, 50).setOnes();
  b.segment(400, 50).setOnes();
  CHECK(inner_h1(d, a, b) == 0.0);
}

TEST_CASE("b-form and theta-form") {
  std::mt19937_64 rng(1);
  const Problem one = problem_on("okon-sphere(2,2)", 256, constant(1.0), constant(1.0));
  const WeightedDomain& d = one.domain();
  for (int k = 0; k < 10; ++k) {
    const Field u = random_field(d, rng), v = random_field(d, rng);
    CHECK(std::abs(inner_b(one, u, v) - inner_h1(d, u, v)) <=
          1e-12 * std::sqrt(inner_h1(d, u, u) * inner_h1(d, v, v)));
  }
  const Problem three = problem_on("okon-sphere(2,2)", 256, constant(3.0), constant(1.0));
  const Field ones = Field::Ones(d.size());
  CHECK(inner_b(three, ones, ones) == doctest::Approx(3.0 * integrate(d, ones)).epsilon(1e-13));
  for (int k = 0; k < 10; ++k) {
    const Field u = random_field(d, rng);
    CHECK(inner_theta(three, u, u) >= std::min(1.0, three.theta()) * inner_h1(d, u, u));
  }
}

TEST_CASE("norm_cp") {
  std::mt19937_64 rng(2);
  const Problem unit = problem_on("suspension-sphere(2)", 512, constant(2.0), constant(1.0), 3.5);
  const WeightedDomain& d = unit.domain();
  const Field ones = Field::Ones(d.size());
  CHECK(norm_cp(unit, ones) == doctest::Approx(std::pow(integrate(d, ones), 1.0 / 3.5)));
  const Problem varying = problem_on("suspension-sphere(2)", 512, constant(2.0),
                                     [](double t) { return 1.5 + std::sin(3 * t); }, 3.5);
  const double kmin = varying.spec().c.minCoeff(), kmax = varying.spec().c.maxCoeff();
  for (int k = 0; k < 20; ++k) {
    const Field u = random_field(d, rng);
    CHECK(norm_cp(varying, -2.5 * u) == doctest::Approx(2.5 * norm_cp(varying, u)).epsilon(1e-13));
    const double lp = norm_lp(d, u, 3.5);
    CHECK(std::pow(kmin, 1 / 3.5) * lp <= norm_cp(varying, u) * (1 + 1e-13));
    CHECK(norm_cp(varying, u) <= std::pow(kmax, 1 / 3.5) * lp * (1 + 1e-13));
  }
}

TEST_CASE("helmholtz solve on constants and eigenfunctions") {
  const Problem s2 = problem_on("suspension-sphere(2)", 512, constant(2.0), constant(1.0));
  const double theta = s2.theta();
  const Field a = Field::Constant(s2.size(), theta * 0.7);
  CHECK((helmholtz_solve(s2, a).array() - 0.7).abs().maxCoeff() <= 1e-12);

  // cos t is the l = 1 harmonic on S^2; the error must drop like h^2.
  double prev = 0.0;
  for (int n : {128, 256, 512}) {
    const Problem pr = problem_on("suspension-sphere(2)", n, constant(2.0), constant(1.0));
    const Field c = pr.domain().nodes.array().cos();
    const double err = (helmholtz_solve(pr, (pr.theta() + 2.0) * c) - c).cwiseAbs().maxCoeff();
    CHECK(err <= 20.0 / (n * n));
    if (prev > 0.0) CHECK(prev / err > 3.4);
    prev = err;
  }
  const Problem torus = problem_on("torus-factor", 512, constant(2.0), constant(1.0));
  const Field s = torus.domain().nodes.array().sin();
  const double h = 2 * pi / 512;
  CHECK((helmholtz_solve(torus, (torus.theta() + 1.0) * s) - s).cwiseAbs().maxCoeff() <= h * h);
}

TEST_CASE("coercivity constant") {
  const WeightedDomain s2 = make_preset("suspension-sphere(2)", 256);
  CHECK(estimate_mu(s2, Field::Ones(s2.size())) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(estimate_mu(s2, Field::Constant(s2.size(), 0.4)) == doctest::Approx(0.4).epsilon(1e-8));
  // For b0 > 1 the discrete optimum is 1 + O(h^2) from above, never below min{1, b0}.
  const double mu_coarse = estimate_mu(s2, Field::Constant(s2.size(), 2.0));
  CHECK(mu_coarse >= 1.0);
  CHECK(mu_coarse <= 1.0 + 1e-3);
  const WeightedDomain torus = make_preset("torus-factor", 8192);
  CHECK(std::abs(estimate_mu(torus, Field::Constant(torus.size(), 2.0)) - 1.0) <= 1e-6);
  // Sign-changing b is not coercive.
  const Field b = s2.nodes.array().cos() * 3.0;
  CHECK(estimate_mu(s2, b) <= 0.0);
}

TEST_CASE("rayleigh quotient brute force agrees with the coercivity constant") {
  // Minimize <u,u>_b / <u,u>_H1 over a small cosine basis: an upper bound that
  // is tight when constants dominate.
  const WeightedDomain d = make_preset("okon-sphere(2,2)", 256);
  const Field b = (0.5 + 0.2 * d.nodes.array().cos()).matrix();
  const double mu = estimate_mu(d, b);
  const Problem pr(d, make_spec(d, [](double t) { return 0.5 + 0.2 * std::cos(t); }, constant(1.0), 4.0));
  const int k = 8;
  Eigen::MatrixXd B(k, k), H(k, k);
  std::vector<Field> basis;
  for (int i = 0; i < k; ++i) basis.push_back((2.0 * i * d.nodes.array()).cos());
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      B(i, j) = inner_b(pr, basis[i], basis[j]);
      H(i, j) = inner_h1(d, basis[i], basis[j]);
    }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(B, H);
  CHECK(mu <= ges.eigenvalues()(0) + 1e-12);
  CHECK(mu >= 0.5 * ges.eigenvalues()(0));
  CHECK(pr.spec().mu == doctest::Approx(mu));
}

TEST_CASE("spec validation") {
  const WeightedDomain d = make_preset("suspension-sphere(2)", 64);
  try {
    make_spec(d, constant(2.0), constant(1.0), 2.0);
    FAIL("p = 2 accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParameterDomain);
    CHECK(std::string(e.what()).find("p > 2") != std::string::npos);
  }
  CHECK_THROWS_AS(make_spec(d, constant(2.0), constant(0.0), 4.0), Error);
  CHECK_THROWS_AS(make_spec(d, constant(2.0), constant(1.0), 4.0, 1.5), Error);
  try {
    make_spec(d, constant(-1.0), constant(1.0), 4.0);
    FAIL("non-coercive b accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonCoercive);
  }
  const ProblemSpec spec = make_spec(d, constant(2.0), constant(1.0), 4.0);
  CHECK(spec.theta > std::max({1.0, spec.mu, 2.0}));
}

TEST_CASE("positive and negative parts") {
  Field u(5);
  u << -1.0, 0.0, 2.0, -3.0, 0.5;
  const Field pos = positive_part(u), neg = negative_part(u);
  CHECK((pos + neg - u).cwiseAbs().maxCoeff() == 0.0);
  CHECK((pos.array() >= 0.0).all());
  CHECK((neg.array() <= 0.0).all());
  CHECK(neg(3) == -3.0);
}

TEST_CASE("problem matrices are consistent") {
  const Problem pr = problem_on("torus-factor", 64, constant(2.0), constant(1.0));
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(64);
  CHECK((pr.stiffness() * ones).cwiseAbs().maxCoeff() <= 1e-12);
  const SparseMatrix diff = pr.form_theta() - pr.stiffness();
  CHECK(Eigen::MatrixXd(diff).diagonal().isApprox(pr.theta() * pr.mass()));
  std::mt19937_64 rng(4);
  const Field u = random_field(pr.domain(), rng);
  CHECK((pr.form_theta() * pr.solve_theta(u) - u).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK_THROWS_AS(inner_b(pr, Field::Ones(3), Field::Ones(3)), Error);
}
