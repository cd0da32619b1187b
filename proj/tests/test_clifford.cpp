#include <doctest.h>

#include "foliated/clifford.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace foliated;

namespace {

Eigen::VectorXd random_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(n);
  for (auto& v : x) v = normal(rng);
  return x.normalized();
}

// Independent relation check by plain integer multiplication.
bool relations_hold(const CliffordSystem& s) {
  const Eigen::MatrixXi id = Eigen::MatrixXi::Identity(s.n, s.n);
  for (std::size_t i = 0; i < s.matrices.size(); ++i) {
    if (s.matrices[i] != s.matrices[i].transpose()) return false;
    for (std::size_t j = 0; j < s.matrices.size(); ++j) {
      const Eigen::MatrixXi a = s.matrices[i] * s.matrices[j] + s.matrices[j] * s.matrices[i];
      if (a != (i == j ? Eigen::MatrixXi(2 * id) : Eigen::MatrixXi::Zero(s.n, s.n))) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("q = 1, copies = 1 is the 2x2 system") {
  const CliffordSystem s = build_clifford_system(1, 1);
  CHECK(s.n == 2);
  REQUIRE(s.matrices.size() == 2);
  Eigen::MatrixXi p0(2, 2), p1(2, 2);
  p0 << 1, 0, 0, -1;
  p1 << 0, 1, 1, 0;
  CHECK(s.matrices[0] == p0);
  CHECK(s.matrices[1] == p1);
  CHECK(relations_hold(s));
  CHECK(is_degenerate(s));
}

TEST_CASE("all supported systems satisfy the Clifford relations exactly") {
  for (int q = 1; q <= 5; ++q)
    for (int copies = 1; copies <= 2; ++copies) {
      CAPTURE(q);
      CAPTURE(copies);
      const CliffordSystem s = build_clifford_system(q, copies);
      CHECK(s.n == copies * clifford_minimal_dimension(q));
      CHECK(s.n % 2 == 0);
      CHECK(s.matrices.size() == static_cast<std::size_t>(q + 1));
      CHECK(relations_hold(s));
      CHECK(anticommutation_defect(s) == 0);
      CHECK((trace_gram(s) - Eigen::MatrixXd::Identity(q + 1, q + 1)).cwiseAbs().maxCoeff() == 0.0);
      for (const auto& P : s.matrices) CHECK((P.array().abs() <= 1).all());
    }
  CHECK_THROWS_AS(build_clifford_system(0, 1), Error);
  CHECK_THROWS_AS(build_clifford_system(6, 1), Error);
  CHECK_THROWS_AS(build_clifford_system(1, 0), Error);
}

TEST_CASE("a broken system is detected") {
  CliffordSystem s = build_clifford_system(2, 1);
  s.matrices[1] = s.matrices[0];
  CHECK(anticommutation_defect(s) > 0);
}

TEST_CASE("pi_rho for q = 1, n = 2 doubles the angle") {
  const CliffordSystem s = build_clifford_system(1, 1);
  for (double phi : {0.0, 0.3, 1.1, 2.5, -0.7}) {
    Eigen::VectorXd x(2);
    x << std::cos(phi), std::sin(phi);
    const Eigen::VectorXd y = pi_rho(s, x);
    CHECK(y(0) == doctest::Approx(std::cos(2 * phi)).epsilon(1e-14));
    CHECK(y(1) == doctest::Approx(std::sin(2 * phi)).epsilon(1e-14));
    CHECK(fkm_value(s, x) == doctest::Approx(-1.0).epsilon(1e-14));
  }
}

TEST_CASE("pi_rho on a +1 eigenvector of P_0") {
  for (int q = 1; q <= 5; ++q) {
    const CliffordSystem s = build_clifford_system(q, 2);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.matrices[0].cast<double>());
    const Eigen::VectorXd x = eig.eigenvectors().col(s.n - 1);
    REQUIRE(eig.eigenvalues()(s.n - 1) == doctest::Approx(1.0));
    const Eigen::VectorXd y = pi_rho(s, x);
    CHECK(y(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(y.tail(q).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(fkm_value(s, x) == doctest::Approx(-1.0).epsilon(1e-12));
  }
}

TEST_CASE("pi_rho stays in the unit disk and f in [-1, 1]") {
  std::mt19937_64 rng(5);
  for (int q : {1, 2, 3}) {
    const CliffordSystem s = build_clifford_system(q, 2);
    double worst_norm = 0.0, worst_f = 0.0;
    for (int k = 0; k < 20000; ++k) {
      const Eigen::VectorXd x = random_unit(s.n, rng);
      worst_norm = std::max(worst_norm, pi_rho(s, x).norm());
      worst_f = std::max(worst_f, std::abs(fkm_value(s, x)));
    }
    CHECK(worst_norm <= 1.0 + 1e-12);
    CHECK(worst_f <= 1.0 + 1e-12);
  }
  const CliffordSystem s = build_clifford_system(1, 2);
  Eigen::VectorXd not_unit = Eigen::VectorXd::Ones(s.n);
  CHECK_THROWS_AS(pi_rho(s, not_unit), Error);
}

TEST_CASE("fkm coordinate and multiplicities") {
  CHECK(fkm_coordinate(1.0) == doctest::Approx(0.0));
  CHECK(fkm_coordinate(-1.0) == doctest::Approx(std::numbers::pi / 4));
  CHECK(fkm_coordinate(0.0) == doctest::Approx(std::numbers::pi / 8));
  CHECK(fkm_multiplicities(build_clifford_system(1, 2)) == std::pair{1, 0});
  CHECK(fkm_multiplicities(build_clifford_system(2, 2)) == std::pair{2, 1});
  CHECK(fkm_multiplicities(build_clifford_system(1, 1)).second < 0);
}

TEST_CASE("fkm quotient domains") {
  const CliffordSystem s12 = build_clifford_system(1, 2);
  const WeightedDomain d = fkm_quotient_domain(s12, 100, 200'000, 1);
  CHECK(d.lower == 0.0);
  CHECK(d.upper == doctest::Approx(std::numbers::pi / 4));
  CHECK((d.weights.segment(1, d.size() - 2).array() > 0.0).all());
  CHECK(integrate(d, Field::Ones(d.size())) == doctest::Approx(2 * std::numbers::pi * std::numbers::pi));
  CHECK(d.kappa >= 1);

  const CliffordSystem s22 = build_clifford_system(2, 2);
  const WeightedDomain e = fkm_quotient_domain(s22, 100, 200'000, 1);
  CHECK(integrate(e, Field::Ones(e.size())) == doctest::Approx(sphere_volume(7)));

  try {
    fkm_quotient_domain(build_clifford_system(1, 1), 100, 10'000, 1);
    FAIL("degenerate system accepted");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::Degenerate);
  }
}

TEST_CASE("Monte-Carlo fkm quotient matches the analytic preset weight") {
  // The analytic density in t = arccos(f)/4 is proportional to sin^{m1}(2t) cos^{m2}(2t).
  const CliffordSystem s = build_clifford_system(2, 2);
  const WeightedDomain d = fkm_quotient_domain(s, 50, 500'000, 9);
  const FoliationPreset p = get_preset("fkm(2,2)");
  const double h = d.length() / d.size();
  int outside = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    // Bin average of the weight by Simpson's rule on 64 panels.
    const double a = d.lower + i * h;
    double avg = p.weight(a) + p.weight(a + h);
    for (int k = 1; k < 64; ++k) avg += (k % 2 ? 4.0 : 2.0) * p.weight(a + k * h / 64);
    avg /= 3.0 * 64;
    if (std::abs(d.weights(i) - avg) > 4.0 * d.standard_error(i)) ++outside;
  }
  CHECK(outside <= 1);
}
