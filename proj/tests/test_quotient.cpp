#include <doctest.h>

#include "foliated/quotient.hpp"

#include <cmath>
#include <numbers>

using namespace foliated;
using std::numbers::pi;

namespace {

int bins_outside(const WeightedDomain& d, double (*exact)(double), double n_se) {
  int outside = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (std::abs(d.weights(i) - exact(d.nodes(i))) > n_se * d.standard_error(i)) ++outside;
  return outside;
}

double sphere2_density(double t) { return 2.0 * pi * std::sin(t); }
double sphere3_density(double t) { return 4.0 * pi * pi * std::cos(t) * std::sin(t); }

}  // namespace

TEST_CASE("suspension sphere carries 2 pi sin t") {
  const WeightedDomain d = make_preset("suspension-sphere(2)", 512);
  CHECK(d.size() == 513);
  CHECK(d.lower == 0.0);
  CHECK(d.upper == doctest::Approx(pi));
  for (Eigen::Index i = 0; i < d.size(); ++i)
    CHECK(d.weights(i) == doctest::Approx(2.0 * pi * std::sin(d.nodes(i))).epsilon(1e-12));
  CHECK(d.weights(0) == 0.0);
  CHECK(d.weights(d.size() - 1) == 0.0);
  CHECK(d.left == EndpointKind::SingularLeaf);
  CHECK(d.volume == doctest::Approx(4.0 * pi));
}

TEST_CASE("integrate reproduces volumes and odd moments") {
  const WeightedDomain s2 = make_preset("suspension-sphere(2)", 512);
  const Field one = Field::Ones(s2.size());
  const double h = pi / 512;
  CHECK(std::abs(integrate(s2, one) - 4.0 * pi) <= 4.0 * pi * h * h);
  CHECK(std::abs(integrate(s2, s2.nodes.array().cos().matrix())) <= 1e-12);

  const WeightedDomain torus = make_preset("torus-factor", 256);
  CHECK(torus.periodic());
  CHECK(torus.size() == 256);
  CHECK((torus.weights.array() == 2.0 * pi).all());
  CHECK(integrate(torus, Field::Ones(256)) == doctest::Approx(4.0 * pi * pi).epsilon(1e-14));

  const WeightedDomain s3 = make_preset("okon-sphere(2,2)", 1024);
  for (Eigen::Index i = 0; i < s3.size(); ++i)
    CHECK(s3.weights(i) == doctest::Approx(sphere3_density(s3.nodes(i))).epsilon(1e-12));
  CHECK(integrate(s3, Field::Ones(s3.size())) == doctest::Approx(2.0 * pi * pi).epsilon(1e-5));
}

TEST_CASE("fkm presets integrate to the sphere volume") {
  for (const char* id : {"fkm(1,2)", "fkm(2,2)"}) {
    CAPTURE(id);
    const FoliationPreset p = get_preset(id);
    const WeightedDomain d = discretize(p, 4096);
    CHECK(integrate(d, Field::Ones(d.size())) == doctest::Approx(p.volume).epsilon(1e-5));
    CHECK(p.kappa >= 1);
    CHECK(p.kappa < p.ambient_dim);
  }
  CHECK_THROWS_AS(get_preset("fkm(1,1)"), Error);
}

TEST_CASE("interior weights are positive on every preset") {
  for (const auto& id : preset_ids()) {
    if (id == "custom") continue;
    CAPTURE(id);
    const WeightedDomain d = make_preset(id, 128);
    CHECK((d.weights.array() >= 0.0).all());
    CHECK((d.weights.segment(1, d.size() - 2).array() > 0.0).all());
    CHECK_NOTHROW(d.validate());
  }
}

TEST_CASE("registry rejects unknown ids and coarse grids") {
  CHECK_THROWS_AS(get_preset("klein-bottle"), Error);
  CHECK_THROWS_AS(get_preset("okon-sphere(2)"), Error);
  CHECK_THROWS_AS(make_preset("torus-factor", 4), Error);
  try {
    get_preset("klein-bottle");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownPreset);
  }
}

TEST_CASE("validate rejects broken domains") {
  WeightedDomain d = make_preset("suspension-sphere(2)", 64);
  d.weights(10) = -1.0;
  CHECK_THROWS_AS(d.validate(), Error);
  d = make_preset("suspension-sphere(2)", 64);
  d.nodes(5) = d.nodes(4);
  CHECK_THROWS_AS(d.validate(), Error);
  d = make_preset("suspension-sphere(2)", 64);
  d.weights.conservativeResize(10);
  CHECK_THROWS_AS(d.validate(), Error);
}

TEST_CASE("Monte-Carlo pushforward of S^2 under the polar angle") {
  PushforwardOptions opt;
  opt.bins = 200;
  opt.samples = 1'000'000;
  opt.seed = 3;
  const WeightedDomain d = pushforward_mc(
      uniform_sphere_sampler(3), [](const Eigen::VectorXd& x) { return std::acos(x(2)); }, 0.0, pi,
      4.0 * pi, {"s2-polar", 2, 1, EndpointKind::SingularLeaf, EndpointKind::SingularLeaf}, opt);
  CHECK(d.quadrature == Quadrature::Midpoint);
  CHECK(integrate(d, Field::Ones(d.size())) == doctest::Approx(4.0 * pi).epsilon(1e-14));
  // At 3 standard errors about 0.27% of bins fall outside by chance.
  CHECK(bins_outside(d, sphere2_density, 3.0) <= 4);
  CHECK(bins_outside(d, sphere2_density, 5.0) == 0);
}

TEST_CASE("Monte-Carlo pushforward of S^3 under arccos |(x1, x2)|") {
  PushforwardOptions opt;
  opt.bins = 100;
  opt.samples = 400'000;
  const WeightedDomain d = pushforward_mc(
      uniform_sphere_sampler(4),
      [](const Eigen::VectorXd& x) { return std::acos(std::min(1.0, std::hypot(x(0), x(1)))); }, 0.0,
      pi / 2, 2.0 * pi * pi, {"s3", 3, 1, EndpointKind::SingularLeaf, EndpointKind::SingularLeaf}, opt);
  CHECK(bins_outside(d, sphere3_density, 3.0) <= 3);
  CHECK(bins_outside(d, sphere3_density, 5.0) == 0);
}

TEST_CASE("histograms are reproducible and a constant map fills one bin") {
  PushforwardOptions opt;
  opt.bins = 50;
  opt.samples = 20'000;
  auto polar = [](const Eigen::VectorXd& x) { return std::acos(x(2)); };
  const Histogram a = pushforward_histogram(uniform_sphere_sampler(3), polar, 0.0, pi, 4 * pi, opt);
  const Histogram b = pushforward_histogram(uniform_sphere_sampler(3), polar, 0.0, pi, 4 * pi, opt);
  CHECK(a.counts == b.counts);
  opt.seed = 2;
  const Histogram c = pushforward_histogram(uniform_sphere_sampler(3), polar, 0.0, pi, 4 * pi, opt);
  CHECK(a.counts != c.counts);

  const Histogram k = pushforward_histogram(
      uniform_sphere_sampler(3), [](const Eigen::VectorXd&) { return 1.0; }, 0.0, pi, 4 * pi, opt);
  CHECK(k.occupied_bins() == 1);
  CHECK(k.density().sum() * k.bin_width() == doctest::Approx(4 * pi));
  CHECK_THROWS_AS(to_domain(k, {"const", 2, 1, EndpointKind::Regular, EndpointKind::Regular}), Error);
}

TEST_CASE("values outside the quotient range are rejected") {
  PushforwardOptions opt;
  opt.bins = 10;
  opt.samples = 1000;
  CHECK_THROWS_AS(pushforward_histogram(uniform_sphere_sampler(3),
                                        [](const Eigen::VectorXd&) { return 7.0; }, 0.0, pi, 4 * pi, opt),
                  Error);
}

TEST_CASE("sphere volumes") {
  CHECK(sphere_volume(1) == doctest::Approx(2 * pi));
  CHECK(sphere_volume(2) == doctest::Approx(4 * pi));
  CHECK(sphere_volume(3) == doctest::Approx(2 * pi * pi));
  CHECK(sphere_volume(7) == doctest::Approx(pi * pi * pi * pi / 3));
}
