#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "stolab/rng.hpp"
#include "stolab/torus.hpp"

using namespace stolab;
using oracle::tau;

TEST_CASE("wrap and centered land in their ranges") {
  for (double x : {-3.25, -1.0, -0.5, -1e-17, 0.0, 0.25, 0.999999999, 1.0, 7.5}) {
    const double w = wrap(x);
    CHECK(w >= 0.0);
    CHECK(w < 1.0);
    const double c = centered(x);
    CHECK(c >= -0.5);
    CHECK(c < 0.5);
    CHECK(std::abs(wrap(c) - w) < 1e-15);
  }
  CHECK(torus_dist(0.95, 0.05) == doctest::Approx(0.1));
  CHECK(torus_dist(TorusPoint(1.25), TorusPoint(0.25)) == 0.0);
}

TEST_CASE("grid sizes and positivity are validated") {
  CHECK_THROWS_AS(check_grid_size(32), Error);
  CHECK_THROWS_AS(check_grid_size(100), Error);
  CHECK_NOTHROW(check_grid_size(64));
  std::vector<double> v(64, 1.0);
  v[3] = 0.0;
  CHECK_THROWS_AS(GridDensity{v}, Error);
  v[3] = std::nan("");
  CHECK_THROWS_AS(GridDensity{v}, Error);
  CHECK_THROWS_AS(ParticleEnsemble({}), Error);
}

TEST_CASE("quadrature is exact for trigonometric polynomials below Nyquist") {
  const auto phi = GridDensity::from_function(128, [](double x) { return 2.0 + std::sin(tau * 5 * x) + std::cos(tau * 63 * x); });
  CHECK(phi.integral() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(phi.normalized().integral() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("spectral derivatives match analytic derivatives") {
  const std::size_t G = 256;
  const auto f = GridDensity::from_function(G, [](double x) { return std::exp(0.5 * std::sin(tau * x)); });
  for (int order = 1; order <= 3; ++order) {
    const Field d = periodic_derivative(f, order);
    double err = 0.0;
    for (std::size_t j = 0; j < G; ++j) {
      const double x = f.node(j);
      const double s = std::sin(tau * x), c = std::cos(tau * x), e = std::exp(0.5 * s);
      double exact = 0.0;
      const double u1 = 0.5 * tau * c;           // (0.5 sin)'
      const double u2 = -0.5 * tau * tau * s;    // (0.5 sin)''
      const double u3 = -0.5 * tau * tau * tau * c;
      if (order == 1) exact = e * u1;
      if (order == 2) exact = e * (u2 + u1 * u1);
      if (order == 3) exact = e * (u3 + 3 * u1 * u2 + u1 * u1 * u1);
      err = std::max(err, std::abs(d[j] - exact));
    }
    // roundoff in the top modes is amplified by (pi G)^order
    CHECK(err < 10 * 2.2e-16 * std::pow(std::numbers::pi * G, order) * f.sup() + 1e-12);
  }
}

TEST_CASE("finite-difference backend agrees with spectral to fourth order") {
  double errs[2];
  int i = 0;
  for (std::size_t G : {128u, 256u}) {
    const auto f = GridDensity::from_function(G, [](double x) { return 1.5 + std::cos(tau * 3 * x); });
    const Field a = periodic_derivative(f, 1, DerivativeBackend::Spectral);
    const Field b = periodic_derivative(f, 1, DerivativeBackend::FiniteDifference4);
    errs[i++] = sup_distance(a, b);
  }
  CHECK(std::log2(errs[0] / errs[1]) > 3.8);
}

TEST_CASE("periodic spline interpolates nodes and is accurate between them") {
  const std::size_t G = 256;
  auto fn = [](double x) { return 2.0 + std::sin(tau * x) * std::cos(tau * 2 * x); };
  const auto f = GridDensity::from_function(G, fn);
  const PeriodicSpline s(f.values());
  for (std::size_t j = 0; j < G; j += 17) CHECK(s(f.node(j)) == doctest::Approx(f[j]).epsilon(1e-14));
  double err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = (i + 0.37) / 1000.0;
    err = std::max(err, std::abs(s(x) - fn(x)));
  }
  CHECK(err < 1e-7);
  CHECK(s(1.3) == doctest::Approx(s(0.3)).epsilon(1e-14));
}

TEST_CASE("density CDF and quantile are inverse to each other") {
  const auto phi = GridDensity::from_function(64, [](double x) { return 1.0 + 0.8 * std::cos(tau * x); });
  const DensityCdf cdf(phi);
  CHECK(cdf.cdf(0.0) == 0.0);
  CHECK(cdf.cdf(1.0) == doctest::Approx(1.0));
  for (double u : {0.0, 0.01, 0.3, 0.5, 0.77, 0.999}) CHECK(cdf.cdf(cdf.quantile(u)) == doctest::Approx(u).epsilon(1e-12));
}

TEST_CASE("circular W1 between particle measures matches the cyclic-shift oracle") {
  Stream rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + trial;
    std::vector<double> a(n), b(n);
    for (auto& x : a) x = rng.uniform();
    for (auto& x : b) x = 0.3 * rng.uniform() + 0.6;
    const double lib = wasserstein1_circle(ParticleEnsemble(a), ParticleEnsemble(b));
    CHECK(lib == doctest::Approx(oracle::w1_equal_size(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("circular W1 properties") {
  const ParticleEnsemble p({0.1, 0.2, 0.7});
  CHECK(wasserstein1_circle(p, p) == 0.0);
  // rotation of a measure by s costs exactly |s| when s is small
  const ParticleEnsemble q({0.13, 0.23, 0.73});
  CHECK(wasserstein1_circle(p, q) == doctest::Approx(0.03).epsilon(1e-12));
  // point mass to Lebesgue is 1/4
  const ParticleEnsemble d({0.0});
  CHECK(wasserstein1_circle(d, GridDensity::constant(64)) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(wasserstein1_to_point(d) == 0.0);
  CHECK(wasserstein1_to_point(ParticleEnsemble({0.9, 0.1})) == doctest::Approx(0.1));
}

TEST_CASE("circular W1 between two grid densities matches a fine CDF oracle") {
  const auto f = GridDensity::from_function(256, [](double x) { return 1.0 + 0.5 * std::sin(tau * x); });
  const auto g = GridDensity::from_function(256, [](double x) { return 1.0 + 0.3 * std::cos(tau * 2 * x); });
  // exact CDFs of the continuous densities: F(t) = t + 0.5 (1 - cos)/tau, G(t) = t + 0.3 sin(2 tau t)/(2 tau)
  std::vector<double> diff(200000);
  for (std::size_t i = 0; i < diff.size(); ++i) {
    const double t = (i + 0.5) / diff.size();
    diff[i] = 0.5 * (1 - std::cos(tau * t)) / tau - 0.3 * std::sin(2 * tau * t) / (2 * tau);
  }
  CHECK(wasserstein1_circle(f, g) == doctest::Approx(oracle::w1_from_cdfs(diff)).epsilon(1e-4));
}

TEST_CASE("density_from_particles is positive and normalized") {
  const ParticleEnsemble e({0.1, 0.5, 0.52});
  const GridDensity d = density_from_particles(e, 128, 0.02);
  CHECK(d.integral() == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : d.values()) CHECK(v > 0.0);
}

TEST_CASE("serialization round trips") {
  const auto phi = GridDensity::from_function(64, [](double x) { return 1.0 / 3.0 + std::exp(std::sin(tau * x)); });
  std::stringstream ss;
  write_csv(ss, phi);
  const GridDensity back = read_grid_csv(ss);
  CHECK(sup_distance(back.values(), phi.values()) <= 1e-15);
  const GridDensity from_j = grid_from_json(to_json(phi));
  CHECK(sup_distance(from_j.values(), phi.values()) <= 1e-15);

  const ParticleEnsemble e({0.1, 1.0 / 7.0, 0.999999});
  std::stringstream es;
  write_csv(es, e);
  const ParticleEnsemble eb = read_ensemble_csv(es);
  REQUIRE(eb.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(eb[i] - e[i]) <= 1e-15);
}
