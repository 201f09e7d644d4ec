#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "stolab/operators.hpp"

using namespace stolab;
using oracle::tau;

namespace {

NoiseParams params(double Delta, double gamma) { return {Delta, gamma, BumpProfile::Scaled, CutoffProfile::Smooth}; }

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(NoiseKernel(params(0.0, 0.0), 256), Error);
  CHECK_THROWS_AS(NoiseKernel(params(0.3, 0.0), 256), Error);
  CHECK_THROWS_AS(NoiseKernel(params(0.05, -0.1), 256), Error);
  CHECK_THROWS_AS(NoiseKernel(params(0.05, 0.2), 256), Error);
  CHECK_THROWS_AS(NoiseKernel(params(0.05, 0.01), 100), Error);
  CHECK(bump_profile_from_string("classic") == BumpProfile::Classic);
  CHECK_THROWS_AS(bump_profile_from_string("gauss"), Error);
}

TEST_CASE("rows are stochastic and conditions a.1, a.2 hold") {
  const NoiseKernel k(params(0.05, 0.02), 1024);
  for (std::size_t j = 0; j < 1024; ++j) CHECK(std::abs(k.row_integral(j) - 1.0) < 1e-8);
  // a.1: rows near 0 are pure bump
  CHECK(k.uniform_weight(0.0) == 0.0);
  CHECK(k.uniform_weight(2.0 * 0.05 / 3.0) == 0.0);
  CHECK(k.uniform_weight(0.5) == doctest::Approx(0.02 / 0.1));
  CHECK(k.cutoff(0.99 * 0.05) == 1.0);
  // a.2 on an independent point set
  for (int i = 0; i < 1000; ++i) CHECK(k.mass_in_trap((i + 0.5) / 1000.0) >= 0.02 - 1e-12);
  // bump density integrates to one
  double s = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) s += k.bump(-0.05 / 3 + (i + 0.5) * (0.1 / 3) / n);
  CHECK(s * (0.1 / 3) / n == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(k.bump(0.05 / 3 + 1e-9) == 0.0);
}

TEST_CASE("a.3 distance scales linearly with gamma") {
  const NoiseKernel k1(params(0.05, 0.01), 256), k2(params(0.05, 0.04), 256);
  // the constant is gamma independent; the C2 distance is gamma times it
  CHECK(k1.a3_constant() == doctest::Approx(k2.a3_constant()).epsilon(1e-9));
  CHECK(std::isfinite(k1.a3_constant()));
}

TEST_CASE("M preserves Lebesgue for gamma = 0 and mass in general") {
  const NoiseKernel k0(params(0.05, 0.0), 256);
  const GridDensity one = GridDensity::constant(256);
  CHECK(sup_distance(apply_M(k0, one).values(), one.values()) < 1e-8);
  const NoiseKernel k(params(0.05, 0.04), 256);
  const auto phi = GridDensity::from_function(256, [](double x) { return 1.0 + 0.7 * std::sin(tau * 3 * x); });
  CHECK(apply_M(k, phi).integral() == doctest::Approx(phi.integral()).epsilon(1e-8));
  // signed overload agrees with the density overload
  CHECK(sup_distance(k.apply(phi.values()), apply_M(k, phi).values()) == 0.0);
}

TEST_CASE("spike is spread over the bump support plus the uniform part") {
  const std::size_t G = 1024;
  const double Delta = 0.05, gamma = 0.02;
  const NoiseKernel k(params(Delta, gamma), G);
  std::vector<double> v(G, 1e-300);
  v[G / 2] = static_cast<double>(G);  // unit mass at 0.5
  const GridDensity out = apply_M(k, GridDensity(v));
  const double floor = gamma * k.cutoff(0.5) / (2 * Delta);
  for (std::size_t l = 0; l < G; ++l) {
    const double y = static_cast<double>(l) / G;
    if (std::abs(y - 0.5) > Delta / 3 + 1.0 / G) CHECK(std::abs(out[l] - floor) < 1e-6);
  }
}

TEST_CASE("sampling follows the mixture") {
  const NoiseKernel k(params(0.05, 0.04), 256);
  Stream rng(1);
  // near 0 every draw stays within Delta/3
  for (int i = 0; i < 20000; ++i) CHECK(torus_dist(k.sample(0.01, rng), 0.01) <= 0.05 / 3);
  // far away the uniform component shows up with probability gamma/(2 Delta)
  int far = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) far += torus_dist(k.sample(0.5, rng), 0.5) > 0.05 / 3;
  const double p = 0.04 / 0.1 * (1.0 - 0.1 / 3);  // uniform draws landing outside the bump support
  CHECK(far / double(n) == doctest::Approx(p).epsilon(0.03));
}

TEST_CASE("sample moments match the bump") {
  const NoiseKernel k(params(0.06, 0.0), 256);
  Stream rng(2);
  double m1 = 0.0, m2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = centered(k.sample(0.0, rng));
    m1 += z;
    m2 += z * z;
  }
  double var = 0.0;
  const int q = 20000;
  const double r = 0.02;
  for (int i = 0; i < q; ++i) {
    const double z = -r + (i + 0.5) * 2 * r / q;
    var += z * z * k.bump(z) * 2 * r / q;
  }
  CHECK(std::abs(m1 / n) < 3 * std::sqrt(var / n) + 1e-6);
  CHECK(m2 / n == doctest::Approx(var).epsilon(0.02));
}

TEST_CASE("classic bump profile is available and valid") {
  const NoiseKernel k({0.2, 0.01, BumpProfile::Classic, CutoffProfile::Smooth}, 2048);
  CHECK(std::abs(k.row_integral(0) - 1.0) < 1e-8);
  std::ostringstream os;
  NoiseKernel(params(0.05, 0.01), 64).write_csv(os);
  CHECK(os.str().rfind("x,y,xi\n", 0) == 0);
}
