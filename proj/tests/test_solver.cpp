#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "stolab/solver.hpp"

using namespace stolab;
using oracle::tau;
constexpr double pi = std::numbers::pi;

namespace {

const MapPtr five = make_map("linear-k", {{"k", 5}});
const CouplingPtr hsc = make_coupling("sincos");

StoProblem sto(double delta) { return {five, hsc, delta, std::nullopt}; }

}  // namespace

TEST_CASE("L1 norms of the hsc derivatives against midpoint quadrature") {
  const double n1 = max_l1_norm(*hsc, 1);
  const double n2 = max_l1_norm(*hsc, 2);
  CHECK(n1 == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(n2 == doctest::Approx(8.0 * pi).epsilon(1e-9));
  // independent value at x = 0, where both maxima are attained
  const double q1 = oracle::midpoint_l1([](double y) { return tau * std::cos(tau * y); });
  CHECK(std::abs(n1 - q1) < 1e-6);
  // Kuramoto: every x has the same L1 norm (2 pi)^i * 2/pi
  const CouplingPtr kur = make_coupling("kuramoto");
  CHECK(max_l1_norm(*kur, 1) == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("stability condition arithmetic") {
  const StabilityReport r = stability_condition(*hsc, 5.0, 0.2);
  CHECK(r.threshold == 8.0);
  CHECK(r.lhs == doctest::Approx(0.2 * 8 * pi).epsilon(1e-9));
  CHECK(r.satisfied);
  CHECK_FALSE(stability_condition(*hsc, 5.0, 0.5).satisfied);
  CHECK(r.satisfied == (r.lhs < r.threshold));
  CHECK_THROWS_AS(stability_condition(*hsc, 1.0, 0.1), Error);
}

TEST_CASE("windows") {
  const Interval d = dirac_window(5.0);
  CHECK(d.lo == doctest::Approx(-1.2 / (2 * pi)).epsilon(1e-15));
  CHECK(d.hi == doctest::Approx(-0.8 / (2 * pi)).epsilon(1e-15));
  // endpoints solve |k(1 + 2 pi delta)| = 1
  CHECK(std::abs(5.0 * (1 + 2 * pi * d.lo)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(5.0 * (1 + 2 * pi * d.hi)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.contains(-0.155));
  CHECK(std::abs(5.0 * (1 + 2 * pi * -0.155)) == doctest::Approx(0.1305).epsilon(1e-3));
  const Interval big = dirac_window(1e9);
  CHECK(big.hi - big.lo < 1e-9);
  CHECK(big.midpoint() == doctest::Approx(-1 / (2 * pi)));

  const Interval b = basin_window(5.0);
  CHECK(b.lo == doctest::Approx(-17.0 / (30 * pi)).epsilon(1e-15));
  CHECK(b.hi == doctest::Approx(-13.0 / (30 * pi)).epsilon(1e-15));
  for (double k : {1.0, 2.0, 5.0, 17.0, 1000.0}) CHECK(basin_window(k).contains(-1 / (2 * pi)));
  CHECK(b.subset_of(d));
  CHECK(d.subset_of(Interval{-1 / pi, 1 / pi}));
}

TEST_CASE("trap radius") {
  const double Ds = delta_max_trap(-0.17, 5.0, 1.0);
  const double c = std::cos(2 * pi * Ds);
  CHECK(std::abs(5.0 * (1 + 2 * pi * -0.17 * c * c) - 2.0 / 3.0) < 1e-10);
  const double D9 = delta_max_trap(-0.17, 5.0, 0.9);
  CHECK(D9 == doctest::Approx(0.9 * Ds).epsilon(1e-15));
  const double c9 = std::cos(2 * pi * D9);
  CHECK(5.0 * (1 + 2 * pi * -0.17 * c9 * c9) < 2.0 / 3.0);
  const Interval b = basin_window(5.0);
  CHECK(delta_max_trap(b.lo + 1e-9, 5.0, 1.0) > delta_max_trap(-0.155, 5.0, 1.0));
  CHECK(delta_max_trap(b.hi - 1e-12, 5.0, 1.0) < 1e-4);
  CHECK(delta_max_trap(-0.155, 5.0, 1.0) == doctest::Approx(0.053831).epsilon(1e-4));
  CHECK_THROWS_AS(delta_max_trap(-0.1, 5.0, 1.0), Error);
}

TEST_CASE("zero is fixed at the map level for every mean field") {
  for (double delta : {-0.3, -0.155, 0.0, 0.2}) {
    for (double m : {-1.0, -0.3, 0.0, 0.7, 1.0}) {
      const double x = 0.0;
      CHECK(wrap(5.0 * (x + delta * std::sin(tau * x) * m)) == 0.0);
    }
  }
}

TEST_CASE("fixed point iteration examples") {
  FixedPointOptions opt;
  opt.a = 3.0;
  const IterationTrace t0 = fixed_point_iterate(sto(0.2), GridDensity::constant(256), opt);
  CHECK(t0.converged);
  CHECK(t0.n_iters == 1);
  CHECK(t0.sup_residuals.front() < 1e-8);

  const auto s = GridDensity::from_function(256, [](double x) { return 1.0 + 0.3 * std::sin(tau * x); });
  const IterationTrace t1 = fixed_point_iterate(sto(0.2), s, opt);
  CHECK(t1.converged);
  CHECK(sup_distance(t1.final().values(), GridDensity::constant(256).values()) < 1e-6);

  // delta = 0 and degree < 5: one application of P lands on the constant,
  // up to the spline error (5/384) h^4 sup|phi''''|
  const IterationTrace t2 = fixed_point_iterate(sto(0.0), s, opt);
  CHECK(sup_distance(t2.iterates[1].values(), GridDensity::constant(256).values()) <
        5.0 / 384.0 * std::pow(1.0 / 256, 4) * 0.3 * std::pow(tau, 4));

  CHECK(t1.hilbert_steps.size() == t1.sup_residuals.size());
  CHECK(t1.contraction_ratios.size() + 1 == t1.hilbert_steps.size());
  std::ostringstream os;
  write_trace_csv(os, t1);
  CHECK(os.str().rfind("iteration,hilbert_step,sup_residual\n", 0) == 0);
}

TEST_CASE("cone escape is reported with the offending report") {
  const auto s = GridDensity::from_function(256, [](double x) { return 1.0 + 0.3 * std::sin(tau * x); });
  FixedPointOptions opt;
  opt.a = 0.5;
  try {
    fixed_point_iterate(sto(0.2), s, opt);
    FAIL("expected cone escape");
  } catch (const ConeEscapeError& e) {
    CHECK(e.kind() == ErrorKind::ConeEscape);
    CHECK(e.report().log_lip > 0.5);
  }
  opt.entry_iters = 3;
  const IterationTrace t = fixed_point_iterate(sto(0.2), s, opt);
  CHECK(t.entry_steps == 1);
  CHECK(t.converged);
}

TEST_CASE("nontrivial contraction obeys the Birkhoff bound and the residual bound") {
  const double a = 0.5;
  const auto phi0 = GridDensity::from_function(256, [](double x) { return std::exp(0.07 * std::cos(tau * x)); });
  FixedPointOptions opt;
  opt.a = a;
  opt.tol = 1e-12;
  const StoProblem p = sto(0.2);
  const IterationTrace t = fixed_point_iterate(p, phi0, opt);
  REQUIRE(t.converged);
  REQUIRE(t.contraction_ratios.size() >= 3);
  const double ratio = *t.ratio_estimate();
  const ContractionProbe probe = cone_contraction_probe(p, a, 50, 1);
  const double lam = std::min(probe.measured, 0.99);
  const double D = diameter_estimate(a, lam, 50, 2);
  CHECK(ratio <= 1.2 * (1.0 - std::exp(-D)));
  const GridDensity& fin = t.final();
  const GridDensity next = p.apply(fin).normalized();
  CHECK(sup_distance(next.values(), fin.values()) <= 10 * opt.tol * fin.sup() + 1e-12);
}

TEST_CASE("power iteration of the noisy operator reaches a fixed point") {
  const NoiseKernel k({0.05, 0.02, BumpProfile::Scaled, CutoffProfile::Smooth}, 512);
  const StoProblem p{five, hsc, -0.155, k};
  const IterationTrace t = power_iterate(p, GridDensity::constant(512), 1e-12, 500);
  REQUIRE(t.converged);
  const GridDensity next = p.apply(t.final()).normalized();
  CHECK(sup_distance(next.values(), t.final().values()) < 1e-6);
}

TEST_CASE("order preservation check") {
  const OrderCheckReport r0 = order_preservation_check(sto(0.0), 0.5, 5.0, 40, 1);
  CHECK(r0.order_failures == 0);
  CHECK(r0.differential_failures == 0);
  const OrderCheckReport r = order_preservation_check(sto(0.2), 0.5, 5.0, 40, 2);
  CHECK(r.order_failures == 0);
  CHECK(r.differential_failures == 0);
  try {
    order_preservation_check(sto(2.0), 0.5, 5.0, 5, 3);
    FAIL("expected precondition error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Precondition);
  }
}

TEST_CASE("cone contraction probe") {
  const ContractionProbe p0 = cone_contraction_probe(sto(0.0), 0.3, 30, 1);
  CHECK(p0.measured <= 0.2 + 1e-6);
  CHECK(p0.predicted == doctest::Approx(0.2));
  double prev = 1e9;
  for (double a : {0.4, 0.2, 0.1}) {
    const ContractionProbe p = cone_contraction_probe(sto(0.1), a, 30, 5);
    CHECK(p.predicted == doctest::Approx((1 + 0.1 * 8 * pi / 2) / 5).epsilon(1e-9));
    CHECK(p.measured <= prev + 1e-3);
    prev = p.measured;
  }
}
