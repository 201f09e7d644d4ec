#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "stolab/ensemble.hpp"
#include "stolab/solver.hpp"

using namespace stolab;
using oracle::tau;

namespace {

const MapPtr five = make_map("linear-k", {{"k", 5}});
const CouplingPtr hsc = make_coupling("sincos");

NoiseKernel trap_kernel(double gamma, std::size_t G = 256) {
  return NoiseKernel({delta_max_trap(-0.155, 5.0, 0.95), gamma, BumpProfile::Scaled, CutoffProfile::Smooth}, G);
}

}  // namespace

TEST_CASE("det_step examples") {
  for (double delta : {-0.3, 0.0, 0.155, 1.0}) {
    const ParticleEnsemble z = det_step(ParticleEnsemble(std::vector<double>(17, 0.0)), 5.0, delta);
    for (double v : z.points()) CHECK(v == 0.0);
  }
  const ParticleEnsemble x({0.1, 0.37, 0.9});
  const ParticleEnsemble y = det_step(x, 5.0, 0.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(torus_dist(y[i], wrap(5.0 * x[i])) < 1e-15);

  const double m = std::cos(0.2 * std::numbers::pi);
  const double expect = wrap(5.0 * (0.1 - 0.155 * std::sin(0.2 * std::numbers::pi) * m));
  CHECK(det_step(ParticleEnsemble({0.1}), 5.0, -0.155)[0] == doctest::Approx(expect).epsilon(1e-14));
  CHECK(det_step(ParticleEnsemble({0.1}), 5.0, -0.155)[0] ==
        doctest::Approx(oracle::det_step({0.1}, 5.0, -0.155)[0]).epsilon(1e-14));
}

TEST_CASE("coupled_step agrees with det_step for the built-in example") {
  const ParticleEnsemble x = uniform_ensemble(500, 4);
  const ParticleEnsemble a = det_step(x, 5.0, 0.2);
  const ParticleEnsemble b = coupled_step(x, *five, *hsc, 0.2);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(torus_dist(a[i], b[i]) < 1e-12);
}

TEST_CASE("noisy step: bump-only noise near zero and determinism") {
  const NoiseKernel k = trap_kernel(0.0);
  const double D = k.params().Delta;
  std::vector<double> v(50);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = wrap((2.0 * D / 9.0) * (2.0 * i / 49.0 - 1.0));
  const ParticleEnsemble x(v);
  const ParticleEnsemble F = det_step(x, 5.0, -0.155);
  const ParticleEnsemble y = noisy_step(x, 5.0, -0.155, k, 1, 0, 1);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(torus_dist(y[i], F[i]) <= D / 3.0);
  const ParticleEnsemble y2 = noisy_step(x, 5.0, -0.155, k, 1, 0, 1);
  CHECK(std::equal(y.points().begin(), y.points().end(), y2.points().begin()));
}

TEST_CASE("B_Delta is forward invariant under the noisy step") {
  const NoiseKernel k = trap_kernel(0.05);
  const double D = k.params().Delta;
  for (int N : {1, 3, 50}) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      std::vector<double> v(N);
      Stream rng(s, N);
      for (auto& p : v) p = wrap(D * (2 * rng.uniform() - 1));
      ParticleEnsemble x(v);
      for (int t = 1; t <= 50; ++t) {
        x = noisy_step(x, 5.0, -0.155, k, s, 0, t);
        CHECK(in_trap(x, D));
      }
    }
  }
}

TEST_CASE("run_chain: start inside the trap and determinism") {
  const NoiseKernel k = trap_kernel(0.02);
  const double D = k.params().Delta;
  ChainConfig cfg;
  cfg.N = 20;
  cfg.delta = -0.155;
  cfg.kernel = k;
  cfg.T_max = 300;
  cfg.seed = 9;
  cfg.stop_at_absorption = false;
  std::vector<double> v(20);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = wrap(0.5 * D * std::sin(i + 1.0));
  const ChainTrace t = run_chain(cfg, ParticleEnsemble(v));
  REQUIRE(t.absorbed_at.has_value());
  CHECK(*t.absorbed_at == 0);
  CHECK(t.invariance_violations == 0);
  for (double d : t.dW_to_dirac0) CHECK(d <= D + D / 3);

  const ChainTrace u = run_chain(cfg, ParticleEnsemble(v));
  CHECK(u.dW_to_lebesgue == t.dW_to_lebesgue);
  CHECK(std::equal(u.final_state.points().begin(), u.final_state.points().end(), t.final_state.points().begin()));

  std::ostringstream os;
  write_csv(os, t);
  CHECK(os.str().rfind("t,dW_to_lebesgue,dW_to_dirac0,absorbed\n", 0) == 0);
}

TEST_CASE("run_chain: small N is absorbed") {
  ChainConfig cfg;
  cfg.N = 2;
  cfg.delta = -0.155;
  cfg.kernel = trap_kernel(0.02);
  cfg.T_max = 1000000;
  cfg.record_every = 1000000;
  cfg.post_absorption_steps = 200;
  int absorbed = 0;
  for (std::uint64_t r = 0; r < 20; ++r) {
    cfg.replica = r;
    cfg.seed = 77;
    const ChainTrace t = run_chain(cfg, uniform_ensemble(2, 77, r));
    absorbed += t.absorbed_at.has_value();
    CHECK(t.invariance_violations == 0);
  }
  CHECK(absorbed == 20);
}

TEST_CASE("absorption scaling trends") {
  ChainConfig cfg;
  cfg.delta = -0.155;
  cfg.kernel = trap_kernel(0.05);
  cfg.T_max = 100000;
  cfg.post_absorption_steps = 20;
  const auto rows = absorption_scaling(cfg, {1, 2, 3}, 40, 5);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].mean_time < 30);
  CHECK(strictly_increasing_means(rows));
  for (const auto& r : rows) CHECK(r.invariance_violations == 0);

  // the gap at N = 2 is about 6 steps, so use enough replicas to resolve it
  const auto fast = absorption_scaling(cfg, {2}, 400, 6);
  ChainConfig slow = cfg;
  slow.kernel = trap_kernel(0.025);
  const auto half = absorption_scaling(slow, {2}, 400, 6);
  CHECK(half[0].mean_time > fast[0].mean_time);
}

TEST_CASE("contraction at zero") {
  const double D = delta_max_trap(-0.155, 5.0, 0.95);
  for (int N : {1, 10, 1000}) CHECK(contraction_at_zero(5.0, -0.155, D, N, 20, 3) <= 2.0 / 3.0 + 1e-12);
}

TEST_CASE("LLN baseline: uniform density, no coupling, no noise") {
  const GridDensity one = GridDensity::constant(256);
  const LlnResult r = lln_one_step(one, {100, 1000, 10000}, *five, *hsc, 0.0, std::nullopt, 3, 8);
  CHECK(r.slope < -0.35);
  CHECK(r.slope > -0.65);
}

TEST_CASE("particle and density representations agree for one step") {
  const auto phi = GridDensity::from_function(512, [](double x) { return 1.0 + 0.5 * std::cos(tau * x); });
  const int N = 100000;
  const ParticleEnsemble x = sample_density(phi, N, 4);
  const ParticleEnsemble y = coupled_step(x, *five, *hsc, -0.155);
  const GridDensity ref = apply_STO(phi, *five, *hsc, -0.155);
  CHECK(wasserstein1_circle(y, ref) < 3.0 / std::sqrt(N) + 1e-3);
}

TEST_CASE("dirac basin runs") {
  const auto zero = dirac_basin_run(0.0, -0.05, 5.0, 10, 100, 1);
  for (double d : zero) CHECK(d == 0.0);
  const auto in = dirac_basin_run(0.01, -0.155, 5.0, 60, 10000, 2);
  bool hit = false;
  for (double d : in) hit = hit || d < 1e-6;
  CHECK(hit);
  CHECK(in[1] < in[0]);
  const auto out = dirac_basin_run(0.01, -0.05, 5.0, 60, 10000, 2);
  CHECK(out.back() > 0.1);
}

TEST_CASE("loglog slope of an exact power law") {
  CHECK(loglog_slope({1, 10, 100}, {1, std::pow(10, -0.5), 0.1}) == doctest::Approx(-0.5).epsilon(1e-12));
}
