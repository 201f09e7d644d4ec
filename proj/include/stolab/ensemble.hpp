#pragma once

// Finite-N coupled map dynamics on the circle. The deterministic part is
//   F_i(x) = f(x_i + delta * (1/N) sum_j H(x_i, x_j)),
// which for f = kx and H = sin(2 pi x) cos(2 pi y) is the scalar update
//   F_i(x) = k (x_i + delta sin(2 pi x_i) m),  m = (1/N) sum_j cos(2 pi x_j).
// The noisy chain adds an independent draw from xi(F_i(x), .) per coordinate.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <json.hpp>

#include "stolab/operators.hpp"
#include "stolab/torus.hpp"

namespace stolab {

ParticleEnsemble det_step(const ParticleEnsemble& x, double k, double delta);

/// F(x) for a general map and coupling.
ParticleEnsemble coupled_step(const ParticleEnsemble& x, const MapSpec& map,
                              const CouplingSpec& coupling, double delta);

/// det_step followed by per-coordinate noise. Coordinate i at step t of
/// replica r draws from Stream(seed, r, t, i).
ParticleEnsemble noisy_step(const ParticleEnsemble& x, double k, double delta,
                            const NoiseKernel& kernel, std::uint64_t seed, std::uint64_t replica,
                            std::uint64_t t);

/// True when every coordinate lies in the closed arc [-Delta, Delta].
bool in_trap(const ParticleEnsemble& x, double Delta);

struct ChainConfig {
  int N = 1;
  double k = 5.0;
  double delta = 0.0;
  std::optional<NoiseKernel> kernel;
  long T_max = 1000;
  std::uint64_t seed = 0;
  int record_every = 1;
  std::uint64_t replica = 0;
  /// Extra steps simulated after absorption to check that B_Delta stays
  /// forward invariant. The chain stops at T_max regardless.
  long post_absorption_steps = 0;
  /// Stop at absorption (plus post_absorption_steps) instead of running to T_max.
  bool stop_at_absorption = true;
};

struct ChainTrace {
  std::vector<long> times;
  std::vector<double> dW_to_lebesgue;
  std::vector<double> dW_to_dirac0;
  std::vector<bool> absorbed_flag;
  std::optional<long> absorbed_at;
  /// Steps after absorption at which some coordinate left [-Delta, Delta].
  long invariance_violations = 0;
  long steps = 0;
  ParticleEnsemble final_state{std::vector<double>{0.0}};
};

void write_csv(std::ostream& os, const ChainTrace& t);
nlohmann::json to_json(const ChainTrace& t);

/// N independent uniform points, stream (seed, replica, 0, i).
ParticleEnsemble uniform_ensemble(int N, std::uint64_t seed, std::uint64_t replica = 0);

/// Runs the chain from `initial`. Without a kernel the dynamics is
/// deterministic and absorption refers to Delta = 0 (never set).
ChainTrace run_chain(const ChainConfig& cfg, const ParticleEnsemble& initial);

struct AbsorptionRow {
  int N = 0;
  double mean_time = 0.0;  // censored runs count as T_max
  int censored = 0;
  int replicas = 0;
  long invariance_violations = 0;
  std::vector<long> times;
};

void to_json(nlohmann::json& j, const AbsorptionRow& r);
void write_csv(std::ostream& os, const std::vector<AbsorptionRow>& rows);

/// For each N, runs `replicas` chains from uniform starts (replica r uses
/// stream (seed, r)) until absorption or cfg.T_max.
std::vector<AbsorptionRow> absorption_scaling(const ChainConfig& cfg, const std::vector<int>& N_list,
                                              int replicas, std::uint64_t seed);

bool strictly_increasing_means(const std::vector<AbsorptionRow>& rows);

struct LlnRow {
  int N = 0;
  double error = 0.0;  // mean W1 error over replicas
  std::vector<double> errors;
};

struct LlnResult {
  std::vector<LlnRow> rows;
  double slope = 0.0;  // least squares slope of log(error) against log(N)
};

void to_json(nlohmann::json& j, const LlnResult& r);
void write_csv(std::ostream& os, const LlnResult& r);

/// Draws N points from phi (inverse CDF of its piecewise-linear
/// interpolant), applies one step of the noisy chain with the empirical mean
/// field and compares with the grid reference M T(phi) in W1. Without a
/// kernel the deterministic step and T(phi) are compared instead.
LlnResult lln_one_step(const GridDensity& phi, const std::vector<int>& N_list, const MapSpec& map,
                       const CouplingSpec& coupling, double delta,
                       const std::optional<NoiseKernel>& kernel, std::uint64_t seed,
                       int replicas = 1);

/// N points drawn from phi by inverse CDF, stream (seed, replica, 0, i).
ParticleEnsemble sample_density(const GridDensity& phi, int N, std::uint64_t seed,
                                std::uint64_t replica = 0);

/// Least squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// N points uniform on [-eps, eps] iterated by det_step; entry n of the
/// result is W1 to the point mass at 0 after n steps (entry 0 is the start).
std::vector<double> dirac_basin_run(double epsilon, double delta, double k, int n_steps, int N,
                                    std::uint64_t seed);

/// Largest observed torus_dist(F_i(x), 0) / torus_dist(x_i, 0) over random
/// ensembles in B_Delta. Coordinates at exactly 0 are skipped.
double contraction_at_zero(double k, double delta, double Delta, int N, int n_samples,
                           std::uint64_t seed);

}  // namespace stolab
