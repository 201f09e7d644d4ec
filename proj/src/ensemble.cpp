#include "stolab/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "stolab/kernels.hpp"

namespace stolab {

ParticleEnsemble det_step(const ParticleEnsemble& x, double k, double delta) {
  std::vector<double> out(x.size());
  kernels::parallel::det_step(x.points(), k, delta, out);
  return ParticleEnsemble(std::move(out));
}

ParticleEnsemble coupled_step(const ParticleEnsemble& x, const MapSpec& map,
                              const CouplingSpec& coupling, double delta) {
  const std::vector<double> c = coupling.mean_field(x.points());
  std::vector<double> out(x.size());
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    out[u] = wrap(map.eval(wrap(x[u] + delta * c[u])));
  }
  return ParticleEnsemble(std::move(out));
}

namespace {

ParticleEnsemble add_noise(const ParticleEnsemble& F, const NoiseKernel& kernel, std::uint64_t seed,
                           std::uint64_t replica, std::uint64_t t) {
  std::vector<double> out(F.size());
  const auto n = static_cast<std::ptrdiff_t>(F.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    Stream rng(seed, replica, t, u);
    out[u] = kernel.sample(F[u], rng);
  }
  return ParticleEnsemble(std::move(out));
}

}  // namespace

ParticleEnsemble noisy_step(const ParticleEnsemble& x, double k, double delta,
                            const NoiseKernel& kernel, std::uint64_t seed, std::uint64_t replica,
                            std::uint64_t t) {
  return add_noise(det_step(x, k, delta), kernel, seed, replica, t);
}

bool in_trap(const ParticleEnsemble& x, double Delta) {
  for (double p : x.points()) {
    if (std::abs(centered(p)) > Delta) return false;
  }
  return true;
}

void write_csv(std::ostream& os, const ChainTrace& t) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "t,dW_to_lebesgue,dW_to_dirac0,absorbed\n";
  for (std::size_t i = 0; i < t.times.size(); ++i) {
    os << t.times[i] << ',' << t.dW_to_lebesgue[i] << ',' << t.dW_to_dirac0[i] << ','
       << (t.absorbed_flag[i] ? 1 : 0) << '\n';
  }
  os.precision(old);
}

nlohmann::json to_json(const ChainTrace& t) {
  nlohmann::json j;
  j["steps"] = t.steps;
  j["absorbed_at"] = t.absorbed_at ? nlohmann::json(*t.absorbed_at) : nlohmann::json(nullptr);
  j["invariance_violations"] = t.invariance_violations;
  j["max_dW_to_lebesgue"] =
      t.dW_to_lebesgue.empty() ? 0.0 : *std::max_element(t.dW_to_lebesgue.begin(), t.dW_to_lebesgue.end());
  j["final_dW_to_dirac0"] = t.dW_to_dirac0.empty() ? 0.0 : t.dW_to_dirac0.back();
  return j;
}

ParticleEnsemble uniform_ensemble(int N, std::uint64_t seed, std::uint64_t replica) {
  require(N >= 1, ErrorKind::Domain, "ensemble size must be >= 1");
  std::vector<double> x(static_cast<std::size_t>(N));
  for (std::size_t i = 0; i < x.size(); ++i) {
    Stream rng(seed, replica, 0, i);
    x[i] = rng.uniform();
  }
  return ParticleEnsemble(std::move(x));
}

ChainTrace run_chain(const ChainConfig& cfg, const ParticleEnsemble& initial) {
  require(cfg.N >= 1 && cfg.T_max >= 1 && cfg.record_every >= 1, ErrorKind::Domain,
          "run_chain needs N >= 1, T_max >= 1, record_every >= 1");
  require(static_cast<int>(initial.size()) == cfg.N, ErrorKind::Domain,
          "initial ensemble size does not match N");
  const GridDensity lebesgue = GridDensity::constant(64);
  const double Delta = cfg.kernel ? cfg.kernel->params().Delta : 0.0;

  ChainTrace trace;
  ParticleEnsemble x = initial;
  auto record = [&](long t, bool absorbed) {
    trace.times.push_back(t);
    trace.dW_to_lebesgue.push_back(wasserstein1_circle(x, lebesgue));
    trace.dW_to_dirac0.push_back(wasserstein1_to_point(x));
    trace.absorbed_flag.push_back(absorbed);
  };

  bool absorbed = cfg.kernel && in_trap(x, Delta);
  if (absorbed) trace.absorbed_at = 0;
  record(0, absorbed);
  long t = 0;
  while (t < cfg.T_max) {
    if (absorbed && cfg.stop_at_absorption && t - *trace.absorbed_at >= cfg.post_absorption_steps) break;
    x = cfg.kernel ? noisy_step(x, cfg.k, cfg.delta, *cfg.kernel, cfg.seed, cfg.replica,
                                static_cast<std::uint64_t>(t) + 1)
                   : det_step(x, cfg.k, cfg.delta);
    ++t;
    if (cfg.kernel) {
      const bool inside = in_trap(x, Delta);
      if (absorbed && !inside) ++trace.invariance_violations;
      if (!absorbed && inside) {
        absorbed = true;
        trace.absorbed_at = t;
      }
    }
    if (t % cfg.record_every == 0) record(t, absorbed);
  }
  if (trace.times.back() != t) record(t, absorbed);
  trace.steps = t;
  trace.final_state = x;
  return trace;
}

void to_json(nlohmann::json& j, const AbsorptionRow& r) {
  j = {{"N", r.N},
       {"mean_time", r.mean_time},
       {"censored", r.censored},
       {"replicas", r.replicas},
       {"invariance_violations", r.invariance_violations}};
}

void write_csv(std::ostream& os, const std::vector<AbsorptionRow>& rows) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "N,mean_absorption_time,censored,replicas\n";
  for (const auto& r : rows) os << r.N << ',' << r.mean_time << ',' << r.censored << ',' << r.replicas << '\n';
  os.precision(old);
}

std::vector<AbsorptionRow> absorption_scaling(const ChainConfig& cfg, const std::vector<int>& N_list,
                                              int replicas, std::uint64_t seed) {
  require(cfg.kernel.has_value(), ErrorKind::Precondition, "absorption_scaling needs a noise kernel");
  require(replicas >= 1, ErrorKind::Domain, "replicas must be >= 1");
  std::vector<AbsorptionRow> rows;
  for (int N : N_list) {
    AbsorptionRow row;
    row.N = N;
    row.replicas = replicas;
    row.times.assign(static_cast<std::size_t>(replicas), 0);
    std::vector<long> violations(static_cast<std::size_t>(replicas), 0);
    std::vector<char> censored(static_cast<std::size_t>(replicas), 0);
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < replicas; ++r) {
      ChainConfig c = cfg;
      c.N = N;
      c.seed = seed;
      // replicas of different N must not share streams
      c.replica = (static_cast<std::uint64_t>(N) << 32) | static_cast<std::uint64_t>(r);
      c.record_every = static_cast<int>(std::min<long>(cfg.T_max, 1L << 30));
      c.stop_at_absorption = true;
      const ChainTrace tr = run_chain(c, uniform_ensemble(N, seed, c.replica));
      const auto u = static_cast<std::size_t>(r);
      if (tr.absorbed_at) {
        row.times[u] = *tr.absorbed_at;
      } else {
        row.times[u] = cfg.T_max;
        censored[u] = 1;
      }
      violations[u] = tr.invariance_violations;
    }
    double sum = 0.0;
    for (std::size_t r = 0; r < row.times.size(); ++r) {
      sum += static_cast<double>(row.times[r]);
      row.censored += censored[r];
      row.invariance_violations += violations[r];
    }
    row.mean_time = sum / replicas;
    rows.push_back(std::move(row));
  }
  return rows;
}

bool strictly_increasing_means(const std::vector<AbsorptionRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].mean_time > rows[i - 1].mean_time)) return false;
  }
  return true;
}

// ---- law of large numbers -----------------------------------------------------------

void to_json(nlohmann::json& j, const LlnResult& r) {
  j = nlohmann::json::object();
  j["slope"] = r.slope;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : r.rows) j["rows"].push_back({{"N", row.N}, {"error", row.error}, {"errors", row.errors}});
}

void write_csv(std::ostream& os, const LlnResult& r) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "N,dW_error\n";
  for (const auto& row : r.rows) os << row.N << ',' << row.error << '\n';
  os.precision(old);
}

ParticleEnsemble sample_density(const GridDensity& phi, int N, std::uint64_t seed, std::uint64_t replica) {
  require(N >= 1, ErrorKind::Domain, "sample size must be >= 1");
  const DensityCdf cdf(phi);
  std::vector<double> x(static_cast<std::size_t>(N));
  for (std::size_t i = 0; i < x.size(); ++i) {
    Stream rng(seed, replica, 0, i);
    x[i] = cdf.quantile(rng.uniform());
  }
  return ParticleEnsemble(std::move(x));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::Domain, "slope fit needs >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

LlnResult lln_one_step(const GridDensity& phi, const std::vector<int>& N_list, const MapSpec& map,
                       const CouplingSpec& coupling, double delta,
                       const std::optional<NoiseKernel>& kernel, std::uint64_t seed, int replicas) {
  require(!N_list.empty() && replicas >= 1, ErrorKind::Domain, "lln_one_step needs N values and replicas");
  const GridDensity reference = kernel ? apply_noisy_STO(phi, map, coupling, delta, *kernel)
                                       : apply_STO(phi, map, coupling, delta);
  LlnResult res;
  std::vector<double> xs, ys;
  for (int N : N_list) {
    LlnRow row;
    row.N = N;
    for (int r = 0; r < replicas; ++r) {
      const auto rep = (static_cast<std::uint64_t>(N) << 32) | static_cast<std::uint64_t>(r);
      const ParticleEnsemble x = sample_density(phi, N, seed, rep);
      ParticleEnsemble y = coupled_step(x, map, coupling, delta);
      if (kernel) y = add_noise(y, *kernel, seed, rep, 1);
      row.errors.push_back(wasserstein1_circle(y, reference));
    }
    row.error = std::accumulate(row.errors.begin(), row.errors.end(), 0.0) / replicas;
    xs.push_back(N);
    ys.push_back(row.error);
    res.rows.push_back(std::move(row));
  }
  res.slope = xs.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
  return res;
}

// ---- Dirac basin ----------------------------------------------------------------

std::vector<double> dirac_basin_run(double epsilon, double delta, double k, int n_steps, int N,
                                    std::uint64_t seed) {
  require(epsilon >= 0.0 && epsilon < 0.5, ErrorKind::Domain, "epsilon must lie in [0, 1/2)");
  require(n_steps >= 0 && N >= 1, ErrorKind::Domain, "dirac_basin_run needs n_steps >= 0, N >= 1");
  std::vector<double> x(static_cast<std::size_t>(N));
  for (std::size_t i = 0; i < x.size(); ++i) {
    Stream rng(seed, 0, 0, i);
    x[i] = wrap(epsilon * (2.0 * rng.uniform() - 1.0));
  }
  ParticleEnsemble e(std::move(x));
  std::vector<double> series{wasserstein1_to_point(e)};
  for (int n = 0; n < n_steps; ++n) {
    e = det_step(e, k, delta);
    series.push_back(wasserstein1_to_point(e));
  }
  return series;
}

double contraction_at_zero(double k, double delta, double Delta, int N, int n_samples, std::uint64_t seed) {
  require(Delta > 0.0 && N >= 1 && n_samples >= 1, ErrorKind::Domain, "contraction_at_zero: bad arguments");
  double worst = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    std::vector<double> x(static_cast<std::size_t>(N));
    for (std::size_t i = 0; i < x.size(); ++i) {
      Stream rng(seed, static_cast<std::uint64_t>(s), 0, i);
      x[i] = wrap(Delta * (2.0 * rng.uniform() - 1.0));
    }
    const ParticleEnsemble e(x);
    const ParticleEnsemble F = det_step(e, k, delta);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d0 = torus_dist(e[i], 0.0);
      if (d0 == 0.0) continue;
      worst = std::max(worst, torus_dist(F[i], 0.0) / d0);
    }
  }
  return worst;
}

}  // namespace stolab
