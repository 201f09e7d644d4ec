#include "stolab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

namespace stolab {

namespace {
constexpr double kPi = std::numbers::pi;
}

void to_json(nlohmann::json& j, const Interval& iv) { j = {iv.lo, iv.hi}; }

double max_l1_norm(const CouplingSpec& coupling, int order) {
  using boost::math::quadrature::gauss_kronrod;
  auto l1 = [&](double x) {
    auto f = [&](double y) { return std::abs(coupling.d1(x, y, order)); };
    return gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-13);
  };
  constexpr int n = 1024;
  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i < n; ++i) {
    const double v = l1(static_cast<double>(i) / n);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double lo = (best - 1.0) / n, hi = (best + 1.0) / n;
  const auto r = boost::math::tools::brent_find_minima([&](double x) { return -l1(x); }, lo, hi, 50);
  return std::max(best_val, -r.second);
}

void to_json(nlohmann::json& j, const StabilityReport& r) {
  j = {{"k", r.k},
       {"delta", r.delta},
       {"norm_d1", r.norm_d1},
       {"norm_d2", r.norm_d2},
       {"threshold", r.threshold},
       {"lhs", r.lhs},
       {"satisfied", r.satisfied},
       {"dirac_window", r.dirac_window},
       {"basin_window", r.basin_window}};
}

StabilityReport stability_condition(const CouplingSpec& coupling, double k, double delta) {
  require(k > 1.0, ErrorKind::Domain, "stability_condition needs k > 1");
  StabilityReport r;
  r.k = k;
  r.delta = delta;
  r.norm_d1 = max_l1_norm(coupling, 1);
  r.norm_d2 = max_l1_norm(coupling, 2);
  r.threshold = 2.0 * (k - 1.0);
  r.lhs = std::abs(delta) * std::max(r.norm_d1, r.norm_d2);
  r.satisfied = r.lhs < r.threshold;
  r.dirac_window = dirac_window(k);
  r.basin_window = basin_window(k);
  return r;
}

Interval dirac_window(double k) {
  require(k > 1.0, ErrorKind::Domain, "dirac_window needs k > 1");
  return {(-1.0 - 1.0 / k) / (2.0 * kPi), (-1.0 + 1.0 / k) / (2.0 * kPi)};
}

Interval basin_window(double k) {
  require(k > 2.0 / 3.0, ErrorKind::Domain, "basin_window needs k > 2/3");
  return {-(2.0 + 3.0 * k) / (6.0 * kPi * k), -(3.0 * k - 2.0) / (6.0 * kPi * k)};
}

double delta_max_trap(double delta, double k, double safety) {
  require(safety > 0.0 && safety <= 1.0, ErrorKind::Domain, "safety must lie in (0, 1]");
  require(basin_window(k).contains(delta), ErrorKind::Domain,
          "delta_max_trap: delta = " + std::to_string(delta) + " is outside the basin window");
  auto h = [&](double d) {
    const double c = std::cos(2.0 * kPi * d);
    return k * (1.0 + 2.0 * kPi * delta * c * c) - 2.0 / 3.0;
  };
  double lo = 0.0, hi = 0.25;  // h(lo) < 0 < h(hi)
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (h(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  return safety * lo;
}

// ---- fixed point iteration ------------------------------------------------------

std::optional<double> IterationTrace::ratio_estimate() const {
  if (contraction_ratios.empty()) return std::nullopt;
  const std::size_t n = std::min<std::size_t>(10, contraction_ratios.size());
  std::vector<double> tail(contraction_ratios.end() - static_cast<std::ptrdiff_t>(n),
                           contraction_ratios.end());
  std::sort(tail.begin(), tail.end());
  return n % 2 == 1 ? tail[n / 2] : 0.5 * (tail[n / 2 - 1] + tail[n / 2]);
}

nlohmann::json to_json(const IterationTrace& t) {
  nlohmann::json j = {{"hilbert_steps", t.hilbert_steps},
                      {"contraction_ratios", t.contraction_ratios},
                      {"sup_residuals", t.sup_residuals},
                      {"entry_steps", t.entry_steps},
                      {"converged", t.converged},
                      {"n_iters", t.n_iters},
                      {"final", to_json(t.final())}};
  if (auto r = t.ratio_estimate()) j["ratio_estimate"] = *r;
  else j["ratio_estimate"] = nullptr;
  return j;
}

void write_trace_csv(std::ostream& os, const IterationTrace& t) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "iteration,hilbert_step,sup_residual\n";
  for (std::size_t i = 0; i < t.sup_residuals.size(); ++i) {
    os << i + 1 << ',';
    if (i < t.hilbert_steps.size()) os << t.hilbert_steps[i];
    os << ',' << t.sup_residuals[i] << '\n';
  }
  os.precision(old);
}

namespace {

bool strictly_interior(const ConeReport& r, double a) {
  return (a - r.log_lip) / a >= kHilbertInteriorSlack;
}

}  // namespace

IterationTrace fixed_point_iterate(const StoProblem& problem, const GridDensity& phi0,
                                   const FixedPointOptions& options) {
  require(options.a > 0.0, ErrorKind::Domain, "fixed_point_iterate needs a > 0");
  require(options.max_iters >= 1, ErrorKind::Domain, "max_iters must be >= 1");
  const ConeParams cone{options.a, std::numeric_limits<double>::infinity()};

  IterationTrace trace;
  GridDensity phi = phi0.normalized();
  trace.iterates.push_back(phi);

  ConeReport rep = cone_report(phi, cone);
  while (!strictly_interior(rep, options.a) && trace.entry_steps < options.entry_iters) {
    phi = problem.apply(phi).normalized();
    trace.iterates.push_back(phi);
    ++trace.entry_steps;
    ++trace.n_iters;
    rep = cone_report(phi, cone);
  }
  if (!strictly_interior(rep, options.a)) {
    throw ConeEscapeError("initial density is not strictly inside V_a (log_lip = " +
                              std::to_string(rep.log_lip) + ", a = " + std::to_string(options.a) + ")",
                          rep);
  }

  for (int n = 0; n < options.max_iters; ++n) {
    GridDensity next = problem.apply(phi).normalized();
    ++trace.n_iters;
    const ConeReport next_rep = cone_report(next, cone);
    if (!strictly_interior(next_rep, options.a)) {
      throw ConeEscapeError("iterate " + std::to_string(trace.n_iters) +
                                " left the interior of V_a (log_lip = " +
                                std::to_string(next_rep.log_lip) + ")",
                            next_rep);
    }
    const double step = hilbert_metric(next, phi, options.a);
    if (!trace.hilbert_steps.empty()) {
      const double prev = trace.hilbert_steps.back();
      trace.contraction_ratios.push_back(prev > 0.0 ? step / prev : 0.0);
    }
    trace.hilbert_steps.push_back(step);
    trace.sup_residuals.push_back(sup_distance(next.values(), phi.values()));
    trace.iterates.push_back(next);
    phi = std::move(next);
    if (step < options.tol) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

IterationTrace power_iterate(const StoProblem& problem, const GridDensity& phi0, double tol,
                             int max_iters) {
  require(tol > 0.0 && max_iters >= 1, ErrorKind::Domain, "power_iterate needs tol > 0, max_iters >= 1");
  IterationTrace trace;
  trace.iterates.push_back(phi0.normalized());
  for (int n = 0; n < max_iters; ++n) {
    GridDensity next = problem.apply(trace.iterates.back()).normalized();
    ++trace.n_iters;
    const double r = sup_distance(next.values(), trace.iterates.back().values());
    trace.sup_residuals.push_back(r);
    trace.iterates.push_back(std::move(next));
    if (r < tol) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

// ---- Monte Carlo checks -------------------------------------------------------------

void to_json(nlohmann::json& j, const OrderCheckReport& r) {
  j = {{"pairs", r.pairs},
       {"order_failures", r.order_failures},
       {"directions", r.directions},
       {"differential_failures", r.differential_failures},
       {"worst_order_log_lip", r.worst_order_log_lip},
       {"worst_differential_log_lip", r.worst_differential_log_lip}};
}

namespace {

Field differential_of(const StoProblem& problem, const GridDensity& phi, std::span<const double> xi) {
  Field d = sto_differential(phi, xi, *problem.map, *problem.coupling, problem.delta);
  if (problem.noise) d = problem.noise->apply(d);
  return d;
}

double log_lip_or_inf(std::span<const double> f) {
  for (double v : f) {
    if (!(v > 0.0)) return std::numeric_limits<double>::infinity();
  }
  return log_lipschitz(f);
}

}  // namespace

OrderCheckReport order_preservation_check(const StoProblem& problem, double a, double alpha,
                                          int n_pairs, std::uint64_t seed, std::size_t grid_size) {
  require(a > 0.0 && alpha >= 0.0 && n_pairs >= 1, ErrorKind::Domain,
          "order_preservation_check needs a > 0, alpha >= 0, n_pairs >= 1");
  const StabilityReport stab =
      stability_condition(*problem.coupling, problem.map->expansion(), problem.delta);
  if (!stab.satisfied) {
    throw Error(ErrorKind::Precondition,
                "order_preservation_check: |delta| max ||d1^i H||_1 = " + std::to_string(stab.lhs) +
                    " is not below 2(k-1) = " + std::to_string(stab.threshold));
  }

  std::vector<double> order_ll(static_cast<std::size_t>(n_pairs));
  std::vector<double> diff_ll(static_cast<std::size_t>(n_pairs));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_pairs; ++i) {
    Stream rng(seed, static_cast<std::uint64_t>(i));
    const double a_phi = a * (0.1 + 0.8 * rng.uniform());
    const GridDensity phi = random_cone_element(grid_size, a_phi, alpha, rng);
    const GridDensity eta = random_cone_element(grid_size, a * 0.9 * rng.uniform(), rng);
    const double s = 0.5 * strict_inclusion_margin(a_phi, a) * rng.uniform() + 1e-3;
    const GridDensity psi = GridDensity([&] {
      std::vector<double> v(grid_size);
      for (std::size_t j = 0; j < grid_size; ++j) v[j] = phi[j] + s * eta[j];
      return v;
    }());
    const GridDensity tphi = problem.apply(phi);
    const GridDensity tpsi = problem.apply(psi);
    Field diff(grid_size);
    for (std::size_t j = 0; j < grid_size; ++j) diff[j] = tpsi[j] - tphi[j];
    const bool ordered = partial_order_leq(tphi, tpsi, a, 1e-8);
    order_ll[static_cast<std::size_t>(i)] = ordered ? log_lip_or_inf(diff)
                                                    : std::numeric_limits<double>::infinity();

    const GridDensity xi = random_cone_element(grid_size, a * rng.uniform(), rng);
    const Field dxi = differential_of(problem, phi, xi.values());
    const bool included = in_cone(dxi, a, 1e-8);
    diff_ll[static_cast<std::size_t>(i)] = included ? log_lip_or_inf(dxi)
                                                    : std::numeric_limits<double>::infinity();
  }

  OrderCheckReport r;
  r.pairs = n_pairs;
  r.directions = n_pairs;
  for (int i = 0; i < n_pairs; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (!std::isfinite(order_ll[u])) ++r.order_failures;
    if (!std::isfinite(diff_ll[u])) ++r.differential_failures;
    r.worst_order_log_lip = std::max(r.worst_order_log_lip, order_ll[u]);
    r.worst_differential_log_lip = std::max(r.worst_differential_log_lip, diff_ll[u]);
  }
  return r;
}

void to_json(nlohmann::json& j, const ContractionProbe& p) {
  j = {{"measured", p.measured}, {"predicted", p.predicted}, {"margin", p.margin}};
}

ContractionProbe cone_contraction_probe(const StoProblem& problem, double a, int n_samples,
                                        std::uint64_t seed, std::size_t grid_size) {
  require(a > 0.0 && n_samples >= 1, ErrorKind::Domain, "cone_contraction_probe needs a > 0");
  const double k = problem.map->expansion();
  std::vector<double> ratios(static_cast<std::size_t>(n_samples));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_samples; ++i) {
    Stream rng(seed, static_cast<std::uint64_t>(i));
    const GridDensity psi = random_cone_element(grid_size, a, rng);
    const GridDensity tpsi = problem.apply(psi);
    ratios[static_cast<std::size_t>(i)] = log_lipschitz(tpsi.values()) / log_lipschitz(psi.values());
  }
  ContractionProbe p;
  p.measured = *std::max_element(ratios.begin(), ratios.end());
  const double norm_d2 = max_l1_norm(*problem.coupling, 2);
  p.predicted = (1.0 + std::abs(problem.delta) * norm_d2 / 2.0) / k;
  p.margin = p.measured - p.predicted;
  return p;
}

}  // namespace stolab
