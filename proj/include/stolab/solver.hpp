#pragma once

// Fixed-point iteration of the (noisy) self-consistent operator with Hilbert
// metric diagnostics, and evaluators for the explicit stability conditions of
// the f(x) = kx mod 1 family.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <json.hpp>

#include "stolab/cones.hpp"
#include "stolab/operators.hpp"

namespace stolab {

/// Open interval (lo, hi).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return lo < x && x < hi; }
  bool subset_of(const Interval& o) const { return o.lo <= lo && hi <= o.hi; }
  double midpoint() const { return 0.5 * (lo + hi); }
};

void to_json(nlohmann::json& j, const Interval& iv);

/// max_x || d1^order H(x, .) ||_{L1}, L1 norms by adaptive Gauss-Kronrod in y,
/// maximum over a 1024-point x grid refined by Brent search.
double max_l1_norm(const CouplingSpec& coupling, int order);

struct StabilityReport {
  double k = 0.0;
  double delta = 0.0;
  double norm_d1 = 0.0;
  double norm_d2 = 0.0;
  double threshold = 0.0;  // 2 (k - 1)
  double lhs = 0.0;        // |delta| max(norm_d1, norm_d2)
  bool satisfied = false;
  Interval dirac_window;
  Interval basin_window;
};

void to_json(nlohmann::json& j, const StabilityReport& r);

StabilityReport stability_condition(const CouplingSpec& coupling, double k, double delta);

/// delta with |k (1 + 2 pi delta)| < 1: ((-1 - 1/k)/(2 pi), (-1 + 1/k)/(2 pi)).
Interval dirac_window(double k);

/// (-(2 + 3k)/(6 pi k), -(3k - 2)/(6 pi k)).
Interval basin_window(double k);

/// safety * Delta* where Delta* solves k (1 + 2 pi delta cos^2(2 pi Delta)) = 2/3.
double delta_max_trap(double delta, double k, double safety);

struct IterationTrace {
  std::vector<GridDensity> iterates;  // normalized to unit integral
  std::vector<double> hilbert_steps;
  std::vector<double> contraction_ratios;
  std::vector<double> sup_residuals;
  int entry_steps = 0;  // applications spent before the first iterate entered V_a
  bool converged = false;
  int n_iters = 0;

  /// Median of the last (up to) 10 contraction ratios; empty when fewer
  /// than two Hilbert steps were taken.
  std::optional<double> ratio_estimate() const;
  const GridDensity& final() const { return iterates.back(); }
};

nlohmann::json to_json(const IterationTrace& t);
void write_trace_csv(std::ostream& os, const IterationTrace& t);

struct FixedPointOptions {
  double a = 1.0;         // cone parameter of the metric
  double tol = 1e-10;     // stop when d_{V_a}(phi_{n+1}, phi_n) < tol
  int max_iters = 100;
  /// Iterations allowed for phi_0 to enter the interior of V_a before the
  /// Hilbert diagnostics start. 0 means phi_0 itself must be interior.
  int entry_iters = 0;
};

/// Throws ConeEscapeError when an iterate is not strictly inside V_a.
IterationTrace fixed_point_iterate(const StoProblem& problem, const GridDensity& phi0,
                                   const FixedPointOptions& options);

/// Plain iteration phi <- normalize(T phi) stopped on the sup residual;
/// no cone bookkeeping, hilbert_steps stays empty.
IterationTrace power_iterate(const StoProblem& problem, const GridDensity& phi0, double tol,
                             int max_iters);

struct OrderCheckReport {
  int pairs = 0;
  int order_failures = 0;
  int directions = 0;
  int differential_failures = 0;
  double worst_order_log_lip = 0.0;         // max log_lip(T psi - T phi)
  double worst_differential_log_lip = 0.0;  // max log_lip(DT_phi(xi))
};

void to_json(nlohmann::json& j, const OrderCheckReport& r);

/// Draws n_pairs phi in U_{a,alpha}, psi = phi + s eta with eta in V_a and s
/// below the strict inclusion margin, and counts failures of
/// T psi - T phi in V_a (tolerance 1e-8 * scale). Also counts failures of
/// DT_phi(xi) in V_a over n_pairs directions xi in V_a. Requires the
/// stability condition to hold (Precondition otherwise).
OrderCheckReport order_preservation_check(const StoProblem& problem, double a, double alpha,
                                          int n_pairs, std::uint64_t seed,
                                          std::size_t grid_size = 256);

struct ContractionProbe {
  double measured = 0.0;   // max log_lip(T psi) / log_lip(psi)
  double predicted = 0.0;  // (1 + |delta| norm_d2 / 2) / k
  double margin = 0.0;     // measured - predicted
};

void to_json(nlohmann::json& j, const ContractionProbe& p);

ContractionProbe cone_contraction_probe(const StoProblem& problem, double a, int n_samples,
                                        std::uint64_t seed, std::size_t grid_size = 256);

}  // namespace stolab
