#pragma once

// Log-Lipschitz cones V_a = {phi > 0 : |phi'/phi| <= a}, the second-derivative
// cones C_alpha = {|phi''/phi| <= alpha}, their cone order and the Hilbert
// projective metric on V_a.

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "stolab/error.hpp"
#include "stolab/rng.hpp"
#include "stolab/torus.hpp"

namespace stolab {

struct ConeParams {
  double a = 0.0;
  double alpha = 0.0;
};

struct ConeReport {
  double log_lip = 0.0;       // max |phi'/phi|
  double second_ratio = 0.0;  // max |phi''/phi|
  bool in_Va = false;
  bool in_Ualpha = false;
  double slack = 0.0;  // a - log_lip
};

void to_json(nlohmann::json& j, const ConeReport& r);

/// Raised when an iterate or argument is not strictly inside V_a.
class ConeEscapeError : public Error {
 public:
  ConeEscapeError(const std::string& what, ConeReport report)
      : Error(ErrorKind::ConeEscape, what), report_(report) {}
  const ConeReport& report() const { return report_; }

 private:
  ConeReport report_;
};

ConeReport cone_report(const GridDensity& phi, ConeParams p);

/// max_j |f'_j / f_j| for a strictly positive grid field.
double log_lipschitz(std::span<const double> f);

/// Membership of an arbitrary grid field in the open cone V_a:
/// f > 0 and |f'| <= a f + tol * scale, scale = max(sup|f|, tol_scale).
bool in_cone(std::span<const double> f, double a, double tol = 1e-10, double tol_scale = 0.0);

/// phi <=_{V_a} psi, i.e. psi - phi in V_a. The difference must be strictly
/// positive; the derivative constraint is relaxed by tol * max(sup phi, sup psi).
bool partial_order_leq(const GridDensity& phi, const GridDensity& psi, double a, double tol = 1e-10);

/// Relative interior slack (a - log_lip)/a below which the Hilbert metric is
/// refused.
inline constexpr double kHilbertInteriorSlack = 1e-3;

/// Closed form of d_{V_a}: M is the largest of the three ratio families
/// phi/psi, (a phi - phi')/(a psi - psi'), (a phi + phi')/(a psi + psi');
/// m(phi, psi) = 1 / M(psi, phi).
double hilbert_metric(const GridDensity& phi, const GridDensity& psi, double a);

/// Same metric computed from the definition: bisection on beta over the cone
/// order predicate. Kept as an independent oracle for hilbert_metric.
double hilbert_metric_bruteforce(const GridDensity& phi, const GridDensity& psi, double a,
                                 int beta_steps = 1000);

/// Random smooth log-density: exp of a trigonometric polynomial of degree
/// <= 8 rescaled so that max |d log phi / dx| equals target_log_lip.
GridDensity random_cone_element(std::size_t grid_size, double target_log_lip, Stream& rng,
                                int degree = 8);

/// Same, additionally rejecting draws with max |phi''/phi| > alpha.
/// Throws Numerical if no draw is accepted within max_tries.
GridDensity random_cone_element(std::size_t grid_size, double target_log_lip, double alpha,
                                Stream& rng, int degree = 8, int max_tries = 1000);

/// Max of hilbert_metric(., ., a) over n_samples random pairs from V_{lam a}.
/// Pair i uses substreams (seed, i, 0) and (seed, i, 1). Distances are
/// appended to `distances` when given.
double diameter_estimate(double a, double lam, int n_samples, std::uint64_t seed,
                         std::size_t grid_size = 256, std::vector<double>* distances = nullptr);

/// Size of a C1 perturbation that keeps a normalized element of V_{a'}
/// inside V_a: min{(a - a')/(4 a' e^{a'/2} + 6 e^{a'}), e^{-a'/2}/2}.
double strict_inclusion_margin(double a_prime, double a);

/// C1 norm sup|f| + sup|f'| of a grid field.
double c1_norm(std::span<const double> f);

}  // namespace stolab
