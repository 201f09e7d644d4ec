#pragma once

// Transfer operators of mean-field coupled circle maps.
//
//   g_phi(x) = x + delta * int H(x, y) phi(y) / int(phi) dy   (mod 1)
//   L_phi psi = (psi / g_phi') o g_phi^{-1}
//   P psi(x)  = sum_i psi(f_i^{-1} x) (f_i^{-1})'(x)
//   T(phi)    = P L_phi phi                      (self-consistent operator)
//   T_noisy   = M o T,  (M phi)(y) = int xi(x, y) phi(x) dx
//
// Everything acts on values at the nodes of one shared periodic grid;
// off-grid values come from periodic cubic splines.

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "stolab/model.hpp"
#include "stolab/rng.hpp"
#include "stolab/torus.hpp"

namespace stolab {

/// Mean-field displacement c(x) = int H(x, y) phi_hat(y) dy and its first
/// three derivatives, plus the cached preimages g^{-1}(x_j).
struct DriveField {
  double delta = 0.0;
  Field c, c1, c2, c3;
  PeriodicSpline c_spline;
  PeriodicSpline c1_spline;
  double c_sup = 0.0;
  Field preimage;            // g^{-1}(x_j)
  Field gprime_at_preimage;  // g'(g^{-1}(x_j))

  std::size_t grid_size() const { return c.size(); }
  /// Lift of g: y + delta c(y), not reduced mod 1.
  double lift(double y) const { return y + delta * c_spline(y); }
  double gprime(double y) const { return 1.0 + delta * c1_spline(y); }
  double min_gprime() const;
};

/// Throws CouplingTooStrong when g' = 1 + delta c' is not positive.
DriveField drive_field(const GridDensity& phi, const CouplingSpec& coupling, double delta);

/// Unique y in [0,1) with g(y) = x mod 1 (Newton with bisection fallback on
/// the lift, absolute tolerance 1e-12).
double g_inverse(const DriveField& drive, double x);

GridDensity apply_P(const MapSpec& map, const GridDensity& psi);
Field apply_P(const MapSpec& map, std::span<const double> psi);

GridDensity apply_L(const DriveField& drive, const GridDensity& psi);
Field apply_L(const DriveField& drive, std::span<const double> psi);

GridDensity apply_STO(const GridDensity& phi, const MapSpec& map, const CouplingSpec& coupling,
                      double delta);

/// Dg_phi(psi)(x) = delta / int(phi) * int H(x, y) [psi - phi int(psi)/int(phi)](y) dy.
Field dg_direction(const GridDensity& phi, std::span<const double> psi, const CouplingSpec& coupling,
                   double delta);

/// Gateaux differential D T_phi(psi) = P (L_phi psi - d/dx L_phi[phi Dg_phi(psi)]).
Field sto_differential(const GridDensity& phi, std::span<const double> psi, const MapSpec& map,
                       const CouplingSpec& coupling, double delta);

/// Sup-norm bounds on g_phi valid for every density phi.
struct GBounds {
  double sup_d1H = 0.0, sup_d2H = 0.0, sup_d3H = 0.0;
  double gprime = 1.0;              // 1 + |delta| |d1 H|
  double gsecond = 0.0;             // |delta| |d1^2 H|
  double gthird = 0.0;              // |delta| |d1^3 H|
  double inverse_derivative = 1.0;  // (1 - |delta| |d1 H|)^{-1}
};

void to_json(nlohmann::json& j, const GBounds& b);

/// Throws CouplingTooStrong when |delta| |d1 H|_inf >= 1. Sup norms by
/// sampling on a 512 x 512 grid.
GBounds g_bounds(const CouplingSpec& coupling, double delta);

// ---- noise --------------------------------------------------------------------

enum class BumpProfile {
  Scaled,  // exp(1 - 1/(1 - (z/r)^2)), r = Delta/3
  Classic, // exp(-1/(r^2 - z^2)) evaluated relative to its peak
};

enum class CutoffProfile {
  Smooth,  // 0 on |x| <= 2 Delta/3, 1 on |x| >= 0.99 Delta, C-infinity in between
};

struct NoiseParams {
  double Delta = 0.05;
  double gamma = 0.0;
  BumpProfile bump = BumpProfile::Scaled;
  CutoffProfile cutoff = CutoffProfile::Smooth;
};

BumpProfile bump_profile_from_string(const std::string& s);
CutoffProfile cutoff_profile_from_string(const std::string& s);
std::string to_string(BumpProfile p);
std::string to_string(CutoffProfile p);

/// xi(x, y) = (1 - gamma iota(x)/(2 Delta)) xi~(x - y) + gamma iota(x)/(2 Delta),
/// with xi~ a symmetric bump supported on [-Delta/3, Delta/3].
/// Kernel conditions are verified on construction:
///   a.1  xi(x, .) = xi~(x - .) for |x| <= 2 Delta/3
///   a.2  int_{[-Delta, Delta]} xi(x, y) dy >= gamma for all x
///   a.3  the C2 distance to the pure bump kernel is gamma times a constant
/// and every grid row integrates to 1 within 1e-8.
class NoiseKernel {
 public:
  NoiseKernel(NoiseParams params, std::size_t grid_size);

  const NoiseParams& params() const { return params_; }
  std::size_t grid_size() const { return grid_size_; }

  /// Normalized bump density xi~(z) (continuous normalization).
  double bump(double z) const;
  /// Cutoff iota(x) in [0, 1].
  double cutoff(double x) const;
  /// Probability of the uniform component at source point x.
  double uniform_weight(double x) const;
  /// Continuous kernel density xi(x, y).
  double density(double x, double y) const;
  /// int_{[-Delta, Delta]} xi(x, y) dy.
  double mass_in_trap(double x) const;
  /// gamma-independent constant C with sup_y ||xi(., y) - xi~(. - y)||_{C2} = gamma C.
  double a3_constant() const { return a3_constant_; }

  /// Draw y ~ xi(x, .): uniform with probability uniform_weight(x), else
  /// x + z with z from the bump's inverse-CDF table.
  double sample(double x, Stream& rng) const;

  /// Row-major grid kernel K[j * G + l] = xi(x_j, y_l) with the bump
  /// normalized by quadrature so rows integrate to one.
  std::span<const double> matrix() const { return matrix_; }
  double row_integral(std::size_t j) const;

  GridDensity apply(const GridDensity& phi) const;
  /// Same linear action on a signed field.
  Field apply(std::span<const double> f) const;

  void write_csv(std::ostream& os) const;

 private:
  double bump_raw(double z) const;
  double bump_cdf(double z) const;

  NoiseParams params_;
  std::size_t grid_size_;
  double radius_;
  double bump_norm_ = 1.0;  // continuous normalizer of bump_raw
  std::vector<double> cdf_knots_;
  std::vector<double> matrix_;
  std::vector<double> transposed_;
  double a3_constant_ = 0.0;
};

GridDensity apply_M(const NoiseKernel& kernel, const GridDensity& phi);

GridDensity apply_noisy_STO(const GridDensity& phi, const MapSpec& map, const CouplingSpec& coupling,
                            double delta, const NoiseKernel& kernel);

/// Operator bundle used by the solver and the experiment driver.
struct StoProblem {
  MapPtr map;
  CouplingPtr coupling;
  double delta = 0.0;
  std::optional<NoiseKernel> noise;

  GridDensity apply(const GridDensity& phi) const;
};

}  // namespace stolab
