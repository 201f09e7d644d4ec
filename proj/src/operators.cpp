#include "stolab/operators.hpp"

#include <algorithm>
#include <cmath>

#include "stolab/kernels.hpp"

namespace stolab {

double DriveField::min_gprime() const {
  double m = 1.0 + delta * c1.front();
  for (double v : c1) m = std::min(m, 1.0 + delta * v);
  return m;
}

DriveField drive_field(const GridDensity& phi, const CouplingSpec& coupling, double delta) {
  require(std::isfinite(delta), ErrorKind::Domain, "delta must be finite");
  const std::size_t g = phi.size();
  const GridDensity phi_hat = phi.normalized();
  const double w = 1.0 / static_cast<double>(g);

  DriveField d;
  d.delta = delta;
  Field* outs[4] = {&d.c, &d.c1, &d.c2, &d.c3};
  for (int order = 0; order < 4; ++order) {
    outs[order]->assign(g, 0.0);
    kernels::parallel::matvec(coupling.table(order, g), phi_hat.values(), w, *outs[order]);
  }
  d.c_sup = sup_norm(d.c);
  d.c_spline = PeriodicSpline(d.c);
  d.c1_spline = PeriodicSpline(d.c1);

  // g' > 0 on the grid and on a 4x refinement of the interpolant.
  double min_gp = d.min_gprime();
  for (std::size_t j = 0; j < 4 * g; ++j) {
    min_gp = std::min(min_gp, d.gprime(static_cast<double>(j) / (4.0 * g)));
  }
  if (!(min_gp > 0.0)) {
    throw Error(ErrorKind::CouplingTooStrong,
                "g_phi is not a diffeomorphism: min g' = " + std::to_string(min_gp) +
                    " at delta = " + std::to_string(delta));
  }

  d.preimage.resize(g);
  d.gprime_at_preimage.resize(g);
  for (std::size_t j = 0; j < g; ++j) {
    const double y = g_inverse(d, static_cast<double>(j) * w);
    d.preimage[j] = y;
    d.gprime_at_preimage[j] = d.gprime(y);
  }
  return d;
}

double g_inverse(const DriveField& drive, double x) {
  x = wrap(x);
  const double reach = std::abs(drive.delta) * drive.c_sup * 1.1 + 1e-9;
  double lo = x - reach, hi = x + reach;
  double y = x - drive.delta * drive.c_spline(x);
  if (!(y > lo && y < hi)) y = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double r = drive.lift(y) - x;
    if (std::abs(r) < 1e-13) return wrap(y);
    if (r > 0.0) hi = y;
    else lo = y;
    double next = y - r / drive.gprime(y);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    y = next;
    if (hi - lo < 1e-15) return wrap(y);
  }
  throw Error(ErrorKind::Numerical, "g_inverse did not converge");
}

Field apply_P(const MapSpec& map, std::span<const double> psi) {
  const PeriodicSpline s(psi);
  Field out(psi.size());
  kernels::parallel::transfer_sum(map, s, out);
  return out;
}

GridDensity apply_P(const MapSpec& map, const GridDensity& psi) {
  return GridDensity(apply_P(map, psi.values()));
}

Field apply_L(const DriveField& drive, std::span<const double> psi) {
  require(psi.size() == drive.grid_size(), ErrorKind::Domain, "grid size mismatch");
  const PeriodicSpline s(psi);
  Field out(psi.size());
  kernels::parallel::pushforward(drive.preimage, drive.gprime_at_preimage, s, out);
  return out;
}

GridDensity apply_L(const DriveField& drive, const GridDensity& psi) {
  return GridDensity(apply_L(drive, psi.values()));
}

GridDensity apply_STO(const GridDensity& phi, const MapSpec& map, const CouplingSpec& coupling,
                      double delta) {
  const DriveField drive = drive_field(phi, coupling, delta);
  return apply_P(map, apply_L(drive, phi));
}

Field dg_direction(const GridDensity& phi, std::span<const double> psi, const CouplingSpec& coupling,
                   double delta) {
  const std::size_t g = phi.size();
  require(psi.size() == g, ErrorKind::Domain, "grid size mismatch");
  const double int_phi = phi.integral();
  const double int_psi = quad_integral(psi);
  Field w(g);
  for (std::size_t l = 0; l < g; ++l) w[l] = psi[l] - phi[l] * int_psi / int_phi;
  Field out(g);
  kernels::parallel::matvec(coupling.table(0, g), w, delta / (int_phi * static_cast<double>(g)), out);
  return out;
}

Field sto_differential(const GridDensity& phi, std::span<const double> psi, const MapSpec& map,
                       const CouplingSpec& coupling, double delta) {
  const DriveField drive = drive_field(phi, coupling, delta);
  const Field v = dg_direction(phi, psi, coupling, delta);
  Field flux(phi.size());
  for (std::size_t j = 0; j < phi.size(); ++j) flux[j] = phi[j] * v[j];
  const Field pushed_psi = apply_L(drive, psi);
  const Field div = periodic_derivative(apply_L(drive, flux), 1);
  Field res(phi.size());
  for (std::size_t j = 0; j < phi.size(); ++j) res[j] = pushed_psi[j] - div[j];
  return apply_P(map, res);
}

void to_json(nlohmann::json& j, const GBounds& b) {
  j = {{"sup_d1H", b.sup_d1H}, {"sup_d2H", b.sup_d2H},   {"sup_d3H", b.sup_d3H},
       {"gprime", b.gprime},   {"gsecond", b.gsecond},   {"gthird", b.gthird},
       {"inverse_derivative", b.inverse_derivative}};
}

GBounds g_bounds(const CouplingSpec& coupling, double delta) {
  constexpr std::size_t n = 512;
  GBounds b;
  double* sups[3] = {&b.sup_d1H, &b.sup_d2H, &b.sup_d3H};
  for (int order = 1; order <= 3; ++order) {
    const auto& t = coupling.table(order, n);
    *sups[order - 1] = sup_norm(t);
  }
  const double ad = std::abs(delta);
  if (ad * b.sup_d1H >= 1.0) {
    throw Error(ErrorKind::CouplingTooStrong,
                "|delta| |d1 H|_inf = " + std::to_string(ad * b.sup_d1H) + " >= 1");
  }
  b.gprime = 1.0 + ad * b.sup_d1H;
  b.gsecond = ad * b.sup_d2H;
  b.gthird = ad * b.sup_d3H;
  b.inverse_derivative = 1.0 / (1.0 - ad * b.sup_d1H);
  return b;
}

GridDensity apply_noisy_STO(const GridDensity& phi, const MapSpec& map, const CouplingSpec& coupling,
                            double delta, const NoiseKernel& kernel) {
  return apply_M(kernel, apply_STO(phi, map, coupling, delta));
}

GridDensity StoProblem::apply(const GridDensity& phi) const {
  if (noise) return apply_noisy_STO(phi, *map, *coupling, delta, *noise);
  return apply_STO(phi, *map, *coupling, delta);
}

}  // namespace stolab
