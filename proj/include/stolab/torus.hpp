#pragma once

// Function calculus on the unit circle T = [0,1): periodic grids, quadrature,
// spectral / finite-difference derivatives, periodic cubic splines and the
// circular 1-Wasserstein distance between empirical and gridded measures.

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "stolab/error.hpp"

namespace stolab {

using Field = std::vector<double>;

/// Reduces x modulo 1 into [0,1). Total on finite inputs.
inline double wrap(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

/// Signed representative of x in [-1/2, 1/2).
inline double centered(double x) {
  double r = wrap(x + 0.5) - 0.5;
  return r;
}

/// Euclidean distance on the circle of unit circumference.
inline double torus_dist(double x, double y) {
  double d = std::fabs(wrap(x) - wrap(y));
  return std::min(d, 1.0 - d);
}

class TorusPoint {
 public:
  TorusPoint() = default;
  explicit TorusPoint(double x) : x_(wrap(x)) {}
  double value() const { return x_; }

 private:
  double x_ = 0.0;
};

inline double torus_dist(TorusPoint x, TorusPoint y) { return torus_dist(x.value(), y.value()); }

constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Strictly positive samples phi(j/G) on a uniform periodic grid, G a power
/// of two >= 64.
class GridDensity {
 public:
  explicit GridDensity(std::vector<double> values);

  template <class F>
  static GridDensity from_function(std::size_t grid_size, F&& f) {
    std::vector<double> v(grid_size);
    for (std::size_t j = 0; j < grid_size; ++j) v[j] = f(static_cast<double>(j) / grid_size);
    return GridDensity(std::move(v));
  }

  static GridDensity constant(std::size_t grid_size, double value = 1.0);

  std::size_t size() const { return values_.size(); }
  double node(std::size_t j) const { return static_cast<double>(j) / values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }
  std::span<const double> values() const { return values_; }
  double integral() const;
  double sup() const;

  GridDensity scaled(double factor) const;
  GridDensity normalized() const;

 private:
  std::vector<double> values_;
};

/// Throws Domain unless the size is a power of two >= 64.
void check_grid_size(std::size_t grid_size);

/// N >= 1 points on the circle.
class ParticleEnsemble {
 public:
  explicit ParticleEnsemble(std::vector<double> points);

  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  std::span<const double> points() const { return points_; }

 private:
  std::vector<double> points_;
};

/// Periodic trapezoid rule, i.e. the arithmetic mean of the samples.
double quad_integral(std::span<const double> values);
inline double quad_integral(const GridDensity& phi) { return quad_integral(phi.values()); }

double sup_norm(std::span<const double> values);
double sup_distance(std::span<const double> a, std::span<const double> b);

enum class DerivativeBackend { Spectral, FiniteDifference4 };

/// Derivative of order 1..3 of periodic grid data. Spectral differentiation
/// by default; fourth order central differences as a cross-check.
Field periodic_derivative(std::span<const double> values, int order,
                          DerivativeBackend backend = DerivativeBackend::Spectral);
inline Field periodic_derivative(const GridDensity& phi, int order,
                                 DerivativeBackend backend = DerivativeBackend::Spectral) {
  return periodic_derivative(phi.values(), order, backend);
}

/// C2 periodic cubic spline through uniform periodic samples.
class PeriodicSpline {
 public:
  PeriodicSpline() = default;
  explicit PeriodicSpline(std::span<const double> values);

  double operator()(double x) const;
  double derivative(double x) const;
  std::size_t size() const { return y_.size(); }

 private:
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the nodes
  double h_ = 0.0;
};

/// CDF and quantile function of the piecewise-linear interpolant of a grid
/// density, normalized to unit mass.
class DensityCdf {
 public:
  explicit DensityCdf(const GridDensity& phi);
  double cdf(double t) const;
  double quantile(double u) const;
  std::size_t grid_size() const { return v_.size(); }

 private:
  std::vector<double> v_;    // normalized nodal values
  std::vector<double> cum_;  // mass of [0, x_j)
  double h_;
};

/// Exact circular W1 (equal to the bounded-Lipschitz distance on T since the
/// circle has diameter 1/2). Grid densities are normalized first.
double wasserstein1_circle(const ParticleEnsemble& mu, const ParticleEnsemble& nu);
double wasserstein1_circle(const ParticleEnsemble& mu, const GridDensity& nu);
double wasserstein1_circle(const GridDensity& mu, const ParticleEnsemble& nu);
double wasserstein1_circle(const GridDensity& mu, const GridDensity& nu);

/// W1 between the empirical measure and the point mass at 0.
double wasserstein1_to_point(const ParticleEnsemble& mu, double point = 0.0);

/// Wrapped-Gaussian kernel density estimate on a grid of size G, normalized
/// so that quad_integral == 1. Values below the smallest normal double are
/// floored to keep the density strictly positive.
GridDensity density_from_particles(const ParticleEnsemble& e, std::size_t grid_size,
                                   double bandwidth);

// Serialization. Values are written with max_digits10 so that a round trip
// reproduces them exactly.
void write_csv(std::ostream& os, const GridDensity& phi);
GridDensity read_grid_csv(std::istream& is);
void write_csv(std::ostream& os, const ParticleEnsemble& e);
ParticleEnsemble read_ensemble_csv(std::istream& is);
nlohmann::json to_json(const GridDensity& phi);
GridDensity grid_from_json(const nlohmann::json& j);

}  // namespace stolab
