#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "stolab/kernels.hpp"
#include "stolab/operators.hpp"

namespace stolab {

namespace {

constexpr std::size_t kCdfIntervals = 4096;

double smooth_transition(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

}  // namespace

BumpProfile bump_profile_from_string(const std::string& s) {
  if (s == "scaled") return BumpProfile::Scaled;
  if (s == "classic") return BumpProfile::Classic;
  throw Error(ErrorKind::Config, "unknown bump profile '" + s + "'");
}

CutoffProfile cutoff_profile_from_string(const std::string& s) {
  if (s == "smooth") return CutoffProfile::Smooth;
  throw Error(ErrorKind::Config, "unknown cutoff profile '" + s + "'");
}

std::string to_string(BumpProfile p) { return p == BumpProfile::Scaled ? "scaled" : "classic"; }
std::string to_string(CutoffProfile) { return "smooth"; }

NoiseKernel::NoiseKernel(NoiseParams params, std::size_t grid_size)
    : params_(params), grid_size_(grid_size), radius_(params.Delta / 3.0) {
  check_grid_size(grid_size);
  require(params.Delta > 0.0 && params.Delta < 0.25, ErrorKind::Domain,
          "noise Delta must lie in (0, 1/4)");
  require(params.gamma >= 0.0, ErrorKind::Domain, "noise gamma must be >= 0");
  require(params.gamma <= 2.0 * params.Delta, ErrorKind::Domain,
          "noise gamma must not exceed 2 Delta (mixture weight above 1)");

  // Continuous normalization and inverse-CDF table of the bump.
  cdf_knots_.assign(kCdfIntervals + 1, 0.0);
  const double dz = 2.0 * radius_ / kCdfIntervals;
  double prev = bump_raw(-radius_);
  for (std::size_t i = 1; i <= kCdfIntervals; ++i) {
    const double cur = bump_raw(-radius_ + i * dz);
    cdf_knots_[i] = cdf_knots_[i - 1] + 0.5 * dz * (prev + cur);
    prev = cur;
  }
  bump_norm_ = cdf_knots_.back();
  for (double& c : cdf_knots_) c /= bump_norm_;

  // Grid kernel; the bump is normalized by the same quadrature that defines
  // the grid integral so every row has unit mass.
  const std::size_t g = grid_size;
  std::vector<double> bump_grid(g);
  double sum = 0.0;
  for (std::size_t m = 0; m < g; ++m) {
    bump_grid[m] = bump_raw(centered(static_cast<double>(m) / g));
    sum += bump_grid[m];
  }
  const double grid_norm = sum / static_cast<double>(g);
  matrix_.resize(g * g);
  transposed_.resize(g * g);
  for (std::size_t j = 0; j < g; ++j) {
    const double x = static_cast<double>(j) / g;
    const double p = uniform_weight(x);
    for (std::size_t l = 0; l < g; ++l) {
      const double v = (1.0 - p) * (bump_grid[(j + g - l) % g] / grid_norm) + p;
      matrix_[j * g + l] = v;
      transposed_[l * g + j] = v;
    }
  }

  // Row stochasticity.
  for (std::size_t j = 0; j < g; ++j) {
    if (std::abs(row_integral(j) - 1.0) > 1e-8) {
      throw Error(ErrorKind::Numerical, "noise kernel row " + std::to_string(j) + " is not stochastic");
    }
  }
  // a.1: pure bump rows inside [-2 Delta/3, 2 Delta/3].
  for (std::size_t j = 0; j < g; ++j) {
    const double x = static_cast<double>(j) / g;
    if (std::abs(centered(x)) > 2.0 * params_.Delta / 3.0) continue;
    for (std::size_t l = 0; l < g; ++l) {
      if (matrix_[j * g + l] != bump_grid[(j + g - l) % g] / grid_norm) {
        throw Error(ErrorKind::Numerical, "noise kernel violates condition a.1");
      }
    }
  }
  // a.2 on a dense set of source points.
  for (std::size_t i = 0; i < 8192; ++i) {
    const double x = static_cast<double>(i) / 8192.0;
    if (mass_in_trap(x) < params_.gamma - 1e-12) {
      throw Error(ErrorKind::Numerical, "noise kernel violates condition a.2 at x = " + std::to_string(x));
    }
  }
  // a.3: C2 norm (in x) of iota(x)/(2 Delta) (1 - xi~(x - y)), sup over y.
  const double h = 1e-5;
  auto bracket = [&](double x, double y) {
    return cutoff(x) / (2.0 * params_.Delta) * (1.0 - bump(centered(x - y)));
  };
  double c2 = 0.0;
  for (std::size_t iy = 0; iy < 64; ++iy) {
    const double y = static_cast<double>(iy) / 64.0;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t ix = 0; ix < 2048; ++ix) {
      const double x = static_cast<double>(ix) / 2048.0;
      const double fm = bracket(x - h, y), f0 = bracket(x, y), fp = bracket(x + h, y);
      s0 = std::max(s0, std::abs(f0));
      s1 = std::max(s1, std::abs(fp - fm) / (2.0 * h));
      s2 = std::max(s2, std::abs(fp - 2.0 * f0 + fm) / (h * h));
    }
    c2 = std::max(c2, s0 + s1 + s2);
  }
  a3_constant_ = c2;
  require(std::isfinite(a3_constant_), ErrorKind::Numerical, "noise kernel a.3 constant is not finite");
}

double NoiseKernel::bump_raw(double z) const {
  const double r = radius_;
  if (std::abs(z) >= r) return 0.0;
  if (params_.bump == BumpProfile::Scaled) {
    const double u = z / r;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
  }
  // exp(-1/(r^2 - z^2)) divided by its peak value exp(-1/r^2)
  return std::exp(1.0 / (r * r) - 1.0 / (r * r - z * z));
}

double NoiseKernel::bump(double z) const { return bump_raw(z) / bump_norm_; }

double NoiseKernel::bump_cdf(double z) const {
  if (z <= -radius_) return 0.0;
  if (z >= radius_) return 1.0;
  const double s = (z + radius_) / (2.0 * radius_) * kCdfIntervals;
  const auto i = std::min(static_cast<std::size_t>(s), kCdfIntervals - 1);
  const double t = s - static_cast<double>(i);
  return cdf_knots_[i] + t * (cdf_knots_[i + 1] - cdf_knots_[i]);
}

double NoiseKernel::cutoff(double x) const {
  const double a = std::abs(centered(x));
  const double lo = 2.0 * params_.Delta / 3.0;
  const double hi = 0.99 * params_.Delta;
  if (a <= lo) return 0.0;
  if (a >= hi) return 1.0;
  return smooth_transition((a - lo) / (hi - lo));
}

double NoiseKernel::uniform_weight(double x) const {
  return params_.gamma * cutoff(x) / (2.0 * params_.Delta);
}

double NoiseKernel::density(double x, double y) const {
  const double p = uniform_weight(x);
  return (1.0 - p) * bump(centered(x - y)) + p;
}

double NoiseKernel::mass_in_trap(double x) const {
  const double xc = centered(x);
  const double p = uniform_weight(x);
  const double bump_mass = bump_cdf(params_.Delta - xc) - bump_cdf(-params_.Delta - xc);
  return (1.0 - p) * bump_mass + p * 2.0 * params_.Delta;
}

double NoiseKernel::sample(double x, Stream& rng) const {
  const double u = rng.uniform();
  if (u < uniform_weight(x)) return rng.uniform();
  const double v = rng.uniform();
  auto it = std::upper_bound(cdf_knots_.begin(), cdf_knots_.end(), v);
  std::size_t i = it == cdf_knots_.begin() ? 0 : static_cast<std::size_t>(it - cdf_knots_.begin()) - 1;
  i = std::min(i, kCdfIntervals - 1);
  const double width = cdf_knots_[i + 1] - cdf_knots_[i];
  const double t = width > 0.0 ? (v - cdf_knots_[i]) / width : 0.5;
  const double z = -radius_ + (static_cast<double>(i) + t) * (2.0 * radius_ / kCdfIntervals);
  return wrap(x + z);
}

double NoiseKernel::row_integral(std::size_t j) const {
  double s = 0.0;
  for (std::size_t l = 0; l < grid_size_; ++l) s += matrix_[j * grid_size_ + l];
  return s / static_cast<double>(grid_size_);
}

GridDensity NoiseKernel::apply(const GridDensity& phi) const {
  require(phi.size() == grid_size_, ErrorKind::Domain, "noise kernel grid size mismatch");
  Field out(grid_size_);
  kernels::parallel::matvec(transposed_, phi.values(), 1.0 / static_cast<double>(grid_size_), out);
  return GridDensity(std::move(out));
}

Field NoiseKernel::apply(std::span<const double> f) const {
  require(f.size() == grid_size_, ErrorKind::Domain, "noise kernel grid size mismatch");
  Field out(grid_size_);
  kernels::parallel::matvec(transposed_, f, 1.0 / static_cast<double>(grid_size_), out);
  return out;
}

void NoiseKernel::write_csv(std::ostream& os) const {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "x,y,xi\n";
  const double h = 1.0 / static_cast<double>(grid_size_);
  for (std::size_t j = 0; j < grid_size_; ++j) {
    for (std::size_t l = 0; l < grid_size_; ++l) {
      os << j * h << ',' << l * h << ',' << matrix_[j * grid_size_ + l] << '\n';
    }
  }
  os.precision(old);
}

GridDensity apply_M(const NoiseKernel& kernel, const GridDensity& phi) { return kernel.apply(phi); }

}  // namespace stolab
