#include "stolab/torus.hpp"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

namespace stolab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FFTW plans are created once per size under a lock; executing a plan on
// fresh fftw_malloc'd buffers is thread safe.
struct FftPlans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

FftPlans plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, FftPlans> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  double* in = fftw_alloc_real(n);
  fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
  FftPlans p;
  p.forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  p.backward = fftw_plan_dft_c2r_1d(static_cast<int>(n), out, in, FFTW_ESTIMATE);
  fftw_free(in);
  fftw_free(out);
  cache.emplace(n, p);
  return p;
}

struct FftBuffers {
  explicit FftBuffers(std::size_t n)
      : n(n), real(fftw_alloc_real(n)), spectrum(fftw_alloc_complex(n / 2 + 1)) {}
  ~FftBuffers() {
    fftw_free(real);
    fftw_free(spectrum);
  }
  FftBuffers(const FftBuffers&) = delete;
  FftBuffers& operator=(const FftBuffers&) = delete;

  std::complex<double>& mode(std::size_t k) {
    return reinterpret_cast<std::complex<double>&>(spectrum[k]);
  }

  std::size_t n;
  double* real;
  fftw_complex* spectrum;
};

// Multiplies the spectrum of `values` by symbol(k) for k = 0..n/2 and returns
// the inverse transform.
template <class Symbol>
Field apply_fourier_multiplier(std::span<const double> values, Symbol symbol) {
  const std::size_t n = values.size();
  FftPlans plans = plans_for(n);
  FftBuffers buf(n);
  std::copy(values.begin(), values.end(), buf.real);
  fftw_execute_dft_r2c(plans.forward, buf.real, buf.spectrum);
  for (std::size_t k = 0; k <= n / 2; ++k) buf.mode(k) *= symbol(k);
  fftw_execute_dft_c2r(plans.backward, buf.spectrum, buf.real);
  Field out(buf.real, buf.real + n);
  for (double& v : out) v /= static_cast<double>(n);
  return out;
}

Field spectral_derivative(std::span<const double> values, int order) {
  const std::size_t n = values.size();
  return apply_fourier_multiplier(values, [&](std::size_t k) -> std::complex<double> {
    if (k == n / 2 && order % 2 == 1) return 0.0;
    const std::complex<double> ik(0.0, kTwoPi * static_cast<double>(k));
    std::complex<double> s = 1.0;
    for (int i = 0; i < order; ++i) s *= ik;
    return s;
  });
}

Field fd4_derivative(std::span<const double> f, int order) {
  const std::size_t n = f.size();
  const double h = 1.0 / static_cast<double>(n);
  auto at = [&](std::ptrdiff_t j) {
    const auto m = static_cast<std::ptrdiff_t>(n);
    return f[static_cast<std::size_t>(((j % m) + m) % m)];
  };
  Field out(n);
  for (std::size_t u = 0; u < n; ++u) {
    const auto j = static_cast<std::ptrdiff_t>(u);
    switch (order) {
      case 1:
        out[u] = (-at(j + 2) + 8.0 * at(j + 1) - 8.0 * at(j - 1) + at(j - 2)) / (12.0 * h);
        break;
      case 2:
        out[u] = (-at(j + 2) + 16.0 * at(j + 1) - 30.0 * at(j) + 16.0 * at(j - 1) - at(j - 2)) /
                 (12.0 * h * h);
        break;
      default:
        out[u] = (-at(j + 3) + 8.0 * at(j + 2) - 13.0 * at(j + 1) + 13.0 * at(j - 1) -
                  8.0 * at(j - 2) + at(j - 3)) /
                 (8.0 * h * h * h);
    }
  }
  return out;
}

// ---- circular W1 -----------------------------------------------------------

// Piece of the CDF difference D = F_mu - F_nu over an interval of given
// length, on which D is (treated as) linear from d0 to d1.
struct Piece {
  double length;
  double d0;
  double d1;
};

// Lebesgue average of |D - c| over one linear piece.
double piece_abs_mean(const Piece& p, double c) {
  const double lo = std::min(p.d0, p.d1);
  const double hi = std::max(p.d0, p.d1);
  if (c <= lo) return 0.5 * (p.d0 + p.d1) - c;
  if (c >= hi) return c - 0.5 * (p.d0 + p.d1);
  return ((p.d0 - c) * (p.d0 - c) + (p.d1 - c) * (p.d1 - c)) / (2.0 * (hi - lo));
}

// (fraction below c) - (fraction above c) over one piece.
double piece_slope(const Piece& p, double c) {
  const double lo = std::min(p.d0, p.d1);
  const double hi = std::max(p.d0, p.d1);
  if (c < lo) return -1.0;
  if (c > hi) return 1.0;
  if (hi == lo) return 0.0;
  const double below = (c - lo) / (hi - lo);
  return 2.0 * below - 1.0;
}

// min_c sum length * mean|D - c|; the objective is convex in c so the
// minimizer is the root of its monotone slope.
double minimize_over_rotation(const std::vector<Piece>& pieces) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Piece& p : pieces) {
    lo = std::min({lo, p.d0, p.d1});
    hi = std::max({hi, p.d0, p.d1});
  }
  auto slope = [&](double c) {
    double s = 0.0;
    for (const Piece& p : pieces) s += p.length * piece_slope(p, c);
    return s;
  };
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (slope(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  const double c = 0.5 * (lo + hi);
  double total = 0.0;
  for (const Piece& p : pieces) total += p.length * piece_abs_mean(p, c);
  return std::max(total, 0.0);
}

// Common interface for the two measure representations: sorted breakpoints
// on [0,1] and a CDF evaluable just right / just left of a point.
class CdfView {
 public:
  explicit CdfView(const ParticleEnsemble& e) : sorted_(e.points().begin(), e.points().end()) {
    std::sort(sorted_.begin(), sorted_.end());
    breaks_ = sorted_;
  }

  explicit CdfView(const GridDensity& phi) : density_(phi) {
    const std::size_t g = phi.size();
    const double h = 1.0 / static_cast<double>(g);
    // Cells where the interpolant is not constant are subdivided so that the
    // CDF difference is linear to within O((h/16)^2).
    for (std::size_t j = 0; j < g; ++j) {
      const bool flat = phi[j] == phi[(j + 1) % g];
      const int sub = flat ? 1 : 16;
      for (int s = 0; s < sub; ++s) breaks_.push_back((static_cast<double>(j) + double(s) / sub) * h);
    }
  }

  const std::vector<double>& breaks() const { return breaks_; }

  // F(t+) = mass of [0, t]
  double right(double t) const {
    if (density_) return density_->cdf(t);
    auto it = std::upper_bound(sorted_.begin(), sorted_.end(), t);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
  }
  // F(t-) = mass of [0, t)
  double left(double t) const {
    if (density_) return density_->cdf(t);
    auto it = std::lower_bound(sorted_.begin(), sorted_.end(), t);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
  }

 private:
  std::vector<double> sorted_;
  std::vector<double> breaks_;
  std::optional<DensityCdf> density_;
};

double circular_w1(const CdfView& mu, const CdfView& nu) {
  std::vector<double> b;
  b.reserve(mu.breaks().size() + nu.breaks().size() + 2);
  b.push_back(0.0);
  b.insert(b.end(), mu.breaks().begin(), mu.breaks().end());
  b.insert(b.end(), nu.breaks().begin(), nu.breaks().end());
  b.push_back(1.0);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());

  std::vector<Piece> pieces;
  pieces.reserve(b.size());
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    const double len = b[i + 1] - b[i];
    if (len <= 0.0) continue;
    pieces.push_back({len, mu.right(b[i]) - nu.right(b[i]), mu.left(b[i + 1]) - nu.left(b[i + 1])});
  }
  return minimize_over_rotation(pieces);
}

}  // namespace

// ---- grid types --------------------------------------------------------------

void check_grid_size(std::size_t grid_size) {
  require(grid_size >= 64 && is_power_of_two(grid_size), ErrorKind::Domain,
          "grid size must be a power of two >= 64, got " + std::to_string(grid_size));
}

GridDensity::GridDensity(std::vector<double> values) : values_(std::move(values)) {
  check_grid_size(values_.size());
  for (double v : values_) {
    require(std::isfinite(v) && v > 0.0, ErrorKind::Domain,
            "grid density must be finite and strictly positive");
  }
}

GridDensity GridDensity::constant(std::size_t grid_size, double value) {
  return GridDensity(std::vector<double>(grid_size, value));
}

double GridDensity::integral() const { return quad_integral(values_); }
double GridDensity::sup() const { return sup_norm(values_); }

GridDensity GridDensity::scaled(double factor) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= factor;
  return GridDensity(std::move(v));
}

GridDensity GridDensity::normalized() const { return scaled(1.0 / integral()); }

ParticleEnsemble::ParticleEnsemble(std::vector<double> points) : points_(std::move(points)) {
  require(!points_.empty(), ErrorKind::Domain, "particle ensemble must be nonempty");
  for (double& x : points_) {
    require(std::isfinite(x), ErrorKind::Domain, "particle coordinate is not finite");
    x = wrap(x);
  }
}

double quad_integral(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sup_norm(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::fabs(v));
  return m;
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorKind::Domain, "grid size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

Field periodic_derivative(std::span<const double> values, int order, DerivativeBackend backend) {
  require(order >= 1 && order <= 3, ErrorKind::Domain, "derivative order must be 1, 2 or 3");
  require(values.size() >= 8, ErrorKind::Domain, "grid too small for differentiation");
  if (backend == DerivativeBackend::Spectral) return spectral_derivative(values, order);
  return fd4_derivative(values, order);
}

// ---- spline ------------------------------------------------------------------

PeriodicSpline::PeriodicSpline(std::span<const double> values)
    : y_(values.begin(), values.end()), h_(1.0 / static_cast<double>(values.size())) {
  const std::size_t n = y_.size();
  require(n >= 4, ErrorKind::Domain, "spline needs at least 4 nodes");
  // M_{j-1} + 4 M_j + M_{j+1} = 6/h^2 (y_{j+1} - 2 y_j + y_{j-1}) is circulant,
  // so it is diagonal in Fourier space.
  Field rhs(n);
  for (std::size_t j = 0; j < n; ++j) {
    rhs[j] = 6.0 / (h_ * h_) * (y_[(j + 1) % n] - 2.0 * y_[j] + y_[(j + n - 1) % n]);
  }
  m_ = apply_fourier_multiplier(rhs, [&](std::size_t k) -> std::complex<double> {
    return 1.0 / (4.0 + 2.0 * std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(n)));
  });
}

double PeriodicSpline::operator()(double x) const {
  const std::size_t n = y_.size();
  const double s = wrap(x) * static_cast<double>(n);
  auto j = static_cast<std::size_t>(s);
  if (j >= n) j = n - 1;
  const double b = s - static_cast<double>(j);
  const double a = 1.0 - b;
  const std::size_t j1 = (j + 1) % n;
  return a * y_[j] + b * y_[j1] + ((a * a * a - a) * m_[j] + (b * b * b - b) * m_[j1]) * h_ * h_ / 6.0;
}

double PeriodicSpline::derivative(double x) const {
  const std::size_t n = y_.size();
  const double s = wrap(x) * static_cast<double>(n);
  auto j = static_cast<std::size_t>(s);
  if (j >= n) j = n - 1;
  const double b = s - static_cast<double>(j);
  const double a = 1.0 - b;
  const std::size_t j1 = (j + 1) % n;
  return (y_[j1] - y_[j]) / h_ - (3.0 * a * a - 1.0) / 6.0 * h_ * m_[j] +
         (3.0 * b * b - 1.0) / 6.0 * h_ * m_[j1];
}

// ---- CDF -----------------------------------------------------------------------

DensityCdf::DensityCdf(const GridDensity& phi)
    : v_(phi.values().begin(), phi.values().end()), h_(1.0 / static_cast<double>(phi.size())) {
  const double mean = phi.integral();
  for (double& v : v_) v /= mean;
  const std::size_t g = v_.size();
  cum_.resize(g + 1);
  cum_[0] = 0.0;
  for (std::size_t j = 0; j < g; ++j) cum_[j + 1] = cum_[j] + 0.5 * h_ * (v_[j] + v_[(j + 1) % g]);
}

double DensityCdf::cdf(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const std::size_t g = v_.size();
  auto j = static_cast<std::size_t>(t / h_);
  if (j >= g) j = g - 1;
  const double s = t - static_cast<double>(j) * h_;
  const double dv = v_[(j + 1) % g] - v_[j];
  return std::min(1.0, cum_[j] + v_[j] * s + dv * s * s / (2.0 * h_));
}

double DensityCdf::quantile(double u) const {
  const std::size_t g = v_.size();
  u = std::clamp(u, 0.0, 1.0);
  auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  std::size_t j = it == cum_.begin() ? 0 : static_cast<std::size_t>(it - cum_.begin()) - 1;
  if (j >= g) j = g - 1;
  const double r = u - cum_[j];
  const double dv = v_[(j + 1) % g] - v_[j];
  // root of (dv/2h) s^2 + v_j s - r = 0 in its cancellation-free form
  const double disc = std::max(0.0, v_[j] * v_[j] + 2.0 * dv / h_ * r);
  const double s = 2.0 * r / (v_[j] + std::sqrt(disc));
  return wrap(static_cast<double>(j) * h_ + std::clamp(s, 0.0, h_));
}

// ---- W1 --------------------------------------------------------------------------

double wasserstein1_circle(const ParticleEnsemble& mu, const ParticleEnsemble& nu) {
  return circular_w1(CdfView(mu), CdfView(nu));
}
double wasserstein1_circle(const ParticleEnsemble& mu, const GridDensity& nu) {
  return circular_w1(CdfView(mu), CdfView(nu));
}
double wasserstein1_circle(const GridDensity& mu, const ParticleEnsemble& nu) {
  return circular_w1(CdfView(mu), CdfView(nu));
}
double wasserstein1_circle(const GridDensity& mu, const GridDensity& nu) {
  return circular_w1(CdfView(mu), CdfView(nu));
}

double wasserstein1_to_point(const ParticleEnsemble& mu, double point) {
  double s = 0.0;
  for (double x : mu.points()) s += torus_dist(x, point);
  return s / static_cast<double>(mu.size());
}

GridDensity density_from_particles(const ParticleEnsemble& e, std::size_t grid_size,
                                   double bandwidth) {
  check_grid_size(grid_size);
  require(bandwidth > 0.0 && std::isfinite(bandwidth), ErrorKind::Domain,
          "bandwidth must be positive");
  const int images = 1 + static_cast<int>(std::ceil(6.0 * bandwidth));
  const double norm = 1.0 / (bandwidth * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> v(grid_size, 0.0);
  for (std::size_t j = 0; j < grid_size; ++j) {
    const double xj = static_cast<double>(j) / static_cast<double>(grid_size);
    double acc = 0.0;
    for (double x : e.points()) {
      const double d = centered(xj - x);
      for (int m = -images; m <= images; ++m) {
        const double z = (d + m) / bandwidth;
        acc += std::exp(-0.5 * z * z);
      }
    }
    v[j] = std::max(norm * acc / static_cast<double>(e.size()), std::numeric_limits<double>::min());
  }
  const double mass = quad_integral(v);
  for (double& x : v) x /= mass;
  return GridDensity(std::move(v));
}

// ---- serialization -----------------------------------------------------------------

void write_csv(std::ostream& os, const GridDensity& phi) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "x,value\n";
  for (std::size_t j = 0; j < phi.size(); ++j) os << phi.node(j) << ',' << phi[j] << '\n';
  os.precision(old);
}

GridDensity read_grid_csv(std::istream& is) {
  std::string line;
  std::getline(is, line);
  require(line.rfind("x,value", 0) == 0, ErrorKind::Domain, "grid CSV header must be 'x,value'");
  std::vector<double> v;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    require(comma != std::string::npos, ErrorKind::Domain, "malformed grid CSV row: " + line);
    v.push_back(std::stod(line.substr(comma + 1)));
  }
  return GridDensity(std::move(v));
}

void write_csv(std::ostream& os, const ParticleEnsemble& e) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "x\n";
  for (double x : e.points()) os << x << '\n';
  os.precision(old);
}

ParticleEnsemble read_ensemble_csv(std::istream& is) {
  std::string line;
  std::getline(is, line);
  require(line.rfind('x', 0) == 0, ErrorKind::Domain, "ensemble CSV header must be 'x'");
  std::vector<double> v;
  while (std::getline(is, line)) {
    if (!line.empty()) v.push_back(std::stod(line));
  }
  return ParticleEnsemble(std::move(v));
}

nlohmann::json to_json(const GridDensity& phi) {
  return {{"grid_size", phi.size()},
          {"values", std::vector<double>(phi.values().begin(), phi.values().end())}};
}

GridDensity grid_from_json(const nlohmann::json& j) {
  auto values = j.at("values").get<std::vector<double>>();
  require(j.at("grid_size").get<std::size_t>() == values.size(), ErrorKind::Domain,
          "grid_size does not match number of values");
  return GridDensity(std::move(values));
}

}  // namespace stolab
