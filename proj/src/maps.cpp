#include "stolab/model.hpp"

#include <cmath>
#include <numbers>

#include "stolab/error.hpp"
#include "stolab/torus.hpp"

namespace stolab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// n-th derivative of sin at u: sin(u + n pi/2).
double sin_derivative(double u, int n) {
  switch (((n % 4) + 4) % 4) {
    case 0: return std::sin(u);
    case 1: return std::cos(u);
    case 2: return -std::sin(u);
    default: return -std::cos(u);
  }
}
}  // namespace

// ---- linear-k ----------------------------------------------------------------

LinearMap::LinearMap(int k) : k_(k) {
  require(k >= 2, ErrorKind::Domain, "linear-k map needs integer k >= 2");
}

double LinearMap::eval(double x) const { return wrap(k_ * x); }

double LinearMap::derivative(double, int order) const { return order == 1 ? k_ : 0.0; }

double LinearMap::inverse_branch(int branch, double x) const { return (wrap(x) + branch) / k_; }

double LinearMap::inverse_branch_derivative(int, double, int order) const {
  return order == 1 ? 1.0 / k_ : 0.0;
}

// ---- perturbed-k -------------------------------------------------------------

PerturbedLinearMap::PerturbedLinearMap(int k, double eps) : k_(k), eps_(eps) {
  require(k >= 2, ErrorKind::Domain, "perturbed-k map needs integer k >= 2");
  require(std::abs(eps) < k - 1, ErrorKind::Domain, "perturbed-k map needs |eps| < k - 1");
}

double PerturbedLinearMap::lift(double y) const {
  return k_ * y + eps_ / kTwoPi * std::sin(kTwoPi * y);
}

double PerturbedLinearMap::eval(double x) const { return wrap(lift(x)); }

double PerturbedLinearMap::derivative(double x, int order) const {
  switch (order) {
    case 1: return k_ + eps_ * std::cos(kTwoPi * x);
    case 2: return -eps_ * kTwoPi * std::sin(kTwoPi * x);
    default: return -eps_ * kTwoPi * kTwoPi * std::cos(kTwoPi * x);
  }
}

double PerturbedLinearMap::inverse_branch(int branch, double x) const {
  // The lift is increasing with F(i/k-ish) bracketing; solve F(y) = x + branch
  // on [0, 1] by Newton with bisection fallback.
  const double target = wrap(x) + branch;
  double lo = 0.0, hi = 1.0;
  double y = target / k_;
  for (int it = 0; it < 100; ++it) {
    const double r = lift(y) - target;
    if (std::abs(r) < 1e-15) break;
    if (r > 0) hi = y;
    else lo = y;
    double next = y - r / derivative(y, 1);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - y) < 1e-17) {
      y = next;
      break;
    }
    y = next;
  }
  return y;
}

double PerturbedLinearMap::inverse_branch_derivative(int branch, double x, int order) const {
  const double y = inverse_branch(branch, x);
  const double f1 = derivative(y, 1), f2 = derivative(y, 2), f3 = derivative(y, 3);
  switch (order) {
    case 1: return 1.0 / f1;
    case 2: return -f2 / (f1 * f1 * f1);
    default: return (3.0 * f2 * f2 - f1 * f3) / std::pow(f1, 5);
  }
}

// ---- couplings -----------------------------------------------------------------

std::vector<double> CouplingSpec::mean_field(std::span<const double> points) const {
  const std::size_t n = points.size();
  std::vector<double> c(n, 0.0);
#pragma omp parallel for
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double y : points) s += eval(points[i], y);
    c[i] = s / static_cast<double>(n);
  }
  return c;
}

const std::vector<double>& CouplingSpec::table(int order, std::size_t grid_size) const {
  std::lock_guard lock(cache_mutex_);
  auto key = std::make_pair(order, grid_size);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  std::vector<double> t(grid_size * grid_size);
  const double h = 1.0 / static_cast<double>(grid_size);
  for (std::size_t j = 0; j < grid_size; ++j) {
    for (std::size_t l = 0; l < grid_size; ++l) t[j * grid_size + l] = d1(j * h, l * h, order);
  }
  return cache_.emplace(key, std::move(t)).first->second;
}

double SinCosCoupling::eval(double x, double y) const {
  return std::sin(kTwoPi * x) * std::cos(kTwoPi * y);
}

double SinCosCoupling::d1(double x, double y, int order) const {
  return std::pow(kTwoPi, order) * sin_derivative(kTwoPi * x, order) * std::cos(kTwoPi * y);
}

std::vector<double> SinCosCoupling::mean_field(std::span<const double> points) const {
  double m = 0.0;
  for (double y : points) m += std::cos(kTwoPi * y);
  m /= static_cast<double>(points.size());
  std::vector<double> c(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) c[i] = std::sin(kTwoPi * points[i]) * m;
  return c;
}

double KuramotoCoupling::eval(double x, double y) const { return std::sin(kTwoPi * (y - x)); }

double KuramotoCoupling::d1(double x, double y, int order) const {
  return std::pow(-kTwoPi, order) * sin_derivative(kTwoPi * (y - x), order);
}

std::vector<double> KuramotoCoupling::mean_field(std::span<const double> points) const {
  double s = 0.0, c = 0.0;
  for (double y : points) {
    s += std::sin(kTwoPi * y);
    c += std::cos(kTwoPi * y);
  }
  s /= static_cast<double>(points.size());
  c /= static_cast<double>(points.size());
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i] = s * std::cos(kTwoPi * points[i]) - c * std::sin(kTwoPi * points[i]);
  }
  return out;
}

// ---- registry --------------------------------------------------------------------

MapPtr make_map(const std::string& name, const nlohmann::json& params) {
  auto integer_k = [&]() {
    require(params.contains("k"), ErrorKind::Config, "map '" + name + "' needs parameter k");
    const double k = params.at("k").get<double>();
    require(k == std::floor(k), ErrorKind::Config, "map parameter k must be an integer");
    return static_cast<int>(k);
  };
  if (name == "linear-k") return std::make_shared<LinearMap>(integer_k());
  if (name == "perturbed-k") {
    return std::make_shared<PerturbedLinearMap>(integer_k(), params.value("eps", 0.0));
  }
  throw Error(ErrorKind::Config, "unknown map '" + name + "'");
}

CouplingPtr make_coupling(const std::string& name) {
  if (name == "sincos") return std::make_shared<SinCosCoupling>();
  if (name == "kuramoto") return std::make_shared<KuramotoCoupling>();
  throw Error(ErrorKind::Config, "unknown coupling '" + name + "'");
}

std::vector<std::string> map_names() { return {"linear-k", "perturbed-k"}; }
std::vector<std::string> coupling_names() { return {"sincos", "kuramoto"}; }

}  // namespace stolab
