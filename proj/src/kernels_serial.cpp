#include <cmath>
#include <numbers>

#include "stolab/kernels.hpp"

namespace stolab::kernels::serial {

void transfer_sum(const MapSpec& map, const PeriodicSpline& s, std::span<double> out) {
  const std::size_t g = out.size();
  const int d = map.degree();
  for (std::size_t j = 0; j < g; ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(g);
    double acc = 0.0;
    for (int i = 0; i < d; ++i) {
      acc += s(map.inverse_branch(i, x)) * map.inverse_branch_derivative(i, x, 1);
    }
    out[j] = acc;
  }
}

void pushforward(std::span<const double> pre, std::span<const double> gprime,
                 const PeriodicSpline& s, std::span<double> out) {
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = s(pre[j]) / gprime[j];
}

void matvec(std::span<const double> a, std::span<const double> x, double weight,
            std::span<double> out) {
  const std::size_t n = x.size();
  for (std::size_t j = 0; j < out.size(); ++j) {
    double acc = 0.0;
    for (std::size_t l = 0; l < n; ++l) acc += a[j * n + l] * x[l];
    out[j] = weight * acc;
  }
}

double mean_cos(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::cos(2.0 * std::numbers::pi * v);
  return s / static_cast<double>(x.size());
}

void det_step(std::span<const double> x, double k, double delta, std::span<double> out) {
  const double m = mean_cos(x);
  constexpr double tau = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = wrap(k * (x[i] + delta * std::sin(tau * x[i]) * m));
  }
}

}  // namespace stolab::kernels::serial
