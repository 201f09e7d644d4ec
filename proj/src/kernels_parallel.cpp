#include <cmath>
#include <numbers>
#include <vector>

#include "stolab/kernels.hpp"

namespace stolab::kernels::parallel {

void transfer_sum(const MapSpec& map, const PeriodicSpline& s, std::span<double> out) {
  const auto g = static_cast<std::ptrdiff_t>(out.size());
  const int d = map.degree();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < g; ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(g);
    double acc = 0.0;
    for (int i = 0; i < d; ++i) {
      acc += s(map.inverse_branch(i, x)) * map.inverse_branch_derivative(i, x, 1);
    }
    out[static_cast<std::size_t>(j)] = acc;
  }
}

void pushforward(std::span<const double> pre, std::span<const double> gprime,
                 const PeriodicSpline& s, std::span<double> out) {
  const auto g = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < g; ++j) {
    const auto u = static_cast<std::size_t>(j);
    out[u] = s(pre[u]) / gprime[u];
  }
}

void matvec(std::span<const double> a, std::span<const double> x, double weight,
            std::span<double> out) {
  const std::size_t n = x.size();
  const auto rows = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < rows; ++j) {
    const double* row = a.data() + static_cast<std::size_t>(j) * n;
    double acc = 0.0;
    for (std::size_t l = 0; l < n; ++l) acc += row[l] * x[l];
    out[static_cast<std::size_t>(j)] = weight * acc;
  }
}

double mean_cos(std::span<const double> x) {
  const std::size_t n = x.size();
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += std::cos(2.0 * std::numbers::pi * x[i]);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s / static_cast<double>(n);
}

void det_step(std::span<const double> x, double k, double delta, std::span<double> out) {
  // two phases: reduce the mean field, then update every coordinate
  const double m = mean_cos(x);
  constexpr double tau = 2.0 * std::numbers::pi;
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    out[u] = wrap(k * (x[u] + delta * std::sin(tau * x[u]) * m));
  }
}

}  // namespace stolab::kernels::parallel
