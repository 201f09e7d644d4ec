#pragma once

// Data-parallel inner loops of the operators and the particle simulator.
// Each kernel exists twice with identical signatures: `serial` is the plain
// reference loop kept for testing and benchmarking, `parallel` is the OpenMP
// version the library calls. Parallel reductions use a fixed block layout so
// results do not depend on the number of threads.

#include <span>

#include "stolab/model.hpp"
#include "stolab/torus.hpp"

namespace stolab::kernels {

/// Block length of the deterministic blocked reductions.
inline constexpr std::size_t kReductionBlock = 256;

namespace serial {

/// out_j = sum_i s(f_i^{-1}(x_j)) (f_i^{-1})'(x_j), x_j = j / out.size().
void transfer_sum(const MapSpec& map, const PeriodicSpline& s, std::span<double> out);

/// out_j = s(pre_j) / gprime_j.
void pushforward(std::span<const double> pre, std::span<const double> gprime,
                 const PeriodicSpline& s, std::span<double> out);

/// out_j = weight * sum_l A[j * n + l] x_l for a row-major out.size() x n matrix.
void matvec(std::span<const double> a, std::span<const double> x, double weight,
            std::span<double> out);

/// (1/N) sum_j cos(2 pi x_j).
double mean_cos(std::span<const double> x);

/// out_i = k (x_i + delta sin(2 pi x_i) m) mod 1 with m = mean_cos(x).
void det_step(std::span<const double> x, double k, double delta, std::span<double> out);

}  // namespace serial

namespace parallel {

void transfer_sum(const MapSpec& map, const PeriodicSpline& s, std::span<double> out);
void pushforward(std::span<const double> pre, std::span<const double> gprime,
                 const PeriodicSpline& s, std::span<double> out);
void matvec(std::span<const double> a, std::span<const double> x, double weight,
            std::span<double> out);
double mean_cos(std::span<const double> x);
void det_step(std::span<const double> x, double k, double delta, std::span<double> out);

}  // namespace parallel

}  // namespace stolab::kernels
