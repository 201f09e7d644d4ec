#pragma once

// Built-in uncoupled maps f and coupling kernels H. Instances are immutable and
// shared through shared_ptr<const ...>; new ones are added to the registry in
// maps.cpp, there is no runtime expression parsing.

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace stolab {

/// Uniformly expanding circle map of degree d with explicit inverse branches.
/// Branch i maps [0,1) onto the i-th monotone piece, i = 0..d-1, and the
/// lift satisfies F(0) = 0, F(1) = d.
class MapSpec {
 public:
  virtual ~MapSpec() = default;

  virtual std::string name() const = 0;
  virtual nlohmann::json params() const = 0;
  virtual int degree() const = 0;
  /// Lower bound sigma > 1 of |f'|.
  virtual double expansion() const = 0;
  virtual double eval(double x) const = 0;
  /// f^(order)(x), order 1..3.
  virtual double derivative(double x, int order) const = 0;
  virtual double inverse_branch(int branch, double x) const = 0;
  /// (f_i^{-1})^(order)(x), order 1..3.
  virtual double inverse_branch_derivative(int branch, double x, int order) const = 0;
};

/// f(x) = k x mod 1, k >= 2 integer.
class LinearMap final : public MapSpec {
 public:
  explicit LinearMap(int k);
  std::string name() const override { return "linear-k"; }
  nlohmann::json params() const override { return {{"k", k_}}; }
  int degree() const override { return k_; }
  double expansion() const override { return k_; }
  double eval(double x) const override;
  double derivative(double x, int order) const override;
  double inverse_branch(int branch, double x) const override;
  double inverse_branch_derivative(int branch, double x, int order) const override;

 private:
  int k_;
};

/// f(x) = k x + eps/(2 pi) sin(2 pi x) mod 1 with |eps| < k - 1; inverse
/// branches by safeguarded Newton on the lift.
class PerturbedLinearMap final : public MapSpec {
 public:
  PerturbedLinearMap(int k, double eps);
  std::string name() const override { return "perturbed-k"; }
  nlohmann::json params() const override { return {{"k", k_}, {"eps", eps_}}; }
  int degree() const override { return k_; }
  double expansion() const override { return k_ - std::abs(eps_); }
  double eval(double x) const override;
  double derivative(double x, int order) const override;
  double inverse_branch(int branch, double x) const override;
  double inverse_branch_derivative(int branch, double x, int order) const override;

 private:
  double lift(double y) const;
  int k_;
  double eps_;
};

/// Coupling kernel H(x, y) with partial derivatives in the first argument.
class CouplingSpec {
 public:
  virtual ~CouplingSpec() = default;

  virtual std::string name() const = 0;
  virtual double eval(double x, double y) const = 0;
  /// d^order/dx^order H(x, y), order 0..3.
  virtual double d1(double x, double y, int order) const = 0;
  /// True when int H(x, y) dy = 0 for every x.
  virtual bool zero_mean() const = 0;

  /// c_i = (1/N) sum_j H(x_i, x_j). The generic version is O(N^2).
  virtual std::vector<double> mean_field(std::span<const double> points) const;

  /// Row-major table T[j * G + l] = d1(x_j, y_l, order) on the uniform grid of
  /// size G. Built once per (order, G) and cached.
  const std::vector<double>& table(int order, std::size_t grid_size) const;

 private:
  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<int, std::size_t>, std::vector<double>> cache_;
};

/// H(x, y) = sin(2 pi x) cos(2 pi y).
class SinCosCoupling final : public CouplingSpec {
 public:
  std::string name() const override { return "sincos"; }
  double eval(double x, double y) const override;
  double d1(double x, double y, int order) const override;
  bool zero_mean() const override { return true; }
  std::vector<double> mean_field(std::span<const double> points) const override;
};

/// H(x, y) = sin(2 pi (y - x)).
class KuramotoCoupling final : public CouplingSpec {
 public:
  std::string name() const override { return "kuramoto"; }
  double eval(double x, double y) const override;
  double d1(double x, double y, int order) const override;
  bool zero_mean() const override { return true; }
  std::vector<double> mean_field(std::span<const double> points) const override;
};

using MapPtr = std::shared_ptr<const MapSpec>;
using CouplingPtr = std::shared_ptr<const CouplingSpec>;

/// Registry lookups; names: "linear-k" {k}, "perturbed-k" {k, eps};
/// "sincos", "kuramoto". Unknown names throw Config.
MapPtr make_map(const std::string& name, const nlohmann::json& params);
CouplingPtr make_coupling(const std::string& name);
std::vector<std::string> map_names();
std::vector<std::string> coupling_names();

}  // namespace stolab
