#include "stolab/cones.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stolab {

void to_json(nlohmann::json& j, const ConeReport& r) {
  j = {{"log_lip", r.log_lip},       {"second_ratio", r.second_ratio}, {"in_Va", r.in_Va},
       {"in_Ualpha", r.in_Ualpha}, {"slack", r.slack}};
}

ConeReport cone_report(const GridDensity& phi, ConeParams p) {
  require(p.a >= 0.0 && p.alpha >= 0.0, ErrorKind::Domain, "cone parameters must be nonnegative");
  const Field d1 = periodic_derivative(phi, 1);
  const Field d2 = periodic_derivative(phi, 2);
  ConeReport r;
  for (std::size_t j = 0; j < phi.size(); ++j) {
    r.log_lip = std::max(r.log_lip, std::fabs(d1[j] / phi[j]));
    r.second_ratio = std::max(r.second_ratio, std::fabs(d2[j] / phi[j]));
  }
  r.in_Va = r.log_lip <= p.a;
  r.in_Ualpha = r.in_Va && r.second_ratio <= p.alpha;
  r.slack = p.a - r.log_lip;
  return r;
}

double log_lipschitz(std::span<const double> f) {
  const Field d1 = periodic_derivative(f, 1);
  double m = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    require(f[j] > 0.0, ErrorKind::Domain, "log-Lipschitz constant needs a positive field");
    m = std::max(m, std::fabs(d1[j] / f[j]));
  }
  return m;
}

bool in_cone(std::span<const double> f, double a, double tol, double tol_scale) {
  for (double v : f) {
    if (!(v > 0.0)) return false;
  }
  const double scale = std::max(sup_norm(f), tol_scale);
  const Field d1 = periodic_derivative(f, 1);
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (std::fabs(d1[j]) > a * f[j] + tol * scale) return false;
  }
  return true;
}

bool partial_order_leq(const GridDensity& phi, const GridDensity& psi, double a, double tol) {
  require(phi.size() == psi.size(), ErrorKind::Domain, "grid size mismatch");
  Field diff(phi.size());
  for (std::size_t j = 0; j < phi.size(); ++j) diff[j] = psi[j] - phi[j];
  return in_cone(diff, a, tol, std::max(phi.sup(), psi.sup()));
}

namespace {

void require_interior(const GridDensity& f, double a, const char* which) {
  const double ll = log_lipschitz(f.values());
  if ((a - ll) / a < kHilbertInteriorSlack) {
    throw Error(ErrorKind::Precondition,
                std::string("hilbert_metric: ") + which + " is not strictly inside V_a (log_lip=" +
                    std::to_string(ll) + ", a=" + std::to_string(a) + ")");
  }
}

// inf{beta : beta psi - phi in V_a} for interior phi, psi.
double upper_ratio(const GridDensity& phi, const Field& dphi, const GridDensity& psi,
                   const Field& dpsi, double a) {
  double m = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) {
    m = std::max({m, phi[j] / psi[j], (a * phi[j] - dphi[j]) / (a * psi[j] - dpsi[j]),
                  (a * phi[j] + dphi[j]) / (a * psi[j] + dpsi[j])});
  }
  return m;
}

}  // namespace

double hilbert_metric(const GridDensity& phi, const GridDensity& psi, double a) {
  require(a > 0.0, ErrorKind::Domain, "hilbert_metric needs a > 0");
  require(phi.size() == psi.size(), ErrorKind::Domain, "grid size mismatch");
  require_interior(phi, a, "first argument");
  require_interior(psi, a, "second argument");
  const Field dphi = periodic_derivative(phi, 1);
  const Field dpsi = periodic_derivative(psi, 1);
  const double big = upper_ratio(phi, dphi, psi, dpsi, a);
  const double small = 1.0 / upper_ratio(psi, dpsi, phi, dphi, a);
  return std::max(0.0, std::log(big / small));
}

double hilbert_metric_bruteforce(const GridDensity& phi, const GridDensity& psi, double a,
                                 int beta_steps) {
  require(a > 0.0, ErrorKind::Domain, "hilbert_metric_bruteforce needs a > 0");
  require(beta_steps >= 1000, ErrorKind::Domain, "beta_steps must be >= 1000");
  constexpr double kLogLo = -9.0 * std::numbers::ln10;
  constexpr double kLogHi = 9.0 * std::numbers::ln10;
  auto beta_at = [&](int i) { return std::exp(kLogLo + (kLogHi - kLogLo) * i / (beta_steps - 1)); };

  // phi <= beta psi : monotone increasing in beta
  auto upper = [&](double beta) { return partial_order_leq(phi, psi.scaled(beta), a); };
  // beta psi <= phi : monotone decreasing in beta
  auto lower = [&](double beta) { return partial_order_leq(psi.scaled(beta), phi, a); };

  // Smallest grid index where a monotone predicate flips to `target`.
  auto first_index = [&](auto&& pred, bool target) {
    int lo = 0, hi = beta_steps;  // answer in [lo, hi]; hi means "never"
    while (lo < hi) {
      const int mid = (lo + hi) / 2;
      if (pred(beta_at(mid)) == target) hi = mid;
      else lo = mid + 1;
    }
    return lo;
  };
  auto refine = [&](auto&& pred, double lo, double hi, bool true_at_hi) {
    double llo = std::log(lo), lhi = std::log(hi);
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (llo + lhi);
      if (pred(std::exp(mid)) == true_at_hi) lhi = mid;
      else llo = mid;
    }
    return std::exp(0.5 * (llo + lhi));
  };

  const int iu = first_index(upper, true);
  if (iu == 0 || iu == beta_steps) {
    throw Error(ErrorKind::Unbounded, "hilbert_metric_bruteforce: M not bracketed in [1e-9, 1e9]");
  }
  const double big = refine(upper, beta_at(iu - 1), beta_at(iu), true);

  const int il = first_index(lower, false);  // first beta where psi-scaled exceeds phi
  if (il == 0 || il == beta_steps) {
    throw Error(ErrorKind::Unbounded, "hilbert_metric_bruteforce: m not bracketed in [1e-9, 1e9]");
  }
  const double small = refine(lower, beta_at(il - 1), beta_at(il), false);
  return std::max(0.0, std::log(big / small));
}

GridDensity random_cone_element(std::size_t grid_size, double target_log_lip, Stream& rng,
                                int degree) {
  check_grid_size(grid_size);
  require(target_log_lip >= 0.0, ErrorKind::Domain, "target log-Lipschitz constant must be >= 0");
  constexpr double tau = 2.0 * std::numbers::pi;
  std::vector<double> ca(degree + 1), cb(degree + 1);
  for (int n = 1; n <= degree; ++n) {
    ca[n] = rng.normal() / (n * n);
    cb[n] = rng.normal() / (n * n);
  }
  Field logd(grid_size), dlog(grid_size);
  for (std::size_t j = 0; j < grid_size; ++j) {
    const double x = static_cast<double>(j) / grid_size;
    double l = 0.0, dl = 0.0;
    for (int n = 1; n <= degree; ++n) {
      const double c = std::cos(tau * n * x), s = std::sin(tau * n * x);
      l += ca[n] * c + cb[n] * s;
      dl += tau * n * (-ca[n] * s + cb[n] * c);
    }
    logd[j] = l;
    dlog[j] = dl;
  }
  const double lip = sup_norm(dlog);
  const double scale = lip > 0.0 ? target_log_lip / lip : 0.0;
  std::vector<double> v(grid_size);
  for (std::size_t j = 0; j < grid_size; ++j) v[j] = std::exp(scale * logd[j]);
  return GridDensity(std::move(v)).normalized();
}

GridDensity random_cone_element(std::size_t grid_size, double target_log_lip, double alpha,
                                Stream& rng, int degree, int max_tries) {
  for (int t = 0; t < max_tries; ++t) {
    GridDensity phi = random_cone_element(grid_size, target_log_lip, rng, degree);
    if (cone_report(phi, {target_log_lip * 1.01 + 1e-12, alpha}).second_ratio <= alpha) return phi;
  }
  throw Error(ErrorKind::Numerical, "random_cone_element: no draw satisfied the alpha bound");
}

double diameter_estimate(double a, double lam, int n_samples, std::uint64_t seed,
                         std::size_t grid_size, std::vector<double>* distances) {
  require(lam > 0.0 && lam < 1.0, ErrorKind::Domain, "lam must lie in (0,1)");
  require(n_samples >= 2, ErrorKind::Domain, "n_samples must be >= 2");
  std::vector<double> d(static_cast<std::size_t>(n_samples));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_samples; ++i) {
    Stream r0(seed, static_cast<std::uint64_t>(i), 0);
    Stream r1(seed, static_cast<std::uint64_t>(i), 1);
    const GridDensity phi = random_cone_element(grid_size, lam * a, r0);
    const GridDensity psi = random_cone_element(grid_size, lam * a, r1);
    d[static_cast<std::size_t>(i)] = hilbert_metric(phi, psi, a);
  }
  if (distances) distances->insert(distances->end(), d.begin(), d.end());
  return *std::max_element(d.begin(), d.end());
}

double strict_inclusion_margin(double a_prime, double a) {
  require(a_prime >= 0.0 && a_prime < a, ErrorKind::Domain,
          "strict_inclusion_margin needs 0 <= a' < a");
  const double first = (a - a_prime) / (4.0 * a_prime * std::exp(a_prime / 2.0) + 6.0 * std::exp(a_prime));
  const double second = std::exp(-a_prime / 2.0) / 2.0;
  return std::min(first, second);
}

double c1_norm(std::span<const double> f) {
  return sup_norm(f) + sup_norm(periodic_derivative(f, 1));
}

}  // namespace stolab
