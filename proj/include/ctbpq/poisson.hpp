#pragma once

// Poisson and binomial probabilities evaluated with Loader's saddle-point
// decomposition (stirlerr + bd0). Relative accuracy stays near machine
// precision for counts in the thousands, where lgamma differences lose
// about three digits.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "ctbpq/compensated_sum.hpp"
#include "ctbpq/errors.hpp"

namespace ctbpq {

namespace detail {

inline const std::array<long double, 16>& stirlerr_table() {
  static const std::array<long double, 16> table = [] {
    std::array<long double, 16> t{};
    const long double half_log_2pi = 0.5L * std::log(2.0L * std::numbers::pi_v<long double>);
    for (int n = 1; n < 16; ++n) {
      const long double x = n;
      t[n] = std::lgamma(x + 1.0L) - (x + 0.5L) * std::log(x) + x - half_log_2pi;
    }
    return t;
  }();
  return table;
}

}  // namespace detail

// log(n!) - [(n + 1/2) log n - n + log sqrt(2 pi)]
inline long double stirlerr(std::size_t n) {
  if (n < 16) return detail::stirlerr_table()[n];
  constexpr long double s0 = 1.0L / 12.0L;
  constexpr long double s1 = 1.0L / 360.0L;
  constexpr long double s2 = 1.0L / 1260.0L;
  constexpr long double s3 = 1.0L / 1680.0L;
  constexpr long double s4 = 1.0L / 1188.0L;
  const long double n1 = 1.0L / static_cast<long double>(n);
  const long double n2 = n1 * n1;
  if (n > 500) return (s0 - (s1 - s2 * n2) * n2) * n1;
  if (n > 80) return (s0 - (s1 - (s2 - s3 * n2) * n2) * n2) * n1;
  return (s0 - (s1 - (s2 - (s3 - s4 * n2) * n2) * n2) * n2) * n1;
}

// Deviance term x log(x/np) + np - x, evaluated by series near x = np.
// Extended precision keeps the absolute error small when the term is large.
inline long double bd0(long double x, long double np) {
  if (std::abs(x - np) < 0.1L * (x + np)) {
    const long double v = (x - np) / (x + np);
    long double s = (x - np) * v;
    long double ej = 2.0L * x * v;
    const long double v2 = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v2;
      const long double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

// log Poi(a, k) in extended precision; -inf where the pmf is exactly zero.
inline long double log_poisson_pmf_ext(long double a, std::size_t k) {
  if (!(a >= 0.0L)) throw DomainError("poisson mean must be nonnegative, got " + std::to_string(a));
  if (a == 0.0L) return k == 0 ? 0.0L : -std::numeric_limits<long double>::infinity();
  if (k == 0) return -a;
  const long double x = static_cast<long double>(k);
  return -stirlerr(k) - bd0(x, a) - 0.5L * std::log(2.0L * std::numbers::pi_v<long double> * x);
}

// log Poi(a, k); -inf where the pmf is exactly zero.
inline double log_poisson_pmf(double a, std::size_t k) {
  return static_cast<double>(log_poisson_pmf_ext(static_cast<long double>(a), k));
}

// Poi(a, k) = e^{-a} a^k / k!, extended to a point mass at 0 when a = 0.
inline double poisson_pmf(double a, std::size_t k) {
  return static_cast<double>(std::exp(log_poisson_pmf_ext(static_cast<long double>(a), k)));
}

// log of C(n,k) p^k (1-p)^{n-k}.
inline double log_binomial_pmf(std::size_t n, std::size_t k, double p) {
  if (k > n) throw DomainError("binomial count exceeds trials");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial probability outside [0,1]");
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  if (p == 0.0) return k == 0 ? 0.0 : neg_inf;
  if (p == 1.0) return k == n ? 0.0 : neg_inf;
  const long double nn = static_cast<long double>(n);
  if (k == 0) return static_cast<double>(nn * std::log1p(-static_cast<long double>(p)));
  if (k == n) return static_cast<double>(nn * std::log(static_cast<long double>(p)));
  const long double x = static_cast<long double>(k);
  const long double lp = p;
  const long double lc =
      stirlerr(n) - stirlerr(k) - stirlerr(n - k) - bd0(x, nn * lp) - bd0(nn - x, nn * (1.0L - lp));
  return static_cast<double>(lc + 0.5L * std::log(nn / (2.0L * std::numbers::pi_v<long double> * x * (nn - x))));
}

inline double binomial_pmf(std::size_t n, std::size_t k, double p) {
  return std::exp(log_binomial_pmf(n, k, p));
}

// Poi(lambda_tail, K-k) / Poi(lambda_total, K): the factor that converts the
// auxiliary joint law at time t into the K-conditioned law.
inline double poisson_ratio_weight(long double lambda_tail, long double lambda_total, std::size_t K, std::size_t k) {
  if (k > K) throw DomainError("ratio weight: k exceeds K");
  if (!(lambda_total > 0.0L)) throw DomainError("ratio weight: total mean must be positive");
  if (!(lambda_tail >= 0.0L) || lambda_tail > lambda_total * (1.0L + 1e-12L)) {
    throw DomainError("ratio weight: tail mean outside [0, total]");
  }
  if (lambda_tail == 0.0L && k != K) return 0.0;
  return static_cast<double>(std::exp(log_poisson_pmf_ext(lambda_tail, K - k) - log_poisson_pmf_ext(lambda_total, K)));
}

// Poi(a, m) for m = 0..last, generated by the ratio recurrence outward from
// the mode and normalized by the mass of the full (untruncated) sequence.
// Entries below 1e-300 are set to zero.
inline std::vector<double> poisson_weights(double a, std::size_t last) {
  if (!(a >= 0.0)) throw DomainError("poisson mean must be nonnegative");
  std::vector<double> w(last + 1, 0.0);
  if (a == 0.0) {
    w[0] = 1.0;
    return w;
  }
  constexpr double floor_value = 1e-300;
  const std::size_t mode = static_cast<std::size_t>(std::floor(a));

  // Walk above the mode past `last` so the normalizer sees the whole tail.
  CompensatedSum<double> total;
  const double w_mode = poisson_pmf(a, mode);
  total += w_mode;
  if (mode <= last) w[mode] = w_mode;
  double cur = w_mode;
  for (std::size_t m = mode;; ++m) {
    cur *= a / static_cast<double>(m + 1);
    if (cur < floor_value) break;
    total += cur;
    if (m + 1 <= last) w[m + 1] = cur;
    if (cur < w_mode * 1e-18 && m + 1 >= last) break;
  }
  cur = w_mode;
  for (std::size_t m = mode; m > 0; --m) {
    cur *= static_cast<double>(m) / a;
    if (cur < floor_value) break;
    total += cur;
    if (m - 1 <= last) w[m - 1] = cur;
  }
  const double norm = total.value();
  for (double& x : w) x /= norm;
  return w;
}

}  // namespace ctbpq
