#pragma once

// Truncation points for the uniformized series: in interval n the first
// M_n - K + 1 Poisson terms must carry more than the per-interval share of
// the 1 - epsilon budget.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ctbpq/compensated_sum.hpp"
#include "ctbpq/errors.hpp"
#include "ctbpq/piecewise_pdf.hpp"
#include "ctbpq/poisson.hpp"
#include "ctbpq/triangular.hpp"

namespace ctbpq {

struct TruncationPlan {
  std::vector<double> thetas;
  std::vector<std::size_t> trunc_points;
  std::vector<double> durations;
  // (1 - eps)^{1/N}, or ^{1/(N+1)} with a post-horizon segment.
  double per_interval_target = 0.0;
  // 1 - per_interval_target, evaluated without cancellation.
  double per_interval_tail = 1.0;
  bool post_horizon = false;

  std::size_t arrival_intervals() const { return post_horizon ? thetas.size() - 1 : thetas.size(); }
};

// Sum_{m > n} Poi(a, m), summed upward from n+1 while terms still matter.
inline double poisson_upper_tail(double a, std::size_t n) {
  if (a == 0.0) return 0.0;
  CompensatedSum<double> tail;
  double term = poisson_pmf(a, n + 1);
  for (std::size_t m = n + 1;; ++m) {
    tail += term;
    const double next = term * a / static_cast<double>(m + 1);
    if (static_cast<double>(m + 1) > a && (next == 0.0 || next < tail.value() * 1e-20)) break;
    term = next;
  }
  return tail.value();
}

// Smallest n with sum_{m=0}^{n} Poi(a, m) > 1 - tail_allowance. Both the
// compensated cdf and the directly summed upper tail are normalized by their
// total, matching the normalized weights used during propagation, and the
// strict inequality must hold for each: cdf > target and tail < allowance.
inline std::size_t poisson_quantile_exceeding(double a, double target, double tail_allowance) {
  if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("truncation: poisson mean must be finite and nonnegative");
  if (!(target >= 0.0 && target < 1.0)) throw DomainError("truncation: target must lie in [0, 1)");
  if (!(tail_allowance > 0.0)) throw DomainError("truncation: tail allowance must be positive");
  if (a == 0.0) return 0;
  const double give_up = a + 60.0 * std::sqrt(a) + 1000.0;
  CompensatedSum<double> cdf;
  for (std::size_t n = 0;; ++n) {
    if (static_cast<double>(n) > give_up) throw DomainError("truncation: no truncation point found");
    cdf += poisson_pmf(a, n);
    // With a loose allowance the cdf comparison alone is exact enough.
    if (tail_allowance >= 0.5) {
      if (cdf.value() > target) return n;
      continue;
    }
    if (!(cdf.value() > target)) continue;
    const double tail = poisson_upper_tail(a, n);
    const double total = cdf.value() + tail;
    if (cdf.value() / total > target && tail / total < tail_allowance) return n;
  }
}

// Smallest M with sum_{m=0}^{M-K} Poi(theta dt, m) > target.
inline std::size_t find_truncation_point(double theta, double dt, std::size_t K, double target) {
  if (!(theta > 0.0) || !(dt > 0.0)) throw DomainError("find_truncation_point: theta and dt must be positive");
  if (!(target < 1.0)) throw DomainError("find_truncation_point: target must be below 1");
  if (!(target >= 0.0)) throw DomainError("find_truncation_point: target must be nonnegative");
  return K + poisson_quantile_exceeding(theta * dt, target, 1.0 - target);
}

inline std::size_t find_truncation_point(double theta, double dt, std::size_t K, double target, double tail_allowance) {
  if (!(theta > 0.0) || !(dt > 0.0)) throw DomainError("find_truncation_point: theta and dt must be positive");
  return K + poisson_quantile_exceeding(theta * dt, target, tail_allowance);
}

inline TruncationPlan build_truncation_plan(const ModelSpec& spec, bool include_post_horizon) {
  spec.validate();
  if (include_post_horizon && !spec.t_max) throw ConfigError("post-horizon segment requested without t_max");
  const std::size_t N = spec.pdf.intervals();
  const double segments = static_cast<double>(include_post_horizon ? N + 1 : N);

  TruncationPlan plan;
  plan.post_horizon = include_post_horizon;
  const double log_keep = std::log1p(-spec.epsilon) / segments;
  plan.per_interval_target = segments == 1.0 ? 1.0 - spec.epsilon : std::exp(log_keep);
  plan.per_interval_tail = segments == 1.0 ? spec.epsilon : -std::expm1(log_keep);

  for (std::size_t n = 1; n <= N; ++n) {
    const double theta = IntervalOperator::arrivals(spec.lambda(n), spec.mu, spec.c).theta;
    const double dt = spec.pdf.width(n);
    plan.thetas.push_back(theta);
    plan.durations.push_back(dt);
    plan.trunc_points.push_back(
        find_truncation_point(theta, dt, spec.K, plan.per_interval_target, plan.per_interval_tail));
  }
  if (include_post_horizon) {
    const double dt = *spec.t_max - spec.horizon();
    const double service = IntervalOperator::drain(spec.mu, spec.c).theta;
    plan.thetas.push_back(service);
    plan.durations.push_back(dt);
    plan.trunc_points.push_back(find_truncation_point(service, dt, 0, plan.per_interval_target, plan.per_interval_tail));
  }
  return plan;
}

}  // namespace ctbpq
