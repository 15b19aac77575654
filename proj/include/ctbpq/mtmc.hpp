#pragma once

// Transient pmf of the M_t/M/c queue with piecewise-constant arrival rate,
// by uniformization of the birth-death chain on {0..L_max}. Arrivals at
// L_max are lost, so the mass that leaves is counted in the defect.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctbpq/compensated_sum.hpp"
#include "ctbpq/distribution.hpp"
#include "ctbpq/errors.hpp"
#include "ctbpq/piecewise_pdf.hpp"
#include "ctbpq/poisson.hpp"
#include "ctbpq/triangular.hpp"
#include "ctbpq/truncation.hpp"

namespace ctbpq {

// Smallest L with Pr[Poi(total_arrivals) > L] < allowance.
inline std::size_t mtmc_level_cap(double total_arrivals, double allowance) {
  if (!(total_arrivals >= 0.0)) throw DomainError("mtmc: expected arrivals must be nonnegative");
  if (total_arrivals == 0.0) return 0;
  return poisson_quantile_exceeding(total_arrivals, 1.0 - allowance, allowance);
}

namespace detail {

class BirthDeathKernel {
 public:
  BirthDeathKernel(const IntervalOperator& op, std::size_t cap) : up_(grid_arrival_probability(op)), down_(cap + 1), stay_(cap + 1) {
    op.validate();
    for (std::size_t l = 0; l <= cap; ++l) {
      double down = to_probability_grid(static_cast<double>(std::min(l, op.c)) * op.mu / op.theta);
      double stay = 1.0 - up_ - down;
      if (stay < 0.0) {
        down += stay;
        stay = 0.0;
      }
      down_[l] = down;
      stay_[l] = stay;
    }
  }

  void apply(const std::vector<double>& in, std::vector<double>& out) const {
    const std::size_t cap = stay_.size() - 1;
    for (std::size_t l = 0; l <= cap; ++l) {
      double v = stay_[l] * in[l];
      if (l > 0) v += up_ * in[l - 1];
      if (l < cap) v += down_[l + 1] * in[l + 1];
      out[l] = v;
    }
  }

 private:
  double up_;
  std::vector<double> down_;
  std::vector<double> stay_;
};

}  // namespace detail

// breakpoints 0 = T_0 < ... < T_N, rates[n-1] on (T_{n-1}, T_n]; queries
// sorted in (0, T], or (0, t_max] when t_max is given.
inline std::vector<QueueLengthDistribution> mtmc_transient(std::span<const double> breakpoints, std::span<const double> rates,
                                                           std::size_t c, double mu, double epsilon,
                                                           std::span<const double> query_times,
                                                           std::optional<double> t_max = std::nullopt) {
  if (breakpoints.size() < 2 || rates.size() + 1 != breakpoints.size()) throw ConfigError("mtmc: need N rates for N+1 breakpoints");
  if (breakpoints[0] != 0.0) throw ConfigError("mtmc: first breakpoint must be 0");
  for (std::size_t n = 1; n < breakpoints.size(); ++n) {
    if (!(breakpoints[n] > breakpoints[n - 1])) throw ConfigError("mtmc: breakpoints must increase");
    if (!(rates[n - 1] >= 0.0) || !std::isfinite(rates[n - 1])) throw ConfigError("mtmc: rates must be finite and nonnegative");
  }
  if (c < 1 || !(mu > 0.0)) throw ConfigError("mtmc: need c >= 1 and mu > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("mtmc: epsilon must lie in (0, 1)");
  const std::size_t N = rates.size();
  const double T = breakpoints.back();
  if (t_max && !(*t_max > T)) throw ConfigError("mtmc: t_max must exceed T");
  const double limit = t_max.value_or(T);
  for (std::size_t q = 0; q < query_times.size(); ++q) {
    if (!(query_times[q] > 0.0) || query_times[q] > limit) throw DomainError("mtmc: query time outside the computed horizon");
    if (q > 0 && query_times[q] < query_times[q - 1]) throw DomainError("mtmc: query times must be sorted");
  }
  std::vector<QueueLengthDistribution> out;
  if (query_times.empty()) return out;

  // Half of epsilon for the level cap, half for the uniformization tails.
  CompensatedSum<double> expected;
  for (std::size_t n = 1; n <= N; ++n) expected += rates[n - 1] * (breakpoints[n] - breakpoints[n - 1]);
  const std::size_t cap = mtmc_level_cap(expected.value(), 0.5 * epsilon);
  const bool drain = query_times.back() > T;
  const double log_keep = std::log1p(-0.5 * epsilon) / static_cast<double>(drain ? N + 1 : N);
  const double target = std::exp(log_keep);
  const double allowance = -std::expm1(log_keep);

  std::vector<double> p(cap + 1, 0.0);
  p[0] = 1.0;
  std::size_t q = 0;
  const std::size_t segments = drain ? N + 1 : N;
  for (std::size_t n = 1; n <= segments && q < query_times.size(); ++n) {
    const bool post = n > N;
    const double start = post ? T : breakpoints[n - 1];
    const double end = post ? *t_max : breakpoints[n];
    const IntervalOperator op = post ? IntervalOperator::drain(mu, c) : IntervalOperator::arrivals(rates[n - 1], mu, c);
    const std::size_t M = find_truncation_point(op.theta, end - start, 0, target, allowance);
    const detail::BirthDeathKernel kernel(op, cap);

    std::vector<double> offsets;
    while (q < query_times.size() && query_times[q] <= end) offsets.push_back(query_times[q++] - start);
    const std::size_t first_query = q - offsets.size();
    offsets.push_back(end - start);

    std::vector<std::vector<double>> weights;
    for (const double delta : offsets) weights.push_back(poisson_weights(op.theta * delta, M));
    std::vector<std::vector<double>> acc(offsets.size(), std::vector<double>(cap + 1, 0.0));
    std::vector<double> cur = p;
    std::vector<double> next(cap + 1);
    for (std::size_t m = 0;; ++m) {
      for (std::size_t i = 0; i < offsets.size(); ++i) {
        const double w = weights[i][m];
        if (w == 0.0) continue;
        for (std::size_t l = 0; l <= cap; ++l) acc[i][l] += w * cur[l];
      }
      if (m == M) break;
      kernel.apply(cur, next);
      std::swap(cur, next);
    }
    for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
      QueueLengthDistribution d;
      d.t = query_times[first_query + i];
      d.K = cap;
      d.probs = std::move(acc[i]);
      CompensatedSum<double> total;
      for (const double x : d.probs) total += x;
      d.mass_defect = std::max(0.0, 1.0 - total.value());
      out.push_back(std::move(d));
    }
    p = std::move(acc.back());
  }
  return out;
}

// M_t/M/c with lambda(t) = K f(t) and the model's service parameters.
inline std::vector<QueueLengthDistribution> mtmc_transient(const ModelSpec& spec, std::span<const double> query_times) {
  spec.validate();
  std::vector<double> rates(spec.pdf.intervals());
  for (std::size_t n = 1; n <= spec.pdf.intervals(); ++n) rates[n - 1] = static_cast<double>(spec.K) * spec.pdf.level(n);
  const auto& bp = spec.pdf.breakpoints();
  return mtmc_transient(bp, rates, spec.c, spec.mu, spec.epsilon, query_times, spec.t_max);
}

}  // namespace ctbpq
