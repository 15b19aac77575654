#pragma once

// Interval laws of the continuous-time binomial process (CTBP) and of the
// auxiliary NHPP with rate alpha f(t), plus an inverse-CDF sampler.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "ctbpq/errors.hpp"
#include "ctbpq/piecewise_pdf.hpp"
#include "ctbpq/poisson.hpp"
#include "ctbpq/random.hpp"

namespace ctbpq {

// Pr[A(t) = k] = C(K,k) F(0,t)^k (1 - F(0,t))^{K-k}.
inline double ctbp_count_pmf(const PiecewisePdf& pdf, std::size_t K, double t, std::size_t k) {
  if (k > K) throw DomainError("ctbp_count_pmf: k exceeds K");
  if (t < 0.0) throw DomainError("ctbp_count_pmf: negative time");
  return binomial_pmf(K, k, pdf.cdf(t));
}

namespace detail {

struct Observation {
  double time;
  std::size_t count;
};

// Validates the conditioning domain and returns the observations sorted by
// time with the conditioning point (t, k) appended. Empty when the counts
// cannot be nondecreasing in time, i.e. the event has probability zero.
inline std::vector<Observation> conditioning_path(const PiecewisePdf& pdf, std::size_t K, double t,
                                                  std::span<const double> times,
                                                  std::span<const std::size_t> counts, std::size_t k) {
  if (times.size() != counts.size()) throw DomainError("conditional pmf: times and counts differ in length");
  if (times.empty()) throw DomainError("conditional pmf: need at least one observation");
  if (k > K) throw DomainError("conditional pmf: k exceeds K");
  if (!(t > 0.0)) throw DomainError("conditional pmf: conditioning time must be positive");
  if (t >= pdf.horizon() && k != K) throw DomainError("conditional pmf: for t >= T only k = K is admissible");
  std::vector<Observation> obs(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0 && times[i] <= t)) throw DomainError("conditional pmf: observation time outside [0, t]");
    obs[i] = {times[i], counts[i]};
  }
  std::stable_sort(obs.begin(), obs.end(), [](const Observation& a, const Observation& b) { return a.time < b.time; });
  obs.push_back({t, k});
  std::size_t prev = 0;
  for (const auto& o : obs) {
    if (o.count < prev) return {};
    prev = o.count;
  }
  return obs;
}

}  // namespace detail

// Pr[A(t_1)=k_1, ..., A(t_m)=k_m | A(t)=k] by the multinomial ratio
//   k! / prod d_i! * prod F(t_{i-1}, t_i)^{d_i} / F(0,t)^k.
inline double ctbp_conditional_joint_pmf(const PiecewisePdf& pdf, std::size_t K, double t,
                                         std::span<const double> times, std::span<const std::size_t> counts,
                                         std::size_t k) {
  const auto obs = detail::conditioning_path(pdf, K, t, times, counts, k);
  if (obs.empty()) return 0.0;
  double log_value = std::lgamma(static_cast<double>(k) + 1.0);
  double prev_time = 0.0;
  std::size_t prev_count = 0;
  for (const auto& o : obs) {
    const std::size_t d = o.count - prev_count;
    if (d > 0) {
      const double seg = pdf.cdf_segment(prev_time, o.time);
      if (seg <= 0.0) return 0.0;
      log_value += static_cast<double>(d) * std::log(seg) - std::lgamma(static_cast<double>(d) + 1.0);
    }
    prev_time = o.time;
    prev_count = o.count;
  }
  if (k > 0) log_value -= static_cast<double>(k) * std::log(pdf.cdf(t));
  return std::exp(log_value);
}

// Same conditional law for the NHPP with rate alpha f(t), as a ratio of
// Poisson increment probabilities (independent increments).
inline double nhpp_conditional_joint_pmf(const PiecewisePdf& pdf, double alpha, std::size_t K, double t,
                                         std::span<const double> times, std::span<const std::size_t> counts,
                                         std::size_t k) {
  if (!(alpha > 0.0)) throw DomainError("conditional pmf: alpha must be positive");
  const auto obs = detail::conditioning_path(pdf, K, t, times, counts, k);
  if (obs.empty()) return 0.0;
  double log_value = -log_poisson_pmf(cumulative_intensity(pdf, alpha, 0.0, t), k);
  double prev_time = 0.0;
  std::size_t prev_count = 0;
  for (const auto& o : obs) {
    const double lp = log_poisson_pmf(cumulative_intensity(pdf, alpha, prev_time, o.time), o.count - prev_count);
    if (lp == -std::numeric_limits<double>::infinity()) return 0.0;
    log_value += lp;
    prev_time = o.time;
    prev_count = o.count;
  }
  return std::exp(log_value);
}

// One draw from f by inversion; interval cumulative masses are searched so a
// uniform landing exactly on F(0,T_n) maps to the left interval's endpoint.
inline double sample_arrival_time(const PiecewisePdf& pdf, Rng& rng) {
  const auto& cum = pdf.cumulative_masses();
  const double u = uniform_open_closed(rng);
  auto it = std::lower_bound(cum.begin() + 1, cum.end(), u);
  if (it == cum.end()) --it;
  const std::size_t n = static_cast<std::size_t>(it - cum.begin());
  const double lo = pdf.breakpoint(n - 1);
  const double hi = pdf.breakpoint(n);
  const double t = lo + (u - cum[n - 1]) / pdf.level(n);
  return std::clamp(t, std::nextafter(lo, hi), hi);
}

inline std::vector<double> sample_arrival_times(const PiecewisePdf& pdf, std::size_t K, Rng& rng) {
  if (K < 1) throw DomainError("sample_arrival_times: K must be at least 1");
  std::vector<double> out(K);
  for (double& x : out) x = sample_arrival_time(pdf, rng);
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<double> sample_arrival_times(const PiecewisePdf& pdf, std::size_t K, std::uint64_t seed) {
  Rng rng = substream(seed, 0);
  return sample_arrival_times(pdf, K, rng);
}

}  // namespace ctbpq
