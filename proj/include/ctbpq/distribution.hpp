#pragma once

#include <algorithm>
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

// pmf of the queue length L(t) in the K-customer model.
struct QueueLengthDistribution {
  double t = 0.0;
  std::size_t K = 0;
  std::vector<double> probs;
  // 1 - sum(probs): the exact 1-norm distance to the untruncated pmf.
  double mass_defect = 0.0;
};

// Lambda(0,t) of the arrival process the engine actually runs: in each
// interval the number of uniformized jumps is Poisson with mean theta * dt
// (rounded as the engine rounds it) and each jump is an arrival with the
// grid-rounded probability. Weights built from this match the joint law to
// the last bit; alpha F would not, and when K is far from alpha the weights
// amplify any mismatch by roughly |K - alpha|.
inline long double engine_head_intensity(const ModelSpec& spec, double t) {
  CompensatedSum<long double> acc;
  for (std::size_t n = 1; n <= spec.pdf.intervals(); ++n) {
    const double start = spec.pdf.breakpoint(n - 1);
    if (!(t > start)) break;
    const double end = spec.pdf.breakpoint(n);
    const double dt = t >= end ? end - start : t - start;
    const IntervalOperator op = IntervalOperator::arrivals(spec.lambda(n), spec.mu, spec.c);
    acc += static_cast<long double>(grid_arrival_probability(op)) * static_cast<long double>(op.theta * dt);
  }
  return acc.value();
}

inline long double engine_intensity_ext(const ModelSpec& spec, double s, double t) {
  if (!(s <= t)) return 0.0L;
  return engine_head_intensity(spec, t) - engine_head_intensity(spec, s);
}

inline double engine_intensity(const ModelSpec& spec, double s, double t) {
  return static_cast<double>(engine_intensity_ext(spec, s, t));
}

// Poi(Lambda(t,T), K-k) / Poi(Lambda(0,T), K) for k = 0..K.
inline std::vector<double> conditioning_weights(const ModelSpec& spec, double t) {
  const long double total = engine_head_intensity(spec, spec.horizon());
  const long double tail = t >= spec.horizon() ? 0.0L : total - engine_head_intensity(spec, t);
  std::vector<double> w(spec.K + 1);
  for (std::size_t k = 0; k <= spec.K; ++k) w[k] = poisson_ratio_weight(std::max(tail, 0.0L), total, spec.K, k);
  return w;
}

// The auxiliary joint law and the weights live on the scale of
// Poi(Lambda(0,T), K); when that underflows a double, alpha is too far from K.
inline void check_alpha_scale(const ModelSpec& spec) {
  const long double log_norm = log_poisson_pmf_ext(engine_head_intensity(spec, spec.horizon()), spec.K);
  if (log_norm < std::log(std::numeric_limits<double>::min()) + 8.0L) {
    throw ConfigError("alpha = " + std::to_string(spec.alpha) + " is too far from K = " + std::to_string(spec.K) +
                      ": Poi(Lambda(0,T), K) underflows; choose alpha closer to K");
  }
}

namespace detail {

inline void check_matches(const TriangularVector& p, const ModelSpec& spec) {
  if (p.K() != spec.K) {
    throw ConfigError("joint law has K = " + std::to_string(p.K()) + " but the model has K = " +
                      std::to_string(spec.K));
  }
  if (std::abs(engine_intensity(spec, 0.0, spec.horizon()) - spec.alpha) > 1e-9 * spec.alpha) {
    throw ConfigError("Lambda(0,T) disagrees with alpha; density is not normalized");
  }
  check_alpha_scale(spec);
}

inline double defect_from(const TriangularVector& p, const std::vector<double>& w) {
  CompensatedSum<double> retained;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] != 0.0) retained += w[k] * p.arrival_marginal(k);
  }
  return std::max(0.0, 1.0 - retained.value());
}

}  // namespace detail

inline double mass_defect(const TriangularVector& p, double t, const ModelSpec& spec) {
  detail::check_matches(p, spec);
  return detail::defect_from(p, conditioning_weights(spec, t));
}

// pi_l(t) = sum_{k >= l} p_{k, k-l}(t) Poi(Lambda(t,T), K-k) / Poi(Lambda(0,T), K).
inline QueueLengthDistribution mix_to_queue_length(const TriangularVector& p, double t, const ModelSpec& spec) {
  detail::check_matches(p, spec);
  const std::vector<double> w = conditioning_weights(spec, t);
  QueueLengthDistribution d;
  d.t = t;
  d.K = spec.K;
  d.probs.assign(spec.K + 1, 0.0);
  for (std::size_t k = 0; k <= spec.K; ++k) {
    if (w[k] == 0.0) continue;
    const auto row = p.row(k);
    for (std::size_t j = 0; j <= k; ++j) d.probs[k - j] += w[k] * row[j];
  }
  d.mass_defect = detail::defect_from(p, w);
  return d;
}

struct Summary {
  double mean = 0.0;
  double variance = 0.0;
  std::size_t median = 0;
  std::size_t mode = 0;
  std::size_t p95 = 0;
};

inline constexpr double kSummaryDefectGuard = 0.01;

// Smallest l whose cumulative mass reaches q, on the raw truncated masses.
inline std::size_t percentile(const QueueLengthDistribution& d, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("percentile: level must lie in [0, 1]");
  CompensatedSum<double> cum;
  for (std::size_t l = 0; l < d.probs.size(); ++l) {
    cum += d.probs[l];
    if (cum.value() >= q) return l;
  }
  return d.probs.empty() ? 0 : d.probs.size() - 1;
}

inline Summary summarize(const QueueLengthDistribution& d) {
  if (!(d.mass_defect < kSummaryDefectGuard)) {
    throw GuardError("refusing to summarize at t = " + std::to_string(d.t) + ": mass defect " +
                     std::to_string(d.mass_defect) + " exceeds " + std::to_string(kSummaryDefectGuard));
  }
  if (d.probs.empty()) throw DomainError("summarize: empty distribution");
  Summary s;
  CompensatedSum<double> mean;
  for (std::size_t l = 0; l < d.probs.size(); ++l) mean += static_cast<double>(l) * d.probs[l];
  s.mean = mean.value();
  CompensatedSum<double> var;
  for (std::size_t l = 0; l < d.probs.size(); ++l) {
    const double dev = static_cast<double>(l) - s.mean;
    var += dev * dev * d.probs[l];
  }
  s.variance = var.value();
  s.mode = static_cast<std::size_t>(std::max_element(d.probs.begin(), d.probs.end()) - d.probs.begin());
  s.median = percentile(d, 0.5);
  s.p95 = percentile(d, 0.95);
  return s;
}

}  // namespace ctbpq
