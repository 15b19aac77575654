#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctbpq/compensated_sum.hpp"
#include "ctbpq/errors.hpp"

namespace ctbpq {

// Arrival-time density that is constant on each interval (T_{n-1}, T_n].
class PiecewisePdf {
 public:
  static constexpr double kNormalizationTolerance = 1e-12;
  static constexpr double kRescaleTolerance = 1e-6;

  // Levels must integrate to one within kRescaleTolerance; they are rescaled
  // by the computed mass so that the stored density integrates to one.
  PiecewisePdf(std::vector<double> breakpoints, std::vector<double> levels)
      : breakpoints_(std::move(breakpoints)), levels_(std::move(levels)) {
    validate_shape();
    const double mass = raw_mass();
    if (std::abs(mass - 1.0) > kRescaleTolerance) {
      throw ConfigError("density levels integrate to " + std::to_string(mass) + ", expected 1");
    }
    rescale(mass);
  }

  // Accepts any positive total mass and normalizes it away.
  static PiecewisePdf from_weights(std::vector<double> breakpoints, std::vector<double> weights) {
    PiecewisePdf pdf(std::move(breakpoints), std::move(weights), Unchecked{});
    const double mass = pdf.raw_mass();
    if (!(mass > 0.0) || !std::isfinite(mass)) throw ConfigError("density weights have no positive mass");
    pdf.rescale(mass);
    return pdf;
  }

  static PiecewisePdf uniform(double horizon) { return PiecewisePdf({0.0, horizon}, {1.0 / horizon}); }

  std::size_t intervals() const { return levels_.size(); }
  double horizon() const { return breakpoints_.back(); }
  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<const double> levels() const { return levels_; }
  double breakpoint(std::size_t n) const { return breakpoints_[n]; }
  // Level on the n-th interval, 1-based as in (T_{n-1}, T_n].
  double level(std::size_t n) const { return levels_[n - 1]; }
  double width(std::size_t n) const { return breakpoints_[n] - breakpoints_[n - 1]; }
  double max_level() const { return *std::max_element(levels_.begin(), levels_.end()); }

  // 1-based index n with T_{n-1} < t <= T_n; 0 for t <= 0, N+1 for t > T.
  std::size_t interval_of(double t) const {
    if (t <= 0.0) return 0;
    if (t > horizon()) return intervals() + 1;
    const auto it = std::lower_bound(breakpoints_.begin() + 1, breakpoints_.end(), t);
    return static_cast<std::size_t>(it - breakpoints_.begin());
  }

  double density(double t) const {
    const std::size_t n = interval_of(t);
    if (n == 0 || n > intervals()) return 0.0;
    return level(n);
  }

  // F(s,t) = integral of f over (s,t] for s <= t, else 0.
  double cdf_segment(double s, double t) const {
    if (!(s <= t)) return 0.0;
    if (s <= 0.0 && t >= horizon()) return 1.0;
    CompensatedSum<double> acc;
    for (std::size_t n = 1; n <= intervals(); ++n) {
      const double lo = std::max(s, breakpoints_[n - 1]);
      const double hi = std::min(t, breakpoints_[n]);
      if (hi > lo) acc += levels_[n - 1] * (hi - lo);
    }
    return std::clamp(acc.value(), 0.0, 1.0);
  }

  double cdf(double t) const { return cdf_segment(0.0, t); }

  // F(0, T_n) for n = 0..N, with the last entry pinned to exactly 1.
  const std::vector<double>& cumulative_masses() const { return cumulative_; }

 private:
  struct Unchecked {};
  PiecewisePdf(std::vector<double> breakpoints, std::vector<double> levels, Unchecked)
      : breakpoints_(std::move(breakpoints)), levels_(std::move(levels)) {
    validate_shape();
  }

  void validate_shape() const {
    if (breakpoints_.size() < 2) throw ConfigError("density needs at least one interval");
    if (levels_.size() + 1 != breakpoints_.size()) {
      throw ConfigError("density needs exactly one level per interval");
    }
    if (breakpoints_.front() != 0.0) throw ConfigError("first breakpoint must be 0");
    for (std::size_t n = 1; n < breakpoints_.size(); ++n) {
      if (!(breakpoints_[n] > breakpoints_[n - 1]) || !std::isfinite(breakpoints_[n])) {
        throw ConfigError("breakpoints must be finite and strictly increasing");
      }
    }
    for (const double g : levels_) {
      if (!(g >= 0.0) || !std::isfinite(g)) throw ConfigError("density levels must be finite and nonnegative");
    }
    if (!(levels_.front() > 0.0)) throw ConfigError("density must be positive on the first interval");
  }

  double raw_mass() const {
    CompensatedSum<double> acc;
    for (std::size_t n = 1; n <= intervals(); ++n) acc += levels_[n - 1] * width(n);
    return acc.value();
  }

  void rescale(double mass) {
    for (double& g : levels_) g /= mass;
    cumulative_.assign(breakpoints_.size(), 0.0);
    CompensatedSum<double> acc;
    for (std::size_t n = 1; n <= intervals(); ++n) {
      acc += levels_[n - 1] * width(n);
      cumulative_[n] = std::min(acc.value(), 1.0);
    }
    cumulative_.back() = 1.0;
  }

  std::vector<double> breakpoints_;
  std::vector<double> levels_;
  std::vector<double> cumulative_;
};

// Lambda(s,t) = alpha F(s,t) for the auxiliary NHPP with rate alpha f(t).
inline double cumulative_intensity(const PiecewisePdf& pdf, double alpha, double s, double t) {
  return alpha * pdf.cdf_segment(s, t);
}

// Full problem instance for the CTBP/M/c queue.
struct ModelSpec {
  std::size_t K = 1;
  std::size_t c = 1;
  double mu = 1.0;
  double alpha = 1.0;
  double epsilon = 1e-10;
  PiecewisePdf pdf = PiecewisePdf::uniform(1.0);
  std::optional<double> t_max;

  double horizon() const { return pdf.horizon(); }
  double lambda(std::size_t n) const { return alpha * pdf.level(n); }

  void validate() const {
    if (K < 1) throw ConfigError("K must be at least 1");
    if (c < 1) throw ConfigError("c must be at least 1");
    if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be positive");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be positive");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in (0, 1]");
    if (t_max && !(*t_max > horizon())) throw ConfigError("t_max must exceed the arrival horizon T");
  }
};

// f(t) proportional to n^2 e^{-0.25 n} on (10(n-1), 10n], n = 1..30.
inline PiecewisePdf benchmark_pdf() {
  std::vector<double> breakpoints(31);
  std::vector<double> weights(30);
  for (std::size_t n = 0; n <= 30; ++n) breakpoints[n] = 10.0 * static_cast<double>(n);
  for (std::size_t n = 1; n <= 30; ++n) {
    const double x = static_cast<double>(n);
    weights[n - 1] = x * x * std::exp(-0.25 * x);
  }
  return PiecewisePdf::from_weights(std::move(breakpoints), std::move(weights));
}

// T = 300, N = 30, mu = 2.5, c = 2, epsilon = 1e-14, alpha = 1000.
inline ModelSpec benchmark_spec(std::size_t K = 1000) {
  ModelSpec spec;
  spec.K = K;
  spec.c = 2;
  spec.mu = 2.5;
  spec.alpha = 1000.0;
  spec.epsilon = 1e-14;
  spec.pdf = benchmark_pdf();
  return spec;
}

}  // namespace ctbpq
