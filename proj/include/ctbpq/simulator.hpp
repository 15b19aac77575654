#pragma once

// Discrete-event simulation of the multi-server queue fed either by K i.i.d.
// arrival times (CTBP) or by a Poisson process with rate K f(t) (M_t/M/c).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <queue>
#include <span>
#include <vector>

#include "ctbpq/arrivals.hpp"
#include "ctbpq/compensated_sum.hpp"
#include "ctbpq/errors.hpp"
#include "ctbpq/piecewise_pdf.hpp"
#include "ctbpq/random.hpp"

namespace ctbpq {

enum class EventKind : std::uint8_t { Arrival, Departure };

struct SamplePath {
  std::vector<double> times;
  std::vector<EventKind> kinds;

  // Right-continuous: events at exactly t are included.
  std::size_t queue_length_at(double t) const {
    const auto end = std::upper_bound(times.begin(), times.end(), t) - times.begin();
    std::ptrdiff_t level = 0;
    for (std::ptrdiff_t i = 0; i < end; ++i) level += kinds[i] == EventKind::Arrival ? 1 : -1;
    return static_cast<std::size_t>(level);
  }

  std::size_t arrivals() const {
    return static_cast<std::size_t>(std::count(kinds.begin(), kinds.end(), EventKind::Arrival));
  }

  // Sorted times, L never negative, and each event moves L by one.
  bool well_formed() const {
    if (times.size() != kinds.size()) return false;
    std::ptrdiff_t level = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (i > 0 && times[i] < times[i - 1]) return false;
      level += kinds[i] == EventKind::Arrival ? 1 : -1;
      if (level < 0) return false;
    }
    return true;
  }
};

struct EmpiricalDistribution {
  double t = 0.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t replications = 0;
  std::uint64_t seed = 0;

  void record(std::size_t level) {
    if (level >= counts.size()) counts.resize(level + 1, 0);
    ++counts[level];
    ++replications;
  }

  std::vector<double> pmf() const {
    std::vector<double> p(counts.size(), 0.0);
    if (replications == 0) return p;
    for (std::size_t l = 0; l < counts.size(); ++l) p[l] = static_cast<double>(counts[l]) / static_cast<double>(replications);
    return p;
  }

  double mean() const {
    CompensatedSum<double> s;
    const auto p = pmf();
    for (std::size_t l = 0; l < p.size(); ++l) s += static_cast<double>(l) * p[l];
    return s.value();
  }

  double variance() const {
    const double m = mean();
    CompensatedSum<double> s;
    const auto p = pmf();
    for (std::size_t l = 0; l < p.size(); ++l) s += (static_cast<double>(l) - m) * (static_cast<double>(l) - m) * p[l];
    return s.value();
  }
};

// Half the 1-norm distance; entries missing from either side count as zero.
inline double total_variation(std::span<const double> p, std::span<const double> q) {
  CompensatedSum<double> s;
  const std::size_t n = std::max(p.size(), q.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i < p.size() ? p[i] : 0.0;
    const double b = i < q.size() ? q[i] : 0.0;
    s += std::abs(a - b);
  }
  return 0.5 * s.value();
}

inline double total_variation(const EmpiricalDistribution& e, std::span<const double> q) {
  const auto p = e.pmf();
  return total_variation(std::span<const double>(p), q);
}

// Poisson arrivals with rate scale * f(t) on (0, T], by thinning against
// scale * max f.
inline std::vector<double> sample_nhpp_arrival_times(const PiecewisePdf& pdf, double scale, Rng& rng) {
  if (!(scale >= 0.0)) throw DomainError("nhpp: rate scale must be nonnegative");
  std::vector<double> out;
  const double bound = scale * pdf.max_level();
  if (bound == 0.0) return out;
  const double T = pdf.horizon();
  double t = 0.0;
  for (;;) {
    t += exponential(rng, bound);
    if (t > T) break;
    const double rate = scale * pdf.density(t);
    if (uniform_open_closed(rng) * bound <= rate) out.push_back(t);
  }
  return out;
}

// FCFS with c exponential servers on sorted arrival times. Events after
// `until` are dropped; `visit(t, kind)` sees each retained event in order.
template <typename Visit>
void run_service(std::span<const double> arrivals, std::size_t c, double mu, double until, Rng& rng, Visit&& visit) {
  if (c < 1 || !(mu > 0.0)) throw DomainError("service: need c >= 1 and mu > 0");
  std::priority_queue<double, std::vector<double>, std::greater<>> departures;
  std::size_t waiting = 0;
  std::size_t next = 0;
  for (;;) {
    const bool have_arrival = next < arrivals.size();
    const bool have_departure = !departures.empty();
    if (!have_arrival && !have_departure) return;
    const bool arrival_first = have_arrival && (!have_departure || arrivals[next] <= departures.top());
    if (arrival_first) {
      const double t = arrivals[next++];
      if (t > until) return;
      visit(t, EventKind::Arrival);
      if (departures.size() < c) {
        departures.push(t + exponential(rng, mu));
      } else {
        ++waiting;
      }
    } else {
      const double t = departures.top();
      if (t > until) return;
      departures.pop();
      visit(t, EventKind::Departure);
      if (waiting > 0) {
        --waiting;
        departures.push(t + exponential(rng, mu));
      }
    }
  }
}

struct SimulationResult {
  std::vector<EmpiricalDistribution> distributions;
  std::vector<SamplePath> paths;
};

namespace detail {

inline void check_sample_times(std::span<const double> sample_times) {
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (!(sample_times[i] >= 0.0) || !std::isfinite(sample_times[i])) {
      throw DomainError("simulate: sample times must be finite and nonnegative");
    }
    if (i > 0 && sample_times[i] < sample_times[i - 1]) throw DomainError("simulate: sample times must be sorted");
  }
}

template <typename DrawArrivals>
SimulationResult simulate(const ModelSpec& spec, std::uint64_t reps, std::uint64_t seed,
                          std::span<const double> sample_times, std::size_t store_paths, DrawArrivals&& draw) {
  spec.validate();
  if (reps < 1) throw DomainError("simulate: need at least one replication");
  check_sample_times(sample_times);

  SimulationResult out;
  out.distributions.resize(sample_times.size());
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    out.distributions[i].t = sample_times[i];
    out.distributions[i].seed = seed;
  }
  const double until = store_paths > 0
                           ? std::max(spec.t_max.value_or(spec.horizon()), sample_times.empty() ? 0.0 : sample_times.back())
                           : (sample_times.empty() ? 0.0 : sample_times.back());

  for (std::uint64_t r = 0; r < reps; ++r) {
    Rng rng = substream(seed, r);
    const std::vector<double> arrivals = draw(rng);
    const bool keep = r < store_paths;
    SamplePath path;
    std::size_t level = 0;
    std::size_t q = 0;
    run_service(arrivals, spec.c, spec.mu, until, rng, [&](double t, EventKind kind) {
      while (q < sample_times.size() && sample_times[q] < t) out.distributions[q++].record(level);
      level = kind == EventKind::Arrival ? level + 1 : level - 1;
      if (keep) {
        path.times.push_back(t);
        path.kinds.push_back(kind);
      }
    });
    while (q < sample_times.size()) out.distributions[q++].record(level);
    if (keep) out.paths.push_back(std::move(path));
  }
  return out;
}

}  // namespace detail

// CTBP/M/c: exactly K arrivals per replication.
inline SimulationResult simulate_ctbp(const ModelSpec& spec, std::uint64_t reps, std::uint64_t seed,
                                      std::span<const double> sample_times, std::size_t store_paths = 0) {
  return detail::simulate(spec, reps, seed, sample_times, store_paths,
                          [&](Rng& rng) { return sample_arrival_times(spec.pdf, spec.K, rng); });
}

// M_t/M/c with lambda(t) = K f(t).
inline SimulationResult simulate_nhpp(const ModelSpec& spec, std::uint64_t reps, std::uint64_t seed,
                                      std::span<const double> sample_times, std::size_t store_paths = 0) {
  const double scale = static_cast<double>(spec.K);
  return detail::simulate(spec, reps, seed, sample_times, store_paths,
                          [&](Rng& rng) { return sample_nhpp_arrival_times(spec.pdf, scale, rng); });
}

inline std::size_t count_up_to(std::span<const double> sorted_times, double t) {
  return static_cast<std::size_t>(std::upper_bound(sorted_times.begin(), sorted_times.end(), t) - sorted_times.begin());
}

}  // namespace ctbpq
