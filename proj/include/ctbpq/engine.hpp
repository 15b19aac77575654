#pragma once

// Uniformized transient solution of the auxiliary chain across the
// piecewise-constant intervals, truncated per the plan.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctbpq/errors.hpp"
#include "ctbpq/piecewise_pdf.hpp"
#include "ctbpq/poisson.hpp"
#include "ctbpq/triangular.hpp"
#include "ctbpq/truncation.hpp"

namespace ctbpq {

struct IntervalSnapshots {
  std::vector<TriangularVector> at_queries;
  TriangularVector endpoint;
};

// Sum_{m=0}^{M} Poi(theta * delta, m) p_start P^m for every query offset delta
// and for delta = dt_total, in a single pass over m.
inline IntervalSnapshots propagate_interval(const TriangularVector& p_start, const IntervalOperator& op,
                                            double dt_total, std::size_t M, std::span<const double> query_offsets) {
  op.validate();
  if (!(dt_total > 0.0)) throw DomainError("propagate_interval: interval length must be positive");
  for (std::size_t q = 0; q < query_offsets.size(); ++q) {
    if (!(query_offsets[q] > 0.0 && query_offsets[q] <= dt_total)) {
      throw DomainError("propagate_interval: query offset outside (0, dt_total]");
    }
    if (q > 0 && query_offsets[q] < query_offsets[q - 1]) throw DomainError("propagate_interval: unsorted offsets");
  }

  const std::size_t K = p_start.K();
  const StepKernel kernel(op, K);

  // The endpoint is accumulated as the last offset; queries landing exactly
  // on it share its accumulator.
  std::vector<double> offsets(query_offsets.begin(), query_offsets.end());
  offsets.push_back(dt_total);
  std::vector<std::size_t> slot(offsets.size());
  std::vector<double> distinct;
  for (std::size_t q = 0; q < offsets.size(); ++q) {
    if (distinct.empty() || offsets[q] != distinct.back()) distinct.push_back(offsets[q]);
    slot[q] = distinct.size() - 1;
  }
  std::vector<std::vector<double>> weights;
  weights.reserve(distinct.size());
  for (const double delta : distinct) weights.push_back(poisson_weights(op.theta * delta, M));

  std::vector<TriangularVector> acc(distinct.size(), TriangularVector(K));
  TriangularVector cur = p_start;
  TriangularVector next(K);
  std::size_t top = p_start.highest_occupied_row();

  for (std::size_t m = 0;; ++m) {
    const std::size_t used = TriangularVector::row_offset(top + 1);
    const double* src = cur.entries().data();
    for (std::size_t q = 0; q < distinct.size(); ++q) {
      const double w = weights[q][m];
      if (w == 0.0) continue;
      double* __restrict dst = acc[q].entries().data();
      for (std::size_t x = 0; x < used; ++x) dst[x] += w * src[x];
    }
    if (m == M) break;
    top = kernel.apply(cur.entries().data(), next.entries().data(), top);
    std::swap(cur, next);
  }

  IntervalSnapshots out;
  out.at_queries.reserve(query_offsets.size());
  for (std::size_t q = 0; q < query_offsets.size(); ++q) out.at_queries.push_back(acc[slot[q]]);
  out.endpoint = std::move(acc.back());
  return out;
}

using SnapshotSink = std::function<void(double t, const TriangularVector& p)>;

// Threads the truncated law from the point mass at (0,0) through the
// intervals and hands the joint law at each query time to `sink`, in order.
// A query at T_n belongs to interval n; queries beyond T need a drain segment
// in the plan.
inline void run_horizon(const ModelSpec& spec, const TruncationPlan& plan, std::span<const double> query_times,
                        const SnapshotSink& sink) {
  spec.validate();
  const std::size_t N = spec.pdf.intervals();
  if (plan.arrival_intervals() != N) throw ConfigError("truncation plan does not match the density");
  const double T = spec.horizon();
  const double limit = plan.post_horizon ? *spec.t_max : T;
  for (std::size_t q = 0; q < query_times.size(); ++q) {
    const double t = query_times[q];
    if (!(t > 0.0)) throw DomainError("run_horizon: query time must be positive");
    if (t > limit) {
      throw DomainError("run_horizon: query time " + std::to_string(t) + " beyond the computed horizon");
    }
    if (q > 0 && t < query_times[q - 1]) throw DomainError("run_horizon: query times must be sorted");
  }
  if (query_times.empty()) return;

  TriangularVector p = TriangularVector::point_mass(spec.K);
  std::size_t q = 0;
  const std::size_t segments = plan.thetas.size();
  for (std::size_t n = 1; n <= segments && q < query_times.size(); ++n) {
    const bool drain = n > N;
    const double start = drain ? T : spec.pdf.breakpoint(n - 1);
    const double end = drain ? *spec.t_max : spec.pdf.breakpoint(n);
    std::vector<double> offsets;
    const std::size_t first = q;
    while (q < query_times.size() && query_times[q] <= end) offsets.push_back(query_times[q++] - start);
    const IntervalOperator op =
        drain ? IntervalOperator::drain(spec.mu, spec.c) : IntervalOperator::arrivals(spec.lambda(n), spec.mu, spec.c);
    if (std::abs(op.theta - plan.thetas[n - 1]) > 1e-12 * op.theta) throw ConfigError("truncation plan built for different rates");
    IntervalSnapshots snaps = propagate_interval(p, op, end - start, plan.trunc_points[n - 1], offsets);
    for (std::size_t i = 0; i < offsets.size(); ++i) sink(query_times[first + i], snaps.at_queries[i]);
    p = std::move(snaps.endpoint);
  }
}

inline std::vector<std::pair<double, TriangularVector>> run_horizon(const ModelSpec& spec, const TruncationPlan& plan,
                                                                    std::span<const double> query_times) {
  std::vector<std::pair<double, TriangularVector>> out;
  run_horizon(spec, plan, query_times, [&](double t, const TriangularVector& p) { out.emplace_back(t, p); });
  return out;
}

}  // namespace ctbpq
