#pragma once

// Plan, propagate and mix in one call: the queue-length pmf of the
// K-customer model at each query time.

#include <functional>
#include <span>
#include <vector>

#include "ctbpq/distribution.hpp"
#include "ctbpq/engine.hpp"
#include "ctbpq/errors.hpp"
#include "ctbpq/piecewise_pdf.hpp"
#include "ctbpq/truncation.hpp"

namespace ctbpq {

// Query times beyond T need post_horizon and spec.t_max.
inline void queue_length_distributions(const ModelSpec& spec, std::span<const double> query_times, bool post_horizon,
                                       const std::function<void(const QueueLengthDistribution&)>& sink) {
  spec.validate();
  check_alpha_scale(spec);
  if (!post_horizon) {
    for (const double t : query_times) {
      if (t > spec.horizon()) throw ConfigError("query time beyond T requires the post-horizon segment");
    }
  }
  const TruncationPlan plan = build_truncation_plan(spec, post_horizon);
  run_horizon(spec, plan, query_times, [&](double t, const TriangularVector& p) { sink(mix_to_queue_length(p, t, spec)); });
}

inline std::vector<QueueLengthDistribution> queue_length_distributions(const ModelSpec& spec, std::span<const double> query_times,
                                                                       bool post_horizon = false) {
  std::vector<QueueLengthDistribution> out;
  queue_length_distributions(spec, query_times, post_horizon, [&](const QueueLengthDistribution& d) { out.push_back(d); });
  return out;
}

}  // namespace ctbpq
