#pragma once

// Joint law of (arrivals, departures) in the auxiliary chain and one step of
// its uniformized transition matrix P = I + Q / theta, applied matrix-free.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ctbpq/compensated_sum.hpp"
#include "ctbpq/errors.hpp"

namespace ctbpq {

// Probabilities over {(k, j) : 0 <= j <= k <= K}, stored row by row in
// lexicographic order. Mass that has left through the K+1 arrival boundary is
// not represented, so the total may fall below one.
class TriangularVector {
 public:
  TriangularVector() = default;
  explicit TriangularVector(std::size_t K) : K_(K), entries_(size_for(K), 0.0) {}

  static std::size_t size_for(std::size_t K) { return (K + 1) * (K + 2) / 2; }
  static std::size_t row_offset(std::size_t k) { return k * (k + 1) / 2; }
  static std::size_t index(std::size_t k, std::size_t j) { return row_offset(k) + j; }

  static TriangularVector point_mass(std::size_t K, std::size_t k = 0, std::size_t j = 0) {
    TriangularVector v(K);
    v.at(k, j) = 1.0;
    return v;
  }

  std::size_t K() const { return K_; }
  std::size_t size() const { return entries_.size(); }

  double& at(std::size_t k, std::size_t j) {
    check(k, j);
    return entries_[index(k, j)];
  }
  double at(std::size_t k, std::size_t j) const {
    check(k, j);
    return entries_[index(k, j)];
  }

  std::span<double> entries() { return entries_; }
  std::span<const double> entries() const { return entries_; }
  std::span<const double> row(std::size_t k) const { return {entries_.data() + row_offset(k), k + 1}; }

  // Pr[A = k], summed over departures.
  double arrival_marginal(std::size_t k) const {
    CompensatedSum<double> s;
    for (const double x : row(k)) s += x;
    return s.value();
  }

  double total() const {
    CompensatedSum<double> s;
    for (const double x : entries_) s += x;
    return s.value();
  }

  // Largest k with a nonzero entry in row k; 0 for an all-zero vector.
  std::size_t highest_occupied_row() const {
    for (std::size_t k = K_ + 1; k-- > 0;) {
      for (const double x : row(k)) {
        if (x != 0.0) return k;
      }
    }
    return 0;
  }

 private:
  void check(std::size_t k, std::size_t j) const {
    if (k > K_ || j > k) throw std::out_of_range("triangular index outside 0 <= j <= k <= K");
  }

  std::size_t K_ = 0;
  std::vector<double> entries_;
};

// Rates of the CTBP/M/c auxiliary chain on one interval.
struct IntervalOperator {
  double lambda = 0.0;
  double mu = 0.0;
  std::size_t c = 1;
  double theta = 0.0;
  bool post_horizon = false;

  static IntervalOperator arrivals(double lambda, double mu, std::size_t c) {
    return {lambda, mu, c, lambda + static_cast<double>(c) * mu, false};
  }

  // After T: service only, so states with all customers served absorb.
  static IntervalOperator drain(double mu, std::size_t c) { return {0.0, mu, c, static_cast<double>(c) * mu, true}; }

  void validate() const {
    if (!(lambda >= 0.0) || !(mu >= 0.0) || c < 1) throw DomainError("interval operator: invalid rates");
    if (post_horizon && lambda != 0.0) throw DomainError("interval operator: drain segment has arrivals");
    if (!(theta > 0.0) || theta < lambda + static_cast<double>(c) * mu * (1.0 - 1e-15)) {
      throw DomainError("interval operator: theta below the largest exit rate");
    }
  }
};

// Transition probabilities of P rounded to multiples of 2^-53, so that the
// three outflow probabilities of every state sum to exactly one and no mass
// drifts over thousands of steps.
inline double to_probability_grid(double x) { return std::ldexp(std::nearbyint(std::ldexp(x, 53)), -53); }

// Arrival probability per uniformized jump as the engine applies it.
inline double grid_arrival_probability(const IntervalOperator& op) {
  return to_probability_grid(op.lambda / op.theta);
}

// Arrival rate actually simulated by the engine: theta times the grid-rounded
// arrival probability. Equals lambda to within 2^-54 theta.
inline double effective_arrival_rate(const IntervalOperator& op) { return grid_arrival_probability(op) * op.theta; }

// Coefficients of P for one operator, laid out so that row k of the output is
// a forward sweep over j. The d and s tables are stored reversed: entry x
// holds the coefficient for queue length K - x (d) and K + 1 - x (s).
class StepKernel {
 public:
  StepKernel(const IntervalOperator& op, std::size_t K) : K_(K), stay_rev_(K + 2, 0.0), serve_rev_(K + 2, 0.0) {
    op.validate();
    arrive_ = grid_arrival_probability(op);
    for (std::size_t q = 0; q <= K + 1; ++q) {
      const double busy = static_cast<double>(std::min(q, op.c)) * op.mu;
      double serve = to_probability_grid(busy / op.theta);
      double stay = 1.0 - arrive_ - serve;  // exact on the grid
      if (stay < 0.0) {
        serve += stay;
        stay = 0.0;
      }
      if (q <= K) stay_rev_[K - q] = stay;
      if (q >= 1) serve_rev_[K + 1 - q] = serve;
    }
  }

  double arrival_probability() const { return arrive_; }

  // out = in * P on rows 0..min(top + 1, K). Rows of `in` above `top` must be
  // zero, and rows of `out` above the returned row are left untouched.
  std::size_t apply(const double* __restrict in, double* __restrict out, std::size_t top) const {
    const std::size_t hi = arrive_ > 0.0 ? std::min(top + 1, K_) : std::min(top, K_);
    const double a = arrive_;
    const double* __restrict dr = stay_rev_.data();
    const double* __restrict sr = serve_rev_.data();
    out[0] = dr[K_] * in[0];
    for (std::size_t i = 1; i <= hi; ++i) {
      const std::size_t b = TriangularVector::row_offset(i);
      const std::size_t bp = TriangularVector::row_offset(i - 1);
      const std::size_t off = K_ - i;
      const double* __restrict cur = in + b;
      const double* __restrict prev = in + bp;
      double* __restrict dst = out + b;
      const double* __restrict d = dr + off;
      const double* __restrict s = sr + off;
      dst[0] = d[0] * cur[0] + a * prev[0];
      for (std::size_t j = 1; j < i; ++j) {
        dst[j] = d[j] * cur[j] + s[j] * cur[j - 1] + a * prev[j];
      }
      dst[i] = d[i] * cur[i] + s[i] * cur[i - 1];
    }
    return hi;
  }

 private:
  std::size_t K_;
  double arrive_ = 0.0;
  std::vector<double> stay_rev_;
  std::vector<double> serve_rev_;
};

// One multiplication by P. Arrivals out of row K leave the vector.
inline TriangularVector uniformized_step(const TriangularVector& p, const IntervalOperator& op) {
  StepKernel kernel(op, p.K());
  TriangularVector out(p.K());
  kernel.apply(p.entries().data(), out.entries().data(), p.K());
  return out;
}

}  // namespace ctbpq
