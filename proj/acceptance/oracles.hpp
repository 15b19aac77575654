#pragma once

// Reference computations that share no numerical code with the engine:
// dense matrix exponentials, an adaptive ODE solve, and closed forms.

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/numeric/odeint.hpp>

#include "ctbpq/piecewise_pdf.hpp"

namespace ctbpq::oracle {

inline std::size_t tri_index(std::size_t k, std::size_t j) { return k * (k + 1) / 2 + j; }

// Sub-generator of the auxiliary chain on {(k, j)}; arrivals out of row K
// leave the state space.
inline Eigen::MatrixXd dense_generator(std::size_t K, double lambda, double mu, std::size_t c) {
  const std::size_t S = (K + 1) * (K + 2) / 2;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(S, S);
  for (std::size_t k = 0; k <= K; ++k) {
    for (std::size_t j = 0; j <= k; ++j) {
      const std::size_t from = tri_index(k, j);
      const double serve = static_cast<double>(std::min(k - j, c)) * mu;
      Q(from, from) = -(lambda + serve);
      if (k < K) Q(from, tri_index(k + 1, j)) = lambda;
      if (j < k) Q(from, tri_index(k, j + 1)) = serve;
    }
  }
  return Q;
}

// Joint law of (arrivals, departures) at t for the NHPP with rate alpha f.
inline Eigen::RowVectorXd dense_joint_law(const ModelSpec& spec, double t) {
  const std::size_t S = (spec.K + 1) * (spec.K + 2) / 2;
  Eigen::RowVectorXd p = Eigen::RowVectorXd::Zero(S);
  p(0) = 1.0;
  for (std::size_t n = 1; n <= spec.pdf.intervals() + 1; ++n) {
    const bool post = n > spec.pdf.intervals();
    const double start = post ? spec.horizon() : spec.pdf.breakpoint(n - 1);
    if (!(t > start)) break;
    const double end = post ? t : std::min(t, spec.pdf.breakpoint(n));
    const double lambda = post ? 0.0 : spec.alpha * spec.pdf.level(n);
    const Eigen::MatrixXd Q = dense_generator(spec.K, lambda, spec.mu, spec.c);
    const Eigen::MatrixXd E = (Q * (end - start)).exp();
    p = p * E;
  }
  return p;
}

inline Eigen::RowVectorXd ode_joint_law(const ModelSpec& spec, double t) {
  using State = std::vector<double>;
  namespace odeint = boost::numeric::odeint;
  const std::size_t S = (spec.K + 1) * (spec.K + 2) / 2;
  State p(S, 0.0);
  p[0] = 1.0;
  for (std::size_t n = 1; n <= spec.pdf.intervals() + 1; ++n) {
    const bool post = n > spec.pdf.intervals();
    const double start = post ? spec.horizon() : spec.pdf.breakpoint(n - 1);
    if (!(t > start)) break;
    const double end = post ? t : std::min(t, spec.pdf.breakpoint(n));
    const double lambda = post ? 0.0 : spec.alpha * spec.pdf.level(n);
    const Eigen::MatrixXd Q = dense_generator(spec.K, lambda, spec.mu, spec.c);
    auto rhs = [&](const State& x, State& dx, double) {
      for (std::size_t b = 0; b < S; ++b) {
        double v = 0.0;
        for (std::size_t a = 0; a < S; ++a) v += x[a] * Q(a, b);
        dx[b] = v;
      }
    };
    odeint::integrate_adaptive(odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>()), rhs, p,
                               start, end, 1e-3);
  }
  Eigen::RowVectorXd out(S);
  for (std::size_t i = 0; i < S; ++i) out(i) = p[i];
  return out;
}

// Mixture over k of the joint law with Poisson-ratio weights, all via lgamma.
inline std::vector<double> mix(const ModelSpec& spec, const Eigen::RowVectorXd& joint, double t) {
  const double total = spec.alpha;
  const double tail = t >= spec.horizon() ? 0.0 : spec.alpha * spec.pdf.cdf_segment(t, spec.horizon());
  auto log_poi = [](double a, std::size_t k) {
    if (a == 0.0) return k == 0 ? 0.0 : -INFINITY;
    return -a + static_cast<double>(k) * std::log(a) - std::lgamma(static_cast<double>(k) + 1.0);
  };
  std::vector<double> pi(spec.K + 1, 0.0);
  for (std::size_t k = 0; k <= spec.K; ++k) {
    const double w = std::exp(log_poi(tail, spec.K - k) - log_poi(total, spec.K));
    for (std::size_t j = 0; j <= k; ++j) pi[k - j] += w * joint(tri_index(k, j));
  }
  return pi;
}

// Pr[a given customer is in the system at t] with infinitely many servers:
// integral of f(u) e^{-mu (t-u)} over (0, t].
inline double infinite_server_occupancy(const PiecewisePdf& pdf, double mu, double t) {
  double p = 0.0;
  for (std::size_t n = 1; n <= pdf.intervals(); ++n) {
    const double a = pdf.breakpoint(n - 1);
    if (!(t > a)) break;
    const double b = std::min(t, pdf.breakpoint(n));
    p += pdf.level(n) / mu * (std::exp(-mu * (t - b)) - std::exp(-mu * (t - a)));
  }
  return p;
}

inline std::vector<double> binomial_vector(std::size_t n, double p) {
  std::vector<double> out(n + 1, 0.0);
  for (std::size_t k = 0; k <= n; ++k) {
    const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    if (p == 0.0) {
      out[k] = k == 0 ? 1.0 : 0.0;
    } else if (p == 1.0) {
      out[k] = k == n ? 1.0 : 0.0;
    } else {
      out[k] = std::exp(lc + static_cast<double>(k) * std::log(p) + static_cast<double>(n - k) * std::log1p(-p));
    }
  }
  return out;
}

}  // namespace ctbpq::oracle
