#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aoi/channel.hpp"
#include "aoi/distributions.hpp"
#include "aoi/errors.hpp"

namespace aoi {

inline double traffic_intensity(double mean_service, double mean_interarrival) {
  if (!(mean_service > 0.0) || !(mean_interarrival > 0.0)) {
    throw InvalidParameter("traffic_intensity: means must be positive");
  }
  return mean_service / mean_interarrival;
}

/// Stationary parameters of the early-arrival GI/Geom/1 queue.
///
/// alpha: queue length seen by arrivals is (1-alpha) alpha^n, n >= 0.
/// lambda = (1-mu) + mu*alpha: system time is (1-lambda) lambda^(n-1), n >= 1.
/// mu = 1 is the degenerate corner alpha = lambda = 0.
struct QueueSolution {
  double alpha = 0.0;
  double lambda = 0.0;
  double rho = 0.0;
  double mu = 1.0;
};

/// Measurement-mode solution: alpha recovered from an estimated lambda.
inline QueueSolution queue_solution_from_lambda(double lambda, double mu, double mean_interarrival) {
  if (!(mu > 0.0 && mu <= 1.0)) throw InvalidParameter("queue solution: mu must lie in (0,1]");
  QueueSolution s;
  s.mu = mu;
  s.lambda = lambda;
  s.alpha = (lambda - (1.0 - mu)) / mu;
  s.rho = traffic_intensity(1.0 / mu, mean_interarrival);
  return s;
}

/// Solves alpha = G_X(1 - mu + mu*alpha) for the root in (0,1).
///
/// f(z) = G_X(1-mu+mu z) - z is convex with f(0) > 0 and a second root at
/// z = 1 where its slope is 1/rho - 1 > 0, so f < 0 just left of 1. The right
/// end of the bracket is found by halving delta in 1 - delta until f turns
/// negative; plain bisection follows.
inline QueueSolution solve_alpha(const DiscretePmf& dist, double mu) {
  if (!(mu > 0.0 && mu <= 1.0)) throw InvalidParameter("solve_alpha: mu must lie in (0,1]");
  const double mean_x = dist.mean();
  QueueSolution s;
  s.mu = mu;
  s.rho = traffic_intensity(1.0 / mu, mean_x);
  if (!(s.rho < 1.0)) {
    throw InstabilityError("solve_alpha: traffic intensity " + std::to_string(s.rho) + " >= 1");
  }
  if (mu == 1.0) return s;  // X >= 1 makes G_X(0) = 0 the only root

  const double mu_bar = 1.0 - mu;
  auto f = [&](double z) { return dist.pgf(mu_bar + mu * z) - z; };

  double delta = 0.5;
  while (!(f(1.0 - delta) < 0.0)) {
    delta *= 0.5;
    if (delta < 1e-15) throw NumericalError("solve_alpha: no sign change found below z = 1");
  }
  double lo = 0.0;
  double hi = 1.0 - delta;
  // bisect down to adjacent doubles
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  s.alpha = 0.5 * (lo + hi);
  if (std::abs(f(s.alpha)) > 1e-12) throw NumericalError("solve_alpha: bisection did not converge");
  s.lambda = mu_bar + mu * s.alpha;
  return s;
}

/// Pr{T = n} = (1-lambda) lambda^(n-1).
inline double system_time_pmf(double lambda, std::int64_t n) {
  if (n < 1) throw InvalidParameter("system_time_pmf: n must be >= 1");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw InvalidParameter("system_time_pmf: lambda must lie in [0,1)");
  return (1.0 - lambda) * std::pow(lambda, static_cast<double>(n - 1));
}

/// E(S) + E(X^2)/(2E(X)) + lambda*B/(E(X)(1-lambda)) with B standing in for
/// G'_X(lambda). Exact when B is exact; a bound when B is.
inline double aoi_from_derivative(double mean_service, double mean_x, double second_moment_x,
                                  double lambda, double derivative) {
  const double base = mean_service + second_moment_x / (2.0 * mean_x);
  if (lambda == 0.0) return base;
  return base + lambda * derivative / (mean_x * (1.0 - lambda));
}

/// Stationary average AoI using the exact PGF derivative of the law.
inline double exact_average_aoi(const DiscretePmf& dist, double mu) {
  const QueueSolution s = solve_alpha(dist, mu);
  const double derivative = s.lambda > 0.0 ? dist.pgf_derivative(s.lambda) : 0.0;
  return aoi_from_derivative(mean_service(mu), dist.moment(1), dist.moment(2), s.lambda, derivative);
}

struct LambdaEstimate {
  double lambda = 0.0;
  bool clamped = false;
};

/// lambda = (1-mu) / (1 - Pr{Y=1}) with Pr{Y=1} the fraction of unit
/// inter-departure times; clamped into [1-mu, 1-1e-12].
inline LambdaEstimate lambda_from_departure_counts(std::uint64_t unit_count, std::uint64_t total,
                                                   double mu) {
  if (total == 0) throw InvalidParameter("lambda_from_departures: no departures");
  if (!(mu > 0.0 && mu <= 1.0)) throw InvalidParameter("lambda_from_departures: mu must lie in (0,1]");
  if (unit_count >= total) {
    throw DegenerateEstimate("lambda_from_departures: every inter-departure time equals 1");
  }
  const double frac = static_cast<double>(unit_count) / static_cast<double>(total);
  LambdaEstimate est;
  est.lambda = (1.0 - mu) / (1.0 - frac);
  const double lo = 1.0 - mu;
  const double hi = 1.0 - 1e-12;
  if (est.lambda < lo || est.lambda > hi) {
    est.lambda = std::clamp(est.lambda, lo, hi);
    est.clamped = true;
  }
  return est;
}

inline LambdaEstimate lambda_from_departures(std::span<const std::int64_t> inter_departures, double mu) {
  if (inter_departures.empty()) throw InvalidParameter("lambda_from_departures: no departures");
  const auto ones = static_cast<std::uint64_t>(
      std::count(inter_departures.begin(), inter_departures.end(), std::int64_t{1}));
  return lambda_from_departure_counts(ones, inter_departures.size(), mu);
}

/// Truncations of G'_X(z) = (1/z) sum_n ln(z)^(n-1) E(X^n) / (n-1)!.
struct PartialSums {
  std::vector<double> values;  // values[k-1] = estimate using orders 1..k
  bool diverging = false;      // |term_K| >= |term_(K-1)| at the last order

  double at(int k) const { return values.at(static_cast<std::size_t>(k - 1)); }
};

inline PartialSums pgf_derivative_partial_sums(const MomentVector& moments, int max_order, double z) {
  if (max_order < 1) throw InvalidParameter("partial sum: order must be >= 1");
  if (max_order > moments.max_order()) {
    throw InvalidParameter("partial sum: order " + std::to_string(max_order) +
                           " exceeds the available moments (" + std::to_string(moments.max_order()) + ")");
  }
  if (!(z > 0.0 && z <= 1.0)) throw DomainError("partial sum: z must lie in (0,1]");
  const double log_z = std::log(z);
  PartialSums out;
  out.values.reserve(static_cast<std::size_t>(max_order));
  // term_n = ln(z)^(n-1) E(X^n) / (n-1)!, advanced multiplicatively.
  double term = moments.at(1);
  double prev_term = 0.0;
  double acc = term;
  out.values.push_back(acc / z);
  for (int n = 1; n < max_order; ++n) {
    prev_term = term;
    term = term * log_z * moments.at(n + 1) / (n * moments.at(n));
    acc += term;
    out.values.push_back(acc / z);
  }
  if (max_order >= 2) {
    out.diverging = term != 0.0 && std::abs(term) >= std::abs(prev_term);
  }
  return out;
}

/// Single estimate \hat G'^K(z) plus its divergence flag.
struct PartialSum {
  double value = 0.0;
  bool diverging = false;
};

inline PartialSum pgf_derivative_partial_sum(const MomentVector& moments, int order, double z) {
  const PartialSums all = pgf_derivative_partial_sums(moments, order, z);
  return {all.values.back(), all.diverging};
}

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Chord/tangent bounds on G'_X at z = lambda where G_X(lambda) = alpha:
/// alpha/lambda <= G'_X(lambda) <= (1-alpha)/(1-lambda) = 1/mu.
inline Interval jensen_bounds(double alpha, double lambda, double mu) {
  if (!(alpha > 0.0 && alpha < lambda && lambda < 1.0)) {
    throw DomainError("jensen_bounds: need 0 < alpha < lambda < 1");
  }
  if (!(mu > 0.0 && mu < 1.0)) throw DomainError("jensen_bounds: mu must lie in (0,1)");
  const double upper = (1.0 - alpha) / (1.0 - lambda);
  const double es = mean_service(mu);
  if (std::abs(upper - es) > 1e-9 * es) {
    throw NumericalError("jensen_bounds: (1-alpha)/(1-lambda) does not match 1/mu; lambda != 1-mu+mu*alpha?");
  }
  return {alpha / lambda, es};
}

struct BoundSource {
  enum class Kind { jensen, partial_sum };
  Kind kind = Kind::jensen;
  int order = 0;

  static BoundSource jensen() { return {}; }
  static BoundSource partial_sum(int k) { return {Kind::partial_sum, k}; }

  std::string str() const {
    return kind == Kind::jensen ? std::string("jensen") : "partial_sum(" + std::to_string(order) + ")";
  }
  bool operator==(const BoundSource&) const = default;
};

struct DerivativeBounds {
  double lower = 0.0;
  double upper = 0.0;
  BoundSource lower_source;
  BoundSource upper_source;
  PartialSums partial_sums;
};

/// upper = min(E(S), odd partial sums up to K); lower = max(alpha/lambda,
/// even partial sums up to K). A partial sum only replaces the running bound
/// when strictly tighter.
inline DerivativeBounds refined_derivative_bounds(const MomentVector& moments, double alpha,
                                                  double lambda, double mu, int max_order) {
  if (max_order < 2) throw InvalidParameter("refined bounds: K must be >= 2");
  if (max_order > moments.max_order()) {
    throw InvalidParameter("refined bounds: K exceeds the available moments");
  }
  const Interval jensen = jensen_bounds(alpha, lambda, mu);
  DerivativeBounds out;
  out.lower = jensen.lower;
  out.upper = jensen.upper;
  out.partial_sums = pgf_derivative_partial_sums(moments, max_order, lambda);
  for (int k = 1; k <= max_order; ++k) {
    const double v = out.partial_sums.at(k);
    if (k % 2 == 1) {
      if (v < out.upper) {
        out.upper = v;
        out.upper_source = BoundSource::partial_sum(k);
      }
    } else if (v > out.lower) {
      out.lower = v;
      out.lower_source = BoundSource::partial_sum(k);
    }
  }
  return out;
}

/// Lower/upper bounds on the average AoI from K raw moments of X.
struct AoIBounds {
  int order_used = 0;
  double lower = 0.0;
  double upper = 0.0;
  BoundSource lower_source;
  BoundSource upper_source;
  std::vector<double> partial_sums;  // \hat G'^k(lambda), k = 1..K
  bool diverging = false;
  double derivative_lower = 0.0;
  double derivative_upper = 0.0;
};

inline AoIBounds aoi_bounds(const MomentVector& moments, double mu, double lambda, double alpha,
                            int max_order) {
  if (max_order < 2) throw InvalidParameter("aoi_bounds: K must be >= 2");
  if (max_order > moments.max_order()) throw InvalidParameter("aoi_bounds: K exceeds the available moments");
  if (!(mu > 0.0 && mu <= 1.0)) throw InvalidParameter("aoi_bounds: mu must lie in (0,1]");
  const double mean_x = moments.at(1);
  if (!(mu * mean_x > 1.0)) {
    throw InstabilityError("aoi_bounds: traffic intensity " + std::to_string(1.0 / (mu * mean_x)) + " >= 1");
  }
  const double es = mean_service(mu);
  AoIBounds out;
  out.order_used = max_order;
  if (lambda == 0.0) {
    // mu = 1: no queueing term at all.
    out.lower = out.upper = aoi_from_derivative(es, mean_x, moments.at(2), 0.0, 0.0);
    out.derivative_lower = out.derivative_upper = 0.0;
    return out;
  }
  const DerivativeBounds db = refined_derivative_bounds(moments, alpha, lambda, mu, max_order);
  out.lower = aoi_from_derivative(es, mean_x, moments.at(2), lambda, db.lower);
  out.upper = aoi_from_derivative(es, mean_x, moments.at(2), lambda, db.upper);
  out.lower_source = db.lower_source;
  out.upper_source = db.upper_source;
  out.partial_sums = db.partial_sums.values;
  out.diverging = db.partial_sums.diverging;
  out.derivative_lower = db.lower;
  out.derivative_upper = db.upper;
  return out;
}

inline AoIBounds aoi_bounds(const MomentVector& moments, const QueueSolution& solution, int max_order) {
  return aoi_bounds(moments, solution.mu, solution.lambda, solution.alpha, max_order);
}

}  // namespace aoi
