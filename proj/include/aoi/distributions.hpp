#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aoi/errors.hpp"
#include "aoi/random.hpp"

namespace aoi {

enum class DistKind { degenerate, two_point, geometric, general };

inline std::string_view to_string(DistKind kind) {
  switch (kind) {
    case DistKind::degenerate: return "degenerate";
    case DistKind::two_point: return "two_point";
    case DistKind::geometric: return "geometric";
    case DistKind::general: return "general";
  }
  return "general";
}

// Raw moments above this are reported as overflow instead of returned.
inline constexpr double kMomentLimit = 1e300;

/// Probability mass function of an inter-arrival time on {1, 2, ...}.
///
/// Finite-support laws store (support, probs). The geometric kind keeps only
/// its success parameter p and uses closed forms for everything.
/// Immutable after construction.
class DiscretePmf {
 public:
  static DiscretePmf degenerate(std::int64_t d) {
    if (d < 1) throw InvalidParameter("degenerate: support point must be >= 1");
    return DiscretePmf(DistKind::degenerate, {d}, {1.0});
  }

  static DiscretePmf two_point(std::int64_t a, std::int64_t b, double q) {
    if (a < 1 || a >= b) throw InvalidParameter("two_point: need 1 <= a < b");
    if (!(q > 0.0 && q < 1.0)) throw InvalidParameter("two_point: q must lie in (0,1)");
    return DiscretePmf(DistKind::two_point, {a, b}, {q, 1.0 - q});
  }

  static DiscretePmf geometric(double p) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("geometric: p must lie in (0,1)");
    DiscretePmf d;
    d.kind_ = DistKind::geometric;
    d.p_ = p;
    return d;
  }

  // Arbitrary finite law. Support strictly increasing, all points >= 1,
  // probabilities positive and summing to 1 within 1e-12.
  static DiscretePmf general(std::vector<std::int64_t> support, std::vector<double> probs) {
    DiscretePmf d(DistKind::general, std::move(support), std::move(probs));
    if (d.support_.size() == 1) d.kind_ = DistKind::degenerate;
    return d;
  }

  DistKind kind() const { return kind_; }
  bool finite_support() const { return kind_ != DistKind::geometric; }
  std::span<const std::int64_t> support() const { return support_; }
  std::span<const double> probs() const { return probs_; }
  double geometric_p() const { return p_; }

  std::int64_t min_support() const { return finite_support() ? support_.front() : 1; }

  double pmf(std::int64_t m) const {
    if (kind_ == DistKind::geometric) {
      return m < 1 ? 0.0 : std::pow(1.0 - p_, static_cast<double>(m - 1)) * p_;
    }
    auto it = std::lower_bound(support_.begin(), support_.end(), m);
    if (it == support_.end() || *it != m) return 0.0;
    return probs_[static_cast<std::size_t>(it - support_.begin())];
  }

  /// G_X(z) = sum_m Pr{X=m} z^m for z in (0,1].
  double pgf(double z) const {
    check_pgf_domain(z);
    if (kind_ == DistKind::geometric) return p_ * z / (1.0 - (1.0 - p_) * z);
    double acc = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) {
      acc += probs_[i] * std::pow(z, static_cast<double>(support_[i]));
    }
    return acc;
  }

  /// G'_X(z) = sum_m m Pr{X=m} z^(m-1), evaluated exactly from the law.
  double pgf_derivative(double z) const {
    check_pgf_domain(z);
    if (kind_ == DistKind::geometric) {
      const double den = 1.0 - (1.0 - p_) * z;
      return p_ / (den * den);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) {
      const auto m = static_cast<double>(support_[i]);
      acc += m * probs_[i] * std::pow(z, m - 1.0);
    }
    return acc;
  }

  /// Raw moment E(X^n), n >= 1. Throws OverflowError past kMomentLimit.
  double moment(int n) const {
    if (n < 1) throw InvalidParameter("moment: order must be >= 1");
    const double value = kind_ == DistKind::geometric ? geometric_moment(n) : finite_moment(n);
    if (!std::isfinite(value) || value > kMomentLimit) {
      throw OverflowError("moment: E(X^" + std::to_string(n) + ") exceeds 1e300");
    }
    return value;
  }

  double mean() const { return moment(1); }

  /// One draw. Inverse CDF on finite support; log transform for geometric.
  std::int64_t sample(Rng& rng) const {
    if (kind_ == DistKind::geometric) {
      const double u = uniform_open_zero(rng);
      return 1 + static_cast<std::int64_t>(std::floor(std::log(u) / std::log1p(-p_)));
    }
    const double u = uniform01(rng);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return support_[static_cast<std::size_t>(it - cdf_.begin())];
  }

 private:
  DiscretePmf() = default;

  DiscretePmf(DistKind kind, std::vector<std::int64_t> support, std::vector<double> probs)
      : kind_(kind), support_(std::move(support)), probs_(std::move(probs)) {
    if (support_.empty() || support_.size() != probs_.size()) {
      throw InvalidParameter("pmf: support and probabilities must be non-empty and equal length");
    }
    for (std::size_t i = 0; i < support_.size(); ++i) {
      if (support_[i] < 1) throw InvalidParameter("pmf: support points must be >= 1");
      if (i > 0 && support_[i] <= support_[i - 1]) {
        throw InvalidParameter("pmf: support must be strictly increasing");
      }
      if (!(probs_[i] > 0.0)) throw InvalidParameter("pmf: probabilities must be positive");
    }
    const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12) throw InvalidParameter("pmf: probabilities must sum to 1");
    cdf_.resize(probs_.size());
    std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
  }

  static void check_pgf_domain(double z) {
    if (!(z > 0.0 && z <= 1.0)) throw DomainError("pgf: z must lie in (0,1]");
  }

  double finite_moment(int n) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) {
      acc += probs_[i] * std::pow(static_cast<double>(support_[i]), n);
    }
    return acc;
  }

  // E(X^n) = sum_k S(n,k) E[(X)_k] with the geometric factorial moments
  // E[(X)_k] = k! q^(k-1) / p^k. Every term is positive.
  double geometric_moment(int n) const {
    const double q = 1.0 - p_;
    std::vector<double> stirling(static_cast<std::size_t>(n) + 1, 0.0);
    stirling[0] = 1.0;  // S(0,0)
    for (int row = 1; row <= n; ++row) {
      for (int k = row; k >= 1; --k) {
        stirling[k] = k * stirling[k] + stirling[k - 1];
      }
      stirling[0] = 0.0;
    }
    double factorial_moment = 1.0 / p_;
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) {
      if (k > 1) factorial_moment *= k * q / p_;
      acc += stirling[k] * factorial_moment;
    }
    return acc;
  }

  DistKind kind_ = DistKind::general;
  std::vector<std::int64_t> support_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
  double p_ = 0.0;
};

inline DiscretePmf make_degenerate(std::int64_t d) { return DiscretePmf::degenerate(d); }
inline DiscretePmf make_two_point(std::int64_t a, std::int64_t b, double q) {
  return DiscretePmf::two_point(a, b, q);
}
inline DiscretePmf make_geometric(double p) { return DiscretePmf::geometric(p); }

/// Caps the support at x_max: all mass above x_max is piled onto x_max, so
/// the result stays normalized and every moment is finite.
inline DiscretePmf truncate(const DiscretePmf& dist, std::int64_t x_max) {
  if (x_max < dist.min_support()) {
    throw InvalidParameter("truncate: x_max is below the smallest support point");
  }
  std::vector<std::int64_t> support;
  std::vector<double> probs;
  if (dist.kind() == DistKind::geometric) {
    const double p = dist.geometric_p();
    const double q = 1.0 - p;
    double w = p;
    for (std::int64_t m = 1; m < x_max; ++m, w *= q) {
      support.push_back(m);
      probs.push_back(w);
    }
    support.push_back(x_max);
    probs.push_back(std::pow(q, static_cast<double>(x_max - 1)));  // Pr{X >= x_max}
  } else {
    if (dist.support().back() <= x_max) return dist;
    double tail = 0.0;
    for (std::size_t i = 0; i < dist.support().size(); ++i) {
      if (dist.support()[i] < x_max) {
        support.push_back(dist.support()[i]);
        probs.push_back(dist.probs()[i]);
      } else {
        tail += dist.probs()[i];
      }
    }
    support.push_back(x_max);
    probs.push_back(tail);
  }
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& w : probs) w /= total;
  // Guard against underflowed geometric weights far into the tail.
  std::vector<std::int64_t> kept_support;
  std::vector<double> kept_probs;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) {
      kept_support.push_back(support[i]);
      kept_probs.push_back(probs[i]);
    }
  }
  return DiscretePmf::general(std::move(kept_support), std::move(kept_probs));
}

enum class MomentOrigin { exact, empirical };

/// Raw moments E(X^1) .. E(X^K) of an inter-arrival law.
struct MomentVector {
  std::vector<double> values;  // values[n-1] = E(X^n)
  MomentOrigin origin = MomentOrigin::exact;
  std::uint64_t sample_count = 0;

  int max_order() const { return static_cast<int>(values.size()); }

  // 1-based: at(1) = E(X).
  double at(int n) const {
    if (n < 1 || n > max_order()) {
      throw InvalidParameter("moments: order " + std::to_string(n) + " not available");
    }
    return values[static_cast<std::size_t>(n - 1)];
  }

  double mean() const { return at(1); }

  // E(X) >= 1, E(X^2) >= E(X)^2 and the Lyapunov chain E(X^n)^(1/n)
  // non-decreasing, each up to a relative slack of rel_tol.
  bool consistent(double rel_tol = 1e-12) const {
    if (values.empty() || values[0] < 1.0 - rel_tol) return false;
    if (values.size() >= 2 && values[1] < values[0] * values[0] * (1.0 - rel_tol)) return false;
    double prev = values[0];
    for (int n = 2; n <= max_order(); ++n) {
      const double root = std::pow(at(n), 1.0 / n);
      if (root < prev * (1.0 - rel_tol)) return false;
      prev = root;
    }
    return true;
  }
};

inline MomentVector exact_moments(const DiscretePmf& dist, int max_order) {
  if (max_order < 1) throw InvalidParameter("exact_moments: order must be >= 1");
  MomentVector mv;
  mv.origin = MomentOrigin::exact;
  for (int n = 1; n <= max_order; ++n) mv.values.push_back(dist.moment(n));
  return mv;
}

/// Sample moments: values[n-1] = mean of x^n over the samples.
inline MomentVector empirical_moments(std::span<const std::int64_t> samples, int max_order) {
  if (samples.empty()) throw InvalidParameter("empirical_moments: empty sample");
  if (max_order < 1) throw InvalidParameter("empirical_moments: order must be >= 1");
  for (std::int64_t x : samples) {
    if (x < 1) throw InvalidParameter("empirical_moments: samples must be positive integers");
  }
  std::vector<double> sums(static_cast<std::size_t>(max_order), 0.0);
  for (std::int64_t x : samples) {
    const auto v = static_cast<double>(x);
    double power = 1.0;
    for (auto& s : sums) {
      power *= v;
      s += power;
    }
  }
  MomentVector mv;
  mv.origin = MomentOrigin::empirical;
  mv.sample_count = samples.size();
  for (double s : sums) mv.values.push_back(s / static_cast<double>(samples.size()));
  return mv;
}

inline std::vector<std::int64_t> draw_samples(const DiscretePmf& dist, Rng& rng, std::size_t count) {
  std::vector<std::int64_t> out(count);
  for (auto& x : out) x = dist.sample(rng);
  return out;
}

}  // namespace aoi
