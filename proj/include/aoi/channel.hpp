#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "aoi/errors.hpp"
#include "aoi/random.hpp"

namespace aoi {

/// Per-block decoding success probability on a Rayleigh block-fading link:
/// the instantaneous SNR is exponential with the given mean, so
/// Pr{snr > threshold} = exp(-threshold / mean_snr).
inline double success_probability(double mean_snr, double threshold) {
  if (!(mean_snr > 0.0) || !(threshold > 0.0)) {
    throw InvalidParameter("success_probability: mean SNR and threshold must be positive");
  }
  return std::exp(-threshold / mean_snr);
}

/// Pr{S = n} = (1-mu)^(n-1) mu.
inline double service_pmf(double mu, std::int64_t n) {
  if (n < 1) throw InvalidParameter("service_pmf: n must be >= 1");
  if (!(mu > 0.0 && mu <= 1.0)) throw InvalidParameter("service_pmf: mu must lie in (0,1]");
  return std::pow(1.0 - mu, static_cast<double>(n - 1)) * mu;
}

inline double mean_service(double mu) {
  if (!(mu > 0.0 && mu <= 1.0)) throw InvalidParameter("mean_service: mu must lie in (0,1]");
  return 1.0 / mu;
}

// One transmission attempt.
inline bool bernoulli_attempt(double mu, Rng& rng) { return uniform01(rng) < mu; }

/// Geometric service draw by inversion. The simulator does not use this; it
/// flips one coin per block instead.
inline std::int64_t sample_service(double mu, Rng& rng) {
  if (!(mu > 0.0 && mu <= 1.0)) throw InvalidParameter("sample_service: mu must lie in (0,1]");
  if (mu == 1.0) return 1;
  const double u = uniform_open_zero(rng);
  return 1 + static_cast<std::int64_t>(std::floor(std::log(u) / std::log1p(-mu)));
}

/// Channel reduced to its success probability mu.
///
/// Built from (mean_snr, threshold) mu is strictly inside (0,1). Direct
/// construction additionally admits mu = 1 (deterministic one-block service).
/// Packet length and block duration are carried as metadata only; no
/// formula depends on them.
class ChannelModel {
 public:
  static ChannelModel from_snr(double mean_snr, double threshold) {
    ChannelModel c;
    c.mu_ = success_probability(mean_snr, threshold);
    if (!(c.mu_ > 0.0 && c.mu_ < 1.0)) {
      throw InvalidParameter("channel: SNR parameters give a degenerate success probability");
    }
    c.mean_snr_ = mean_snr;
    c.threshold_ = threshold;
    return c;
  }

  static ChannelModel from_mu(double mu) {
    if (!(mu > 0.0 && mu <= 1.0)) throw InvalidParameter("channel: mu must lie in (0,1]");
    ChannelModel c;
    c.mu_ = mu;
    return c;
  }

  double mu() const { return mu_; }
  double mean_service() const { return aoi::mean_service(mu_); }
  std::optional<double> mean_snr() const { return mean_snr_; }
  std::optional<double> threshold() const { return threshold_; }

  std::optional<std::int64_t> packet_bits;
  std::optional<double> block_seconds;

 private:
  ChannelModel() = default;

  double mu_ = 1.0;
  std::optional<double> mean_snr_;
  std::optional<double> threshold_;
};

}  // namespace aoi
