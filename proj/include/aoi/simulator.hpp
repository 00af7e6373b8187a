#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "aoi/analysis.hpp"
#include "aoi/channel.hpp"
#include "aoi/distributions.hpp"
#include "aoi/errors.hpp"
#include "aoi/random.hpp"

namespace aoi {

inline constexpr std::int64_t kHistogramCap = 100000;
inline constexpr int kSimMomentOrders = 7;
inline constexpr int kQueueTraceWindows = 100;

/// Counts of non-negative integers; values above the cap go to one overflow bucket.
class Histogram {
 public:
  explicit Histogram(std::int64_t cap = kHistogramCap) : cap_(cap) {}

  void add(std::int64_t v, std::uint64_t n = 1) {
    total_ += n;
    if (v < 0 || v > cap_) {
      overflow_ += n;
      return;
    }
    const auto idx = static_cast<std::size_t>(v);
    if (idx >= bins_.size()) bins_.resize(idx + 1, 0);
    bins_[idx] += n;
  }

  std::uint64_t count(std::int64_t v) const {
    if (v < 0 || static_cast<std::size_t>(v) >= bins_.size()) return 0;
    return bins_[static_cast<std::size_t>(v)];
  }
  double fraction(std::int64_t v) const {
    return total_ == 0 ? 0.0 : static_cast<double>(count(v)) / static_cast<double>(total_);
  }
  std::uint64_t total() const { return total_; }
  std::uint64_t overflow() const { return overflow_; }
  std::int64_t cap() const { return cap_; }
  // Largest in-range value with a non-zero count, or -1 when empty.
  std::int64_t max_value() const {
    for (std::size_t i = bins_.size(); i-- > 0;) {
      if (bins_[i] != 0) return static_cast<std::int64_t>(i);
    }
    return -1;
  }

 private:
  std::int64_t cap_;
  std::vector<std::uint64_t> bins_;
  std::uint64_t overflow_ = 0;
  std::uint64_t total_ = 0;
};

struct SimConfig {
  DiscretePmf dist = DiscretePmf::degenerate(1);
  double mu = 1.0;
  std::int64_t horizon = 10000;  // blocks
  std::uint64_t seed = 1;
  double warmup_fraction = 0.01;
  bool record_trace = false;

  void validate() const {
    if (horizon < 10000) throw InvalidParameter("simulator: horizon must be >= 1e4 blocks");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 0.5)) {
      throw InvalidParameter("simulator: warm-up fraction must lie in [0, 0.5)");
    }
    if (!(mu > 0.0 && mu <= 1.0)) throw InvalidParameter("simulator: mu must lie in (0,1]");
  }
};

/// Life of one delivered packet. All times are block indices.
struct PacketRecord {
  std::int64_t k = 0;          // arrival sequence number, 1-based
  std::int64_t arrival = 0;    // n_k
  std::int64_t departure = 0;  // n'_k
  std::int64_t x = 0;          // inter-arrival time X_k
  std::int64_t s = 0;          // transmission attempts S_k
  std::int64_t w = 0;          // waiting time W_k
  std::int64_t t = 0;          // system time T_k
  std::int64_t y = 0;          // inter-departure time Y_k
  std::int64_t idle = 0;       // idle blocks I_k before service started
  std::int64_t queue_at_arrival = 0;  // L^-_k, packets already in the system
};

struct SimResult {
  std::int64_t horizon = 0;
  std::uint64_t seed = 0;
  std::string generator = kRngName;
  double mu = 1.0;

  // Measurement window: blocks [window_start, window_end), both ends are
  // departures that leave the system empty.
  std::int64_t warmup_blocks = 0;
  std::int64_t window_start = 0;
  std::int64_t window_end = 0;
  std::int64_t window_blocks = 0;

  double avg_aoi = 0.0;           // per-block area under the age sawtooth
  double avg_aoi_by_area = 0.0;   // same path, sum of Q_k polygons plus end pieces
  double avg_sampled_age = 0.0;   // mean of Delta(n) sampled at block starts
  double aoi_packet_formula = 0.0;  // (mean XT + mean X^2 / 2) / mean X

  std::uint64_t packets_delivered = 0;
  std::uint64_t arrivals = 0;        // arrivals inside the window
  std::uint64_t total_arrivals = 0;  // arrivals over the whole run

  MomentVector moments;  // empirical E(X^n), n = 1..7, window packets
  Histogram inter_departure_hist;
  Histogram system_time_hist;
  Histogram queue_length_hist;
  Histogram service_time_hist;

  std::int64_t idle_time_total = 0;
  std::int64_t busy_blocks = 0;
  double waiting_time_mean = 0.0;
  double lambda_hat = std::nan("");
  bool lambda_hat_clamped = false;

  std::uint64_t identity_violations = 0;  // T != W+S or Y != I+S
  std::uint64_t fcfs_violations = 0;

  std::vector<double> queue_length_window_means;  // 100 equal slices of the horizon
  std::vector<std::string> warnings;
  std::vector<PacketRecord> trace;  // only with record_trace
};

/// (mean XT + mean X^2 / 2) / mean X from paired per-packet samples.
inline double aoi_from_area(std::span<const std::int64_t> x_samples, std::span<const std::int64_t> t_samples) {
  if (x_samples.empty() || x_samples.size() != t_samples.size()) {
    throw InvalidParameter("aoi_from_area: need equally many X and T samples, at least one");
  }
  long double sum_x = 0, sum_xt = 0, sum_x2 = 0;
  for (std::size_t i = 0; i < x_samples.size(); ++i) {
    const long double x = x_samples[i];
    sum_x += x;
    sum_x2 += x * x;
    sum_xt += x * static_cast<long double>(t_samples[i]);
  }
  return static_cast<double>((sum_xt + sum_x2 / 2) / sum_x);
}

namespace detail {

struct QueuedPacket {
  std::int64_t k;
  std::int64_t arrival;
  std::int64_t x;
  std::int64_t queue_at_arrival;
  std::int64_t first_attempt = -1;
  std::int64_t attempts = 0;
};

// Window accumulators; everything exact in integers except the moments.
struct WindowTotals {
  std::int64_t sum_x = 0;
  std::int64_t sum_x2 = 0;
  std::int64_t sum_xt = 0;
  std::int64_t sum_w = 0;
  std::array<long double, kSimMomentOrders> power_sums{};
};

}  // namespace detail

/// Slot-level simulation of the early-arrival FCFS queue.
///
/// Block n: (1) if a packet is queued the head attempts transmission and
/// departs with timestamp n on a Bernoulli(mu) success; (2) the age Delta(n)
/// = n - U(n) is charged for the block, the sawtooth rising from Delta(n) to
/// Delta(n)+1 gives area Delta(n)+1/2; (3) a scheduled arrival joins with
/// timestamp n. A packet arriving in block n first attempts in block n+1.
/// A virtual packet generated and delivered at block 0 sets U(0) = 0.
inline SimResult run_simulation(const SimConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const DiscretePmf& dist = config.dist;
  const double mu = config.mu;
  const std::int64_t horizon = config.horizon;
  const auto warmup = static_cast<std::int64_t>(std::floor(config.warmup_fraction * static_cast<double>(horizon)));

  SimResult r;
  r.horizon = horizon;
  r.seed = config.seed;
  r.mu = mu;
  r.warmup_blocks = warmup;

  std::deque<detail::QueuedPacket> queue;
  std::vector<PacketRecord> pending;  // current busy cycle, committed at the next regeneration

  std::int64_t next_k = 1;
  std::int64_t last_arrival = 0;
  std::int64_t next_arrival = dist.sample(rng);
  std::int64_t last_departure = 0;
  std::int64_t last_departed_k = 0;
  std::int64_t last_departed_arrival = 0;
  std::int64_t latest_generation = 0;  // U(n)
  std::int64_t idle_since_departure = 0;

  // Cumulative per-block counters; doubled area keeps the sum integral.
  std::int64_t area2 = 0;
  std::int64_t busy = 0;
  std::int64_t idle = 0;

  bool window_open = false;
  std::int64_t area2_start = 0, busy_start = 0, idle_start = 0;
  std::int64_t area2_end = 0, busy_end = 0, idle_end = 0;
  std::int64_t t_anchor = 0, t_last = 0;
  std::int64_t last_departed_t = 0;
  detail::WindowTotals totals;

  std::vector<long double> queue_window_sum(kQueueTraceWindows, 0.0L);
  std::vector<std::int64_t> queue_window_len(kQueueTraceWindows, 0);

  auto commit_cycle = [&]() {
    for (const PacketRecord& p : pending) {
      ++r.packets_delivered;
      ++r.arrivals;
      r.inter_departure_hist.add(p.y);
      r.system_time_hist.add(p.t);
      r.queue_length_hist.add(p.queue_at_arrival);
      r.service_time_hist.add(p.s);
      totals.sum_x += p.x;
      totals.sum_x2 += p.x * p.x;
      totals.sum_xt += p.x * p.t;
      totals.sum_w += p.w;
      long double power = 1.0L;
      for (auto& s : totals.power_sums) {
        power *= static_cast<long double>(p.x);
        s += power;
      }
      if (config.record_trace) r.trace.push_back(p);
    }
    pending.clear();
  };

  auto on_regeneration = [&](std::int64_t block) {
    if (window_open) {
      commit_cycle();
      area2_end = area2;
      busy_end = busy;
      idle_end = idle;
      r.window_end = block;
      t_last = last_departed_t;
    } else if (block >= warmup) {
      window_open = true;
      pending.clear();
      r.window_start = r.window_end = block;
      area2_start = area2_end = area2;
      busy_start = busy_end = busy;
      idle_start = idle_end = idle;
      t_anchor = t_last = last_departed_t;
    } else {
      pending.clear();
    }
  };

  on_regeneration(0);

  for (std::int64_t n = 0; n < horizon; ++n) {
    // (1) service attempt at the start of the block
    bool busy_block = false;
    if (!queue.empty()) {
      detail::QueuedPacket& head = queue.front();
      if (head.first_attempt < 0) head.first_attempt = n;
      ++head.attempts;
      busy_block = true;
      if (bernoulli_attempt(mu, rng)) {
        PacketRecord rec;
        rec.k = head.k;
        rec.arrival = head.arrival;
        rec.departure = n;
        rec.x = head.x;
        rec.s = head.attempts;
        rec.w = head.first_attempt - head.arrival - 1;
        rec.t = n - head.arrival;
        rec.y = n - last_departure;
        rec.idle = idle_since_departure;
        rec.queue_at_arrival = head.queue_at_arrival;
        if (rec.t != rec.w + rec.s || rec.y != rec.idle + rec.s) ++r.identity_violations;
        if (n <= last_departure || head.arrival < last_departed_arrival || head.k != last_departed_k + 1) {
          ++r.fcfs_violations;
        }
        pending.push_back(rec);
        latest_generation = head.arrival;
        last_departure = n;
        last_departed_k = head.k;
        last_departed_arrival = head.arrival;
        last_departed_t = rec.t;
        idle_since_departure = 0;
        queue.pop_front();
        if (queue.empty()) on_regeneration(n);
      }
    } else {
      // block 0 holds the virtual delivery, so it is not idle time for packet 1
      if (n > last_departure) ++idle_since_departure;
    }

    // (2) age over the block; counters cover blocks < n at any regeneration in block n
    area2 += 2 * (n - latest_generation) + 1;
    ++(busy_block ? busy : idle);

    // (3) arrival at the end of the block
    if (n == next_arrival) {
      queue.push_back({next_k, n, n - last_arrival, static_cast<std::int64_t>(queue.size())});
      ++next_k;
      ++r.total_arrivals;
      last_arrival = n;
      next_arrival = n + dist.sample(rng);
    }

    const auto slice = static_cast<std::size_t>((n * kQueueTraceWindows) / horizon);
    queue_window_sum[slice] += static_cast<long double>(queue.size());
    ++queue_window_len[slice];
  }

  if (r.packets_delivered == 0) {
    throw NumericalError("simulator: no complete busy cycle after warm-up; horizon too short or load too high");
  }

  r.window_blocks = r.window_end - r.window_start;
  const std::int64_t area2_window = area2_end - area2_start;
  r.busy_blocks = busy_end - busy_start;
  r.idle_time_total = idle_end - idle_start;
  r.avg_aoi = static_cast<double>(area2_window) / (2.0 * static_cast<double>(r.window_blocks));
  r.avg_sampled_age = r.avg_aoi - 0.5;

  // Sum of Q_k = X_k T_k + X_k^2 / 2 over window packets, plus the end
  // pieces (T_last^2 - T_anchor^2) / 2; blocks = sum X + T_last - T_anchor.
  const std::int64_t polygons2 = 2 * totals.sum_xt + totals.sum_x2 + t_last * t_last - t_anchor * t_anchor;
  const std::int64_t blocks = totals.sum_x + t_last - t_anchor;
  r.avg_aoi_by_area = static_cast<double>(polygons2) / (2.0 * static_cast<double>(blocks));

  const auto count = static_cast<long double>(r.packets_delivered);
  r.aoi_packet_formula = static_cast<double>(
      (static_cast<long double>(totals.sum_xt) / count + static_cast<long double>(totals.sum_x2) / (2 * count)) /
      (static_cast<long double>(totals.sum_x) / count));
  r.waiting_time_mean = static_cast<double>(static_cast<long double>(totals.sum_w) / count);

  r.moments.origin = MomentOrigin::empirical;
  r.moments.sample_count = r.packets_delivered;
  for (long double s : totals.power_sums) r.moments.values.push_back(static_cast<double>(s / count));

  try {
    const LambdaEstimate est =
        lambda_from_departure_counts(r.inter_departure_hist.count(1), r.inter_departure_hist.total(), mu);
    r.lambda_hat = est.lambda;
    r.lambda_hat_clamped = est.clamped;
    if (est.clamped) r.warnings.emplace_back("lambda estimate clamped into [1-mu, 1)");
  } catch (const DegenerateEstimate&) {
    r.warnings.emplace_back("every inter-departure time equals 1; lambda not identifiable");
  }

  for (int i = 0; i < kQueueTraceWindows; ++i) {
    r.queue_length_window_means.push_back(
        queue_window_len[i] == 0 ? 0.0
                                 : static_cast<double>(queue_window_sum[i] / queue_window_len[i]));
  }
  const Histogram* hists[] = {&r.inter_departure_hist, &r.system_time_hist, &r.queue_length_hist,
                              &r.service_time_hist};
  for (const Histogram* h : hists) {
    if (h->overflow() > 0) {
      r.warnings.emplace_back("histogram overflow above 1e5; the queue is close to instability");
      break;
    }
  }
  return r;
}

/// Total-variation distance between a histogram and a law on integers >= first.
template <class Pmf>
double total_variation(const Histogram& hist, std::int64_t first, Pmf&& pmf) {
  if (hist.total() == 0) throw InvalidParameter("total_variation: empty histogram");
  const std::int64_t last = hist.overflow() > 0 ? hist.cap() : std::max(hist.max_value(), first);
  double diff = 0.0;
  double predicted_in_range = 0.0;
  for (std::int64_t v = first; v <= last; ++v) {
    const double p = pmf(v);
    predicted_in_range += p;
    diff += std::abs(hist.fraction(v) - p);
  }
  const double empirical_tail = static_cast<double>(hist.overflow()) / static_cast<double>(hist.total());
  const double predicted_tail = std::max(0.0, 1.0 - predicted_in_range);
  diff += std::abs(empirical_tail - predicted_tail);
  return 0.5 * diff;
}

struct FitReport {
  double tv_system_time = 0.0;   // vs (1-lambda) lambda^(n-1), n >= 1
  double tv_queue_length = 0.0;  // vs (1-alpha) alpha^n, n >= 0
  double tv_service_time = 0.0;  // vs (1-mu)^(n-1) mu, n >= 1
};

inline FitReport distribution_fit_report(const SimResult& result, const QueueSolution& solution) {
  if (result.horizon < 1000000) throw InvalidParameter("fit report: needs a run of at least 1e6 blocks");
  FitReport fit;
  fit.tv_system_time = total_variation(result.system_time_hist, 1, [&](std::int64_t n) {
    return system_time_pmf(solution.lambda, n);
  });
  fit.tv_queue_length = total_variation(result.queue_length_hist, 0, [&](std::int64_t n) {
    return (1.0 - solution.alpha) * std::pow(solution.alpha, static_cast<double>(n));
  });
  fit.tv_service_time = total_variation(result.service_time_hist, 1, [&](std::int64_t n) {
    return service_pmf(solution.mu, n);
  });
  return fit;
}

/// Per-packet trace as CSV: k,arrival,departure,X,S,W,T,Y.
inline void write_trace(std::ostream& out, std::span<const PacketRecord> trace) {
  out << "k,arrival,departure,X,S,W,T,Y\n";
  for (const PacketRecord& p : trace) {
    out << p.k << ',' << p.arrival << ',' << p.departure << ',' << p.x << ',' << p.s << ',' << p.w << ','
        << p.t << ',' << p.y << '\n';
  }
}

}  // namespace aoi
