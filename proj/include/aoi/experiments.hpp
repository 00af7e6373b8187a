#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "aoi/analysis.hpp"
#include "aoi/distributions.hpp"
#include "aoi/errors.hpp"
#include "aoi/simulator.hpp"

namespace aoi {

enum class SweepMode { analytic, simulate, both };
enum class MomentSource { exact, empirical };

struct TwoPointParams {
  std::int64_t a = 1;
  std::int64_t b = 15;
  double q = 0.5;
};

/// rho from start to stop inclusive; values are rounded to 1e-12 so the grid
/// prints cleanly.
inline std::vector<double> make_rho_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(start > 0.0) || stop < start) throw InvalidParameter("rho grid: bad range");
  std::vector<double> grid;
  const auto n = static_cast<int>(std::floor((stop - start) / step + 1e-9));
  for (int i = 0; i <= n; ++i) grid.push_back(std::round((start + i * step) * 1e12) / 1e12);
  return grid;
}

inline std::vector<double> default_rho_grid() { return make_rho_grid(0.1, 0.9, 0.05); }

struct SweepSpec {
  double p = 0.125;
  std::vector<DistKind> dists = {DistKind::degenerate, DistKind::two_point, DistKind::geometric};
  TwoPointParams two_point;
  std::vector<double> rho_grid = default_rho_grid();
  std::vector<int> orders = {2, 7};
  std::int64_t sim_blocks = 1000000;
  std::uint64_t base_seed = 1;
  SweepMode mode = SweepMode::analytic;
  MomentSource moment_source = MomentSource::exact;
  std::size_t empirical_samples = 1000000;
  unsigned threads = 1;

  void validate() const {
    if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("sweep: p must lie in (0,1)");
    if (dists.empty() || rho_grid.empty() || orders.empty()) throw InvalidParameter("sweep: empty axis");
    for (double rho : rho_grid) {
      if (!(rho > 0.0 && rho < 1.0)) throw InvalidParameter("sweep: every rho must lie in (0,1)");
    }
    for (int k : orders) {
      if (k < 2) throw InvalidParameter("sweep: moment orders must be >= 2");
    }
    if (mode != SweepMode::analytic && sim_blocks < 10000) throw InvalidParameter("sweep: sim horizon < 1e4");
  }
};

/// Arrival law of the requested kind with mean exactly 1/p.
inline DiscretePmf sweep_distribution(DistKind kind, double p, const TwoPointParams& tp) {
  const double mean = 1.0 / p;
  switch (kind) {
    case DistKind::degenerate: {
      const double d = std::round(mean);
      if (std::abs(d - mean) > 1e-9) throw InvalidParameter("sweep: degenerate arrivals need an integer 1/p");
      return make_degenerate(static_cast<std::int64_t>(d));
    }
    case DistKind::two_point: {
      DiscretePmf dist = make_two_point(tp.a, tp.b, tp.q);
      if (std::abs(dist.mean() * p - 1.0) > 1e-9) {
        throw InvalidParameter("sweep: two-point mean q*a + (1-q)*b must equal 1/p");
      }
      return dist;
    }
    case DistKind::geometric: return make_geometric(p);
    case DistKind::general: break;
  }
  throw InvalidParameter("sweep: unsupported distribution kind");
}

struct SweepRow {
  std::string dist;
  double p = 0.0;
  double mu = 0.0;
  double rho = 0.0;
  int k = 0;
  bool feasible = true;
  double aoi_exact = std::nan("");
  double aoi_lower = std::nan("");
  double aoi_upper = std::nan("");
  double err_lower = std::nan("");
  double err_upper = std::nan("");
  std::string lower_source;
  std::string upper_source;
  bool diverging = false;
  bool has_bounds = false;
  std::optional<double> aoi_sim;
  std::int64_t sim_blocks = 0;
  std::uint64_t seed = 0;
};

// FNV-1a over the row key; stable across platforms and runs.
inline std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::uint64_t row_seed(std::uint64_t base_seed, std::string_view dist, double rho, int k) {
  return base_seed ^ stable_hash(std::string(dist) + "|" + format_real(rho) + "|" + std::to_string(k));
}

inline SweepRow evaluate_sweep_row(const SweepSpec& spec, DistKind kind, double rho, int k) {
  SweepRow row;
  row.dist = std::string(to_string(kind));
  row.p = spec.p;
  row.rho = rho;
  row.k = k;
  row.mu = spec.p / rho;
  row.seed = row_seed(spec.base_seed, row.dist, rho, k);
  // mu = p / rho must be a probability.
  if (row.mu > 1.0 + 1e-12) {
    row.feasible = false;
    row.lower_source = row.upper_source = "infeasible";
    return row;
  }
  row.mu = std::min(row.mu, 1.0);

  const DiscretePmf dist = sweep_distribution(kind, spec.p, spec.two_point);
  const QueueSolution sol = solve_alpha(dist, row.mu);
  row.aoi_exact = exact_average_aoi(dist, row.mu);

  if (spec.mode != SweepMode::simulate) {
    MomentVector moments;
    if (spec.moment_source == MomentSource::exact) {
      moments = exact_moments(dist, k);
    } else {
      Rng rng(row.seed);
      const auto samples = draw_samples(dist, rng, spec.empirical_samples);
      moments = empirical_moments(samples, k);
    }
    const AoIBounds b = aoi_bounds(moments, sol, k);
    row.has_bounds = true;
    row.aoi_lower = b.lower;
    row.aoi_upper = b.upper;
    row.err_lower = row.aoi_exact - b.lower;
    row.err_upper = b.upper - row.aoi_exact;
    row.lower_source = b.lower_source.str();
    row.upper_source = b.upper_source.str();
    row.diverging = b.diverging;
  }
  if (spec.mode != SweepMode::analytic) {
    SimConfig cfg;
    cfg.dist = dist;
    cfg.mu = row.mu;
    cfg.horizon = spec.sim_blocks;
    cfg.seed = row.seed;
    row.aoi_sim = run_simulation(cfg).avg_aoi;
    row.sim_blocks = spec.sim_blocks;
  }
  return row;
}

/// Rows ordered by distribution (in the order given), then rho ascending, then K
/// ascending. Rows may be computed on several threads; the order and every
/// value are independent of the thread count.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<double> rhos = spec.rho_grid;
  std::sort(rhos.begin(), rhos.end());
  rhos.erase(std::unique(rhos.begin(), rhos.end()), rhos.end());
  std::vector<int> orders = spec.orders;
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());

  struct Task {
    DistKind kind;
    double rho;
    int k;
  };
  std::vector<Task> tasks;
  for (DistKind kind : spec.dists) {
    for (double rho : rhos) {
      for (int k : orders) tasks.push_back({kind, rho, k});
    }
  }

  std::vector<SweepRow> rows(tasks.size());
  const unsigned threads = std::max(1u, spec.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      rows[i] = evaluate_sweep_row(spec, tasks[i].kind, tasks[i].rho, tasks[i].k);
    }
    return rows;
  }
  for (std::size_t begin = 0; begin < tasks.size(); begin += threads) {
    std::vector<std::future<SweepRow>> batch;
    const std::size_t end = std::min(tasks.size(), begin + threads);
    for (std::size_t i = begin; i < end; ++i) {
      batch.push_back(std::async(std::launch::async, [&spec, t = tasks[i]] {
        return evaluate_sweep_row(spec, t.kind, t.rho, t.k);
      }));
    }
    for (std::size_t i = begin; i < end; ++i) rows[i] = batch[i - begin].get();
  }
  return rows;
}

inline constexpr std::string_view kCsvHeader =
    "dist,p,mu,rho,K,aoi_exact,aoi_lower,aoi_upper,err_lower,err_upper,lower_source,upper_source,"
    "diverging,aoi_sim,sim_blocks,seed";

inline void emit_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw InvalidParameter("emit_csv: no rows");
  auto real_or_blank = [](bool present, double v) { return present ? format_real(v) : std::string(); };
  out << kCsvHeader << '\n';
  for (const SweepRow& r : rows) {
    const bool exact = r.feasible;
    const bool bounds = r.feasible && r.has_bounds;
    out << r.dist << ',' << format_real(r.p) << ',' << format_real(r.mu) << ',' << format_real(r.rho) << ','
        << r.k << ',' << real_or_blank(exact, r.aoi_exact) << ',' << real_or_blank(bounds, r.aoi_lower) << ','
        << real_or_blank(bounds, r.aoi_upper) << ',' << real_or_blank(bounds, r.err_lower) << ','
        << real_or_blank(bounds, r.err_upper) << ',' << r.lower_source << ',' << r.upper_source << ','
        << (bounds ? (r.diverging ? "true" : "false") : "") << ','
        << (r.aoi_sim ? format_real(*r.aoi_sim) : std::string()) << ',' << r.sim_blocks << ',' << r.seed
        << '\n';
  }
}

inline void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
  emit_csv(out, rows);
  out.flush();
  if (!out) throw std::runtime_error("emit_csv: write failed for " + path);
}

}  // namespace aoi
