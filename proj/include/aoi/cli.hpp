#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "aoi/analysis.hpp"
#include "aoi/channel.hpp"
#include "aoi/distributions.hpp"
#include "aoi/experiments.hpp"
#include "aoi/simulator.hpp"

namespace aoi {
namespace cli {

// Runtime failure that maps to exit status 1.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ArrivalArgs {
  std::string dist = "geometric";
  std::optional<double> p;
  std::optional<std::int64_t> a;
  std::optional<std::int64_t> b;
  std::optional<double> q;
};

struct ChannelArgs {
  std::optional<double> mu;
  std::optional<double> snr;
  std::optional<double> threshold;
};

inline void add_arrival_options(CLI::App& sub, ArrivalArgs& args) {
  sub.add_option("--dist", args.dist, "Inter-arrival law")
      ->check(CLI::IsMember({"degenerate", "two-point", "geometric"}))
      ->capture_default_str();
  sub.add_option("--p", args.p, "Arrival rate 1/E(X); geometric success parameter");
  sub.add_option("--a", args.a, "Two-point: smaller support point");
  sub.add_option("--b", args.b, "Two-point: larger support point");
  sub.add_option("--q", args.q, "Two-point: Pr{X=a}");
}

inline void add_channel_options(CLI::App& sub, ChannelArgs& args) {
  auto* mu = sub.add_option("--mu", args.mu, "Per-block success probability");
  auto* snr = sub.add_option("--snr", args.snr, "Mean SNR (linear)");
  auto* thr = sub.add_option("--threshold", args.threshold, "Decoding SNR threshold (linear)");
  mu->excludes(snr)->excludes(thr);
  snr->needs(thr);
  thr->needs(snr);
}

inline DiscretePmf build_arrivals(const ArrivalArgs& args) {
  if (args.dist == "geometric") {
    if (!args.p) throw InvalidParameter("--dist geometric needs --p");
    return make_geometric(*args.p);
  }
  if (args.dist == "degenerate") {
    if (!args.p) throw InvalidParameter("--dist degenerate needs --p");
    if (!(*args.p > 0.0 && *args.p <= 1.0)) throw InvalidParameter("--p must lie in (0,1]");
    const double d = std::round(1.0 / *args.p);
    if (std::abs(d - 1.0 / *args.p) > 1e-9) throw InvalidParameter("--dist degenerate needs 1/p to be an integer");
    return make_degenerate(static_cast<std::int64_t>(d));
  }
  // two-point: explicit (a, b, q), or a = 1, q = 1/2 and b chosen so E(X) = 1/p.
  std::int64_t a = args.a.value_or(1);
  double q = args.q.value_or(0.5);
  std::int64_t b = 0;
  if (args.b) {
    b = *args.b;
  } else {
    if (!args.p) throw InvalidParameter("--dist two-point needs --b or --p");
    const double bb = (1.0 / *args.p - q * static_cast<double>(a)) / (1.0 - q);
    b = static_cast<std::int64_t>(std::llround(bb));
    if (std::abs(static_cast<double>(b) - bb) > 1e-9) {
      throw InvalidParameter("--dist two-point: no integer b gives E(X) = 1/p; pass --a --b --q");
    }
  }
  DiscretePmf dist = make_two_point(a, b, q);
  if (args.p && std::abs(dist.mean() * *args.p - 1.0) > 1e-9) {
    throw InvalidParameter("--dist two-point: q*a + (1-q)*b does not equal 1/p");
  }
  return dist;
}

inline double resolve_mu(const ChannelArgs& args) {
  double mu = 0.0;
  if (args.mu) {
    mu = *args.mu;
  } else if (args.snr && args.threshold) {
    mu = success_probability(*args.snr, *args.threshold);
  } else {
    throw InvalidParameter("give either --mu or both --snr and --threshold");
  }
  if (!(mu > 0.0 && mu <= 1.0)) throw RuntimeFailure("infeasible success probability mu = " + format_real(mu));
  return mu;
}

// Reals in JSON output carry 12 significant digits, as in the CSV.
inline double r12(double v) { return std::isfinite(v) ? std::stod(format_real(v)) : v; }
inline std::vector<double> r12(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) out.push_back(r12(x));
  return out;
}

inline nlohmann::ordered_json describe(const DiscretePmf& dist) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(dist.kind()));
  if (dist.kind() == DistKind::geometric) {
    j["p"] = dist.geometric_p();
  } else {
    j["support"] = std::vector<std::int64_t>(dist.support().begin(), dist.support().end());
    j["probs"] = std::vector<double>(dist.probs().begin(), dist.probs().end());
  }
  j["mean"] = r12(dist.mean());
  return j;
}

inline nlohmann::ordered_json histogram_json(const Histogram& h) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::int64_t v = 0; v <= h.max_value(); ++v) {
    if (h.count(v) != 0) j[std::to_string(v)] = h.count(v);
  }
  if (h.overflow() != 0) j["overflow"] = h.overflow();
  return j;
}

inline std::vector<double> parse_rho_grid(const std::string& text) {
  // "start:stop:step" or a comma-separated list
  if (text.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
    if (parts.size() != 3) throw InvalidParameter("--rho-grid: expected start:stop:step");
    return make_rho_grid(parts[0], parts[1], parts[2]);
  }
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) grid.push_back(std::stod(item));
  }
  if (grid.empty()) throw InvalidParameter("--rho-grid: empty");
  return grid;
}

inline DistKind parse_kind(const std::string& name) {
  if (name == "degenerate") return DistKind::degenerate;
  if (name == "two-point" || name == "two_point") return DistKind::two_point;
  if (name == "geometric") return DistKind::geometric;
  throw InvalidParameter("unknown distribution '" + name + "'");
}

}  // namespace cli

/// Entry point of the `aoi` tool. Exit status: 0 success, 2 invalid
/// arguments, 1 runtime failure (instability, infeasible mu, I/O).
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  using nlohmann::ordered_json;
  CLI::App app{"Average age of information for a discrete-time FCFS queue with geometric service"};
  app.require_subcommand(1);

  cli::ArrivalArgs arrivals;
  cli::ChannelArgs channel;

  auto* exact = app.add_subcommand("exact", "Stationary average AoI from the exact arrival law");
  cli::add_arrival_options(*exact, arrivals);
  cli::add_channel_options(*exact, channel);

  auto* bounds = app.add_subcommand("bounds", "AoI bounds from the first K moments of the arrival law");
  cli::add_arrival_options(*bounds, arrivals);
  cli::add_channel_options(*bounds, channel);
  int order = 2;
  std::string moment_source = "exact";
  std::size_t samples = 1000000;
  std::uint64_t seed = 1;
  bounds->add_option("--orders", order, "Highest moment order K (>= 2)")->capture_default_str();
  bounds->add_option("--moment-source", moment_source, "exact or empirical")
      ->check(CLI::IsMember({"exact", "empirical"}))
      ->capture_default_str();
  bounds->add_option("--samples", samples, "Draws used for empirical moments")->capture_default_str();
  bounds->add_option("--seed", seed, "Seed for empirical moments")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Slot-level queue simulation");
  cli::add_arrival_options(*simulate, arrivals);
  cli::add_channel_options(*simulate, channel);
  std::int64_t blocks = 1000000;
  double warmup = 0.01;
  std::string trace_path;
  bool with_histograms = false;
  simulate->add_option("--blocks", blocks, "Simulation horizon in blocks")->capture_default_str();
  simulate->add_option("--seed", seed, "Random seed")->capture_default_str();
  simulate->add_option("--warmup", warmup, "Fraction of blocks discarded as warm-up")->capture_default_str();
  simulate->add_option("--trace", trace_path, "Write the per-packet trace (CSV) to this path");
  simulate->add_flag("--histograms", with_histograms, "Include histograms in the output");

  auto* sweep = app.add_subcommand("sweep", "Sweep traffic intensity, arrival law and moment order; CSV output");
  double sweep_p = 0.125;
  std::vector<std::string> sweep_dists = {"degenerate", "two-point", "geometric"};
  std::string rho_grid = "0.1:0.9:0.05";
  std::vector<int> sweep_orders = {2, 7};
  std::string out_path;
  std::string mode = "analytic";
  std::int64_t sweep_blocks = 1000000;
  unsigned threads = 1;
  std::optional<std::int64_t> sweep_a, sweep_b;
  std::optional<double> sweep_q;
  sweep->add_option("--p", sweep_p, "Arrival rate 1/E(X)")->capture_default_str();
  sweep->add_option("--dists", sweep_dists, "Arrival laws")
      ->check(CLI::IsMember({"degenerate", "two-point", "geometric"}))
      ->capture_default_str();
  sweep->add_option("--rho-grid", rho_grid, "start:stop:step or comma list")->capture_default_str();
  sweep->add_option("--orders", sweep_orders, "Moment orders K")->capture_default_str();
  sweep->add_option("--out", out_path, "CSV path (stdout when omitted)");
  sweep->add_option("--mode", mode, "analytic, simulate or both")
      ->check(CLI::IsMember({"analytic", "simulate", "both"}))
      ->capture_default_str();
  sweep->add_option("--moment-source", moment_source, "exact or empirical")
      ->check(CLI::IsMember({"exact", "empirical"}))
      ->capture_default_str();
  sweep->add_option("--blocks", sweep_blocks, "Simulation horizon per row")->capture_default_str();
  sweep->add_option("--seed", seed, "Base seed")->capture_default_str();
  sweep->add_option("--threads", threads, "Rows evaluated concurrently")->capture_default_str();
  sweep->add_option("--samples", samples, "Draws per row for empirical moments")->capture_default_str();
  sweep->add_option("--a", sweep_a, "Two-point: smaller support point");
  sweep->add_option("--b", sweep_b, "Two-point: larger support point");
  sweep->add_option("--q", sweep_q, "Two-point: Pr{X=a}");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (exact->parsed()) {
      const DiscretePmf dist = cli::build_arrivals(arrivals);
      const double mu = cli::resolve_mu(channel);
      const QueueSolution sol = solve_alpha(dist, mu);
      ordered_json j;
      j["arrivals"] = cli::describe(dist);
      j["mu"] = cli::r12(mu);
      j["rho"] = cli::r12(sol.rho);
      j["alpha"] = cli::r12(sol.alpha);
      j["lambda"] = cli::r12(sol.lambda);
      j["aoi_exact"] = cli::r12(exact_average_aoi(dist, mu));
      out << j.dump(2) << '\n';
      return 0;
    }

    if (bounds->parsed()) {
      const DiscretePmf dist = cli::build_arrivals(arrivals);
      const double mu = cli::resolve_mu(channel);
      const QueueSolution sol = solve_alpha(dist, mu);
      MomentVector moments;
      if (moment_source == "exact") {
        moments = exact_moments(dist, order);
      } else {
        Rng rng(seed);
        moments = empirical_moments(draw_samples(dist, rng, samples), order);
      }
      const AoIBounds b = aoi_bounds(moments, sol, order);
      ordered_json j;
      j["arrivals"] = cli::describe(dist);
      j["mu"] = cli::r12(mu);
      j["rho"] = cli::r12(sol.rho);
      j["alpha"] = cli::r12(sol.alpha);
      j["lambda"] = cli::r12(sol.lambda);
      j["K"] = order;
      j["moment_source"] = moment_source;
      j["moments"] = cli::r12(moments.values);
      j["aoi_exact"] = cli::r12(exact_average_aoi(dist, mu));
      j["aoi_lower"] = cli::r12(b.lower);
      j["aoi_upper"] = cli::r12(b.upper);
      j["lower_source"] = b.lower_source.str();
      j["upper_source"] = b.upper_source.str();
      j["derivative_exact"] = cli::r12(sol.lambda > 0.0 ? dist.pgf_derivative(sol.lambda) : 0.0);
      j["derivative_lower"] = cli::r12(b.derivative_lower);
      j["derivative_upper"] = cli::r12(b.derivative_upper);
      j["partial_sums"] = cli::r12(b.partial_sums);
      j["diverging"] = b.diverging;
      out << j.dump(2) << '\n';
      return 0;
    }

    if (simulate->parsed()) {
      SimConfig cfg;
      cfg.dist = cli::build_arrivals(arrivals);
      cfg.mu = cli::resolve_mu(channel);
      cfg.horizon = blocks;
      cfg.seed = seed;
      cfg.warmup_fraction = warmup;
      cfg.record_trace = !trace_path.empty();
      const SimResult r = run_simulation(cfg);
      if (!trace_path.empty()) {
        std::ofstream trace(trace_path, std::ios::binary);
        if (!trace) throw cli::RuntimeFailure("cannot open trace file " + trace_path);
        write_trace(trace, r.trace);
      }
      ordered_json j;
      j["arrivals"] = cli::describe(cfg.dist);
      j["mu"] = cli::r12(cfg.mu);
      j["blocks"] = r.horizon;
      j["seed"] = r.seed;
      j["generator"] = r.generator;
      j["window_start"] = r.window_start;
      j["window_end"] = r.window_end;
      j["avg_aoi"] = cli::r12(r.avg_aoi);
      j["avg_aoi_by_area"] = cli::r12(r.avg_aoi_by_area);
      j["aoi_packet_formula"] = cli::r12(r.aoi_packet_formula);
      j["avg_sampled_age"] = cli::r12(r.avg_sampled_age);
      j["packets_delivered"] = r.packets_delivered;
      j["arrivals_in_window"] = r.arrivals;
      j["moments"] = cli::r12(r.moments.values);
      j["idle_time_total"] = r.idle_time_total;
      j["busy_blocks"] = r.busy_blocks;
      j["waiting_time_mean"] = cli::r12(r.waiting_time_mean);
      if (std::isnan(r.lambda_hat)) {
        j["lambda_hat"] = nullptr;
      } else {
        j["lambda_hat"] = cli::r12(r.lambda_hat);
      }
      try {
        j["aoi_exact"] = cli::r12(exact_average_aoi(cfg.dist, cfg.mu));
      } catch (const InstabilityError&) {
        j["aoi_exact"] = nullptr;
      }
      if (with_histograms) {
        j["inter_departure_histogram"] = cli::histogram_json(r.inter_departure_hist);
        j["system_time_histogram"] = cli::histogram_json(r.system_time_hist);
        j["queue_length_at_arrival_histogram"] = cli::histogram_json(r.queue_length_hist);
      }
      j["warnings"] = r.warnings;
      out << j.dump(2) << '\n';
      return 0;
    }

    if (sweep->parsed()) {
      SweepSpec spec;
      spec.p = sweep_p;
      spec.dists.clear();
      for (const auto& name : sweep_dists) spec.dists.push_back(cli::parse_kind(name));
      spec.rho_grid = cli::parse_rho_grid(rho_grid);
      spec.orders = sweep_orders;
      spec.sim_blocks = sweep_blocks;
      spec.base_seed = seed;
      spec.threads = threads;
      spec.empirical_samples = samples;
      spec.mode = mode == "analytic" ? SweepMode::analytic : mode == "simulate" ? SweepMode::simulate : SweepMode::both;
      spec.moment_source = moment_source == "exact" ? MomentSource::exact : MomentSource::empirical;
      if (sweep_a) spec.two_point.a = *sweep_a;
      if (sweep_q) spec.two_point.q = *sweep_q;
      if (sweep_b) {
        spec.two_point.b = *sweep_b;
      } else {
        const double bb = (1.0 / sweep_p - spec.two_point.q * static_cast<double>(spec.two_point.a)) /
                          (1.0 - spec.two_point.q);
        spec.two_point.b = std::llround(bb);
      }
      const auto rows = run_sweep(spec);
      if (out_path.empty()) {
        emit_csv(out, rows);
      } else {
        try {
          emit_csv(rows, out_path);
        } catch (const std::runtime_error& e) {
          throw cli::RuntimeFailure(e.what());
        }
      }
      return 0;
    }
  } catch (const std::invalid_argument& e) {  // InvalidParameter and malformed numbers
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace aoi
