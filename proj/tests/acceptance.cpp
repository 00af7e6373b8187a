// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--criterion N] [--cli PATH]
//
// Exit status is 0 only when every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "aoi/aoi.hpp"
#include "oracles.hpp"

#ifndef AOI_CLI_PATH
#define AOI_CLI_PATH "aoi"
#endif

namespace {

using namespace aoi;
using Clock = std::chrono::steady_clock;

bool report(const std::string& id, bool ok, const std::string& detail) {
  std::cout << id << ' ' << (ok ? "PASS" : "FAIL") << ": " << detail << std::endl;
  return ok;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

std::vector<DiscretePmf> standard_dists() {
  return {make_degenerate(8), make_two_point(1, 15, 0.5), make_geometric(0.125)};
}

// Pinned geometric run shared by criteria 5 and 6.
const SimResult& pinned_run() {
  static const SimResult result = [] {
    SimConfig c;
    c.dist = make_geometric(0.125);
    c.mu = 0.25;
    c.horizon = 10000000;
    c.seed = 20240605;
    return run_simulation(c);
  }();
  return result;
}

bool criterion1() {
  const auto t0 = Clock::now();
  const DiscretePmf g = make_geometric(0.125);
  const QueueSolution s = solve_alpha(g, 0.25);
  const double aoi = exact_average_aoi(g, 0.25);
  const double iterated = oracle::fixed_point_alpha([&](double z) { return g.pgf(z); }, 0.25);
  const double elapsed = seconds_since(t0);
  const double e_alpha = std::abs(s.alpha - 3.0 / 7.0);
  const double e_lambda = std::abs(s.lambda - 6.0 / 7.0);
  const double e_aoi = std::abs(aoi - 13.0);
  const double e_fp = std::abs(iterated - s.alpha);
  const bool ok = e_alpha <= 1e-10 && e_lambda <= 1e-10 && e_aoi <= 1e-9 && e_fp <= 1e-10 && elapsed < 1.0;
  std::ostringstream d;
  d << "analytic pinned case: |alpha-3/7|=" << e_alpha << " |lambda-6/7|=" << e_lambda << " |aoi-13|=" << e_aoi
    << " |alpha-fixed_point|=" << e_fp << " time=" << elapsed << "s";
  return report("C1", ok, d.str());
}

bool criterion2() {
  bool ok = true;
  std::uint64_t seed = 7001;
  double worst_rel = 0.0, worst_acc = 0.0, slowest = 0.0;
  for (const DiscretePmf& d : standard_dists()) {
    for (double rho : {0.3, 0.5, 0.7}) {
      const double mu = 0.125 / rho;
      SimConfig c;
      c.dist = d;
      c.mu = mu;
      c.horizon = 10000000;
      c.seed = seed++;
      const auto t0 = Clock::now();
      const SimResult r = run_simulation(c);
      slowest = std::max(slowest, seconds_since(t0));
      const double exact = exact_average_aoi(d, mu);
      const double rel = std::abs(r.avg_aoi - exact) / exact;
      const double acc = std::abs(r.avg_aoi - r.avg_aoi_by_area) / r.avg_aoi;
      worst_rel = std::max(worst_rel, rel);
      worst_acc = std::max(worst_acc, acc);
      const bool row_ok = rel < 0.01 && acc <= 1e-9;
      ok = ok && row_ok;
      std::cout << "  " << to_string(d.kind()) << " rho=" << rho << " sim=" << format_real(r.avg_aoi)
                << " exact=" << format_real(exact) << " rel=" << fmt("%.2e", rel)
                << " accounting_gap=" << fmt("%.1e", acc)
                << " per_packet=" << format_real(r.aoi_packet_formula) << (row_ok ? "" : "  <-- violation")
                << '\n';
    }
  }
  std::ostringstream d;
  d << "oracle equivalence, 9 runs x 1e7 blocks: worst rel err=" << fmt("%.2e", worst_rel)
    << " (<1e-2), worst accounting gap=" << fmt("%.1e", worst_acc) << " (<=1e-9), slowest run=" << slowest << "s";
  return report("C2", ok, d.str());
}

bool criterion3() {
  const auto t0 = Clock::now();
  std::size_t rows = 0, violations = 0;
  for (const DiscretePmf& d : standard_dists()) {
    const MomentVector m = exact_moments(d, 7);
    for (double rho : default_rho_grid()) {
      const double mu = 0.125 / rho;
      if (mu > 1.0) continue;
      const QueueSolution s = solve_alpha(d, mu);
      const double exact = exact_average_aoi(d, mu);
      for (int k = 2; k <= 7; ++k) {
        const AoIBounds b = aoi_bounds(m, s, k);
        ++rows;
        if (!(b.lower <= exact && exact <= b.upper)) {
          ++violations;
          std::cout << "  violation " << to_string(d.kind()) << " rho=" << rho << " K=" << k << '\n';
        }
      }
    }
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  d << "sandwich lower<=exact<=upper on " << rows << " feasible rows: " << violations
    << " violations, time=" << elapsed << "s";
  return report("C3", violations == 0 && elapsed < 10.0, d.str());
}

bool criterion4() {
  std::vector<double> zs;
  for (int i = 1; i <= 9; ++i) zs.push_back(0.1 * i);
  zs.push_back(0.95);
  std::size_t checks = 0, violations = 0, diverging_points = 0;
  for (const DiscretePmf& d : standard_dists()) {
    const MomentVector m = exact_moments(d, 9);
    for (double z : zs) {
      const double exact = d.pgf_derivative(z);
      const PartialSums ps = pgf_derivative_partial_sums(m, 9, z);
      if (ps.diverging) ++diverging_points;
      for (int k = 1; k <= 9; ++k) {
        ++checks;
        const bool ok = k % 2 == 1 ? ps.at(k) > exact : ps.at(k) < exact;
        if (!ok) {
          ++violations;
          std::cout << "  violation " << to_string(d.kind()) << " z=" << z << " K=" << k << '\n';
        }
      }
    }
  }
  std::ostringstream d;
  d << "odd partial sums above, even below G'(z): " << checks << " checks, " << violations << " violations ("
    << diverging_points << " of 30 (dist,z) points diverging at K=9)";
  return report("C4", violations == 0, d.str());
}

bool criterion5() {
  const SimResult& r = pinned_run();
  const FitReport fit = distribution_fit_report(r, solve_alpha(make_geometric(0.125), 0.25));
  std::ostringstream d;
  d << "fits at geometric(0.125), mu=0.25, N=1e7: TV(T, Geom(6/7))=" << fmt("%.2e", fit.tv_system_time)
    << " TV(L-, (1-a)a^n)=" << fmt("%.2e", fit.tv_queue_length) << " (both <1e-2)";
  return report("C5", fit.tv_system_time < 0.01 && fit.tv_queue_length < 0.01, d.str());
}

bool criterion6() {
  const SimResult& r = pinned_run();
  const double mu = 0.25;
  const double lambda_hat = r.lambda_hat;
  bool ok = std::isfinite(lambda_hat) && std::abs(lambda_hat - 6.0 / 7.0) <= 0.002;
  const QueueSolution s = queue_solution_from_lambda(lambda_hat, mu, r.moments.at(1));
  std::ostringstream d;
  d << "lambda_hat=" << fmt("%.6f", lambda_hat) << " (|err|=" << fmt("%.2e", std::abs(lambda_hat - 6.0 / 7.0))
    << " <=2e-3), alpha_hat=" << fmt("%.6f", s.alpha);
  for (int k : {2, 7}) {
    const AoIBounds b = aoi_bounds(r.moments, s, k);
    const bool contains = b.lower <= 13.0 && 13.0 <= b.upper;
    ok = ok && contains;
    d << "; K=" << k << " [" << format_real(b.lower) << ", " << format_real(b.upper) << "]"
      << (contains ? " contains 13" : " misses 13");
  }
  return report("C6", ok, d.str());
}

bool criterion7() {
  const std::vector<SweepRow> rows = run_sweep(SweepSpec{});
  std::map<std::string, std::map<int, std::vector<const SweepRow*>>> by;  // dist -> K -> rows by rho
  for (const SweepRow& r : rows) {
    if (r.feasible) by[r.dist][r.k].push_back(&r);
  }
  auto find = [&](const std::string& dist, int k, double rho) -> const SweepRow& {
    for (const SweepRow* r : by[dist][k]) {
      if (std::abs(r->rho - rho) < 1e-12) return *r;
    }
    throw std::runtime_error("missing row");
  };
  const std::vector<std::string> dists = {"degenerate", "two_point", "geometric"};

  // (a)
  bool a = true;
  for (const auto& dist : dists) {
    for (auto& [k, seq] : by[dist]) {
      for (std::size_t i = 1; i < seq.size(); ++i) a = a && seq[i]->aoi_exact > seq[i - 1]->aoi_exact;
    }
  }
  report("C7a", a, "aoi_exact strictly increasing in rho for every dist");

  // (b) the maximum must sit strictly between the first and last feasible grid points
  bool b = true;
  std::ostringstream bd;
  bd << "argmax of err_upper over rho:";
  for (const auto& dist : dists) {
    for (auto& [k, seq] : by[dist]) {
      std::size_t arg = 0;
      for (std::size_t i = 1; i < seq.size(); ++i) {
        if (seq[i]->err_upper > seq[arg]->err_upper) arg = i;
      }
      const bool interior = arg > 0 && arg + 1 < seq.size();
      b = b && interior;
      bd << ' ' << dist << "/K=" << k << "->" << format_real(seq[arg]->rho) << (interior ? "" : "(endpoint)");
    }
  }
  report("C7b", b, bd.str());

  // (c) both error columns, every feasible rho, every K
  bool c = true;
  std::ostringstream cd;
  cd << "err(two_point) >= err(degenerate) pointwise";
  std::size_t c_viol = 0;
  for (int k : {2, 7}) {
    for (const SweepRow* dg : by["degenerate"][k]) {
      const SweepRow& tp = find("two_point", k, dg->rho);
      for (auto [name, t, g] : {std::tuple{"err_lower", tp.err_lower, dg->err_lower},
                                std::tuple{"err_upper", tp.err_upper, dg->err_upper}}) {
        if (t < g) {
          c = false;
          ++c_viol;
          std::cout << "  7c violation K=" << k << " rho=" << format_real(dg->rho) << ' ' << name
                    << ": two_point=" << fmt("%.3e", t) << " degenerate=" << fmt("%.3e", g) << '\n';
        }
      }
    }
  }
  cd << ": " << c_viol << " violations";
  report("C7c", c, cd.str());

  // (d)
  bool d = true;
  std::ostringstream dd;
  dd << "width at rho=0.9, K=7 vs K=2:";
  for (const std::string dist : {"degenerate", "two_point"}) {
    const SweepRow& k2 = find(dist, 2, 0.9);
    const SweepRow& k7 = find(dist, 7, 0.9);
    const double w2 = k2.aoi_upper - k2.aoi_lower;
    const double w7 = k7.aoi_upper - k7.aoi_lower;
    d = d && w7 < w2;
    dd << ' ' << dist << ' ' << format_real(w7) << " < " << format_real(w2);
  }
  report("C7d", d, dd.str());

  // (e)
  bool e = true;
  std::ostringstream ed;
  ed << "geometric rho=0.3 sources:";
  for (int k : {2, 7}) {
    const SweepRow& r = find("geometric", k, 0.3);
    e = e && r.lower_source == "jensen" && r.upper_source == "jensen";
    ed << " K=" << k << " (" << r.lower_source << ", " << r.upper_source << ")";
  }
  report("C7e", e, ed.str());

  return report("C7", a && b && c && d && e, "qualitative shape of the error and AoI curves over rho");
}

bool criterion8() {
  std::size_t checks = 0, violations = 0;
  double worst = 0.0;
  std::string worst_at;
  for (const DiscretePmf& d : {make_degenerate(8), make_two_point(1, 15, 0.5)}) {
    const MomentVector m = exact_moments(d, 50);
    for (int i = 30; i <= 99; ++i) {
      const double z = i / 100.0;
      const double err = std::abs(pgf_derivative_partial_sum(m, 50, z).value - d.pgf_derivative(z));
      ++checks;
      if (!(err <= 1e-9)) ++violations;
      if (err > worst) {
        worst = err;
        worst_at = std::string(to_string(d.kind())) + " z=" + format_real(z);
      }
    }
  }
  std::ostringstream cd;
  cd << "K=50 partial sum within 1e-9 of G'(z), z in [0.3,0.99] step 0.01: " << violations << " of " << checks
     << " points fail; worst |err|=" << fmt("%.2e", worst) << " at " << worst_at;
  const bool conv = report("C8a", violations == 0, cd.str());

  std::size_t mono_checks = 0, mono_viol = 0;
  for (const DiscretePmf& d : standard_dists()) {
    const MomentVector m = exact_moments(d, 7);
    for (double rho : default_rho_grid()) {
      const double mu = 0.125 / rho;
      if (mu > 1.0) continue;
      const QueueSolution s = solve_alpha(d, mu);
      AoIBounds prev = aoi_bounds(m, s, 2);
      for (int k = 3; k <= 7; ++k) {
        const AoIBounds b = aoi_bounds(m, s, k);
        ++mono_checks;
        if (b.lower < prev.lower || b.upper > prev.upper) ++mono_viol;
        prev = b;
      }
    }
  }
  std::ostringstream md;
  md << "AoI intervals nested as K grows 2..7 over the grid: " << mono_viol << " violations in " << mono_checks
     << " steps";
  const bool mono = report("C8b", mono_viol == 0, md.str());
  return report("C8", conv && mono, "partial-sum convergence and monotone tightening");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool criterion9(const std::string& cli) {
  const auto dir = std::filesystem::temp_directory_path() / ("aoi_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::vector<std::string> invocations = {
      "sweep --mode both --blocks 200000 --seed 42 --threads 4",
      "sweep --moment-source empirical --samples 100000 --seed 9",
      "sweep --dists geometric two-point --rho-grid 0.2,0.6,0.85 --orders 2 5 --mode simulate --blocks 100000",
  };
  bool ok = true;
  std::ostringstream d;
  d << "repeated CLI sweeps byte-identical:";
  int idx = 0;
  for (const std::string& flags : invocations) {
    std::string outputs[2];
    for (int rep = 0; rep < 2; ++rep) {
      const auto path = dir / ("run" + std::to_string(idx) + "_" + std::to_string(rep) + ".csv");
      const std::string cmd = "\"" + cli + "\" " + flags + " --out \"" + path.string() + "\"";
      const int status = std::system(cmd.c_str());
      if (status != 0) {
        ok = false;
        std::cout << "  command failed (" << status << "): " << cmd << '\n';
      }
      outputs[rep] = slurp(path);
    }
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
    ok = ok && same;
    d << " [" << idx << "] " << outputs[0].size() << " bytes " << (same ? "identical" : "DIFFERENT");
    ++idx;
  }
  std::filesystem::remove_all(dir);
  return report("C9", ok, d.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  std::string cli = AOI_CLI_PATH;
  app.add_option("--criterion", only, "Run a single criterion (1-9)")->check(CLI::Range(1, 9));
  app.add_option("--cli", cli, "Path of the aoi executable");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<bool()>> criteria = {
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, [&] { return criterion9(cli); },
  };
  bool all = true;
  for (int i = 1; i <= 9; ++i) {
    if (only != 0 && only != i) continue;
    try {
      all = criteria[static_cast<std::size_t>(i - 1)]() && all;
    } catch (const std::exception& e) {
      all = report("C" + std::to_string(i), false, std::string("exception: ") + e.what()) && all;
    }
  }
  return all ? 0 : 1;
}
