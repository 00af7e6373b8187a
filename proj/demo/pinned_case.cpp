// Geometric arrivals with mean 8 over a link that succeeds with probability
// 1/4 per block: exact average AoI, moment bounds for K = 2 and K = 7, and a
// short simulation for comparison.
#include <cstdio>

#include "aoi/aoi.hpp"

int main() {
  const aoi::DiscretePmf arrivals = aoi::make_geometric(0.125);
  const double mu = 0.25;

  const aoi::QueueSolution sol = aoi::solve_alpha(arrivals, mu);
  std::printf("rho = %.4f  alpha = %.10f  lambda = %.10f\n", sol.rho, sol.alpha, sol.lambda);
  std::printf("exact average AoI = %.10f\n", aoi::exact_average_aoi(arrivals, mu));

  for (int k : {2, 7}) {
    const aoi::AoIBounds b = aoi::aoi_bounds(aoi::exact_moments(arrivals, k), sol, k);
    std::printf("K = %d: [%.6f, %.6f]  sources %s / %s%s\n", k, b.lower, b.upper, b.lower_source.str().c_str(),
                b.upper_source.str().c_str(), b.diverging ? "  (series diverging)" : "");
  }

  aoi::SimConfig cfg;
  cfg.dist = arrivals;
  cfg.mu = mu;
  cfg.horizon = 2000000;
  cfg.seed = 7;
  const aoi::SimResult r = aoi::run_simulation(cfg);
  std::printf("simulated average AoI = %.6f over %lld blocks\n", r.avg_aoi,
              static_cast<long long>(r.window_blocks));
  return 0;
}
