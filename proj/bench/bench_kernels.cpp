// Serial reference vs OpenMP kernels: split-tree build and a converge sweep.
//
//   bench_kernels [length] [replicas]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "gibbslz/config.hpp"
#include "gibbslz/experiment.hpp"
#include "gibbslz/sampler.hpp"
#include "gibbslz/split_tree.hpp"

using namespace gibbslz;

template <class F>
double seconds(F&& f, int reps = 3) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

int main(int argc, char** argv) {
  const std::size_t length = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 65536;
  const std::size_t replicas = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 8;
  std::printf("threads available: %d\n", omp_get_max_threads());

  for (const char* stats : {"fermi", "bose"}) {
    const EnsembleSpec spec{parse_statistics(stats), 1.0, std::string(stats) == "fermi" ? 1.0 : -0.5,
                            Dispersion::cosine_lattice()};
    const auto marginals = site_marginals(spec, length);
    const std::size_t n = choose_n({particle_density(spec)}, length);
    const double ts = seconds([&] { SplitTree::build_serial(marginals, n); });
    const double tp = seconds([&] { SplitTree::build(marginals, n); });
    std::printf("split_tree %-5s l=%zu n=%zu  serial %.4fs  parallel %.4fs  speedup %.2f\n", stats,
                length, n, ts, tp, ts / tp);
  }

  const ExperimentConfig cfg = parse_config(
      "ensemble.stats = fermi\nensemble.density = 0.5\nrun.kind = both\nrun.lengths = " +
      std::to_string(length) + "\nrun.replicas = " + std::to_string(replicas) + "\n");
  const double ts = seconds([&] { run_converge_serial(cfg); }, 1);
  const double tp = seconds([&] { run_converge(cfg, 0); }, 1);
  std::printf("converge l=%zu replicas=%zu  serial %.3fs  parallel %.3fs  speedup %.2f\n", length,
              replicas, ts, tp, ts / tp);
  return 0;
}
