// Benchmark: OpenMP kernels against their serial reference implementations.
// Times the brute-force profile scan and the M-table fill on synthetic
// instances of growing size and checks the outputs match exactly.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "teamci/solvers.hpp"

using namespace teamci;

namespace {

double now_seconds() {
#ifdef _OPENMP
  return omp_get_wtime();
#else
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
#endif
}

TeamProblem synthetic(std::mt19937_64& rng, std::size_t nx, std::size_t nx0, std::size_t ny,
                      std::size_t nu) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SpacePtr state = FiniteSpace::indexed("state", nx);
  SpacePtr common = FiniteSpace::indexed("common", nx0);

  std::vector<SpacePtr> obs, act;
  std::vector<ObservationChannel> channels;
  for (int i = 0; i < 2; ++i) {
    obs.push_back(FiniteSpace::indexed("y" + std::to_string(i), ny));
    act.push_back(FiniteSpace::indexed("u" + std::to_string(i), nu));
    std::vector<double> density(ny * nx);
    for (std::size_t x = 0; x < nx; ++x) {
      double norm = 0.0;
      std::vector<double> w(ny);
      for (std::size_t y = 0; y < ny; ++y) norm += w[y] = unit(rng) + 0.05;
      for (std::size_t y = 0; y < ny; ++y)
        density[y * nx + x] = w[y] / norm * static_cast<double>(ny);
    }
    channels.push_back({i, Measure::uniform(obs.back()), std::move(density), "table", {}});
  }

  std::vector<double> law(nx * nx0);
  double mass = 0.0;
  for (auto& v : law) mass += v = unit(rng) + 0.05;
  for (auto& v : law) v /= mass;

  std::vector<double> cost(nx * nx0 * ny * ny * nu * nu);
  for (auto& v : cost) v = unit(rng);

  return TeamProblem("bench", state, common, obs, act, std::move(law), std::move(channels),
                     CostSpec::table(std::move(cost)), UINT64_MAX);
}

void bench_brute(std::mt19937_64& rng, std::size_t nx0, std::size_t ny, std::size_t nu) {
  TeamProblem p = synthetic(rng, 3, nx0, ny, nu);
  const std::uint64_t count = deterministic_profile_count(p, UINT64_MAX);

  double t0 = now_seconds();
  SolveResult serial = brute_force_serial(p, UINT64_MAX);
  double t_serial = now_seconds() - t0;

  t0 = now_seconds();
  SolveResult parallel = brute_force(p, UINT64_MAX);
  double t_parallel = now_seconds() - t0;

  std::printf("brute    |X0|=%zu |Y|=%zu |U|=%zu  %12llu profiles  serial %8.3fs  parallel %8.3fs  speedup %5.2fx  diff %g\n",
              nx0, ny, nu, static_cast<unsigned long long>(count), t_serial, t_parallel,
              t_serial / t_parallel, std::abs(serial.value - parallel.value));
}

void bench_reduce(std::mt19937_64& rng, std::size_t ny, std::size_t nu) {
  TeamProblem p = synthetic(rng, 4, 4, ny, nu);
  auto grid = build_lambda_grid(p, {GridOptions::Mode::Deterministic, 1, UINT64_MAX});

  double t0 = now_seconds();
  CentralizedProblem serial = reduce_serial(p, grid);
  double t_serial = now_seconds() - t0;

  t0 = now_seconds();
  CentralizedProblem parallel = reduce(p, grid);
  double t_parallel = now_seconds() - t0;

  double diff = 0.0;
  for (std::size_t k = 0; k < serial.m_table.size(); ++k)
    diff = std::max(diff, std::abs(serial.m_table[k] - parallel.m_table[k]));

  std::printf("reduce   |Y|=%zu |U|=%zu  %8zu-column table      serial %8.3fs  parallel %8.3fs  speedup %5.2fx  diff %g\n",
              ny, nu, grid.size(), t_serial, t_parallel, t_serial / t_parallel, diff);
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = argc > 1 && std::string(argv[1]) == "--quick";
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (no OpenMP)\n");
#endif

  std::mt19937_64 rng(12345);
  bench_brute(rng, 2, 2, 2);
  bench_brute(rng, 2, 2, 3);
  bench_brute(rng, 3, 2, 3);
  if (!quick) {
    bench_brute(rng, 2, 3, 3);
    bench_brute(rng, 3, 3, 3);  // 3^9 x 3^9 profiles
  }

  bench_reduce(rng, 2, 3);
  bench_reduce(rng, 3, 3);
  if (!quick) bench_reduce(rng, 3, 4);
  return 0;
}
