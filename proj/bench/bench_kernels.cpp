// Serial reference loops against their OpenMP counterparts on a 4-axis grid.
//
//   bench_kernels [points-per-axis] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <vector>

#include "qhd/kernels.hpp"

namespace ks = qhd::kernels::serial;
namespace kp = qhd::kernels::parallel;
using qhd::kernels::cplx;

namespace {

double best_of(int repeats, const std::function<void()>& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

volatile double sink = 0.0;

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 32;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;
  const std::size_t rank = 4, size = n * n * n * n;

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> f(size), v(size), out(n);
  std::vector<cplx> psi(size), factor(n);
  for (std::size_t i = 0; i < size; ++i) {
    f[i] = u(rng);
    v[i] = u(rng);
    psi[i] = {u(rng), u(rng)};
  }
  for (auto& x : factor) x = std::polar(1.0, u(rng));
  const cplx* factors[] = {factor.data(), factor.data(), factor.data(), factor.data()};

  std::printf("grid %zu^%zu = %zu points, %d threads, best of %d\n", n, rank, size, qhd::kernels::thread_count(),
              repeats);
  std::printf("%-20s %12s %12s %8s\n", "kernel", "serial [ms]", "parallel [ms]", "speedup");
  auto row = [&](const char* name, const std::function<void()>& s, const std::function<void()>& p) {
    const double ts = best_of(repeats, s), tp = best_of(repeats, p);
    std::printf("%-20s %12.3f %12.3f %8.2f\n", name, 1e3 * ts, 1e3 * tp, ts / tp);
  };
  row("sum_squares", [&] { sink = ks::sum_squares(f); }, [&] { sink = kp::sum_squares(f); });
  row("reduce_middle", [&] { ks::reduce_middle(f, n, n, n * n, 1.0, out); },
      [&] { kp::reduce_middle(f, n, n, n * n, 1.0, out); });
  row("multiply_separable", [&] { ks::multiply_separable(psi, n, factors); },
      [&] { kp::multiply_separable(psi, n, factors); });
  row("apply_phase", [&] { ks::apply_phase(psi, v, 0.01); }, [&] { kp::apply_phase(psi, v, 0.01); });
  row("edge_probability", [&] { sink = ks::edge_probability(psi, n, rank, 2); },
      [&] { sink = kp::edge_probability(psi, n, rank, 2); });
  return 0;
}
