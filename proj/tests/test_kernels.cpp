#include <omp.h>

#include "doctest.h"
#include "qhd/kernels.hpp"
#include "support.hpp"

using namespace qhd;
namespace ks = qhd::kernels::serial;
namespace kp = qhd::kernels::parallel;
using kernels::cplx;

namespace {

std::vector<cplx> random_complex(std::size_t n, unsigned seed) {
  const auto re = testing::random_values(n, seed);
  const auto im = testing::random_values(n, seed + 1000);
  std::vector<cplx> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = {re[i], im[i]};
  return z;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("parallel sums agree with the serial loop") {
  for (std::size_t n : {1u, 17u, 4096u, 4097u, 100000u}) {
    const auto f = testing::random_values(n, static_cast<unsigned>(n));
    const double s = ks::sum(f), p = kp::sum(f);
    CHECK(std::abs(s - p) <= 1e-14 * std::max(1.0, std::abs(s)) * std::sqrt(double(n)));
    CHECK(kp::sum_squares(f) == doctest::Approx(ks::sum_squares(f)).epsilon(1e-14));
    std::vector<std::uint8_t> mask(n);
    for (std::size_t i = 0; i < n; ++i) mask[i] = i % 3 == 0;
    CHECK(kp::sum_squares(f, mask) == doctest::Approx(ks::sum_squares(f, mask)).epsilon(1e-14));
  }
}

TEST_CASE("parallel reductions do not depend on the thread count") {
  const auto f = testing::random_values(300000, 5);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const double one = kp::sum(f);
  omp_set_num_threads(4);
  const double four = kp::sum(f);
  omp_set_num_threads(saved);
  CHECK(one == four);
}

TEST_CASE("reduce_middle matches serial for every split") {
  const std::size_t n = 8;
  const auto f = testing::random_values(n * n * n * n, 11);
  for (auto [outer, kept, inner] : {std::tuple<std::size_t, std::size_t, std::size_t>{1, 8, 512},
                                    {8, 8, 64},
                                    {64, 8, 8},
                                    {512, 8, 1},
                                    {8, 64, 8}}) {
    std::vector<double> a(kept), b(kept);
    ks::reduce_middle(f, outer, kept, inner, 0.25, a);
    kp::reduce_middle(f, outer, kept, inner, 0.25, b);
    CHECK(testing::max_abs_diff(a, b) <= 1e-14 * outer * inner);
  }
}

TEST_CASE("separable multiply, phase and edge probability agree") {
  const std::size_t n = 16, rank = 3;
  auto base = random_complex(n * n * n, 3);
  const auto fx = random_complex(n, 4), fz = random_complex(n, 5);
  const cplx* factors[] = {fx.data(), nullptr, fz.data()};
  auto a = base, b = base;
  ks::multiply_separable(a, n, factors);
  kp::multiply_separable(b, n, factors);
  CHECK(max_diff(a, b) <= 1e-14);
  // brute force
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t q = (i * n + j) * n + k;
        CHECK(std::abs(a[q] - base[q] * fx[i] * fz[k]) <= 1e-14);
      }

  const auto v = testing::random_values(base.size(), 9);
  a = base;
  b = base;
  ks::apply_phase(a, v, 0.7);
  kp::apply_phase(b, v, 0.7);
  CHECK(max_diff(a, b) <= 1e-15);
  CHECK(std::abs(a[5] - base[5] * std::polar(1.0, -0.7 * v[5])) <= 1e-15);

  const double es = ks::edge_probability(base, n, rank, 2);
  CHECK(kp::edge_probability(base, n, rank, 2) == doctest::Approx(es).epsilon(1e-14));
  double brute = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        auto near = [&](std::size_t x) { return x < 2 || x >= n - 2; };
        if (near(i) || near(j) || near(k)) brute += std::norm(base[(i * n + j) * n + k]);
      }
  CHECK(es == doctest::Approx(brute).epsilon(1e-13));
}
