#include "qhd/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <vector>

namespace qhd::kernels {

namespace {

bool near_edge(std::size_t flat, std::size_t n, std::size_t rank, std::size_t margin) {
  for (std::size_t a = 0; a < rank; ++a) {
    const std::size_t i = flat % n;
    if (i < margin || i + margin >= n) return true;
    flat /= n;
  }
  return false;
}

std::size_t block_count(std::size_t size) {
  return (size + reduction_block - 1) / reduction_block;
}

double combine(const std::vector<double>& partial) {
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace

int thread_count() { return omp_get_max_threads(); }

// --- reference loops -------------------------------------------------------

namespace serial {

double sum(std::span<const double> f) {
  double s = 0.0;
  for (double x : f) s += x;
  return s;
}

double sum_squares(std::span<const double> f, std::span<const std::uint8_t> mask) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!mask.empty() && mask[i]) continue;
    s += f[i] * f[i];
  }
  return s;
}

void reduce_middle(std::span<const double> in, std::size_t outer, std::size_t kept,
                   std::size_t inner, double scale, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t k = 0; k < kept; ++k) {
      const double* row = in.data() + (o * kept + k) * inner;
      for (std::size_t i = 0; i < inner; ++i) out[k] += row[i];
    }
  for (auto& x : out) x *= scale;
}

void multiply_separable(std::span<cplx> data, std::size_t n,
                        std::span<const cplx* const> factors) {
  const std::size_t rank = factors.size();
  for (std::size_t q = 0; q < data.size(); ++q) {
    std::size_t rest = q;
    cplx f{1.0, 0.0};
    for (std::size_t a = rank; a-- > 0;) {
      if (factors[a]) f *= factors[a][rest % n];
      rest /= n;
    }
    data[q] *= f;
  }
}

void apply_phase(std::span<cplx> psi, std::span<const double> v, double scale) {
  for (std::size_t q = 0; q < psi.size(); ++q) psi[q] *= std::polar(1.0, -scale * v[q]);
}

double edge_probability(std::span<const cplx> psi, std::size_t n, std::size_t rank,
                        std::size_t margin) {
  double s = 0.0;
  for (std::size_t q = 0; q < psi.size(); ++q)
    if (near_edge(q, n, rank, margin)) s += std::norm(psi[q]);
  return s;
}

}  // namespace serial

// --- OpenMP versions -------------------------------------------------------

namespace parallel {

double sum(std::span<const double> f) {
  const std::size_t blocks = block_count(f.size());
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t end = std::min(f.size(), (b + 1) * reduction_block);
    double s = 0.0;
    for (std::size_t i = b * reduction_block; i < end; ++i) s += f[i];
    partial[b] = s;
  }
  return combine(partial);
}

double sum_squares(std::span<const double> f, std::span<const std::uint8_t> mask) {
  const std::size_t blocks = block_count(f.size());
  std::vector<double> partial(blocks, 0.0);
  const bool masked = !mask.empty();
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t end = std::min(f.size(), (b + 1) * reduction_block);
    double s = 0.0;
    for (std::size_t i = b * reduction_block; i < end; ++i) {
      if (masked && mask[i]) continue;
      s += f[i] * f[i];
    }
    partial[b] = s;
  }
  return combine(partial);
}

void reduce_middle(std::span<const double> in, std::size_t outer, std::size_t kept,
                   std::size_t inner, double scale, std::span<double> out) {
  // One output point per iteration keeps the summation order fixed.
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < kept; ++k) {
    double s = 0.0;
    for (std::size_t o = 0; o < outer; ++o) {
      const double* row = in.data() + (o * kept + k) * inner;
      for (std::size_t i = 0; i < inner; ++i) s += row[i];
    }
    out[k] = s * scale;
  }
}

void multiply_separable(std::span<cplx> data, std::size_t n,
                        std::span<const cplx* const> factors) {
  const std::size_t rank = factors.size();
  const std::size_t size = data.size();
  // The last axis is contiguous: hoist the factor product of the slower axes.
  const std::size_t lines = size / n;
  const cplx* last = factors[rank - 1];
#pragma omp parallel for schedule(static)
  for (std::size_t line = 0; line < lines; ++line) {
    std::size_t rest = line;
    cplx f{1.0, 0.0};
    for (std::size_t a = rank - 1; a-- > 0;) {
      if (factors[a]) f *= factors[a][rest % n];
      rest /= n;
    }
    cplx* row = data.data() + line * n;
    if (last) {
      for (std::size_t i = 0; i < n; ++i) row[i] *= f * last[i];
    } else {
      for (std::size_t i = 0; i < n; ++i) row[i] *= f;
    }
  }
}

void apply_phase(std::span<cplx> psi, std::span<const double> v, double scale) {
  const std::size_t size = psi.size();
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < size; ++q) psi[q] *= std::polar(1.0, -scale * v[q]);
}

double edge_probability(std::span<const cplx> psi, std::size_t n, std::size_t rank,
                        std::size_t margin) {
  const std::size_t blocks = block_count(psi.size());
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t end = std::min(psi.size(), (b + 1) * reduction_block);
    double s = 0.0;
    for (std::size_t q = b * reduction_block; q < end; ++q)
      if (near_edge(q, n, rank, margin)) s += std::norm(psi[q]);
    partial[b] = s;
  }
  return combine(partial);
}

}  // namespace parallel

}  // namespace qhd::kernels
