#pragma once

// Hot loops shared by the calculus, propagator and reduction layers.
//
// Every kernel exists twice. `serial` is the plain reference loop and is what
// the unit tests compare against; `parallel` is the OpenMP version the library
// actually calls. The parallel reductions use fixed-size blocks combined in
// block order, so their result does not depend on the thread count.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>

namespace qhd::kernels {

using cplx = std::complex<double>;

/// Blocks used by the deterministic parallel reductions.
inline constexpr std::size_t reduction_block = 4096;

namespace serial {

double sum(std::span<const double> f);
/// Σ f² over points whose mask byte is zero; an empty mask selects every point.
double sum_squares(std::span<const double> f, std::span<const std::uint8_t> mask = {});
/// out[k] = scale · Σ_{o,i} in[(o·kept + k)·inner + i]
void reduce_middle(std::span<const double> in, std::size_t outer, std::size_t kept,
                   std::size_t inner, double scale, std::span<double> out);
/// data[Q] *= Π_a factors[a][index_a(Q)] on a rank-d cube of side n, with
/// axis 0 slowest. A null factor pointer means that axis is left alone.
void multiply_separable(std::span<cplx> data, std::size_t n,
                        std::span<const cplx* const> factors);
/// psi[Q] *= exp(-i · scale · v[Q])
void apply_phase(std::span<cplx> psi, std::span<const double> v, double scale);
/// Σ |psi|² over points within `margin` cells of any face of the cube.
double edge_probability(std::span<const cplx> psi, std::size_t n, std::size_t rank,
                        std::size_t margin);

}  // namespace serial

namespace parallel {

double sum(std::span<const double> f);
double sum_squares(std::span<const double> f, std::span<const std::uint8_t> mask = {});
void reduce_middle(std::span<const double> in, std::size_t outer, std::size_t kept,
                   std::size_t inner, double scale, std::span<double> out);
void multiply_separable(std::span<cplx> data, std::size_t n,
                        std::span<const cplx* const> factors);
void apply_phase(std::span<cplx> psi, std::span<const double> v, double scale);
double edge_probability(std::span<const cplx> psi, std::size_t n, std::size_t rank,
                        std::size_t margin);

}  // namespace parallel

/// Number of OpenMP threads the parallel kernels will use.
int thread_count();

}  // namespace qhd::kernels
