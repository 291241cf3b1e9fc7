// SPDX-License-Identifier: Apache-2.0
#pragma once

// Vector kernels used by every inner loop of the solver stack: Krylov
// updates, Chebyshev smoothing, tensor combines and element operators.
//
// Each kernel has a scalar reference implementation and, where the target
// allows it, an AVX2/FMA (x86-64) or NEON (aarch64) variant. The variant is
// selected once at runtime from the CPU capabilities; SPIRK_ISA=scalar|avx2|neon
// forces a specific table. All variants are equivalence-tested against the
// scalar reference.

#include <cstddef>
#include <span>
#include <string_view>

namespace spirk::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa);

struct KernelTable
{
  Isa isa;

  // y += a * x
  void (*axpy)(double a, const double *x, double *y, std::size_t n);
  // y = a * x + b * y
  void (*axpby)(double a, const double *x, double b, double *y, std::size_t n);
  // x *= a
  void (*scale)(double a, double *x, std::size_t n);
  double (*dot)(const double *x, const double *y, std::size_t n);
  // d = c_prev * d + c_res * inv_diag .* r;  x += d
  void (*chebyshev_update)(double c_prev, double c_res, const double *inv_diag,
                           const double *r, double *d, double *x, std::size_t n);
  // y = A x for a dense column-major rows x cols block (element matrices).
  void (*small_gemv)(const double *a, const double *x, double *y, std::size_t rows,
                     std::size_t cols);
};

bool supported(Isa isa);

// Throws ConfigError when the ISA is not available on this CPU/build.
const KernelTable &table(Isa isa);

// Table used by the library; chosen on first call.
const KernelTable &active();

inline void axpy(double a, std::span<const double> x, std::span<double> y)
{
  active().axpy(a, x.data(), y.data(), y.size());
}

inline void axpby(double a, std::span<const double> x, double b, std::span<double> y)
{
  active().axpby(a, x.data(), b, y.data(), y.size());
}

inline void scale(double a, std::span<double> x) { active().scale(a, x.data(), x.size()); }

inline double dot(std::span<const double> x, std::span<const double> y)
{
  return active().dot(x.data(), y.data(), x.size());
}

namespace detail {
extern const KernelTable scalar_table;
#if defined(SPIRK_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
#if defined(SPIRK_HAVE_NEON)
extern const KernelTable neon_table;
#endif
}  // namespace detail

}  // namespace spirk::kernels
