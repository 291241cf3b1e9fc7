// SPDX-License-Identifier: Apache-2.0
// aarch64 only; NEON is part of the base ISA there.
#include "spirk/kernels.hpp"

#include <arm_neon.h>

namespace spirk::kernels::detail {
namespace {

void axpy_neon(double a, const double *x, double *y, std::size_t n)
{
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i)
    y[i] += a * x[i];
}

void axpby_neon(double a, const double *x, double b, double *y, std::size_t n)
{
  const float64x2_t va = vdupq_n_f64(a);
  const float64x2_t vb = vdupq_n_f64(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vmulq_f64(vb, vld1q_f64(y + i)), va, vld1q_f64(x + i)));
  for (; i < n; ++i)
    y[i] = a * x[i] + b * y[i];
}

void scale_neon(double a, double *x, std::size_t n)
{
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i)
    x[i] *= a;
}

double dot_neon(const double *x, const double *y, std::size_t n)
{
  float64x2_t s0 = vdupq_n_f64(0.0);
  float64x2_t s1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
  {
    s0 = vfmaq_f64(s0, vld1q_f64(x + i), vld1q_f64(y + i));
    s1 = vfmaq_f64(s1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(s0, s1));
  for (; i < n; ++i)
    s += x[i] * y[i];
  return s;
}

void chebyshev_update_neon(double c_prev, double c_res, const double *inv_diag,
                           const double *r, double *d, double *x, std::size_t n)
{
  const float64x2_t vp = vdupq_n_f64(c_prev);
  const float64x2_t vr = vdupq_n_f64(c_res);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
  {
    const float64x2_t jr = vmulq_f64(vld1q_f64(inv_diag + i), vld1q_f64(r + i));
    const float64x2_t dn = vfmaq_f64(vmulq_f64(vr, jr), vp, vld1q_f64(d + i));
    vst1q_f64(d + i, dn);
    vst1q_f64(x + i, vaddq_f64(vld1q_f64(x + i), dn));
  }
  for (; i < n; ++i)
  {
    d[i] = c_prev * d[i] + c_res * inv_diag[i] * r[i];
    x[i] += d[i];
  }
}

void small_gemv_neon(const double *a, const double *x, double *y, std::size_t rows,
                     std::size_t cols)
{
  if (rows % 2 != 0)
  {
    scalar_table.small_gemv(a, x, y, rows, cols);
    return;
  }
  for (std::size_t i = 0; i < rows; i += 2)
  {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t j = 0; j < cols; ++j)
      acc = vfmaq_n_f64(acc, vld1q_f64(a + j * rows + i), x[j]);
    vst1q_f64(y + i, acc);
  }
}

}  // namespace

const KernelTable neon_table{Isa::neon, axpy_neon, axpby_neon,        scale_neon,
                             dot_neon,  chebyshev_update_neon,        small_gemv_neon};

}  // namespace spirk::kernels::detail
