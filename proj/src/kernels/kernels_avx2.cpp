// SPDX-License-Identifier: Apache-2.0
// Compiled with -mavx2 -mfma; only reached when the CPU reports both.
#include "spirk/kernels.hpp"

#include <immintrin.h>

namespace spirk::kernels::detail {
namespace {

void axpy_avx2(double a, const double *x, double *y, std::size_t n)
{
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
  {
    __m256d y0 = _mm256_loadu_pd(y + i);
    __m256d y1 = _mm256_loadu_pd(y + i + 4);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), y0);
    y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), y1);
    _mm256_storeu_pd(y + i, y0);
    _mm256_storeu_pd(y + i + 4, y1);
  }
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i)
    y[i] += a * x[i];
}

void axpby_avx2(double a, const double *x, double b, double *y, std::size_t n)
{
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
  {
    const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), by));
  }
  for (; i < n; ++i)
    y[i] = a * x[i] + b * y[i];
}

void scale_avx2(double a, double *x, std::size_t n)
{
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i)
    x[i] *= a;
}

double dot_avx2(const double *x, const double *y, std::size_t n)
{
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
  {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4)
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
  s0 = _mm256_add_pd(s0, s1);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, s0);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i)
    s += x[i] * y[i];
  return s;
}

void chebyshev_update_avx2(double c_prev, double c_res, const double *inv_diag,
                           const double *r, double *d, double *x, std::size_t n)
{
  const __m256d vp = _mm256_set1_pd(c_prev);
  const __m256d vr = _mm256_set1_pd(c_res);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
  {
    const __m256d jr = _mm256_mul_pd(_mm256_loadu_pd(inv_diag + i), _mm256_loadu_pd(r + i));
    const __m256d dn = _mm256_fmadd_pd(vp, _mm256_loadu_pd(d + i), _mm256_mul_pd(vr, jr));
    _mm256_storeu_pd(d + i, dn);
    _mm256_storeu_pd(x + i, _mm256_add_pd(_mm256_loadu_pd(x + i), dn));
  }
  for (; i < n; ++i)
  {
    d[i] = c_prev * d[i] + c_res * inv_diag[i] * r[i];
    x[i] += d[i];
  }
}

void small_gemv_avx2(const double *a, const double *x, double *y, std::size_t rows,
                     std::size_t cols)
{
  if (rows % 4 != 0)
  {
    scalar_table.small_gemv(a, x, y, rows, cols);
    return;
  }
  for (std::size_t i = 0; i < rows; i += 4)
  {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < cols; ++j)
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + j * rows + i), _mm256_set1_pd(x[j]), acc);
    _mm256_storeu_pd(y + i, acc);
  }
}

}  // namespace

const KernelTable avx2_table{Isa::avx2,  axpy_avx2, axpby_avx2,     scale_avx2,
                             dot_avx2,   chebyshev_update_avx2,     small_gemv_avx2};

}  // namespace spirk::kernels::detail
