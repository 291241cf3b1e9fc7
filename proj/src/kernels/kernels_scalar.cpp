// SPDX-License-Identifier: Apache-2.0
#include "spirk/kernels.hpp"

namespace spirk::kernels::detail {
namespace {

void axpy_scalar(double a, const double *x, double *y, std::size_t n)
{
  for (std::size_t i = 0; i < n; ++i)
    y[i] += a * x[i];
}

void axpby_scalar(double a, const double *x, double b, double *y, std::size_t n)
{
  for (std::size_t i = 0; i < n; ++i)
    y[i] = a * x[i] + b * y[i];
}

void scale_scalar(double a, double *x, std::size_t n)
{
  for (std::size_t i = 0; i < n; ++i)
    x[i] *= a;
}

double dot_scalar(const double *x, const double *y, std::size_t n)
{
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += x[i] * y[i];
  return s;
}

void chebyshev_update_scalar(double c_prev, double c_res, const double *inv_diag,
                             const double *r, double *d, double *x, std::size_t n)
{
  for (std::size_t i = 0; i < n; ++i)
  {
    d[i] = c_prev * d[i] + c_res * inv_diag[i] * r[i];
    x[i] += d[i];
  }
}

void small_gemv_scalar(const double *a, const double *x, double *y, std::size_t rows,
                       std::size_t cols)
{
  for (std::size_t i = 0; i < rows; ++i)
    y[i] = 0.0;
  for (std::size_t j = 0; j < cols; ++j)
  {
    const double xj = x[j];
    const double *col = a + j * rows;
    for (std::size_t i = 0; i < rows; ++i)
      y[i] += col[i] * xj;
  }
}

}  // namespace

const KernelTable scalar_table{Isa::scalar,   axpy_scalar,      axpby_scalar,
                               scale_scalar,  dot_scalar,       chebyshev_update_scalar,
                               small_gemv_scalar};

}  // namespace spirk::kernels::detail
