// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "spirk/dense.hpp"
#include "spirk/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace spirk::test {

inline std::vector<double> random_vector(std::mt19937_64 &rng, std::size_t n, double lo = -1.0, double hi = 1.0)
{
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto &x : v)
    x = d(rng);
  return v;
}

inline Matrix random_matrix(std::mt19937_64 &rng, std::size_t r, std::size_t c)
{
  Matrix m(r, c);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (auto &x : m.data())
    x = d(rng);
  return m;
}

inline ComplexMatrix random_complex_matrix(std::mt19937_64 &rng, std::size_t r, std::size_t c)
{
  ComplexMatrix m(r, c);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (auto &x : m.data())
    x = {d(rng), d(rng)};
  return m;
}

inline double max_abs(std::span<const double> v)
{
  double m = 0.0;
  for (double x : v)
    m = std::max(m, std::abs(x));
  return m;
}

inline double max_diff(std::span<const double> a, std::span<const double> b)
{
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double rel_diff(std::span<const double> a, std::span<const double> b)
{
  const double s = max_abs(b);
  return max_diff(a, b) / (s > 0.0 ? s : 1.0);
}

// Dense matrix of a linear map by probing with unit vectors.
inline Matrix assemble(std::size_t n, const std::function<void(const double *, double *)> &apply)
{
  Matrix a(n, n);
  std::vector<double> e(n, 0.0), col(n);
  for (std::size_t j = 0; j < n; ++j)
  {
    e[j] = 1.0;
    apply(e.data(), col.data());
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      a(i, j) = col[i];
  }
  return a;
}

}  // namespace spirk::test
