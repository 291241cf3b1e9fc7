// SPDX-License-Identifier: Apache-2.0
#pragma once

// Right-preconditioned GMRES with modified Gram-Schmidt and no restart, for
// real or complex scalars. Starts from x = 0. The Krylov basis V is stored;
// the preconditioned directions are not, so the solution is formed as
// x = P^{-1} (V y) with one extra preconditioner application at exit.

#include "spirk/error.hpp"
#include "spirk/kernels.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace spirk {

struct GmresConfig
{
  double rel_tol = 1e-12;
  int max_iter = 200;
};

struct KrylovReport
{
  int iterations = 0;
  // Residual norm after each iteration (index 0 = initial residual). Entries
  // are the Givens estimates; the last one is replaced by the recomputed
  // true residual at exit.
  std::vector<double> residual_history;
  bool converged = false;
  double reduction_achieved = 0.0;  // final / initial residual
  double final_estimate = 0.0;      // Givens estimate before recomputation
  double final_true_residual = 0.0;
  int preconditioner_applications = 0;
  bool breakdown = false;
};

template <typename T>
struct LinearOps
{
  using Map = std::function<void(std::span<const T>, std::span<T>)>;
  Map apply_a;
  Map apply_pinv;  // empty: identity
  // Inner product, conjugate-linear in the first argument. Empty: local sum.
  std::function<T(std::span<const T>, std::span<const T>)> dot;
};

namespace detail {

inline double conj_of(double x) { return x; }
inline std::complex<double> conj_of(std::complex<double> x) { return std::conj(x); }

template <typename T>
T local_dot(std::span<const T> a, std::span<const T> b)
{
  if constexpr (std::is_same_v<T, double>)
    return kernels::dot(a, b);
  else
  {
    T s{};
    for (std::size_t i = 0; i < a.size(); ++i)
      s += std::conj(a[i]) * b[i];
    return s;
  }
}

template <typename T>
void axpy(T a, std::span<const T> x, std::span<T> y)
{
  if constexpr (std::is_same_v<T, double>)
    kernels::axpy(a, x, y);
  else
    for (std::size_t i = 0; i < x.size(); ++i)
      y[i] += a * x[i];
}

template <typename T>
bool finite(T v)
{
  if constexpr (std::is_same_v<T, double>)
    return std::isfinite(v);
  else
    return std::isfinite(v.real()) && std::isfinite(v.imag());
}

}  // namespace detail

template <typename T>
KrylovReport gmres(const LinearOps<T> &ops, std::span<const T> rhs, std::span<T> x,
                   const GmresConfig &config = {})
{
  if (x.size() != rhs.size())
    throw DimensionError("gmres: solution and right-hand side lengths differ");
  if (!(config.rel_tol > 0.0 && config.rel_tol < 1.0))
    throw ConfigError("gmres: relative tolerance must lie in (0, 1)");
  const std::size_t n = rhs.size();
  auto dot = [&](std::span<const T> a, std::span<const T> b) {
    return ops.dot ? ops.dot(a, b) : detail::local_dot<T>(a, b);
  };
  auto norm = [&](std::span<const T> a) { return std::sqrt(std::abs(dot(a, a))); };
  auto precondition = [&](std::span<const T> in, std::span<T> out, KrylovReport &rep) {
    ++rep.preconditioner_applications;
    if (ops.apply_pinv)
      ops.apply_pinv(in, out);
    else
      std::copy(in.begin(), in.end(), out.begin());
  };

  KrylovReport rep;
  std::fill(x.begin(), x.end(), T{});
  const double beta = norm(rhs);
  if (!std::isfinite(beta))
    throw NumericalError("gmres: right-hand side is not finite");
  rep.residual_history.push_back(beta);
  if (beta == 0.0)
  {
    rep.converged = true;
    return rep;
  }

  const int m = config.max_iter;
  std::vector<std::vector<T>> v;
  v.reserve(static_cast<std::size_t>(m) + 1);
  v.emplace_back(rhs.begin(), rhs.end());
  for (auto &e : v[0])
    e /= beta;
  std::vector<std::vector<T>> h;  // columns of the Hessenberg matrix
  std::vector<double> cs;
  std::vector<T> sn;
  std::vector<T> g{T(beta)};
  std::vector<T> z(n), w(n);
  const double target = config.rel_tol * beta;

  int k = 0;
  while (k < m)
  {
    precondition(v[static_cast<std::size_t>(k)], z, rep);
    ops.apply_a(z, w);
    std::vector<T> col(static_cast<std::size_t>(k) + 2, T{});
    for (int i = 0; i <= k; ++i)
    {
      const T hij = dot(v[static_cast<std::size_t>(i)], w);
      col[static_cast<std::size_t>(i)] = hij;
      detail::axpy<T>(-hij, v[static_cast<std::size_t>(i)], w);
    }
    const double hnext = norm(w);
    if (!std::isfinite(hnext))
      throw NumericalError("gmres: non-finite value in iteration " + std::to_string(k + 1));
    col[static_cast<std::size_t>(k) + 1] = T(hnext);

    for (int i = 0; i < k; ++i)
    {
      const T a = col[static_cast<std::size_t>(i)];
      const T b = col[static_cast<std::size_t>(i) + 1];
      col[static_cast<std::size_t>(i)] = cs[static_cast<std::size_t>(i)] * a + sn[static_cast<std::size_t>(i)] * b;
      col[static_cast<std::size_t>(i) + 1] =
        -detail::conj_of(sn[static_cast<std::size_t>(i)]) * a + cs[static_cast<std::size_t>(i)] * b;
    }
    const T a = col[static_cast<std::size_t>(k)];
    const double aa = std::abs(a);
    const double r = std::hypot(aa, hnext);
    double c = 0.0;
    T s = T(1.0);
    if (aa > 0.0)
    {
      c = aa / r;
      s = (a / aa) * (hnext / r);
    }
    cs.push_back(c);
    sn.push_back(s);
    col[static_cast<std::size_t>(k)] = c * a + s * T(hnext);
    col[static_cast<std::size_t>(k) + 1] = T{};
    const T gk = g[static_cast<std::size_t>(k)];
    g[static_cast<std::size_t>(k)] = c * gk;
    g.push_back(-detail::conj_of(s) * gk);
    h.push_back(std::move(col));
    ++k;

    const double res = std::abs(g[static_cast<std::size_t>(k)]);
    rep.residual_history.push_back(res);
    if (res <= target)
    {
      rep.converged = true;
      break;
    }
    if (hnext < 1e-30)
    {
      // Lucky breakdown: the solution lies in the current subspace.
      rep.breakdown = true;
      rep.converged = true;
      break;
    }
    v.emplace_back(w.begin(), w.end());
    for (auto &e : v.back())
      e /= hnext;
  }
  rep.iterations = k;

  // Back substitution for y and x = P^{-1} (V y).
  std::vector<T> y(static_cast<std::size_t>(k));
  for (int i = k; i-- > 0;)
  {
    T s = g[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j)
      s -= h[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(i)] = s / h[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
  }
  std::vector<T> u(n, T{});
  for (int i = 0; i < k; ++i)
    detail::axpy<T>(y[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(i)], u);
  if (k > 0)
    precondition(u, x, rep);

  // True residual.
  ops.apply_a(std::span<const T>(x.data(), n), w);
  for (std::size_t i = 0; i < n; ++i)
  {
    w[i] = rhs[i] - w[i];
    if (!detail::finite(w[i]))
      throw NumericalError("gmres: non-finite residual at exit");
  }
  rep.final_estimate = rep.residual_history.back();
  rep.final_true_residual = norm(w);
  rep.residual_history.back() = rep.final_true_residual;
  rep.reduction_achieved = rep.final_true_residual / beta;
  return rep;
}

}  // namespace spirk
