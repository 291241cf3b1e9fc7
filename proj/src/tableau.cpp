// SPDX-License-Identifier: Apache-2.0
#include "spirk/tableau.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace spirk {
namespace {

using cplx = std::complex<double>;
// Extended precision for the eigen-decomposition of A^{-1}.
using xreal = long double;
using xcplx = std::complex<xreal>;
using XMatrix = DenseMatrix<xcplx>;

// P_n(x) by the three-term recurrence.
double legendre(int n, double x)
{
  if (n == 0)
    return 1.0;
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k)
  {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

// Right Radau polynomial on [0,1]; its zeros are the Radau IIA nodes.
double radau_right(int stages, double x)
{
  const double t = 2.0 * x - 1.0;
  return legendre(stages, t) - legendre(stages - 1, t);
}

double bisect(int stages, double lo, double hi)
{
  double flo = radau_right(stages, lo);
  for (int it = 0; it < 200; ++it)
  {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo < 1e-16)
      break;
    const double fmid = radau_right(stages, mid);
    if (fmid == 0.0)
      return mid;
    if ((fmid < 0.0) == (flo < 0.0))
    {
      lo = mid;
      flo = fmid;
    }
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> radau_nodes(int stages)
{
  std::vector<double> nodes;
  constexpr int samples = 8192;
  double prev_x = 0.0;
  double prev_f = radau_right(stages, prev_x);
  for (int s = 1; s < samples; ++s)
  {
    const double x = static_cast<double>(s) / samples;
    const double f = radau_right(stages, x);
    if ((f < 0.0) != (prev_f < 0.0))
      nodes.push_back(bisect(stages, prev_x, x));
    prev_x = x;
    prev_f = f;
  }
  nodes.push_back(1.0);
  if (static_cast<int>(nodes.size()) != stages)
    throw SpectralError("radau_iia: located " + std::to_string(nodes.size()) +
                        " nodes, expected " + std::to_string(stages));
  return nodes;
}

// Monomial coefficients (ascending) of the j-th Lagrange basis polynomial.
std::vector<double> lagrange_coefficients(const std::vector<double> &nodes, std::size_t j)
{
  std::vector<double> coef{1.0};
  for (std::size_t m = 0; m < nodes.size(); ++m)
  {
    if (m == j)
      continue;
    const double denom = nodes[j] - nodes[m];
    std::vector<double> next(coef.size() + 1, 0.0);
    for (std::size_t k = 0; k < coef.size(); ++k)
    {
      next[k + 1] += coef[k] / denom;
      next[k] -= coef[k] * nodes[m] / denom;
    }
    coef = std::move(next);
  }
  return coef;
}

double integrate_monomials(const std::vector<double> &coef, double upper)
{
  // Horner on  sum_k coef_k x^{k+1} / (k+1).
  double acc = 0.0;
  for (std::size_t k = coef.size(); k-- > 0;)
    acc = acc * upper + coef[k] / static_cast<double>(k + 1);
  return acc * upper;
}

// One step of residual correction X <- X + X (I - A X).
Matrix refine_inverse(const Matrix &a, Matrix x)
{
  const std::size_t n = a.rows();
  Matrix r = Matrix::identity(n) - a * x;
  return x + x * r;
}

void reduce_to_hessenberg(XMatrix &h)
{
  const std::size_t n = h.rows();
  for (std::size_t k = 0; k + 2 < n; ++k)
  {
    xreal alpha = 0.0;
    for (std::size_t i = k + 1; i < n; ++i)
      alpha += std::norm(h(i, k));
    alpha = std::sqrt(alpha);
    if (alpha == 0.0)
      continue;
    std::vector<xcplx> v(n, 0.0);
    const xcplx x0 = h(k + 1, k);
    const xcplx phase = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : xcplx(1.0);
    v[k + 1] = x0 + phase * alpha;
    for (std::size_t i = k + 2; i < n; ++i)
      v[i] = h(i, k);
    xreal vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i)
      vnorm2 += std::norm(v[i]);
    if (vnorm2 == 0.0)
      continue;
    // H <- (I - 2 v v^*/|v|^2) H (I - 2 v v^*/|v|^2)
    for (std::size_t j = 0; j < n; ++j)
    {
      xcplx s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i)
        s += std::conj(v[i]) * h(i, j);
      s *= 2.0 / vnorm2;
      for (std::size_t i = k + 1; i < n; ++i)
        h(i, j) -= v[i] * s;
    }
    for (std::size_t i = 0; i < n; ++i)
    {
      xcplx s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j)
        s += h(i, j) * v[j];
      s *= 2.0 / vnorm2;
      for (std::size_t j = k + 1; j < n; ++j)
        h(i, j) -= s * std::conj(v[j]);
    }
  }
}

// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR with
// Wilkinson shifts and deflation from the bottom.
std::vector<xcplx> hessenberg_qr_eigenvalues(XMatrix h)
{
  const int n = static_cast<int>(h.rows());
  std::vector<xcplx> eig(n);
  const xreal eps = std::numeric_limits<xreal>::epsilon();
  int hi = n - 1;
  int iter = 0;
  int since_deflation = 0;
  const int budget = 100 * std::max(n, 1);
  while (hi >= 0)
  {
    int l = hi;
    while (l > 0)
    {
      const xreal off = std::abs(h(l, l - 1));
      const xreal diag = std::abs(h(l, l)) + std::abs(h(l - 1, l - 1));
      if (off <= eps * diag || off < 1e-300)
      {
        h(l, l - 1) = 0.0;
        break;
      }
      --l;
    }
    if (l == hi)
    {
      eig[hi] = h(hi, hi);
      --hi;
      since_deflation = 0;
      continue;
    }
    if (++iter > budget)
      throw SpectralError("spectral_complex: QR iteration did not converge");
    ++since_deflation;

    // Wilkinson shift from the trailing 2x2 block.
    const xcplx a = h(hi - 1, hi - 1);
    const xcplx b = h(hi - 1, hi);
    const xcplx c = h(hi, hi - 1);
    const xcplx d = h(hi, hi);
    const xcplx tr = a + d;
    const xcplx det = a * d - b * c;
    const xcplx disc = std::sqrt(tr * tr / 4.0L - det);
    const xcplx mu1 = tr / 2.0L + disc;
    const xcplx mu2 = tr / 2.0L - disc;
    xcplx mu = std::abs(mu1 - d) < std::abs(mu2 - d) ? mu1 : mu2;
    if (since_deflation % 11 == 10)
      mu = d + xcplx(std::abs(c), 0.0);  // exceptional shift

    // QR step on the active window [l, hi] using Givens rotations.
    std::vector<xcplx> cs(hi - l), sn(hi - l);
    for (int k = l; k <= hi; ++k)
      h(k, k) -= mu;
    for (int k = l; k < hi; ++k)
    {
      const xcplx x = h(k, k);
      const xcplx y = h(k + 1, k);
      const xreal r = std::hypot(std::abs(x), std::abs(y));
      xcplx cc = 1.0, ss = 0.0;
      if (r > 0.0)
      {
        cc = x / r;
        ss = y / r;
      }
      cs[k - l] = cc;
      sn[k - l] = ss;
      // Apply G^* = [conj(c) conj(s); -s c] to rows k, k+1.
      for (int j = k; j <= hi; ++j)
      {
        const xcplx t1 = h(k, j);
        const xcplx t2 = h(k + 1, j);
        h(k, j) = std::conj(cc) * t1 + std::conj(ss) * t2;
        h(k + 1, j) = -ss * t1 + cc * t2;
      }
    }
    for (int k = l; k < hi; ++k)
    {
      const xcplx cc = cs[k - l];
      const xcplx ss = sn[k - l];
      // Apply G to columns k, k+1 from the right.
      for (int i = l; i <= std::min(k + 2, hi); ++i)
      {
        const xcplx t1 = h(i, k);
        const xcplx t2 = h(i, k + 1);
        h(i, k) = t1 * cc + t2 * ss;
        h(i, k + 1) = -t1 * std::conj(ss) + t2 * std::conj(cc);
      }
    }
    for (int k = l; k <= hi; ++k)
      h(k, k) += mu;
  }
  return eig;
}

// Eigenvector for `lambda` by inverse iteration with a slightly perturbed shift.
std::vector<xcplx> eigenvector(const XMatrix &a, xcplx lambda)
{
  const std::size_t n = a.rows();
  const xcplx shift = lambda + xcplx(1e-15L, 1e-15L) * (1.0L + std::abs(lambda));
  XMatrix shifted = a;
  for (std::size_t i = 0; i < n; ++i)
    shifted(i, i) -= shift;
  LuSolver<xcplx> lu(shifted);
  std::vector<xcplx> v(n, xcplx(1.0L, 0.0L));
  for (std::size_t i = 0; i < n; ++i)
    v[i] += 0.01 * static_cast<xreal>(i);
  for (int it = 0; it < 3; ++it)
  {
    lu.solve_in_place(v);
    xreal m = 0.0;
    for (const auto &x : v)
      m = std::max(m, std::abs(x));
    for (auto &x : v)
      x /= m;
  }
  xreal m = 0.0;
  for (const auto &x : v)
    m = std::max(m, std::abs(x));
  for (const auto &x : v)
    if (std::abs(x) > 1e-8 * m)
    {
      const xcplx first = x;
      for (auto &y : v)
        y /= first;
      break;
    }
  return v;
}

}  // namespace

ButcherTableau radau_iia(int stages)
{
  if (stages < 1 || stages > kMaxStages)
    throw ConfigError("radau_iia: unsupported stage count " + std::to_string(stages) +
                      " (expected 1.." + std::to_string(kMaxStages) + ")");
  ButcherTableau t;
  t.stages = stages;
  t.c = radau_nodes(stages);
  const auto q = static_cast<std::size_t>(stages);
  t.a = Matrix(q, q);
  t.b.assign(q, 0.0);
  for (std::size_t j = 0; j < q; ++j)
  {
    const auto coef = lagrange_coefficients(t.c, j);
    for (std::size_t i = 0; i < q; ++i)
      t.a(i, j) = integrate_monomials(coef, t.c[i]);
    t.b[j] = integrate_monomials(coef, 1.0);
  }
  t.a_inv = refine_inverse(t.a, inverse(t.a));
  return t;
}

TriangularFactors crout_lu(const Matrix &a)
{
  if (!a.square())
    throw DimensionError("crout_lu: matrix is not square");
  const std::size_t n = a.rows();
  TriangularFactors f{Matrix(n, n), Matrix::identity(n)};
  double scale = 0.0;
  for (const double v : a.data())
    scale = std::max(scale, std::abs(v));
  for (std::size_t j = 0; j < n; ++j)
  {
    for (std::size_t i = j; i < n; ++i)
    {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k)
        s -= f.lower(i, k) * f.upper(k, j);
      f.lower(i, j) = s;
    }
    const double pivot = f.lower(j, j);
    if (!(std::abs(pivot) > 1e-14 * scale))
      throw FactorizationError("crout_lu: zero pivot at index " + std::to_string(j),
                               static_cast<int>(j));
    for (std::size_t i = j + 1; i < n; ++i)
    {
      double s = a(j, i);
      for (std::size_t k = 0; k < j; ++k)
        s -= f.lower(j, k) * f.upper(k, i);
      f.upper(j, i) = s / pivot;
    }
  }
  return f;
}

RealSpectralFactors spectral_real(const Matrix &lower)
{
  if (!lower.square())
    throw DimensionError("spectral_real: matrix is not square");
  const std::size_t n = lower.rows();
  RealSpectralFactors f;
  f.lambdas.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    f.lambdas[i] = lower(i, i);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
    {
      const double gap = std::abs(f.lambdas[i] - f.lambdas[j]);
      const double mag = std::max(std::abs(f.lambdas[i]), std::abs(f.lambdas[j]));
      if (gap <= 1e-10 * mag)
        throw SpectralError("spectral_real: degenerate spectrum, diagonal entries " +
                            std::to_string(i) + " and " + std::to_string(j) + " coincide");
    }

  // Accumulate in extended precision; the basis is badly conditioned for
  // large stage counts and the rounding of the stored factors dominates.
  using real_t = long double;
  std::vector<real_t> s(n * n, 0.0L), sinv(n * n, 0.0L);
  for (std::size_t k = 0; k < n; ++k)
  {
    const real_t lambda = lower(k, k);
    s[k * n + k] = 1.0L;
    for (std::size_t i = k + 1; i < n; ++i)
    {
      real_t acc = 0.0L;
      for (std::size_t j = k; j < i; ++j)
        acc += static_cast<real_t>(lower(i, j)) * s[j * n + k];
      s[i * n + k] = -acc / (static_cast<real_t>(lower(i, i)) - lambda);
    }
  }
  // Unit lower triangular inverse by forward substitution.
  for (std::size_t k = 0; k < n; ++k)
  {
    sinv[k * n + k] = 1.0L;
    for (std::size_t i = k + 1; i < n; ++i)
    {
      real_t acc = 0.0L;
      for (std::size_t j = k; j < i; ++j)
        acc += s[i * n + j] * sinv[j * n + k];
      sinv[i * n + k] = -acc;
    }
  }
  f.basis = Matrix(n, n);
  f.basis_inv = Matrix(n, n);
  for (std::size_t i = 0; i < n * n; ++i)
  {
    f.basis.data()[i] = static_cast<double>(s[i]);
    f.basis_inv.data()[i] = static_cast<double>(sinv[i]);
  }
  return f;
}

ComplexSpectralFactors spectral_complex(const Matrix &a)
{
  if (!a.square())
    throw DimensionError("spectral_complex: matrix is not square");
  const std::size_t n = a.rows();
  XMatrix ax(n, n);
  for (std::size_t i = 0; i < n * n; ++i)
    ax.data()[i] = xcplx(a.data()[i], 0.0L);
  XMatrix h = ax;
  reduce_to_hessenberg(h);
  const auto raw = hessenberg_qr_eigenvalues(h);

  xreal scale = 0.0L;
  for (const auto &l : raw)
    scale = std::max(scale, std::abs(l));
  const xreal unit = std::max(scale, 1.0L);

  std::vector<xcplx> upper, lower, reals;
  for (const auto &l : raw)
  {
    if (std::abs(l.imag()) <= 1e-9L * unit)
      reals.emplace_back(l.real(), 0.0L);
    else if (l.imag() > 0.0L)
      upper.push_back(l);
    else
      lower.push_back(l);
  }
  if (upper.size() != lower.size())
    throw SpectralError("spectral_complex: eigenvalues are not closed under conjugation");
  auto by_real = [](const xcplx &x, const xcplx &y) {
    return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag());
  };
  std::sort(upper.begin(), upper.end(), by_real);
  std::sort(reals.begin(), reals.end(), by_real);
  // The member with Im < 0 only confirms the pairing; the representative is
  // symmetrized so the pair is exactly conjugate.
  std::vector<bool> used(lower.size(), false);
  for (auto &u : upper)
  {
    std::size_t best = lower.size();
    xreal dist = std::numeric_limits<xreal>::infinity();
    for (std::size_t k = 0; k < lower.size(); ++k)
      if (!used[k] && std::abs(std::conj(lower[k]) - u) < dist)
      {
        dist = std::abs(std::conj(lower[k]) - u);
        best = k;
      }
    if (best == lower.size() || dist > 1e-8L * unit)
      throw SpectralError("spectral_complex: unmatched complex eigenvalue");
    used[best] = true;
    u = 0.5L * (u + std::conj(lower[best]));
  }

  XMatrix basis(n, n);
  std::vector<xcplx> eig(n);
  ComplexSpectralFactors f;
  std::size_t col = 0;
  for (const auto &u : upper)
  {
    const auto v = eigenvector(ax, u);
    for (std::size_t i = 0; i < n; ++i)
    {
      basis(i, col) = v[i];
      basis(i, col + 1) = std::conj(v[i]);
    }
    eig[col] = u;
    eig[col + 1] = std::conj(u);
    f.blocks.push_back({cplx(static_cast<double>(u.real()), static_cast<double>(u.imag())),
                        static_cast<int>(col), static_cast<int>(col + 1)});
    col += 2;
  }
  for (const auto &r : reals)
  {
    const auto v = eigenvector(ax, r);
    for (std::size_t i = 0; i < n; ++i)
      basis(i, col) = xcplx(v[i].real(), 0.0L);
    eig[col] = r;
    f.blocks.push_back({cplx(static_cast<double>(r.real()), 0.0), static_cast<int>(col), -1});
    ++col;
  }
  const XMatrix basis_inv = inverse(basis);

  auto narrow = [](const xcplx &z) {
    return cplx(static_cast<double>(z.real()), static_cast<double>(z.imag()));
  };
  f.basis = ComplexMatrix(n, n);
  f.basis_inv = ComplexMatrix(n, n);
  for (std::size_t i = 0; i < n * n; ++i)
  {
    f.basis.data()[i] = narrow(basis.data()[i]);
    f.basis_inv.data()[i] = narrow(basis_inv.data()[i]);
  }
  f.eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    f.eigenvalues[i] = narrow(eig[i]);
  return f;
}

namespace {

// Products of the stored double factors are formed in quad precision so that
// the check measures the factors, not the rounding of the check itself.
#if defined(__SIZEOF_FLOAT128__) && !defined(__clang__)
using Wide = __float128;
#else
using Wide = long double;
#endif

}  // namespace

double reconstruction_error(const RealSpectralFactors &f, const Matrix &target)
{
  const std::size_t n = f.lambdas.size();
  Wide worst = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
    {
      Wide s = 0;
      for (std::size_t k = 0; k < n; ++k)
        s += static_cast<Wide>(f.basis(i, k)) * static_cast<Wide>(f.lambdas[k]) *
             static_cast<Wide>(f.basis_inv(k, j));
      const Wide d = s - static_cast<Wide>(target(i, j));
      worst = std::max(worst, d < 0 ? -d : d);
    }
  return static_cast<double>(worst);
}

double reconstruction_error(const ComplexSpectralFactors &f, const Matrix &target)
{
  const std::size_t n = f.eigenvalues.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
    {
      Wide re = 0, im = 0;
      for (std::size_t k = 0; k < n; ++k)
      {
        const Wide ar = f.basis(i, k).real(), ai = f.basis(i, k).imag();
        const Wide lr = f.eigenvalues[k].real(), li = f.eigenvalues[k].imag();
        const Wide br = f.basis_inv(k, j).real(), bi = f.basis_inv(k, j).imag();
        const Wide pr = ar * lr - ai * li, pi = ar * li + ai * lr;
        re += pr * br - pi * bi;
        im += pr * bi + pi * br;
      }
      re -= static_cast<Wide>(target(i, j));
      worst = std::max(worst, std::hypot(static_cast<double>(re), static_cast<double>(im)));
    }
  return worst;
}

}  // namespace spirk
