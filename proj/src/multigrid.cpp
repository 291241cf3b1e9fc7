// SPDX-License-Identifier: Apache-2.0
#include "spirk/multigrid.hpp"

#include "spirk/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace spirk {

std::string to_string(CoarseSolver c)
{
  return c == CoarseSolver::direct ? "direct" : "chebyshev";
}

CoarseSolver parse_coarse_solver(const std::string &name)
{
  if (name == "direct")
    return CoarseSolver::direct;
  if (name == "chebyshev")
    return CoarseSolver::chebyshev;
  throw ConfigError("mg-coarse: unknown coarse solver '" + name + "' (direct|chebyshev)");
}

void VCycleConfig::validate() const
{
  if (smoother_degree < 1)
    throw ConfigError("mg-degree: smoother degree must be >= 1");
  if (!(smoothing_range > 1.0))
    throw ConfigError("mg-range: smoothing range must be > 1");
  if (eig_iters < 1)
    throw ConfigError("eig_iters: need at least one power iteration");
  if (!(eig_safety >= 1.0))
    throw ConfigError("eig_safety: safety factor must be >= 1");
  if (coarse_level < 0)
    throw ConfigError("coarse_level: must be >= 0");
}

BlockCoefficients BlockCoefficients::single(double alpha, double beta)
{
  return {1, {alpha}, {beta}};
}

BlockCoefficients BlockCoefficients::diagonal(const std::vector<double> &alphas, double beta)
{
  const int nb = static_cast<int>(alphas.size());
  BlockCoefficients c{nb, std::vector<double>(static_cast<std::size_t>(nb * nb), 0.0),
                      std::vector<double>(static_cast<std::size_t>(nb * nb), 0.0)};
  for (int i = 0; i < nb; ++i)
  {
    c.alpha[static_cast<std::size_t>(i * nb + i)] = alphas[static_cast<std::size_t>(i)];
    c.beta[static_cast<std::size_t>(i * nb + i)] = beta;
  }
  return c;
}

BlockCoefficients BlockCoefficients::complex_pair(double re, double im, double beta)
{
  return {2, {re, -im, im, re}, {beta, 0.0, 0.0, beta}};
}

bool BlockCoefficients::is_diagonal() const
{
  for (int r = 0; r < blocks; ++r)
    for (int c = 0; c < blocks; ++c)
      if (r != c && coupled(r, c))
        return false;
  return true;
}

namespace {

std::vector<double> combined_element(const GridHierarchy &grid, int level, double a, double b)
{
  const auto &m = grid.element_mass(level);
  const auto &k = grid.element_stiffness(level);
  std::vector<double> e(m.size());
  for (std::size_t i = 0; i < e.size(); ++i)
    e[i] = a * m[i] + b * k[i];
  return e;
}

void check_finite(std::span<const double> v, int level, const char *what)
{
  for (double x : v)
    if (!std::isfinite(x))
      throw NumericalError(std::string("multigrid: non-finite value in ") + what + " on level " +
                           std::to_string(level));
}

// Inverse of the per-node coefficient blocks; zero on boundary nodes.
std::vector<double> point_block_inverse(const GridHierarchy &grid, int level,
                                        const BlockCoefficients &coef)
{
  const GridLevel &lvl = grid.level(level);
  const int nb = coef.blocks;
  const auto md = operator_diagonal(grid, level, 1.0, 0.0);
  const auto kd = operator_diagonal(grid, level, 0.0, 1.0);
  std::vector<double> inv(lvl.n * static_cast<std::size_t>(nb * nb), 0.0);
  Matrix d(static_cast<std::size_t>(nb), static_cast<std::size_t>(nb));
  for (std::size_t i = 0; i < lvl.n; ++i)
  {
    if (lvl.boundary[i])
      continue;
    for (int r = 0; r < nb; ++r)
      for (int c = 0; c < nb; ++c)
        d(r, c) = coef.a(r, c) * md[i] + coef.b(r, c) * kd[i];
    const Matrix di = inverse(d);
    std::copy(di.data().begin(), di.data().end(),
              inv.begin() + static_cast<std::ptrdiff_t>(i * nb * nb));
  }
  return inv;
}

void apply_point_block(const std::vector<double> &inv, int nb, std::size_t n, const double *r,
                       double *z)
{
  for (std::size_t i = 0; i < n; ++i)
  {
    const double *blk = inv.data() + i * static_cast<std::size_t>(nb * nb);
    for (int a = 0; a < nb; ++a)
    {
      double s = 0.0;
      for (int c = 0; c < nb; ++c)
        s += blk[a * nb + c] * r[c * n + i];
      z[a * n + i] = s;
    }
  }
}

}  // namespace

void apply_block_operator(const GridHierarchy &grid, int level, const BlockCoefficients &coef,
                          const double *x, double *y, const Team &team, Constraint c)
{
  const GridLevel &lvl = grid.level(level);
  const int nb = coef.blocks;
  const std::size_t n = lvl.n;
  std::fill(y, y + n * static_cast<std::size_t>(nb), 0.0);
  const int parts = team.size();
  std::vector<LayerRange> rows(parts), want(parts);
  for (int p = 0; p < parts; ++p)
  {
    rows[p] = owned_layers(lvl.layers(), parts, p);
    want[p] = rows[p].count() ? input_layers(lvl, rows[p]) : LayerRange{0, 0};
  }
  // Without a team the whole vector is one window and no copy is needed.
  std::vector<Window> windows;
  if (team.distributed())
    windows = exchange_windows(team, lvl.shape(nb), x, want);

  std::vector<std::vector<double>> elems(static_cast<std::size_t>(nb * nb));
  for (int a = 0; a < nb; ++a)
    for (int cb = 0; cb < nb; ++cb)
      if (coef.coupled(a, cb))
        elems[static_cast<std::size_t>(a * nb + cb)] =
          combined_element(grid, level, coef.a(a, cb), coef.b(a, cb));

  for (int p = 0; p < parts; ++p)
  {
    if (rows[p].count() == 0)
      continue;
    const std::size_t wn = static_cast<std::size_t>(want[p].count()) * lvl.layer_size;
    for (int a = 0; a < nb; ++a)
      for (int cb = 0; cb < nb; ++cb)
      {
        if (!coef.coupled(a, cb))
          continue;
        const double *xw = team.distributed() ? windows[p].data.data() + cb * wn
                                              : x + static_cast<std::size_t>(cb) * n;
        const LayerRange wr = team.distributed() ? want[p] : LayerRange{0, lvl.layers()};
        element_apply(grid, level, elems[static_cast<std::size_t>(a * nb + cb)].data(), xw, wr,
                      rows[p], y + static_cast<std::size_t>(a) * n, c);
      }
  }
}

double hash_unit(std::uint64_t i)
{
  // splitmix64 finalizer
  std::uint64_t z = i + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return 0.5 + static_cast<double>(z >> 11) * 0x1.0p-53;
}

double estimate_lambda_max(const GridHierarchy &grid, int level, const BlockCoefficients &coef,
                           int iterations, std::uint64_t seed)
{
  const GridLevel &lvl = grid.level(level);
  const int nb = coef.blocks;
  const std::size_t n = lvl.n;
  const std::size_t total = n * static_cast<std::size_t>(nb);
  const auto inv = point_block_inverse(grid, level, coef);
  std::vector<double> x(total), ax(total), y(total);
  for (int a = 0; a < nb; ++a)
    for (std::size_t i = 0; i < n; ++i)
      x[a * n + i] = lvl.boundary[i] ? 0.0 : hash_unit((seed << 32) ^ (a * n + i));

  // D x is needed for the D inner product; D = inverse of the point blocks.
  const auto md = operator_diagonal(grid, level, 1.0, 0.0);
  const auto kd = operator_diagonal(grid, level, 0.0, 1.0);
  auto d_dot = [&](const std::vector<double> &v) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
      if (lvl.boundary[i])
        continue;
      for (int a = 0; a < nb; ++a)
        for (int c = 0; c < nb; ++c)
          s += v[a * n + i] * (coef.a(a, c) * md[i] + coef.b(a, c) * kd[i]) * v[c * n + i];
    }
    return s;
  };

  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it)
  {
    apply_block_operator(grid, level, coef, x.data(), ax.data());
    const double xdx = d_dot(x);
    if (!(xdx > 0.0))
      throw NumericalError("estimate_lambda_max: no interior degrees of freedom on level " +
                           std::to_string(level));
    estimate = kernels::dot(x, ax) / xdx;
    apply_point_block(inv, nb, n, ax.data(), y.data());
    const double norm = std::sqrt(kernels::dot(y, y));
    if (!(norm > 0.0) || !std::isfinite(norm))
      break;
    for (std::size_t i = 0; i < total; ++i)
      x[i] = y[i] / norm;
  }
  if (!(estimate > 0.0) || !std::isfinite(estimate))
    throw NumericalError("estimate_lambda_max: unusable estimate " + std::to_string(estimate) +
                         " on level " + std::to_string(level));
  return estimate;
}

Multigrid::Multigrid(const GridHierarchy &grid, BlockCoefficients coef, VCycleConfig config)
  : grid_(&grid), coef_(std::move(coef)), config_(config)
{
  config_.validate();
  if (coef_.blocks < 1 || coef_.alpha.size() != static_cast<std::size_t>(coef_.blocks * coef_.blocks) ||
      coef_.beta.size() != coef_.alpha.size())
    throw DimensionError("Multigrid: inconsistent block coefficients");
  config_.coarse_level = std::min(config_.coarse_level, grid.max_level());
  for (int l = config_.coarse_level; l <= grid.max_level(); ++l)
    setup_level(l);
  if (config_.coarse_solver == CoarseSolver::direct)
    setup_coarse();
}

std::size_t Multigrid::size() const noexcept
{
  return grid_->finest().n * static_cast<std::size_t>(coef_.blocks);
}

std::size_t Multigrid::index(int level) const
{
  if (level < config_.coarse_level || level > grid_->max_level())
    throw ConfigError("Multigrid: level " + std::to_string(level) + " not in the hierarchy");
  return static_cast<std::size_t>(level - config_.coarse_level);
}

void Multigrid::setup_level(int level)
{
  const GridLevel &lvl = grid_->level(level);
  const int nb = coef_.blocks;
  Level lv;
  lv.level = level;
  lv.n = lvl.n;
  lv.ones.assign(lvl.n * static_cast<std::size_t>(nb), 0.0);
  for (int a = 0; a < nb; ++a)
    for (std::size_t i = 0; i < lvl.n; ++i)
      lv.ones[a * lvl.n + i] = lvl.boundary[i] ? 0.0 : 1.0;
  const auto inv = point_block_inverse(*grid_, level, coef_);
  if (coef_.is_diagonal())
  {
    lv.inv_diag.assign(lvl.n * static_cast<std::size_t>(nb), 0.0);
    for (int a = 0; a < nb; ++a)
      for (std::size_t i = 0; i < lvl.n; ++i)
        lv.inv_diag[a * lvl.n + i] = inv[i * static_cast<std::size_t>(nb * nb) + a * nb + a];
  }
  else
    lv.inv_block = inv;

  const bool needs_estimate =
    level > config_.coarse_level || config_.coarse_solver == CoarseSolver::chebyshev ||
    config_.coarse_level == grid_->max_level();
  if (needs_estimate && lvl.interior_count > 0)
  {
    if (coef_.is_diagonal() && nb > 1)
    {
      // One shared estimate: the maximum over the individual blocks.
      for (int a = 0; a < nb; ++a)
        lv.lambda_raw = std::max(
          lv.lambda_raw,
          estimate_lambda_max(*grid_, level, BlockCoefficients::single(coef_.a(a, a), coef_.b(a, a)),
                              config_.eig_iters, config_.seed));
    }
    else
      lv.lambda_raw = estimate_lambda_max(*grid_, level, coef_, config_.eig_iters, config_.seed);
    lv.lambda_max = lv.lambda_raw * config_.eig_safety;
  }
  levels_.push_back(std::move(lv));
}

void Multigrid::setup_coarse()
{
  const int level = config_.coarse_level;
  const GridLevel &lvl = grid_->level(level);
  const int nb = coef_.blocks;
  coarse_dofs_.clear();
  for (int a = 0; a < nb; ++a)
    for (std::size_t i = 0; i < lvl.n; ++i)
      if (!lvl.boundary[i])
        coarse_dofs_.push_back(a * lvl.n + i);
  const std::size_t m = coarse_dofs_.size();
  if (m == 0)
    return;
  Matrix a(m, m);
  std::vector<double> e(lvl.n * static_cast<std::size_t>(nb), 0.0), col(e.size());
  for (std::size_t j = 0; j < m; ++j)
  {
    e[coarse_dofs_[j]] = 1.0;
    apply_block_operator(*grid_, level, coef_, e.data(), col.data());
    e[coarse_dofs_[j]] = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      a(i, j) = col[coarse_dofs_[i]];
  }
  coarse_lu_ = LuSolver<double>(std::move(a));
}

void Multigrid::apply(int level, std::span<const double> x, std::span<double> y,
                      const Team &team) const
{
  const std::size_t n = grid_->level(level).n * static_cast<std::size_t>(coef_.blocks);
  if (x.size() != n || y.size() != n)
    throw DimensionError("Multigrid::apply: vector length mismatch");
  apply_block_operator(*grid_, level, coef_, x.data(), y.data(), team);
}

void Multigrid::jacobi(const Level &lv, const double *r, double *z) const
{
  if (!lv.inv_diag.empty())
  {
    for (std::size_t i = 0; i < lv.inv_diag.size(); ++i)
      z[i] = lv.inv_diag[i] * r[i];
  }
  else
    apply_point_block(lv.inv_block, coef_.blocks, lv.n, r, z);
}

void Multigrid::smooth(int level, std::span<const double> b, std::span<double> x,
                       bool zero_guess, const Team &team) const
{
  const Level &lv = levels_[index(level)];
  const std::size_t total = lv.n * static_cast<std::size_t>(coef_.blocks);
  if (b.size() != total || x.size() != total)
    throw DimensionError("Multigrid::smooth: vector length mismatch");
  if (!(lv.lambda_max > 0.0))
  {
    std::fill(x.begin(), x.end(), 0.0);
    return;
  }
  const auto &kt = kernels::active();
  const double upper = lv.lambda_max;
  const double lower = upper / config_.smoothing_range;
  const double theta = 0.5 * (upper + lower);
  const double delta = 0.5 * (upper - lower);
  const double sigma = theta / delta;

  std::vector<double> r(total), d(total, 0.0), z;
  const bool point = !lv.inv_diag.empty();
  const double *weights = point ? lv.inv_diag.data() : lv.ones.data();
  if (!point)
    z.resize(total);

  auto residual = [&](bool first) {
    if (first && zero_guess)
      std::copy(b.begin(), b.end(), r.begin());
    else
    {
      apply_block_operator(*grid_, level, coef_, x.data(), r.data(), team);
      kt.axpby(1.0, b.data(), -1.0, r.data(), total);
    }
    if (!point)
    {
      jacobi(lv, r.data(), z.data());
      return static_cast<const double *>(z.data());
    }
    return static_cast<const double *>(r.data());
  };

  if (zero_guess)
    std::fill(x.begin(), x.end(), 0.0);
  double rho_old = 1.0 / sigma;
  kt.chebyshev_update(0.0, 1.0 / theta, weights, residual(true), d.data(), x.data(), total);
  for (int k = 2; k <= config_.smoother_degree; ++k)
  {
    const double rho = 1.0 / (2.0 * sigma - rho_old);
    kt.chebyshev_update(rho * rho_old, 2.0 * rho / delta, weights, residual(false), d.data(),
                        x.data(), total);
    rho_old = rho;
  }
  check_finite(x, level, "smoother output");
}

void Multigrid::coarse_solve(const double *b, double *x, const Team &team) const
{
  const int level = config_.coarse_level;
  const std::size_t total = grid_->level(level).n * static_cast<std::size_t>(coef_.blocks);
  if (config_.coarse_solver == CoarseSolver::chebyshev)
  {
    smooth(level, {b, total}, {x, total}, true, team);
    return;
  }
  // Every member gathers the full coarse right-hand side and solves redundantly.
  allgather(team, grid_->level(level).shape(coef_.blocks), b);
  std::fill(x, x + total, 0.0);
  if (coarse_dofs_.empty())
    return;
  std::vector<double> rhs(coarse_dofs_.size());
  for (std::size_t i = 0; i < rhs.size(); ++i)
    rhs[i] = b[coarse_dofs_[i]];
  coarse_lu_.solve_in_place(rhs);
  for (std::size_t i = 0; i < rhs.size(); ++i)
    x[coarse_dofs_[i]] = rhs[i];
  check_finite({x, total}, level, "coarse solution");
}

void Multigrid::cycle(int level, const double *b, double *x, const Team &team) const
{
  if (level == config_.coarse_level)
  {
    coarse_solve(b, x, team);
    return;
  }
  const int nb = coef_.blocks;
  const GridLevel &fine = grid_->level(level);
  const GridLevel &coarse = grid_->level(level - 1);
  const std::size_t total = fine.n * static_cast<std::size_t>(nb);
  const std::size_t ctotal = coarse.n * static_cast<std::size_t>(nb);

  std::span<double> xs(x, total);
  std::span<const double> bs(b, total);
  if (config_.pre_and_post)
    smooth(level, bs, xs, true, team);
  else
    std::fill(xs.begin(), xs.end(), 0.0);

  std::vector<double> r(total);
  apply_block_operator(*grid_, level, coef_, x, r.data(), team);
  kernels::active().axpby(1.0, b, -1.0, r.data(), total);

  const int parts = team.size();
  std::vector<LayerRange> crow(parts), fwant(parts);
  for (int p = 0; p < parts; ++p)
  {
    crow[p] = owned_layers(coarse.layers(), parts, p);
    fwant[p] = restriction_input(fine, crow[p]);
  }
  std::vector<double> cb(ctotal, 0.0), cx(ctotal, 0.0);
  {
    std::vector<Window> w;
    if (team.distributed())
      w = exchange_windows(team, fine.shape(nb), r.data(), fwant);
    for (int p = 0; p < parts; ++p)
    {
      if (crow[p].count() == 0)
        continue;
      const std::size_t wn = static_cast<std::size_t>(fwant[p].count()) * fine.layer_size;
      for (int a = 0; a < nb; ++a)
      {
        const double *src = team.distributed() ? w[p].data.data() + a * wn : r.data() + a * fine.n;
        const LayerRange wr = team.distributed() ? fwant[p] : LayerRange{0, fine.layers()};
        restrict_residual(*grid_, level - 1, src, wr, crow[p], cb.data() + a * coarse.n);
      }
    }
  }

  cycle(level - 1, cb.data(), cx.data(), team);

  std::vector<LayerRange> frow(parts), cwant(parts);
  for (int p = 0; p < parts; ++p)
  {
    frow[p] = owned_layers(fine.layers(), parts, p);
    cwant[p] = prolongation_input(coarse, frow[p]);
  }
  {
    std::vector<Window> w;
    if (team.distributed())
      w = exchange_windows(team, coarse.shape(nb), cx.data(), cwant);
    for (int p = 0; p < parts; ++p)
    {
      if (frow[p].count() == 0)
        continue;
      const std::size_t wn = static_cast<std::size_t>(cwant[p].count()) * coarse.layer_size;
      for (int a = 0; a < nb; ++a)
      {
        const double *src =
          team.distributed() ? w[p].data.data() + a * wn : cx.data() + a * coarse.n;
        const LayerRange wr = team.distributed() ? cwant[p] : LayerRange{0, coarse.layers()};
        prolongate(*grid_, level - 1, src, wr, frow[p], x + a * fine.n);
      }
    }
  }

  smooth(level, bs, xs, false, team);
}

void Multigrid::vcycle(std::span<const double> b, std::span<double> x, const Team &team) const
{
  if (b.size() != size() || x.size() != size())
    throw DimensionError("Multigrid::vcycle: vector length " + std::to_string(b.size()) +
                         ", expected " + std::to_string(size()));
  const GridLevel &fine = grid_->finest();
  std::vector<double> rhs(b.begin(), b.end());
  for (int a = 0; a < coef_.blocks; ++a)
    for (std::size_t i : fine.boundary_dofs)
      rhs[a * fine.n + i] = 0.0;
  check_finite(rhs, fine.level, "right-hand side");
  cycle(grid_->max_level(), rhs.data(), x.data(), team);
  ++applications_;
}

}  // namespace spirk
