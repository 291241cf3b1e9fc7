// SPDX-License-Identifier: Apache-2.0
#include "spirk/complex_solver.hpp"

#include "spirk/error.hpp"

#include <algorithm>
#include <cmath>

namespace spirk {

std::string to_string(PairPreconditioner p)
{
  return p == PairPreconditioner::presb ? "presb" : "gmg";
}

void twobytwo_apply(const SpatialDiscretization &disc, cplx lambda, double tau, const double *x,
                    double *y, const Team &team)
{
  disc.apply(BlockCoefficients::complex_pair(lambda.real(), lambda.imag(), tau), x, y, team,
             Constraint::homogeneous);
}

void presb_apply(const SpatialDiscretization &disc, cplx lambda, const BlockMap &inner_solve,
                 std::span<const double> r, std::span<double> z, const Team &team)
{
  const std::size_t n = r.size() / 2;
  if (r.size() != 2 * n || z.size() != r.size())
    throw DimensionError("presb_apply: expected stacked real and imaginary parts");
  std::vector<double> s(n), t1(n), t2(n), mt(n);
  for (std::size_t i = 0; i < n; ++i)
    s[i] = r[i] + r[n + i];
  inner_solve(s, t1);
  disc.apply(BlockCoefficients::single(lambda.imag(), 0.0), t1.data(), mt.data(), team,
             Constraint::homogeneous);
  for (std::size_t i = 0; i < n; ++i)
    s[i] = r[n + i] - mt[i];
  inner_solve(s, t2);
  for (std::size_t i = 0; i < n; ++i)
  {
    z[i] = t1[i] - t2[i];
    z[n + i] = t2[i];
  }
}

struct ComplexStageSolver::Block
{
  std::unique_ptr<BlockSolver> solver;
  std::unique_ptr<BlockSolver> conjugate;  // 2x2 multigrid for lambda-bar
};

namespace {

void split(std::span<const cplx> z, std::vector<double> &out)
{
  const std::size_t n = z.size();
  out.resize(2 * n);
  for (std::size_t i = 0; i < n; ++i)
  {
    out[i] = z[i].real();
    out[n + i] = z[i].imag();
  }
}

void join(const std::vector<double> &in, std::span<cplx> z)
{
  const std::size_t n = z.size();
  for (std::size_t i = 0; i < n; ++i)
    z[i] = {in[i], in[n + i]};
}

cplx complex_dot(const Team &team, const SlabShape &shape, std::span<const cplx> a, std::span<const cplx> b)
{
  if (!team.distributed())
  {
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i)
      s += std::conj(a[i]) * b[i];
    return s;
  }
  const int parts = team.size();
  std::vector<double> re(static_cast<std::size_t>(parts)), im(static_cast<std::size_t>(parts));
  for (int m = 0; m < parts; ++m)
  {
    const LayerRange own = owned_layers(shape.layers, parts, m);
    cplx s{};
    const std::size_t lo = static_cast<std::size_t>(own.begin) * shape.layer_size;
    const std::size_t hi = static_cast<std::size_t>(own.end) * shape.layer_size;
    for (std::size_t i = lo; i < hi; ++i)
      s += std::conj(a[i]) * b[i];
    re[static_cast<std::size_t>(m)] = s.real();
    im[static_cast<std::size_t>(m)] = s.imag();
  }
  return {team_sum(team, re), team_sum(team, im)};
}

}  // namespace

ComplexStageSolver::ComplexStageSolver(const SpatialDiscretization &disc,
                                       const ComplexSpectralFactors &factors, double tau,
                                       PairPreconditioner prec, GmresConfig gmres, simrt::Runtime *rt,
                                       bool solve_conjugates)
  : disc_(&disc), factors_(factors), tau_(tau), prec_(prec), gmres_(gmres), rt_(rt),
    solve_conjugates_(solve_conjugates), stages_(static_cast<int>(factors.basis.rows()))
{
  if (!(tau > 0.0))
    throw ConfigError("complex stage solver: time step must be positive");
  const int blocks = block_count();
  if (blocks != pair_count(stages_))
    throw SpectralError("complex stage solver: expected " + std::to_string(pair_count(stages_)) +
                        " spectral blocks, found " + std::to_string(blocks));
  if (rt_ && rt_->grid().stages() != blocks)
    throw ConfigError("complex stage solver: rank grid needs one row per spectral block");
  if (solve_conjugates_ && rt_)
    throw ConfigError("complex stage solver: the conjugate check runs single-process only");

  forward_ = ComplexMatrix(static_cast<std::size_t>(blocks), static_cast<std::size_t>(stages_));
  backward_ = ComplexMatrix(static_cast<std::size_t>(stages_), static_cast<std::size_t>(blocks));
  for (int p = 0; p < blocks; ++p)
  {
    const SpectralBlock &sb = factors_.blocks[static_cast<std::size_t>(p)];
    const double weight = sb.is_real() ? 1.0 : 2.0;
    for (int j = 0; j < stages_; ++j)
    {
      forward_(p, j) = factors_.basis_inv(sb.column, j);
      backward_(j, p) = weight * factors_.basis(j, sb.column);
    }
    auto blk = std::make_unique<Block>();
    const double re = sb.lambda.real();
    const double im = sb.lambda.imag();
    if (sb.is_real())
      blk->solver = disc.make_solver(BlockCoefficients::single(re, tau));
    else if (prec == PairPreconditioner::presb)
      blk->solver = disc.make_solver(BlockCoefficients::single(re + im, tau));
    else
      blk->solver = disc.make_solver(BlockCoefficients::complex_pair(re, im, tau));
    if (solve_conjugates_ && !sb.is_real())
      blk->conjugate = disc.make_solver(BlockCoefficients::complex_pair(re, -im, tau));
    blocks_.push_back(std::move(blk));
  }
}

ComplexStageSolver::~ComplexStageSolver() = default;

Team ComplexStageSolver::team(int p) const
{
  if (!rt_)
    return {};
  return {rt_, rt_->grid().column_group(p)};
}

std::vector<cplx> ComplexStageSolver::solve_pair(const Block &blk, cplx lambda, std::span<const cplx> w,
                                                 const Team &tm, ComplexSolveReport &report) const
{
  const std::size_t n = w.size();
  const SlabShape shape = disc_->shape();
  const bool conj_block = lambda.imag() < 0.0;
  const BlockSolver &solver = conj_block ? *blk.conjugate : *blk.solver;
  const std::uint64_t before = solver.applications();

  std::vector<cplx> z(n);
  KrylovReport kr;
  if (prec_ == PairPreconditioner::presb && !conj_block)
  {
    SlabShape pair_shape = shape;
    pair_shape.blocks = 2;
    const BlockMap inner = [&](std::span<const double> b, std::span<double> x) { solver.solve(b, x, tm); };
    LinearOps<double> ops;
    ops.apply_a = [&](std::span<const double> x, std::span<double> y) {
      twobytwo_apply(*disc_, lambda, tau_, x.data(), y.data(), tm);
    };
    ops.apply_pinv = [&](std::span<const double> r, std::span<double> y) {
      presb_apply(*disc_, lambda, inner, r, y, tm);
    };
    if (tm.distributed())
      ops.dot = [&](std::span<const double> a, std::span<const double> b) {
        return slab_dot(tm, pair_shape, a, b);
      };
    std::vector<double> rhs, x(2 * n);
    split(w, rhs);
    kr = gmres<double>(ops, rhs, x, gmres_);
    join(x, z);
  }
  else
  {
    std::vector<double> in, out(2 * n);
    LinearOps<cplx> ops;
    ops.apply_a = [&](std::span<const cplx> x, std::span<cplx> y) {
      split(x, in);
      twobytwo_apply(*disc_, lambda, tau_, in.data(), out.data(), tm);
      join(out, y);
    };
    ops.apply_pinv = [&](std::span<const cplx> r, std::span<cplx> y) {
      split(r, in);
      solver.solve(in, out, tm);
      join(out, y);
    };
    if (tm.distributed())
      ops.dot = [&](std::span<const cplx> a, std::span<const cplx> b) { return complex_dot(tm, shape, a, b); };
    kr = gmres<cplx>(ops, w, z, gmres_);
  }
  if (!conj_block)
  {
    report.iterations.push_back(kr.iterations);
    report.vcycles.push_back(solver.applications() - before);
    report.residuals.push_back(kr.residual_history);
  }
  report.converged = report.converged && kr.converged;
  return z;
}

std::vector<cplx> ComplexStageSolver::solve_real(const Block &blk, double lambda, std::span<const cplx> w,
                                                 const Team &tm, ComplexSolveReport &report) const
{
  const std::size_t n = w.size();
  const SlabShape shape = disc_->shape();
  const BlockSolver &solver = *blk.solver;
  const std::uint64_t before = solver.applications();
  std::vector<double> rhs(n), x(n);
  for (std::size_t i = 0; i < n; ++i)
    rhs[i] = w[i].real();

  LinearOps<double> ops;
  const BlockCoefficients coef = BlockCoefficients::single(lambda, tau_);
  ops.apply_a = [&](std::span<const double> a, std::span<double> y) {
    disc_->apply(coef, a.data(), y.data(), tm, Constraint::homogeneous);
  };
  ops.apply_pinv = [&](std::span<const double> r, std::span<double> z) { solver.solve(r, z, tm); };
  if (tm.distributed())
    ops.dot = [&](std::span<const double> a, std::span<const double> b) { return slab_dot(tm, shape, a, b); };

  const KrylovReport kr = gmres<double>(ops, rhs, x, gmres_);
  report.iterations.push_back(kr.iterations);
  report.vcycles.push_back(solver.applications() - before);
  report.residuals.push_back(kr.residual_history);
  report.converged = report.converged && kr.converged;
  std::vector<cplx> z(n);
  for (std::size_t i = 0; i < n; ++i)
    z[i] = x[i];
  return z;
}

StageBlockVector ComplexStageSolver::solve(const StageBlockVector &rhs, ComplexSolveReport &report) const
{
  if (rhs.stages != stages_ || rhs.n != disc_->size())
    throw DimensionError("complex stage solver: right-hand side has the wrong shape");
  const SlabShape shape = disc_->shape();
  const int blocks = block_count();
  report = {};

  const ComplexBlockVector w =
    rt_ ? rotate_combine_paired(forward_, rhs, *rt_, shape) : dense_combine_to_complex(forward_, rhs);
  ComplexBlockVector z(blocks, rhs.n);
  for (int p = 0; p < blocks; ++p)
  {
    const SpectralBlock &sb = factors_.blocks[static_cast<std::size_t>(p)];
    const Block &blk = *blocks_[static_cast<std::size_t>(p)];
    const Team tm = team(p);
    const auto zp = sb.is_real() ? solve_real(blk, sb.lambda.real(), w.block(p), tm, report)
                                 : solve_pair(blk, sb.lambda, w.block(p), tm, report);
    std::copy(zp.begin(), zp.end(), z.block(p).begin());
  }
  StageBlockVector k =
    rt_ ? rotate_combine_paired(backward_, z, *rt_, shape) : dense_combine_real_part(backward_, z);

  if (solve_conjugates_)
  {
    // Full reconstruction sum_c S[:, c] z_c with the conjugate blocks solved
    // independently from their own rows of S^{-1}.
    std::vector<cplx> full(static_cast<std::size_t>(stages_) * rhs.n);
    auto add_column = [&](int col, std::span<const cplx> zc) {
      for (int i = 0; i < stages_; ++i)
      {
        const cplx s = factors_.basis(i, col);
        for (std::size_t e = 0; e < rhs.n; ++e)
          full[static_cast<std::size_t>(i) * rhs.n + e] += s * zc[e];
      }
    };
    ComplexSolveReport scratch;
    for (int p = 0; p < blocks; ++p)
    {
      const SpectralBlock &sb = factors_.blocks[static_cast<std::size_t>(p)];
      add_column(sb.column, z.block(p));
      if (sb.is_real())
        continue;
      std::vector<cplx> wc(rhs.n);
      for (int j = 0; j < stages_; ++j)
      {
        const cplx s = factors_.basis_inv(sb.partner_column, j);
        const auto src = rhs.block(j);
        for (std::size_t e = 0; e < rhs.n; ++e)
          wc[e] += s * src[e];
      }
      const auto zc = solve_pair(*blocks_[static_cast<std::size_t>(p)], std::conj(sb.lambda), wc, {}, scratch);
      add_column(sb.partner_column, zc);
    }
    double im = 0.0, mag = 0.0;
    for (const cplx &v : full)
    {
      im = std::max(im, std::abs(v.imag()));
      mag = std::max(mag, std::abs(v));
    }
    report.imag_residue = mag > 0.0 ? im / mag : 0.0;
    report.converged = report.converged && scratch.converged;
  }
  return k;
}

}  // namespace spirk
