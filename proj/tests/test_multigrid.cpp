// SPDX-License-Identifier: Apache-2.0
#include "spirk/error.hpp"
#include "spirk/multigrid.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace spirk;

namespace {

std::vector<double> interior_random(const GridHierarchy &g, int blocks, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  const std::size_t n = g.finest().n;
  auto v = test::random_vector(rng, n * static_cast<std::size_t>(blocks));
  for (int b = 0; b < blocks; ++b)
    constrain_homogeneous(g, g.max_level(), {v.data() + b * n, n});
  return v;
}

double dot(std::span<const double> a, std::span<const double> b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

// Stationary iteration x <- x + V(b - A x); returns the steps to reach rtol.
int iterate(const Multigrid &mg, std::span<const double> b, std::vector<double> &x, double rtol)
{
  const int top = mg.finest_level();
  const double b0 = std::sqrt(dot(b, b));
  std::vector<double> r(b.size()), ax(b.size()), e(b.size());
  std::fill(x.begin(), x.end(), 0.0);
  for (int it = 1; it <= 100; ++it)
  {
    mg.apply(top, x, ax);
    for (std::size_t i = 0; i < r.size(); ++i)
      r[i] = b[i] - ax[i];
    mg.vcycle(r, e);
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] += e[i];
    mg.apply(top, x, ax);
    for (std::size_t i = 0; i < r.size(); ++i)
      r[i] = b[i] - ax[i];
    if (std::sqrt(dot(r, r)) <= rtol * b0)
      return it;
  }
  return 101;
}

}  // namespace

TEST(Coefficients, Constructors)
{
  const auto s = BlockCoefficients::single(2.0, 0.5);
  EXPECT_EQ(s.blocks, 1);
  EXPECT_EQ(s.a(0, 0), 2.0);
  EXPECT_EQ(s.b(0, 0), 0.5);
  const auto d = BlockCoefficients::diagonal({1.0, 2.0, 3.0}, 0.1);
  EXPECT_TRUE(d.is_diagonal());
  EXPECT_EQ(d.a(2, 2), 3.0);
  EXPECT_EQ(d.b(1, 1), 0.1);
  EXPECT_FALSE(d.coupled(0, 1));
  const auto p = BlockCoefficients::complex_pair(1.5, 0.8, 0.1);
  EXPECT_FALSE(p.is_diagonal());
  EXPECT_EQ(p.a(0, 0), 1.5);
  EXPECT_EQ(p.a(0, 1), -0.8);
  EXPECT_EQ(p.a(1, 0), 0.8);
  EXPECT_EQ(p.a(1, 1), 1.5);
  EXPECT_EQ(p.b(0, 1), 0.0);
  EXPECT_EQ(p.b(1, 1), 0.1);
}

TEST(Config, Validation)
{
  VCycleConfig c;
  EXPECT_NO_THROW(c.validate());
  c.smoother_degree = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.smoothing_range = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.eig_safety = 0.9;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(parse_coarse_solver("chebyshev"), CoarseSolver::chebyshev);
  EXPECT_THROW(parse_coarse_solver("amg"), ConfigError);
}

TEST(LambdaMax, OneDimensionalStiffness)
{
  // Jacobi-scaled 1D Laplacian on N cells: eigenvalues 1 - cos(j pi / N).
  const auto g = build_hierarchy(1, 4);
  const double exact = 1.0 + std::cos(std::numbers::pi / 16.0);
  const double est = estimate_lambda_max(g, 4, BlockCoefficients::single(0.0, 1.0), 20);
  EXPECT_LE(est, exact * (1.0 + 1e-12));
  EXPECT_GE(est, 0.9 * exact);
}

TEST(LambdaMax, OneDimensionalMass)
{
  // Jacobi-scaled 1D mass: eigenvalues 1 + cos(j pi / N) / 2.
  const auto g = build_hierarchy(1, 4);
  const double exact = 1.0 + 0.5 * std::cos(std::numbers::pi / 16.0);
  const double est = estimate_lambda_max(g, 4, BlockCoefficients::single(1.0, 0.0), 20);
  EXPECT_LE(est, exact * (1.0 + 1e-12));
  EXPECT_GE(est, 0.9 * exact);
}

TEST(LambdaMax, BatchedIsMaximumOfBlocks)
{
  const auto g = build_hierarchy(2, 4);
  double worst = 0.0;
  for (double a : {0.5, 3.0, 40.0})
    worst = std::max(worst, estimate_lambda_max(g, 4, BlockCoefficients::single(a, 0.1), 40));
  const double batched = estimate_lambda_max(g, 4, BlockCoefficients::diagonal({0.5, 3.0, 40.0}, 0.1), 40);
  EXPECT_NEAR(batched, worst, 0.05 * worst);
}

TEST(LambdaMax, SeedChangesStartOnly)
{
  const auto g = build_hierarchy(2, 4);
  const auto c = BlockCoefficients::single(1.0, 0.1);
  const double a = estimate_lambda_max(g, 4, c, 60, 1);
  const double b = estimate_lambda_max(g, 4, c, 60, 2);
  EXPECT_EQ(a, estimate_lambda_max(g, 4, c, 60, 1));
  EXPECT_NEAR(a, b, 0.02 * a);
}

class PerCoefficients : public ::testing::TestWithParam<int>
{
protected:
  static BlockCoefficients coefficients(int which)
  {
    switch (which)
    {
    case 0: return BlockCoefficients::single(1.0, 0.1);
    case 1: return BlockCoefficients::diagonal({2.0, 7.5}, 0.1);
    default: return BlockCoefficients::complex_pair(2.7, 1.6, 0.1);
    }
  }
};

TEST_P(PerCoefficients, VCycleIsLinear)
{
  const auto g = build_hierarchy(2, 4);
  const Multigrid mg(g, coefficients(GetParam()));
  const auto x = interior_random(g, mg.blocks(), 1);
  const auto y = interior_random(g, mg.blocks(), 2);
  std::vector<double> combo(x.size()), vx(x.size()), vy(x.size()), vc(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    combo[i] = 2.5 * x[i] - 0.75 * y[i];
  mg.vcycle(x, vx);
  mg.vcycle(y, vy);
  mg.vcycle(combo, vc);
  std::vector<double> expect(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    expect[i] = 2.5 * vx[i] - 0.75 * vy[i];
  EXPECT_LT(test::rel_diff(vc, expect), 1e-12);
}

TEST_P(PerCoefficients, ZeroRhsGivesZero)
{
  const auto g = build_hierarchy(2, 3);
  const Multigrid mg(g, coefficients(GetParam()));
  std::vector<double> b(mg.size(), 0.0), x(mg.size(), 1.0);
  mg.vcycle(b, x);
  EXPECT_EQ(test::max_abs(x), 0.0);
}

TEST_P(PerCoefficients, BoundaryOfResultIsZero)
{
  const auto g = build_hierarchy(2, 3);
  const Multigrid mg(g, coefficients(GetParam()));
  std::mt19937_64 rng(4);
  const auto b = test::random_vector(rng, mg.size());
  std::vector<double> x(mg.size());
  mg.vcycle(b, x);
  const std::size_t n = g.finest().n;
  for (int blk = 0; blk < mg.blocks(); ++blk)
    for (std::size_t i : g.finest().boundary_dofs)
      EXPECT_EQ(x[blk * n + i], 0.0);
}

TEST_P(PerCoefficients, ConvergesIndependentlyOfMeshSize)
{
  int counts[2];
  for (int k = 0; k < 2; ++k)
  {
    const auto g = build_hierarchy(2, 4 + k);
    const Multigrid mg(g, coefficients(GetParam()));
    const auto b = interior_random(g, mg.blocks(), 7);
    std::vector<double> x(b.size());
    counts[k] = iterate(mg, b, x, 1e-8);
  }
  EXPECT_LE(counts[0], 10);
  EXPECT_LE(counts[1], 10);
  EXPECT_LE(std::abs(counts[0] - counts[1]), 1);
}

TEST_P(PerCoefficients, DirectFinestLevelIsExact)
{
  const auto g = build_hierarchy(2, 3);
  VCycleConfig cfg;
  cfg.coarse_level = 3;
  const Multigrid mg(g, coefficients(GetParam()), cfg);
  const auto xs = interior_random(g, mg.blocks(), 3);
  std::vector<double> b(xs.size()), x(xs.size());
  apply_block_operator(g, 3, mg.coefficients(), xs.data(), b.data());
  mg.vcycle(b, x);
  EXPECT_LT(test::rel_diff(x, xs), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Sets, PerCoefficients, ::testing::Values(0, 1, 2));

TEST(VCycle, SymmetricForSymmetricOperator)
{
  for (int which : {0, 1})
  {
    const auto g = build_hierarchy(2, 4);
    const auto coef = which == 0 ? BlockCoefficients::single(1.0, 0.1)
                                 : BlockCoefficients::diagonal({2.0, 7.5}, 0.1);
    const Multigrid mg(g, coef);
    const auto x = interior_random(g, mg.blocks(), 1);
    const auto y = interior_random(g, mg.blocks(), 2);
    std::vector<double> vx(x.size()), vy(x.size());
    mg.vcycle(x, vx);
    mg.vcycle(y, vy);
    const double lhs = dot(vx, y);
    EXPECT_NEAR(lhs, dot(x, vy), 1e-10 * std::abs(lhs));
  }
}

TEST(VCycle, ChebyshevCoarseSolverConverges)
{
  const auto g = build_hierarchy(3, 3);
  VCycleConfig cfg;
  cfg.coarse_solver = CoarseSolver::chebyshev;
  const Multigrid mg(g, BlockCoefficients::single(1.0, 0.1), cfg);
  const auto b = interior_random(g, 1, 5);
  std::vector<double> x(b.size());
  EXPECT_LE(iterate(mg, b, x, 1e-8), 15);
}

TEST(VCycle, BatchedMatchesSeparateBlocks)
{
  const auto g = build_hierarchy(2, 4);
  const Multigrid batched(g, BlockCoefficients::diagonal({2.0, 7.5}, 0.1));
  const auto b = interior_random(g, 2, 8);
  std::vector<double> xb(b.size());
  batched.vcycle(b, xb);
  // The shared eigenvalue bound changes the smoother, so both must reduce the
  // error about equally rather than agree entrywise.
  const std::size_t n = g.finest().n;
  for (int blk = 0; blk < 2; ++blk)
  {
    const Multigrid one(g, BlockCoefficients::single(blk == 0 ? 2.0 : 7.5, 0.1));
    std::vector<double> x1(n);
    one.vcycle({b.data() + blk * n, n}, x1);
    EXPECT_LT(test::rel_diff({xb.data() + blk * n, n}, x1), 0.2);
  }
}

TEST(VCycle, PairWithoutImaginaryPartMatchesRealBlocks)
{
  const auto g = build_hierarchy(2, 4);
  const Multigrid pair(g, BlockCoefficients::complex_pair(2.7, 0.0, 0.1));
  const Multigrid real(g, BlockCoefficients::single(2.7, 0.1));
  const auto b = interior_random(g, 2, 9);
  std::vector<double> xp(b.size());
  pair.vcycle(b, xp);
  const std::size_t n = g.finest().n;
  for (int blk = 0; blk < 2; ++blk)
  {
    std::vector<double> xr(n);
    real.vcycle({b.data() + blk * n, n}, xr);
    EXPECT_LT(test::rel_diff({xp.data() + blk * n, n}, xr), 1e-13);
  }
}

TEST(VCycle, CoupledPairSolvesComplexSystem)
{
  // Dense oracle: (lambda M + tau K) z = w in complex arithmetic on a small grid.
  const auto g = build_hierarchy(1, 4);
  const std::complex<double> lambda(2.7, 1.6);
  const double tau = 0.1;
  const std::size_t n = g.finest().n;
  const Matrix m = test::assemble(n, [&](const double *x, double *y) {
    apply_mass(g, 4, {x, n}, {y, n}, Constraint::homogeneous);
  });
  const Matrix k = test::assemble(n, [&](const double *x, double *y) {
    apply_stiffness(g, 4, {x, n}, {y, n}, Constraint::homogeneous);
  });
  ComplexMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a(i, j) = lambda * m(i, j) + tau * k(i, j);
  for (std::size_t i : g.finest().boundary_dofs)
    a(i, i) = 1.0;
  const auto b = interior_random(g, 2, 10);
  std::vector<std::complex<double>> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = {b[i], b[n + i]};
  LuSolver<std::complex<double>>(a).solve_in_place(w);

  const Multigrid mg(g, BlockCoefficients::complex_pair(lambda.real(), lambda.imag(), tau));
  std::vector<double> x(2 * n);
  iterate(mg, b, x, 1e-13);
  std::vector<double> ref(2 * n);
  for (std::size_t i = 0; i < n; ++i)
  {
    ref[i] = w[i].real();
    ref[n + i] = w[i].imag();
  }
  EXPECT_LT(test::rel_diff(x, ref), 1e-10);
}

TEST(BlockOperator, DistributedMatchesSerial)
{
  const auto g = build_hierarchy(3, 3);
  const auto coef = BlockCoefficients::complex_pair(1.1, -0.4, 0.3);
  std::mt19937_64 rng(12);
  const auto x = test::random_vector(rng, 2 * g.finest().n);
  std::vector<double> ys(x.size()), yd(x.size());
  apply_block_operator(g, 3, coef, x.data(), ys.data());
  simrt::Runtime rt(simrt::RankGrid(1, 3));
  const Team team{&rt, rt.grid().column_group(0)};
  apply_block_operator(g, 3, coef, x.data(), yd.data(), team);
  EXPECT_LT(test::max_diff(ys, yd), 1e-14);
  EXPECT_GT(rt.counters().sum().messages, 0u);
  EXPECT_TRUE(rt.quiescent());
}

TEST(VCycle, DistributedMatchesSerial)
{
  const auto g = build_hierarchy(2, 4);
  const Multigrid mg(g, BlockCoefficients::single(1.0, 0.1));
  const auto b = interior_random(g, 1, 13);
  std::vector<double> xs(b.size()), xd(b.size());
  mg.vcycle(b, xs);
  simrt::Runtime rt(simrt::RankGrid(1, 4));
  mg.vcycle(b, xd, {&rt, rt.grid().column_group(0)});
  EXPECT_LT(test::rel_diff(xd, xs), 1e-13);
  EXPECT_TRUE(rt.quiescent());
}

TEST(VCycle, CountsApplications)
{
  const auto g = build_hierarchy(1, 3);
  const Multigrid mg(g, BlockCoefficients::single(1.0, 0.1));
  std::vector<double> b(mg.size(), 1.0), x(mg.size());
  mg.vcycle(b, x);
  mg.vcycle(b, x);
  EXPECT_EQ(mg.applications(), 2u);
  mg.reset_applications();
  EXPECT_EQ(mg.applications(), 0u);
}
