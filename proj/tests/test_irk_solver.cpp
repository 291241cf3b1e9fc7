// SPDX-License-Identifier: Apache-2.0
#include "spirk/error.hpp"
#include "spirk/irk_solver.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace spirk;

namespace {

// R(z) = 1 + z b^T (I - z A)^{-1} 1 for the Radau IIA tableau, by dense LU.
double stability(int q, double z)
{
  const ButcherTableau t = radau_iia(q);
  Matrix m = Matrix::identity(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      m(i, j) -= z * t.a(i, j);
  std::vector<double> x(static_cast<std::size_t>(q), 1.0);
  LuSolver<double>(m).solve_in_place(x);
  double s = 0.0;
  for (int i = 0; i < q; ++i)
    s += t.b[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
  return 1.0 + z * s;
}

IrkConfig config(int q, double tau, Mode mode = Mode::sequential, SolvePath path = SolvePath::real_lu)
{
  IrkConfig c;
  c.stages = q;
  c.tau = tau;
  c.mode = mode;
  c.path = path;
  return c;
}

StageBlockVector random_free(const SpatialDiscretization &d, int q, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  StageBlockVector v(q, d.size());
  v.data = test::random_vector(rng, v.data.size());
  for (int i = 0; i < q; ++i)
    d.zero_constrained(v.block(i));
  return v;
}

}  // namespace

TEST(Config, Parsing)
{
  EXPECT_EQ(parse_mode("stage-parallel"), Mode::stage_parallel);
  EXPECT_EQ(parse_mode("stage_parallel"), Mode::stage_parallel);
  EXPECT_EQ(parse_mode("batched"), Mode::batched);
  EXPECT_EQ(parse_path("complex_presb"), SolvePath::complex_presb);
  EXPECT_EQ(parse_path("real-lu"), SolvePath::real_lu);
  EXPECT_EQ(to_string(SolvePath::complex_gmg), "complex-gmg");
  EXPECT_THROW(parse_mode("threads"), ConfigError);
  EXPECT_THROW(parse_path("schur"), ConfigError);
}

TEST(Config, RejectsInconsistentCombinations)
{
  auto c = config(2, 0.1);
  c.partitions = 2;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(config(2, 0.1, Mode::batched, SolvePath::complex_presb).validate(), ConfigError);
  EXPECT_THROW(config(0, 0.1).validate(), ConfigError);
  EXPECT_THROW(config(10, 0.1).validate(), ConfigError);
  EXPECT_THROW(config(2, 0.0).validate(), ConfigError);
  c = config(2, 0.1, Mode::stage_parallel);
  c.combine = CombineBackend::dense;
  EXPECT_THROW(c.validate(), ConfigError);
  c = config(2, 0.1);
  c.combine = CombineBackend::rotate;
  EXPECT_THROW(c.validate(), ConfigError);
  c = config(2, 0.1, Mode::stage_parallel, SolvePath::complex_gmg);
  c.combine = CombineBackend::sharedmem;
  EXPECT_THROW(c.validate(), ConfigError);
  c = config(2, 0.1, Mode::stage_parallel, SolvePath::complex_gmg);
  c.solve_conjugates = true;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, StageParallelChecksGrid)
{
  const HeatFem heat(1, 2);
  auto c = config(2, 0.1, Mode::stage_parallel);
  c.partitions = 6;
  EXPECT_THROW(IrkSolver(heat, c), ConfigError);
  c.partitions = 2;
  c.combine = CombineBackend::sharedmem;
  EXPECT_THROW(IrkSolver(heat, c), ConfigError);
  c.topology = simrt::Topology::row_major_padded;
  EXPECT_NO_THROW(IrkSolver(heat, c));
  EXPECT_THROW(integrate(heat, config(2, 0.1), 0.0, 0), ConfigError);
}

TEST(ScalarProblem, SingleStageIsBackwardEuler)
{
  const ScalarOde ode;
  const auto run = integrate(ode, config(1, 0.1), 0.0, 1);
  EXPECT_NEAR(run.u[0], 1.0 / 1.1, 1e-14);
}

TEST(ScalarProblem, StepMatchesStabilityFunction)
{
  for (int q = 1; q <= 9; ++q)
    for (double mk : {1.0, 3.5})
    {
      const ScalarOde ode(2.0, mk * 2.0, 1.5);
      IrkSolver s(ode, config(q, 0.2));
      std::vector<double> u{1.5};
      s.step(0.0, u);
      EXPECT_NEAR(u[0], 1.5 * stability(q, -0.2 * mk), q <= 6 ? 1e-12 : 1e-10) << "Q=" << q;
    }
}

TEST(ScalarProblem, TwoStageStabilityClosedForm)
{
  const double z = -0.1;
  const double r = (1.0 + z / 3.0) / (1.0 - 2.0 * z / 3.0 + z * z / 6.0);
  const ScalarOde ode;
  const auto run = integrate(ode, config(2, 0.1), 0.0, 1);
  EXPECT_NEAR(run.u[0], r, 1e-14);
}

TEST(ScalarProblem, SystemOperatorAndRhs)
{
  const ScalarOde ode;
  const IrkSolver s(ode, config(2, 0.1));
  StageBlockVector k(2, 1);
  k.data = {1.0, 0.0};
  const auto v = s.apply_system(k);
  EXPECT_NEAR(v.data[0], 1.6, 1e-14);
  EXPECT_NEAR(v.data[1], -4.5, 1e-14);

  // w = g - K u with g = 0: rhs = A^{-1} (-u, -u) = (-2u, 2u).
  const std::vector<double> u{0.7};
  const auto r = s.assemble_rhs(0.0, u);
  EXPECT_NEAR(r.data[0], -1.4, 1e-14);
  EXPECT_NEAR(r.data[1], 1.4, 1e-14);
  const auto z = s.assemble_rhs(0.0, std::vector<double>{0.0});
  EXPECT_EQ(test::max_abs(z.data), 0.0);
  EXPECT_THROW(s.assemble_rhs(0.0, std::vector<double>{0.0, 1.0}), DimensionError);
}

TEST(ScalarProblem, ExactBlocksConvergeWithinStageCount)
{
  const ScalarOde ode(1.0, 4.0);
  for (int q = 1; q <= 9; ++q)
  {
    IrkSolver s(ode, config(q, 0.1));
    std::vector<double> u{1.0};
    const auto rep = s.step(0.0, u);
    EXPECT_TRUE(rep.converged);
    EXPECT_LE(rep.outer_iterations, q) << "Q=" << q;
  }
}

TEST(ScalarProblem, ObservedOrder)
{
  for (int q = 1; q <= 3; ++q)
  {
    double prev = 0.0;
    for (int i = 0; i < 4; ++i)
    {
      const double tau = 0.2 / (1 << i);
      const double err = integrate(ScalarOde(), config(q, tau), 0.0, 1 << (i + 2)).final_error;
      if (i > 0)
      {
        EXPECT_GE(std::log2(prev / err), 2 * q - 1 - 0.2) << "Q=" << q;
      }
      prev = err;
    }
  }
}

TEST(ScalarProblem, PathsAgree)
{
  for (int q = 1; q <= 6; ++q)
  {
    const double real = integrate(ScalarOde(), config(q, 0.1), 0.0, 3).u[0];
    for (auto path : {SolvePath::complex_presb, SolvePath::complex_gmg})
      EXPECT_NEAR(integrate(ScalarOde(), config(q, 0.1, Mode::sequential, path), 0.0, 3).u[0], real, 1e-12)
        << "Q=" << q;
  }
}

TEST(HeatProblem, StageParallelOperatorsMatchSequential)
{
  const HeatFem heat(1, 3);
  const IrkSolver seq(heat, config(4, 0.1));
  for (auto topo : {simrt::Topology::row_major, simrt::Topology::column_major, simrt::Topology::row_major_padded})
  {
    auto c = config(4, 0.1, Mode::stage_parallel);
    c.partitions = 2;
    c.topology = topo;
    const IrkSolver par(heat, c);
    const auto k = random_free(heat, 4, 3);
    EXPECT_LT(test::rel_diff(par.apply_system(k).data, seq.apply_system(k).data), 1e-12);
    EXPECT_LT(test::rel_diff(par.apply_preconditioner(k).data, seq.apply_preconditioner(k).data), 1e-12);
    EXPECT_NEAR(par.dot(k.data, k.data), seq.dot(k.data, k.data), 1e-12 * seq.dot(k.data, k.data));
    const std::vector<double> u = heat.initial_state(0.0);
    EXPECT_LT(test::rel_diff(par.assemble_rhs(0.0, u).data, seq.assemble_rhs(0.0, u).data), 1e-12);
    EXPECT_TRUE(par.runtime()->quiescent());
  }
}

TEST(HeatProblem, BoundaryRatesLiveOnConstrainedDofs)
{
  const HeatFem heat(2, 3);
  const IrkSolver s(heat, config(3, 0.1));
  const auto kb = s.boundary_rates(0.3);
  const auto &lvl = heat.grid().finest();
  for (int q = 0; q < 3; ++q)
    for (std::size_t i = 0; i < lvl.n; ++i)
    {
      const double t = 0.3 + s.tableau().c[static_cast<std::size_t>(q)] * 0.1;
      const double want = lvl.boundary[i] ? heat.solution().u_t(heat.grid().coordinates(3, i), t) : 0.0;
      EXPECT_NEAR(kb.block(q)[i], want, 1e-14);
    }
}

TEST(HeatProblem, ModesAgree)
{
  const HeatFem heat(2, 4);
  for (int q : {1, 2, 3})
  {
    const auto seq = integrate(heat, config(q, 0.05), 0.0, 3);
    const auto bat = integrate(heat, config(q, 0.05, Mode::batched), 0.0, 3);
    EXPECT_LT(test::rel_diff(bat.u, seq.u), 1e-8);
    std::vector<double> ref;
    for (auto topo : {simrt::Topology::row_major, simrt::Topology::column_major, simrt::Topology::row_major_padded})
    {
      auto c = config(q, 0.05, Mode::stage_parallel);
      c.partitions = 2;
      c.topology = topo;
      const auto par = integrate(heat, c, 0.0, 3);
      EXPECT_LT(test::rel_diff(par.u, seq.u), 1e-8);
      if (ref.empty())
        ref = par.u;
      else
        EXPECT_LT(test::rel_diff(par.u, ref), 1e-12);
    }
  }
}

TEST(HeatProblem, PathsAgree)
{
  const HeatFem heat(2, 4);
  for (int q : {2, 3})
  {
    const auto real = integrate(heat, config(q, 0.1), 0.0, 3);
    for (auto path : {SolvePath::complex_presb, SolvePath::complex_gmg})
    {
      EXPECT_LT(test::rel_diff(integrate(heat, config(q, 0.1, Mode::sequential, path), 0.0, 3).u, real.u), 1e-8);
      auto c = config(q, 0.1, Mode::stage_parallel, path);
      c.partitions = 2;
      EXPECT_LT(test::rel_diff(integrate(heat, c, 0.0, 3).u, real.u), 1e-8);
    }
  }
}

TEST(HeatProblem, VCycleAccounting)
{
  const HeatFem heat(2, 4);
  const int q = 4;
  const auto seq = integrate(heat, config(q, 0.1), 0.0, 2);
  auto c = config(q, 0.1, Mode::stage_parallel);
  c.partitions = 2;
  const auto par = integrate(heat, c, 0.0, 2);
  for (std::size_t s = 0; s < 2; ++s)
  {
    const auto &r = par.steps[s];
    ASSERT_EQ(r.group_vcycles.size(), static_cast<std::size_t>(q));
    for (auto v : r.group_vcycles)
      EXPECT_EQ(v, static_cast<std::uint64_t>(r.outer_iterations + 1));
    EXPECT_EQ(r.vcycles_critical, r.group_vcycles.front());
    EXPECT_EQ(r.vcycles_total, q * r.vcycles_critical);
    EXPECT_EQ(seq.steps[s].vcycles_total, r.vcycles_total);
    EXPECT_EQ(seq.steps[s].outer_iterations, r.outer_iterations);
  }
  const auto bat = integrate(heat, config(q, 0.1, Mode::batched), 0.0, 1);
  ASSERT_EQ(bat.steps[0].group_vcycles.size(), 1u);
  EXPECT_EQ(bat.steps[0].group_vcycles[0], static_cast<std::uint64_t>(bat.steps[0].outer_iterations + 1));
}

TEST(HeatProblem, StepReportIsComplete)
{
  const HeatFem heat(2, 4);
  auto c = config(2, 0.1, Mode::stage_parallel);
  c.partitions = 2;
  const auto run = integrate(heat, c, 0.0, 2);
  const auto &r = run.steps.back();
  EXPECT_EQ(r.step, 2);
  EXPECT_NEAR(r.t, 0.2, 1e-15);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.true_residual, 1e-11);
  EXPECT_EQ(r.residual_history.size(), static_cast<std::size_t>(r.outer_iterations) + 1);
  EXPECT_GT(r.counters.sum().messages, 0u);
  EXPECT_GT(r.counters.sum().shift_rounds, 0u);
  EXPECT_EQ(r.counters.ranks.size(), 4u);
  EXPECT_GT(r.error, 0.0);
  EXPECT_LT(r.error, 0.05);
  EXPECT_EQ(run.final_error, r.error);
}

TEST(HeatProblem, SpatialConvergence)
{
  for (int dim : {1, 2})
  {
    double prev = 0.0;
    for (int l = 3; l <= 5; ++l)
    {
      const double err = integrate(HeatFem(dim, l), config(3, 1e-3), 0.0, 1).final_error;
      if (l > 3)
      {
        EXPECT_NEAR(std::log2(prev / err), 2.0, 0.2) << "dim " << dim << " L " << l;
      }
      prev = err;
    }
  }
}

TEST(RuntimeSweep, StageParallelSolvesRunCleanly)
{
  const HeatFem heat(1, 3);
  for (int q : {1, 2, 4, 9})
  {
    const auto seq = integrate(heat, config(q, 0.1), 0.0, 1);
    for (int b : {1, 2, 4})
    {
      auto c = config(q, 0.1, Mode::stage_parallel);
      c.partitions = b;
      IrkSolver s(heat, c);
      auto u = heat.initial_state(0.0);
      const auto rep = s.step(0.0, u);
      EXPECT_TRUE(rep.converged);
      EXPECT_TRUE(s.runtime()->quiescent());
      EXPECT_LT(test::rel_diff(u, seq.u), 1e-8) << "Q=" << q << " B=" << b;
    }
  }
}
