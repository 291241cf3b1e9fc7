// SPDX-License-Identifier: Apache-2.0
#include "spirk/discretization.hpp"

#include "spirk/dense.hpp"

#include <cmath>

namespace spirk {
namespace {

class MultigridSolver : public BlockSolver
{
public:
  MultigridSolver(const GridHierarchy &grid, BlockCoefficients coef, const VCycleConfig &cfg)
    : mg_(grid, std::move(coef), cfg)
  {}

  int blocks() const override { return mg_.blocks(); }
  void solve(std::span<const double> b, std::span<double> x, const Team &team) const override
  {
    mg_.vcycle(b, x, team);
  }
  std::uint64_t applications() const override { return mg_.applications(); }

private:
  Multigrid mg_;
};

class ExactSolver : public BlockSolver
{
public:
  ExactSolver(const BlockCoefficients &coef, double m, double k) : nb_(coef.blocks)
  {
    Matrix a(static_cast<std::size_t>(nb_), static_cast<std::size_t>(nb_));
    for (int r = 0; r < nb_; ++r)
      for (int c = 0; c < nb_; ++c)
        a(r, c) = coef.a(r, c) * m + coef.b(r, c) * k;
    lu_ = LuSolver<double>(std::move(a));
  }

  int blocks() const override { return nb_; }
  void solve(std::span<const double> b, std::span<double> x, const Team &) const override
  {
    std::copy(b.begin(), b.end(), x.begin());
    lu_.solve_in_place(x);
    ++applications_;
  }
  std::uint64_t applications() const override { return applications_; }

private:
  int nb_;
  LuSolver<double> lu_;
  mutable std::uint64_t applications_ = 0;
};

}  // namespace

HeatFem::HeatFem(int dim, int level, VCycleConfig mg)
  : grid_(build_hierarchy(dim, level)), exact_(dim), mg_(mg)
{
  mg_.validate();
}

std::string HeatFem::name() const
{
  return "heat-" + std::to_string(grid_.dim()) + "d-L" + std::to_string(grid_.max_level());
}

void HeatFem::apply(const BlockCoefficients &coef, const double *x, double *y, const Team &team,
                    Constraint c) const
{
  apply_block_operator(grid_, grid_.max_level(), coef, x, y, team, c);
}

void HeatFem::load(double t, std::span<double> g) const
{
  const auto f = load_vector(grid_, grid_.max_level(),
                             [&](const Point &x) { return exact_.f(x, t); });
  std::copy(f.begin(), f.end(), g.begin());
}

void HeatFem::constrained_rate(double t, std::span<double> k) const
{
  std::fill(k.begin(), k.end(), 0.0);
  constrain(grid_, grid_.max_level(), k, [&](const Point &x) { return exact_.boundary_rate(x, t); });
}

void HeatFem::zero_constrained(std::span<double> v) const
{
  constrain_homogeneous(grid_, grid_.max_level(), v);
}

std::unique_ptr<BlockSolver> HeatFem::make_solver(const BlockCoefficients &coef) const
{
  return std::make_unique<MultigridSolver>(grid_, coef, mg_);
}

std::vector<double> HeatFem::initial_state(double t) const
{
  return interpolate(grid_, grid_.max_level(), [&](const Point &x) { return exact_.u(x, t); });
}

double HeatFem::error(std::span<const double> u, double t) const
{
  return l2_error(grid_, grid_.max_level(), u, [&](const Point &x) { return exact_.u(x, t); });
}

void ScalarOde::apply(const BlockCoefficients &coef, const double *x, double *y, const Team &,
                      Constraint) const
{
  for (int r = 0; r < coef.blocks; ++r)
  {
    double s = 0.0;
    for (int c = 0; c < coef.blocks; ++c)
      s += (coef.a(r, c) * m_ + coef.b(r, c) * k_) * x[c];
    y[r] = s;
  }
}

void ScalarOde::load(double, std::span<double> g) const { std::fill(g.begin(), g.end(), 0.0); }

void ScalarOde::constrained_rate(double, std::span<double> k) const
{
  std::fill(k.begin(), k.end(), 0.0);
}

void ScalarOde::zero_constrained(std::span<double>) const {}

std::unique_ptr<BlockSolver> ScalarOde::make_solver(const BlockCoefficients &coef) const
{
  return std::make_unique<ExactSolver>(coef, m_, k_);
}

std::vector<double> ScalarOde::initial_state(double t) const
{
  return {y0_ * std::exp(-k_ * t / m_)};
}

double ScalarOde::error(std::span<const double> u, double t) const
{
  return std::abs(u[0] - y0_ * std::exp(-k_ * t / m_));
}

}  // namespace spirk
