// SPDX-License-Identifier: Apache-2.0
#pragma once

// Spatial side of M u' + K u = g as seen by the stage solvers. Two
// implementations: the finite element heat problem with a multigrid block
// solver, and a scalar ODE (n = 1) whose blocks are inverted exactly.

#include "spirk/grid_fem.hpp"
#include "spirk/multigrid.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace spirk {

// Approximate inverse of one block operator (see BlockCoefficients).
class BlockSolver
{
public:
  virtual ~BlockSolver() = default;
  virtual int blocks() const = 0;
  virtual void solve(std::span<const double> b, std::span<double> x, const Team &team) const = 0;
  virtual std::uint64_t applications() const = 0;
};

class SpatialDiscretization
{
public:
  virtual ~SpatialDiscretization() = default;

  virtual std::string name() const = 0;
  virtual std::size_t size() const = 0;
  virtual SlabShape shape() const = 0;

  // y = A x for the block operator built from M and K. With Constraint::homogeneous
  // constrained DoFs are ignored on input and zero on output.
  virtual void apply(const BlockCoefficients &coef, const double *x, double *y, const Team &team,
                     Constraint c) const = 0;
  // Full right-hand side g(t).
  virtual void load(double t, std::span<double> g) const = 0;
  // Prescribed derivative on constrained DoFs, zero elsewhere.
  virtual void constrained_rate(double t, std::span<double> k) const = 0;
  virtual void zero_constrained(std::span<double> v) const = 0;
  virtual std::unique_ptr<BlockSolver> make_solver(const BlockCoefficients &coef) const = 0;

  virtual std::vector<double> initial_state(double t) const = 0;
  // Error against the exact solution at time t (L2 for fields).
  virtual double error(std::span<const double> u, double t) const = 0;
};

class HeatFem : public SpatialDiscretization
{
public:
  HeatFem(int dim, int level, VCycleConfig mg = {});

  const GridHierarchy &grid() const noexcept { return grid_; }
  const ManufacturedSolution &solution() const noexcept { return exact_; }
  const VCycleConfig &multigrid_config() const noexcept { return mg_; }

  std::string name() const override;
  std::size_t size() const override { return grid_.finest().n; }
  SlabShape shape() const override { return grid_.finest().shape(); }
  void apply(const BlockCoefficients &coef, const double *x, double *y, const Team &team,
             Constraint c) const override;
  void load(double t, std::span<double> g) const override;
  void constrained_rate(double t, std::span<double> k) const override;
  void zero_constrained(std::span<double> v) const override;
  std::unique_ptr<BlockSolver> make_solver(const BlockCoefficients &coef) const override;
  std::vector<double> initial_state(double t) const override;
  double error(std::span<const double> u, double t) const override;

private:
  GridHierarchy grid_;
  ManufacturedSolution exact_;
  VCycleConfig mg_;
};

// m y' + k y = 0, y(0) = y0; exact solution y0 exp(-k t / m).
class ScalarOde : public SpatialDiscretization
{
public:
  explicit ScalarOde(double mass = 1.0, double stiffness = 1.0, double y0 = 1.0)
    : m_(mass), k_(stiffness), y0_(y0)
  {}

  std::string name() const override { return "scalar-ode"; }
  std::size_t size() const override { return 1; }
  SlabShape shape() const override { return {1, 1, 1}; }
  void apply(const BlockCoefficients &coef, const double *x, double *y, const Team &team,
             Constraint c) const override;
  void load(double t, std::span<double> g) const override;
  void constrained_rate(double t, std::span<double> k) const override;
  void zero_constrained(std::span<double> v) const override;
  std::unique_ptr<BlockSolver> make_solver(const BlockCoefficients &coef) const override;
  std::vector<double> initial_state(double t) const override;
  double error(std::span<const double> u, double t) const override;

private:
  double m_;
  double k_;
  double y0_;
};

}  // namespace spirk
