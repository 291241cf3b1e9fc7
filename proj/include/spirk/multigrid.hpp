// SPDX-License-Identifier: Apache-2.0
#pragma once

// Geometric multigrid for shifted mass/stiffness blocks
//
//   y_a = sum_c (alpha_ac M + beta_ac K) x_c ,   a, c = 0 .. blocks-1,
//
// with homogeneous Dirichlet conditions on every block. One block gives the
// real stage operator lambda M + tau K, a diagonal coefficient set gives the
// batched variant (all stages in one sweep), and the coupled 2x2 set gives the
// real form of a complex shifted block.
//
// Smoothing is Chebyshev around (point-block) Jacobi; the coarsest level is
// solved directly or by the same Chebyshev iteration.

#include "spirk/dense.hpp"
#include "spirk/grid_fem.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace spirk {

enum class CoarseSolver { direct, chebyshev };

std::string to_string(CoarseSolver c);
CoarseSolver parse_coarse_solver(const std::string &name);

struct VCycleConfig
{
  int smoother_degree = 5;
  double smoothing_range = 20.0;
  int eig_iters = 20;
  double eig_safety = 1.2;
  CoarseSolver coarse_solver = CoarseSolver::direct;
  bool pre_and_post = true;
  int coarse_level = 1;
  std::uint64_t seed = 42;  // power-iteration start vector

  // Throws ConfigError naming the offending field.
  void validate() const;
};

struct BlockCoefficients
{
  int blocks = 1;
  std::vector<double> alpha;  // blocks x blocks, row-major
  std::vector<double> beta;

  static BlockCoefficients single(double alpha, double beta);
  static BlockCoefficients diagonal(const std::vector<double> &alphas, double beta);
  // Real form of (re + i im) M + beta K acting on (Re x, Im x).
  static BlockCoefficients complex_pair(double re, double im, double beta);

  double a(int r, int c) const { return alpha[static_cast<std::size_t>(r * blocks + c)]; }
  double b(int r, int c) const { return beta[static_cast<std::size_t>(r * blocks + c)]; }
  bool is_diagonal() const;
  bool coupled(int r, int c) const { return a(r, c) != 0.0 || b(r, c) != 0.0; }
};

// y = A x for the block operator on one level; x and y hold `blocks`
// consecutive nodal vectors. Halo layers are fetched through the team.
void apply_block_operator(const GridHierarchy &grid, int level, const BlockCoefficients &coef,
                          const double *x, double *y, const Team &team = {},
                          Constraint c = Constraint::homogeneous);

class Multigrid
{
public:
  Multigrid(const GridHierarchy &grid, BlockCoefficients coef, VCycleConfig config = {});

  int blocks() const noexcept { return coef_.blocks; }
  std::size_t size() const noexcept;
  const VCycleConfig &config() const noexcept { return config_; }
  const BlockCoefficients &coefficients() const noexcept { return coef_; }
  int finest_level() const noexcept { return grid_->max_level(); }
  int coarse_level() const noexcept { return config_.coarse_level; }

  // One V-cycle from a zero initial guess: x ~ A^{-1} b. Boundary entries of
  // b are ignored and x is zero there.
  void vcycle(std::span<const double> b, std::span<double> x, const Team &team = {}) const;

  // Chebyshev smoothing of A x = b on `level`, starting from the given x.
  void smooth(int level, std::span<const double> b, std::span<double> x, bool zero_guess,
              const Team &team = {}) const;

  void apply(int level, std::span<const double> x, std::span<double> y,
             const Team &team = {}) const;

  // Safety-scaled estimate used by the smoother on `level`.
  double lambda_max(int level) const { return levels_[index(level)].lambda_max; }
  // Unscaled power-iteration estimate.
  double lambda_estimate(int level) const { return levels_[index(level)].lambda_raw; }

  std::uint64_t applications() const noexcept { return applications_; }
  void reset_applications() const noexcept { applications_ = 0; }

private:
  struct Level
  {
    int level = 0;
    std::size_t n = 0;
    std::vector<double> inv_diag;         // blocks * n, diagonal coefficient sets
    std::vector<double> inv_block;        // n * blocks^2, coupled sets
    std::vector<double> ones;             // blocks * n of 1 (0 on boundary)
    double lambda_raw = 0.0;
    double lambda_max = 0.0;
  };

  const GridHierarchy *grid_;
  BlockCoefficients coef_;
  VCycleConfig config_;
  std::vector<Level> levels_;
  std::vector<std::size_t> coarse_dofs_;  // (block, node) pairs flattened as block * n + node
  LuSolver<double> coarse_lu_;
  mutable std::uint64_t applications_ = 0;

  std::size_t index(int level) const;
  void setup_level(int level);
  void setup_coarse();
  void jacobi(const Level &lv, const double *r, double *z) const;
  void cycle(int level, const double *b, double *x, const Team &team) const;
  void coarse_solve(const double *b, double *x, const Team &team) const;
};

// Largest eigenvalue of D^{-1} A (D the point-block diagonal of A) on the
// interior DoFs of `level`, by power iteration with a Rayleigh quotient in the
// D inner product. No safety factor applied. Throws NumericalError if the
// estimate is not positive and finite.
double estimate_lambda_max(const GridHierarchy &grid, int level, const BlockCoefficients &coef,
                           int iterations, std::uint64_t seed = 42);

// Deterministic pseudo-random start vector entry in [0.5, 1.5) for index i.
double hash_unit(std::uint64_t i);

}  // namespace spirk
