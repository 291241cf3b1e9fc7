// SPDX-License-Identifier: Apache-2.0
#pragma once

// Direct diagonalization of the stage system through the complex
// eigen-decomposition A^{-1} = S diag(lambda) S^{-1}:
//
//   z_p = (lambda_p M + tau K)^{-1} (S^{-1} (x) I) rhs,   k = Re sum_p D_p z_p,
//
// one block per conjugate pair (solved once, the partner is its conjugate)
// and one real block per real eigenvalue. A pair block K' + i M' with
// K' = Re(lambda) M + tau K and M' = Im(lambda) M is solved either by real
// GMRES on the stacked form [K' -M'; M' K'] preconditioned with PRESB (two real
// V-cycles on H = K' + M') or by complex GMRES with one V-cycle of the coupled
// 2x2 real multigrid. A real block uses real GMRES
// with one real V-cycle.

#include "spirk/discretization.hpp"
#include "spirk/krylov.hpp"
#include "spirk/simrt.hpp"
#include "spirk/tableau.hpp"
#include "spirk/tensor_ops.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace spirk {

enum class PairPreconditioner { presb, gmg };

std::string to_string(PairPreconditioner p);

// y = [K' -M'; M' K'] x with x = [x_re; x_im], constrained DoFs zero.
void twobytwo_apply(const SpatialDiscretization &disc, cplx lambda, double tau, const double *x,
                    double *y, const Team &team = {});

// z = P^{-1} r for P = [K' -M'; M' K' + 2M'], with `inner_solve`
// approximating H^{-1}, H = K' + M'. Calls inner_solve twice.
void presb_apply(const SpatialDiscretization &disc, cplx lambda, const BlockMap &inner_solve,
                 std::span<const double> r, std::span<double> z, const Team &team = {});

struct ComplexSolveReport
{
  std::vector<int> iterations;              // per spectral block
  std::vector<std::uint64_t> vcycles;       // per spectral block
  std::vector<std::vector<double>> residuals;
  bool converged = true;
  // max |Im k| / max |k| over the full complex reconstruction; only set when
  // conjugate blocks are solved as well.
  double imag_residue = 0.0;
};

class ComplexStageSolver
{
public:
  // `rt`, when given, runs on a RankGrid with one row per spectral block.
  ComplexStageSolver(const SpatialDiscretization &disc, const ComplexSpectralFactors &factors, double tau,
                     PairPreconditioner prec, GmresConfig gmres, simrt::Runtime *rt = nullptr,
                     bool solve_conjugates = false);
  ~ComplexStageSolver();

  int block_count() const noexcept { return static_cast<int>(factors_.blocks.size()); }
  // Row-reduction D_R (P x Q) and back-transform D_S (Q x P).
  const ComplexMatrix &forward() const noexcept { return forward_; }
  const ComplexMatrix &backward() const noexcept { return backward_; }

  // rhs = (A^{-1} (x) I)(...) with zero constrained rows; returns the free
  // part of the stage derivatives.
  StageBlockVector solve(const StageBlockVector &rhs, ComplexSolveReport &report) const;

private:
  struct Block;

  std::vector<cplx> solve_pair(const Block &blk, cplx lambda, std::span<const cplx> w, const Team &team,
                               ComplexSolveReport &report) const;
  std::vector<cplx> solve_real(const Block &blk, double lambda, std::span<const cplx> w, const Team &team,
                               ComplexSolveReport &report) const;
  Team team(int p) const;

  const SpatialDiscretization *disc_;
  ComplexSpectralFactors factors_;
  double tau_;
  PairPreconditioner prec_;
  GmresConfig gmres_;
  simrt::Runtime *rt_;
  bool solve_conjugates_;
  int stages_;
  ComplexMatrix forward_;
  ComplexMatrix backward_;
  std::vector<std::unique_ptr<Block>> blocks_;
};

}  // namespace spirk
