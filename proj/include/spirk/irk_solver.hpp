// SPDX-License-Identifier: Apache-2.0
#pragma once

// One Radau IIA step for M u' + K u = g. The stage derivatives k solve
//
//   (A^{-1} (x) M + tau I (x) K) k = (A^{-1} (x) I) w,   w_i = g(t + c_i tau) - K u,
//
// and u <- u + tau sum_i b_i k_i. Constrained DoFs of k carry the derivative of
// the boundary data; the solve runs on the free DoFs.
//
// Paths:
//   real_lu        GMRES on the full system, preconditioned with
//                  P = L (x) M + tau I (x) K (L: lower Crout factor of A^{-1}),
//                  inverted through L = S diag(l) S^{-1} and one V-cycle per block.
//   complex_presb  complex diagonalization of A^{-1}, PRESB per conjugate pair.
//   complex_gmg    complex diagonalization, coupled 2x2 V-cycle per pair.
//
// Modes (real_lu): sequential (one process, stage blocks one after another),
// stage_parallel (Q x B rank grid on the simulated runtime) and batched (one
// process, all blocks in a single multi-block V-cycle). The complex paths run
// sequential or stage_parallel with one rank row per spectral block.

#include "spirk/complex_solver.hpp"
#include "spirk/discretization.hpp"
#include "spirk/krylov.hpp"
#include "spirk/simrt.hpp"
#include "spirk/tableau.hpp"
#include "spirk/tensor_ops.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace spirk {

enum class Mode { sequential, stage_parallel, batched };
enum class SolvePath { real_lu, complex_presb, complex_gmg };

std::string to_string(Mode m);
std::string to_string(SolvePath p);
Mode parse_mode(const std::string &name);
SolvePath parse_path(const std::string &name);

struct IrkConfig
{
  int stages = 2;
  double tau = 0.1;
  Mode mode = Mode::sequential;
  SolvePath path = SolvePath::real_lu;
  int partitions = 1;  // B
  simrt::Topology topology = simrt::Topology::row_major;
  int node_size = 0;
  std::optional<CombineBackend> combine;  // default: by topology
  GmresConfig gmres;
  bool solve_conjugates = false;  // complex paths, sequential mode only

  void validate() const;
};

struct StepReport
{
  int step = 0;
  double t = 0.0;  // time at the end of the step
  // real_lu: GMRES iterations. Complex paths: sum over spectral blocks.
  int outer_iterations = 0;
  int block_iterations_min = 0;
  int block_iterations_max = 0;
  // V-cycles per group: per stage (sequential, stage_parallel), one group
  // (batched) or per spectral block (complex paths).
  std::vector<std::uint64_t> group_vcycles;
  std::uint64_t vcycles_total = 0;
  std::uint64_t vcycles_critical = 0;
  std::vector<double> residual_history;  // real_lu only
  double true_residual = 0.0;            // real_lu only, relative
  bool converged = false;
  double imag_residue = 0.0;
  simrt::CounterSnapshot counters;  // stage_parallel only, this step
  double error = 0.0;
};

class IrkSolver
{
public:
  IrkSolver(const SpatialDiscretization &disc, IrkConfig config);
  ~IrkSolver();

  const IrkConfig &config() const noexcept { return config_; }
  const ButcherTableau &tableau() const noexcept { return tableau_; }
  const RealSpectralFactors &lower_factors() const noexcept { return lower_; }
  CombineBackend backend() const noexcept { return backend_; }
  simrt::Runtime *runtime() const noexcept { return runtime_.get(); }

  // Advances u from t to t + tau.
  StepReport step(double t, std::vector<double> &u);

  // Building blocks of the real path, exposed for testing.
  StageBlockVector assemble_rhs(double t, std::span<const double> u) const;
  StageBlockVector boundary_rates(double t) const;
  StageBlockVector apply_system(const StageBlockVector &k) const;
  StageBlockVector apply_preconditioner(const StageBlockVector &r) const;
  // Dot product over all stage blocks; distributed in stage_parallel mode.
  double dot(std::span<const double> a, std::span<const double> b) const;

private:
  Team stage_team(int q) const;
  StageBlockVector combine(const Matrix &d, const StageBlockVector &u) const;
  StageBlockVector apply_each(const BlockCoefficients &coef, const StageBlockVector &u,
                              Constraint c) const;
  std::vector<std::uint64_t> vcycle_counts() const;

  const SpatialDiscretization *disc_;
  IrkConfig config_;
  ButcherTableau tableau_;
  RealSpectralFactors lower_;
  CombineBackend backend_ = CombineBackend::dense;
  std::unique_ptr<simrt::Runtime> runtime_;
  std::vector<std::unique_ptr<BlockSolver>> stage_solvers_;  // one per stage, or one batched
  std::unique_ptr<ComplexStageSolver> complex_;
  Matrix update_;  // Q x Q, every row = b
  int steps_ = 0;
};

struct RunSummary
{
  std::vector<StepReport> steps;
  std::vector<double> u;
  double t_end = 0.0;
  double final_error = 0.0;
};

// Integrates from t0 over `steps` steps, starting from the exact solution.
RunSummary integrate(const SpatialDiscretization &disc, const IrkConfig &config, double t0, int steps);

}  // namespace spirk
