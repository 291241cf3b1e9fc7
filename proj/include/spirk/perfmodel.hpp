// SPDX-License-Identifier: Apache-2.0
#pragma once

// Cost model of one time step in dimensionless units (V-cycles, counter
// steps):
//   T_IRK   = 2 T_S  + sum_q T_B[q]
//   T_SPIRK = 2 T_S' + max_q T_B[q]
// and the speedup bound sum/max <= Q. The iteration form sets
// T_B[q] = N_IT[q] * T_hat[q].

#include <optional>
#include <string>
#include <vector>

namespace spirk {

struct CostModel
{
  double t_basis = 0.0;
  std::vector<double> t_block;

  // Throws ConfigError on negative or non-finite costs or an empty block list.
  void validate() const;
};

CostModel iteration_model(double t_basis, const std::vector<double> &iterations,
                          const std::vector<double> &per_iteration);

double predict_irk(const CostModel &model);
double predict_spirk(const CostModel &model);
// 1 when every block is free.
double speedup_bound(const CostModel &model);

// Per-step V-cycle counts as logged by a solve.
struct ScheduleRecord
{
  std::vector<double> group_vcycles;
  double vcycles_critical = 0.0;
  double vcycles_total = 0.0;
  double outer_iterations = 0.0;
};

struct ValidationSummary
{
  int groups = 0;
  int steps = 0;
  double avg_iterations = 0.0;
  double avg_vcycles_total = 0.0;
  double avg_vcycles_critical = 0.0;
  double predicted_speedup = 1.0;
  std::string irk_entry;    // "#G (#V)" with the total V-cycles
  std::string spirk_entry;  // "#G (#V)" with the critical-path V-cycles
  std::vector<std::string> mismatches;

  bool consistent() const noexcept { return mismatches.empty(); }
};

// Checks critical == max over groups and total == sum per step and, when a
// sequential total is given, that it equals the average per-step sum.
// Throws ConfigError for an empty record list.
ValidationSummary validate_against_counters(const std::vector<ScheduleRecord> &steps,
                                            std::optional<double> sequential_total = std::nullopt);

}  // namespace spirk
