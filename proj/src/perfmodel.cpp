// SPDX-License-Identifier: Apache-2.0
#include "spirk/perfmodel.hpp"

#include "spirk/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace spirk {
namespace {

std::string entry(double it, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f (%.1f)", it, v);
  return buf;
}

bool same(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

}  // namespace

void CostModel::validate() const
{
  if (t_block.empty())
    throw ConfigError("cost model: no block costs");
  if (!(t_basis >= 0.0) || !std::isfinite(t_basis))
    throw ConfigError("cost model: basis cost must be finite and non-negative");
  for (double t : t_block)
    if (!(t >= 0.0) || !std::isfinite(t))
      throw ConfigError("cost model: block costs must be finite and non-negative");
}

CostModel iteration_model(double t_basis, const std::vector<double> &iterations,
                          const std::vector<double> &per_iteration)
{
  if (iterations.size() != per_iteration.size())
    throw DimensionError("iteration model: " + std::to_string(iterations.size()) + " iteration counts for " +
                         std::to_string(per_iteration.size()) + " per-iteration costs");
  CostModel m{t_basis, {}};
  for (std::size_t q = 0; q < iterations.size(); ++q)
    m.t_block.push_back(iterations[q] * per_iteration[q]);
  m.validate();
  return m;
}

double predict_irk(const CostModel &model)
{
  model.validate();
  return 2.0 * model.t_basis + std::accumulate(model.t_block.begin(), model.t_block.end(), 0.0);
}

double predict_spirk(const CostModel &model)
{
  model.validate();
  return 2.0 * model.t_basis + *std::max_element(model.t_block.begin(), model.t_block.end());
}

double speedup_bound(const CostModel &model)
{
  model.validate();
  const double mx = *std::max_element(model.t_block.begin(), model.t_block.end());
  if (mx == 0.0)
    return 1.0;
  return std::accumulate(model.t_block.begin(), model.t_block.end(), 0.0) / mx;
}

ValidationSummary validate_against_counters(const std::vector<ScheduleRecord> &steps,
                                            std::optional<double> sequential_total)
{
  if (steps.empty())
    throw ConfigError("model validation: empty solve log");
  ValidationSummary s;
  s.steps = static_cast<int>(steps.size());
  s.groups = static_cast<int>(steps.front().group_vcycles.size());
  for (std::size_t i = 0; i < steps.size(); ++i)
  {
    const ScheduleRecord &r = steps[i];
    const std::string at = "step " + std::to_string(i + 1) + ": ";
    if (static_cast<int>(r.group_vcycles.size()) != s.groups || r.group_vcycles.empty())
    {
      s.mismatches.push_back(at + "group count " + std::to_string(r.group_vcycles.size()) + " differs from " +
                             std::to_string(s.groups));
      continue;
    }
    const double mx = *std::max_element(r.group_vcycles.begin(), r.group_vcycles.end());
    const double sum = std::accumulate(r.group_vcycles.begin(), r.group_vcycles.end(), 0.0);
    if (!same(r.vcycles_critical, mx))
      s.mismatches.push_back(at + "critical path " + std::to_string(r.vcycles_critical) +
                             " != max over groups " + std::to_string(mx));
    if (!same(r.vcycles_total, sum))
      s.mismatches.push_back(at + "total " + std::to_string(r.vcycles_total) + " != sum over groups " +
                             std::to_string(sum));
    s.avg_iterations += r.outer_iterations;
    s.avg_vcycles_total += r.vcycles_total;
    s.avg_vcycles_critical += r.vcycles_critical;
  }
  s.avg_iterations /= s.steps;
  s.avg_vcycles_total /= s.steps;
  s.avg_vcycles_critical /= s.steps;
  if (sequential_total && !same(*sequential_total, s.avg_vcycles_total))
    s.mismatches.push_back("sequential total " + std::to_string(*sequential_total) + " != sum over groups " +
                           std::to_string(s.avg_vcycles_total));
  const double total = sequential_total.value_or(s.avg_vcycles_total);
  s.predicted_speedup = s.avg_vcycles_critical > 0.0 ? total / s.avg_vcycles_critical : 1.0;
  s.irk_entry = entry(s.avg_iterations, total);
  s.spirk_entry = entry(s.avg_iterations, s.avg_vcycles_critical);
  return s;
}

}  // namespace spirk
