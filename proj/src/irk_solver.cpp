// SPDX-License-Identifier: Apache-2.0
#include "spirk/irk_solver.hpp"

#include "spirk/error.hpp"
#include "spirk/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace spirk {

std::string to_string(Mode m)
{
  switch (m)
  {
  case Mode::sequential: return "sequential";
  case Mode::stage_parallel: return "stage_parallel";
  case Mode::batched: return "batched";
  }
  return "?";
}

std::string to_string(SolvePath p)
{
  switch (p)
  {
  case SolvePath::real_lu: return "real-lu";
  case SolvePath::complex_presb: return "complex-presb";
  case SolvePath::complex_gmg: return "complex-gmg";
  }
  return "?";
}

Mode parse_mode(const std::string &name)
{
  if (name == "sequential")
    return Mode::sequential;
  if (name == "stage_parallel" || name == "stage-parallel")
    return Mode::stage_parallel;
  if (name == "batched")
    return Mode::batched;
  throw ConfigError("unknown mode '" + name + "' (sequential, stage_parallel, batched)");
}

SolvePath parse_path(const std::string &name)
{
  if (name == "real-lu" || name == "real_lu")
    return SolvePath::real_lu;
  if (name == "complex-presb" || name == "complex_presb")
    return SolvePath::complex_presb;
  if (name == "complex-gmg" || name == "complex_gmg")
    return SolvePath::complex_gmg;
  throw ConfigError("unknown path '" + name + "' (real-lu, complex-presb, complex-gmg)");
}

void IrkConfig::validate() const
{
  if (stages < 1 || stages > kMaxStages)
    throw ConfigError("stages must lie in [1, " + std::to_string(kMaxStages) + "], got " +
                      std::to_string(stages));
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw ConfigError("time step must be positive and finite");
  if (partitions < 1)
    throw ConfigError("partition count must be at least 1");
  if (mode != Mode::stage_parallel && partitions != 1)
    throw ConfigError("spatial partitions require stage_parallel mode");
  if (mode == Mode::batched && path != SolvePath::real_lu)
    throw ConfigError("batched mode is only available on the real-lu path");
  if (solve_conjugates && (path == SolvePath::real_lu || mode != Mode::sequential))
    throw ConfigError("the conjugate check needs a complex path in sequential mode");
  if (combine && mode != Mode::stage_parallel && *combine != CombineBackend::dense)
    throw ConfigError("the " + to_string(*combine) + " combine needs stage_parallel mode");
  if (combine && mode == Mode::stage_parallel && *combine == CombineBackend::dense)
    throw ConfigError("stage_parallel mode needs a distributed combine (rotate or sharedmem)");
  if (combine && path != SolvePath::real_lu && *combine == CombineBackend::sharedmem)
    throw ConfigError("the complex paths combine by rotation only");
  if (gmres.max_iter < 1)
    throw ConfigError("GMRES needs at least one iteration");
}

IrkSolver::IrkSolver(const SpatialDiscretization &disc, IrkConfig config)
  : disc_(&disc), config_(std::move(config))
{
  config_.validate();
  const int q = config_.stages;
  tableau_ = radau_iia(q);
  lower_ = spectral_real(crout_lu(tableau_.a_inv).lower);

  const bool real = config_.path == SolvePath::real_lu;
  if (config_.mode == Mode::stage_parallel)
  {
    if (config_.partitions > disc.shape().layers)
      throw ConfigError("cannot split " + std::to_string(disc.shape().layers) + " layers into " +
                        std::to_string(config_.partitions) + " partitions");
    simrt::RankGrid grid(real ? q : pair_count(q), config_.partitions, config_.topology, config_.node_size);
    backend_ = real ? config_.combine.value_or(default_backend(grid)) : CombineBackend::rotate;
    if (backend_ == CombineBackend::sharedmem && grid.topology() != simrt::Topology::row_major_padded)
      throw ConfigError("the sharedmem combine needs the padded topology");
    runtime_ = std::make_unique<simrt::Runtime>(std::move(grid));
  }

  if (real)
  {
    if (config_.mode == Mode::batched)
      stage_solvers_.push_back(disc.make_solver(BlockCoefficients::diagonal(lower_.lambdas, config_.tau)));
    else
      for (double l : lower_.lambdas)
        stage_solvers_.push_back(disc.make_solver(BlockCoefficients::single(l, config_.tau)));
  }
  else
  {
    const auto prec = config_.path == SolvePath::complex_presb ? PairPreconditioner::presb
                                                                : PairPreconditioner::gmg;
    complex_ = std::make_unique<ComplexStageSolver>(disc, spectral_complex(tableau_.a_inv), config_.tau, prec,
                                                    config_.gmres, runtime_.get(), config_.solve_conjugates);
  }

  update_ = Matrix(static_cast<std::size_t>(q), static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      update_(i, j) = tableau_.b[static_cast<std::size_t>(j)];
}

IrkSolver::~IrkSolver() = default;

Team IrkSolver::stage_team(int q) const
{
  if (!runtime_)
    return {};
  const int row = config_.path == SolvePath::real_lu ? q : q / 2;
  return {runtime_.get(), runtime_->grid().column_group(row)};
}

StageBlockVector IrkSolver::combine(const Matrix &d, const StageBlockVector &u) const
{
  if (!runtime_)
    return dense_combine(d, u);
  if (config_.path == SolvePath::real_lu)
    return spirk::combine(backend_, d, u, runtime_.get(), disc_->shape());
  return rotate_combine_paired(d, u, *runtime_, disc_->shape());
}

StageBlockVector IrkSolver::apply_each(const BlockCoefficients &coef, const StageBlockVector &u,
                                       Constraint c) const
{
  StageBlockVector v(u.stages, u.n);
  for (int q = 0; q < u.stages; ++q)
    disc_->apply(coef, u.block(q).data(), v.block(q).data(), stage_team(q), c);
  return v;
}

StageBlockVector IrkSolver::boundary_rates(double t) const
{
  StageBlockVector kb(config_.stages, disc_->size());
  for (int q = 0; q < config_.stages; ++q)
    disc_->constrained_rate(t + tableau_.c[static_cast<std::size_t>(q)] * config_.tau, kb.block(q));
  return kb;
}

StageBlockVector IrkSolver::assemble_rhs(double t, std::span<const double> u) const
{
  const int nq = config_.stages;
  const std::size_t n = disc_->size();
  if (u.size() != n)
    throw DimensionError("assemble_rhs: state has " + std::to_string(u.size()) + " entries, expected " +
                         std::to_string(n));
  const StageBlockVector kb = boundary_rates(t);

  // w_q = g(t + c_q tau) - K u - M kb_q; every stage row forms its own copy of K u.
  StageBlockVector un(nq, n);
  for (int q = 0; q < nq; ++q)
    std::copy(u.begin(), u.end(), un.block(q).begin());
  const StageBlockVector ku = apply_each(BlockCoefficients::single(0.0, 1.0), un, Constraint::none);
  const StageBlockVector mkb = apply_each(BlockCoefficients::single(1.0, 0.0), kb, Constraint::none);
  StageBlockVector w(nq, n);
  for (int q = 0; q < nq; ++q)
  {
    auto wq = w.block(q);
    disc_->load(t + tableau_.c[static_cast<std::size_t>(q)] * config_.tau, wq);
    for (std::size_t i = 0; i < n; ++i)
      wq[i] -= ku.block(q)[i] + mkb.block(q)[i];
  }
  StageBlockVector r = combine(tableau_.a_inv, w);
  const StageBlockVector kkb = apply_each(BlockCoefficients::single(0.0, config_.tau), kb, Constraint::none);
  kernels::axpy(-1.0, std::span<const double>(kkb.data), std::span<double>(r.data));
  for (int q = 0; q < nq; ++q)
    disc_->zero_constrained(r.block(q));
  return r;
}

StageBlockVector IrkSolver::apply_system(const StageBlockVector &k) const
{
  const StageBlockVector mk = apply_each(BlockCoefficients::single(1.0, 0.0), k, Constraint::homogeneous);
  const StageBlockVector kk =
    apply_each(BlockCoefficients::single(0.0, config_.tau), k, Constraint::homogeneous);
  StageBlockVector v = combine(tableau_.a_inv, mk);
  kernels::axpy(1.0, std::span<const double>(kk.data), std::span<double>(v.data));
  return v;
}

StageBlockVector IrkSolver::apply_preconditioner(const StageBlockVector &r) const
{
  if (config_.path != SolvePath::real_lu)
    throw ConfigError("apply_preconditioner belongs to the real-lu path");
  const StageBlockVector w = combine(lower_.basis_inv, r);
  StageBlockVector z(w.stages, w.n);
  if (config_.mode == Mode::batched)
    stage_solvers_.front()->solve(w.data, z.data, {});
  else
    for (int q = 0; q < w.stages; ++q)
      stage_solvers_[static_cast<std::size_t>(q)]->solve(w.block(q), z.block(q), stage_team(q));
  return combine(lower_.basis, z);
}

double IrkSolver::dot(std::span<const double> a, std::span<const double> b) const
{
  if (!runtime_)
    return kernels::dot(a, b);
  const auto &grid = runtime_->grid();
  const SlabShape shape = disc_->shape();
  const std::size_t n = disc_->size();
  const int parts = grid.partitions();
  std::vector<double> partials;
  partials.reserve(static_cast<std::size_t>(config_.stages * parts));
  for (int q = 0; q < config_.stages; ++q)
    for (int p = 0; p < parts; ++p)
    {
      const LayerRange own = owned_layers(shape.layers, parts, p);
      const std::size_t lo = static_cast<std::size_t>(q) * n + static_cast<std::size_t>(own.begin) * shape.layer_size;
      const std::size_t len = static_cast<std::size_t>(own.count()) * shape.layer_size;
      partials.push_back(kernels::dot(a.subspan(lo, len), b.subspan(lo, len)));
    }
  if (config_.path == SolvePath::real_lu)
    return runtime_->allreduce_sum(grid.active_ranks(), partials);
  // Pair rows hold two stages each: combine the partials of a (row, b) rank.
  std::vector<double> merged(static_cast<std::size_t>(grid.stages() * parts), 0.0);
  for (int q = 0; q < config_.stages; ++q)
    for (int p = 0; p < parts; ++p)
      merged[static_cast<std::size_t>((q / 2) * parts + p)] += partials[static_cast<std::size_t>(q * parts + p)];
  return runtime_->allreduce_sum(grid.active_ranks(), merged);
}

std::vector<std::uint64_t> IrkSolver::vcycle_counts() const
{
  std::vector<std::uint64_t> c;
  for (const auto &s : stage_solvers_)
    c.push_back(s->applications());
  return c;
}

StepReport IrkSolver::step(double t, std::vector<double> &u)
{
  const int nq = config_.stages;
  const std::size_t n = disc_->size();
  StepReport rep;
  rep.step = ++steps_;
  rep.t = t + config_.tau;
  const simrt::CounterSnapshot before = runtime_ ? runtime_->counters() : simrt::CounterSnapshot{};
  const auto vc0 = vcycle_counts();

  const StageBlockVector rhs = assemble_rhs(t, u);
  StageBlockVector k(nq, n);
  if (config_.path == SolvePath::real_lu)
  {
    LinearOps<double> ops;
    ops.apply_a = [&](std::span<const double> x, std::span<double> y) {
      StageBlockVector in(nq, n);
      std::copy(x.begin(), x.end(), in.data.begin());
      const StageBlockVector out = apply_system(in);
      std::copy(out.data.begin(), out.data.end(), y.begin());
    };
    ops.apply_pinv = [&](std::span<const double> x, std::span<double> y) {
      StageBlockVector in(nq, n);
      std::copy(x.begin(), x.end(), in.data.begin());
      const StageBlockVector out = apply_preconditioner(in);
      std::copy(out.data.begin(), out.data.end(), y.begin());
    };
    if (runtime_)
      ops.dot = [&](std::span<const double> a, std::span<const double> b) { return dot(a, b); };
    const KrylovReport kr = gmres<double>(ops, rhs.data, k.data, config_.gmres);
    rep.outer_iterations = kr.iterations;
    rep.block_iterations_min = rep.block_iterations_max = kr.iterations;
    rep.residual_history = kr.residual_history;
    rep.true_residual = kr.reduction_achieved;
    rep.converged = kr.converged;
    const auto vc1 = vcycle_counts();
    for (std::size_t i = 0; i < vc1.size(); ++i)
      rep.group_vcycles.push_back(vc1[i] - vc0[i]);
  }
  else
  {
    ComplexSolveReport cr;
    k = complex_->solve(rhs, cr);
    rep.converged = cr.converged;
    rep.imag_residue = cr.imag_residue;
    rep.group_vcycles = cr.vcycles;
    for (int it : cr.iterations)
      rep.outer_iterations += it;
    rep.block_iterations_min = *std::min_element(cr.iterations.begin(), cr.iterations.end());
    rep.block_iterations_max = *std::max_element(cr.iterations.begin(), cr.iterations.end());
  }
  for (std::uint64_t v : rep.group_vcycles)
  {
    rep.vcycles_total += v;
    rep.vcycles_critical = std::max(rep.vcycles_critical, v);
  }

  const StageBlockVector kb = boundary_rates(t);
  kernels::axpy(1.0, std::span<const double>(kb.data), std::span<double>(k.data));
  const StageBlockVector inc = combine(update_, k);

  // Stiffly accurate: the last stage value must equal the update.
  double last_diff = 0.0, scale = 1.0;
  for (std::size_t i = 0; i < n; ++i)
  {
    double s = 0.0;
    for (int j = 0; j < nq; ++j)
      s += tableau_.a(static_cast<std::size_t>(nq - 1), static_cast<std::size_t>(j)) * k.block(j)[i];
    const double next = u[i] + config_.tau * inc.block(0)[i];
    last_diff = std::max(last_diff, std::abs(u[i] + config_.tau * s - next));
    scale = std::max(scale, std::abs(next));
  }
  if (last_diff > 1e-10 * scale)
    throw NumericalError("last stage value and step update differ by " + std::to_string(last_diff));
  kernels::axpy(config_.tau, inc.block(0), std::span<double>(u));

  if (runtime_)
  {
    runtime_->barrier(runtime_->grid().global_group());
    runtime_->require_quiescent("end of time step");
    rep.counters = runtime_->counters() - before;
  }
  rep.error = disc_->error(u, rep.t);
  return rep;
}

RunSummary integrate(const SpatialDiscretization &disc, const IrkConfig &config, double t0, int steps)
{
  if (steps < 1)
    throw ConfigError("need at least one time step");
  IrkSolver solver(disc, config);
  RunSummary out;
  out.u = disc.initial_state(t0);
  double t = t0;
  for (int s = 0; s < steps; ++s)
  {
    out.steps.push_back(solver.step(t, out.u));
    t = out.steps.back().t;
  }
  out.t_end = t;
  out.final_error = out.steps.back().error;
  return out;
}

}  // namespace spirk
