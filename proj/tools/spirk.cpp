// SPDX-License-Identifier: Apache-2.0
// spirk: command-line driver (solve, convergence, tableau, model).

#include "spirk/error.hpp"
#include "spirk/irk_solver.hpp"
#include "spirk/perfmodel.hpp"
#include "spirk/tableau.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace spirk;

namespace {

struct RunConfig
{
  std::string problem = "heat";
  int dim = 3;
  int levels = 4;
  int stages = 2;
  double tau = 0.1;
  int steps = 10;
  std::string mode = "sequential";
  std::string path = "real-lu";
  std::string topology = "row";
  int partitions = 1;
  int node_size = 0;
  std::string combine;
  int mg_degree = 5;
  double mg_range = 20.0;
  std::string mg_coarse = "direct";
  std::uint64_t seed = 42;
  std::string out = "spirk-out";
  bool solution = false;
};

std::string fmt(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

fs::path output_dir(const RunConfig &rc)
{
  const char *env = std::getenv("SPIRK_OUT");
  fs::path dir = env && *env ? fs::path(env) : fs::path(rc.out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_csv(const fs::path &file)
{
  std::ofstream os(file);
  if (!os)
    throw ConfigError("cannot write " + file.string());
  return os;
}

VCycleConfig multigrid_config(const RunConfig &rc)
{
  VCycleConfig mg;
  mg.smoother_degree = rc.mg_degree;
  mg.smoothing_range = rc.mg_range;
  mg.coarse_solver = parse_coarse_solver(rc.mg_coarse);
  mg.seed = rc.seed;
  mg.validate();
  return mg;
}

IrkConfig irk_config(const RunConfig &rc, double tau)
{
  IrkConfig c;
  c.stages = rc.stages;
  c.tau = tau;
  c.mode = parse_mode(rc.mode);
  c.path = parse_path(rc.path);
  c.partitions = rc.partitions;
  c.topology = simrt::parse_topology(rc.topology);
  c.node_size = rc.node_size;
  if (!rc.combine.empty())
    c.combine = parse_combine_backend(rc.combine);
  c.validate();
  return c;
}

std::unique_ptr<SpatialDiscretization> make_problem(const RunConfig &rc, int levels)
{
  if (rc.problem == "heat")
    return std::make_unique<HeatFem>(rc.dim, levels, multigrid_config(rc));
  if (rc.problem == "ode")
    return std::make_unique<ScalarOde>();
  throw ConfigError("problem: unknown value '" + rc.problem + "' (heat, ode)");
}

void add_run_options(CLI::App &app, RunConfig &rc)
{
  app.add_option("--problem", rc.problem, "heat | ode")->capture_default_str();
  app.add_option("--dim", rc.dim, "spatial dimension (1-3)")->capture_default_str();
  app.add_option("--L", rc.levels, "refinement level of the finest grid")->capture_default_str();
  app.add_option("--Q", rc.stages, "Radau IIA stages (1-9)")->capture_default_str();
  app.add_option("--tau", rc.tau, "time step")->capture_default_str();
  app.add_option("--steps", rc.steps, "number of time steps")->capture_default_str();
  app.add_option("--mode", rc.mode, "sequential | stage_parallel | batched")->capture_default_str();
  app.add_option("--path", rc.path, "real-lu | complex-presb | complex-gmg")->capture_default_str();
  app.add_option("--topology", rc.topology, "row | column | padded")->capture_default_str();
  app.add_option("--B", rc.partitions, "spatial partitions per stage")->capture_default_str();
  app.add_option("--node-size", rc.node_size, "ranks per simulated node (0: B)")->capture_default_str();
  app.add_option("--combine", rc.combine, "rotate | sharedmem (default by topology)");
  app.add_option("--mg-degree", rc.mg_degree, "Chebyshev smoother degree")->capture_default_str();
  app.add_option("--mg-range", rc.mg_range, "Chebyshev smoothing range")->capture_default_str();
  app.add_option("--mg-coarse", rc.mg_coarse, "direct | chebyshev")->capture_default_str();
  app.add_option("--seed", rc.seed, "seed of the eigenvalue-estimate start vector")->capture_default_str();
  app.add_option("--out", rc.out, "output directory (SPIRK_OUT overrides)")->capture_default_str();
}

std::string join_counts(const std::vector<std::uint64_t> &v)
{
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? ";" : "") + std::to_string(v[i]);
  return s;
}

int cmd_solve(const RunConfig &rc)
{
  auto disc = make_problem(rc, rc.levels);
  const IrkConfig cfg = irk_config(rc, rc.tau);
  if (rc.steps < 1)
    throw ConfigError("steps: need at least one time step");
  const fs::path dir = output_dir(rc);

  IrkSolver solver(*disc, cfg);
  std::vector<double> u = disc->initial_state(0.0);
  auto log = open_csv(dir / "solve_log.csv");
  log << "step,t,outer_iterations,block_iterations_min,block_iterations_max,vcycles_total,"
         "vcycles_critical,group_vcycles,true_residual,converged,imag_residue,l2_error\n";
  auto counters = open_csv(dir / "counters.csv");
  counters << "step,rank,stage,partition,node,idle,messages,bytes,inter_node_messages,barriers,shift_rounds\n";

  double t = 0.0, it_sum = 0.0, vt_sum = 0.0, vc_sum = 0.0;
  bool ok = true;
  StepReport last;
  for (int s = 0; s < rc.steps; ++s)
  {
    last = solver.step(t, u);
    t = last.t;
    ok = ok && last.converged;
    it_sum += last.outer_iterations;
    vt_sum += static_cast<double>(last.vcycles_total);
    vc_sum += static_cast<double>(last.vcycles_critical);
    log << last.step << ',' << fmt(last.t) << ',' << last.outer_iterations << ',' << last.block_iterations_min
        << ',' << last.block_iterations_max << ',' << last.vcycles_total << ',' << last.vcycles_critical << ','
        << join_counts(last.group_vcycles) << ',' << fmt(last.true_residual) << ',' << (last.converged ? 1 : 0)
        << ',' << fmt(last.imag_residue) << ',' << fmt(last.error) << '\n';
    if (const simrt::Runtime *rt = solver.runtime())
    {
      const auto &grid = rt->grid();
      for (int r = 0; r < grid.size(); ++r)
      {
        const auto &c = last.counters.ranks[static_cast<std::size_t>(r)];
        const bool idle = grid.idle(r);
        const simrt::RankCoords at = idle ? simrt::RankCoords{-1, -1} : grid.coords(r);
        counters << last.step << ',' << r << ',' << at.q << ',' << at.b << ',' << grid.node(r) << ','
                 << (idle ? 1 : 0) << ',' << c.messages << ',' << c.bytes << ',' << c.inter_node_messages
                 << ',' << c.barriers << ',' << c.shift_rounds << '\n';
      }
    }
  }

  auto summary = open_csv(dir / "summary.csv");
  summary << "problem,dim,L,Q,tau,steps,mode,path,topology,B,combine,dofs,avg_iterations,avg_vcycles_total,"
             "avg_vcycles_critical,final_t,final_error\n";
  const double n = rc.steps;
  summary << disc->name() << ',' << rc.dim << ',' << rc.levels << ',' << rc.stages << ',' << fmt(rc.tau) << ','
          << rc.steps << ',' << to_string(cfg.mode) << ',' << to_string(cfg.path) << ','
          << simrt::to_string(cfg.topology) << ',' << cfg.partitions << ',' << to_string(solver.backend()) << ','
          << disc->size() << ',' << fmt(it_sum / n) << ',' << fmt(vt_sum / n) << ',' << fmt(vc_sum / n) << ','
          << fmt(t) << ',' << fmt(last.error) << '\n';

  if (rc.solution)
    if (const auto *heat = dynamic_cast<const HeatFem *>(disc.get()))
    {
      auto os = open_csv(dir / "solution.csv");
      write_nodal_csv(os, heat->grid(), heat->grid().max_level(), u);
    }

  std::printf("%s Q=%d %s/%s: %d steps, avg #G %.1f (#V total %.1f, critical %.1f), error %.6e at t=%g\n",
              disc->name().c_str(), rc.stages, to_string(cfg.mode).c_str(), to_string(cfg.path).c_str(),
              rc.steps, it_sum / n, vt_sum / n, vc_sum / n, last.error, t);
  if (!ok)
  {
    std::fprintf(stderr, "error: GMRES did not converge in at least one step (see solve_log.csv)\n");
    return 3;
  }
  return 0;
}

std::vector<double> parse_list(const std::string &s)
{
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(std::stod(item));
  return out;
}

int cmd_convergence(const RunConfig &rc, const std::string &kind, const std::string &taus,
                    const std::string &levels, double t_end)
{
  const fs::path dir = output_dir(rc);
  auto os = open_csv(dir / "convergence.csv");
  os << "kind,problem,Q,resolution,tau,L,steps,error,observed_order\n";
  double prev = 0.0;
  auto emit = [&](double resolution, double tau, int lev, int steps, double err) {
    const double order = prev > 0.0 ? std::log2(prev / err) : std::nan("");
    os << kind << ',' << rc.problem << ',' << rc.stages << ',' << fmt(resolution) << ',' << fmt(tau) << ','
       << lev << ',' << steps << ',' << fmt(err) << ',' << (std::isnan(order) ? std::string() : fmt(order))
       << '\n';
    std::printf("%s res=%g error=%.6e order=%s\n", kind.c_str(), resolution, err,
                std::isnan(order) ? "-" : fmt(order).c_str());
    prev = err;
  };
  if (kind == "time")
  {
    auto disc = make_problem(rc, rc.levels);
    for (double tau : parse_list(taus))
    {
      const int steps = static_cast<int>(std::lround(t_end / tau));
      if (steps < 1 || std::abs(steps * tau - t_end) > 1e-12 * t_end)
        throw ConfigError("taus: " + fmt(tau) + " does not divide the end time " + fmt(t_end));
      const RunSummary r = integrate(*disc, irk_config(rc, tau), 0.0, steps);
      emit(tau, tau, rc.levels, steps, r.final_error);
    }
  }
  else if (kind == "space")
  {
    for (double l : parse_list(levels))
    {
      const int lev = static_cast<int>(l);
      auto disc = make_problem(rc, lev);
      const RunSummary r = integrate(*disc, irk_config(rc, rc.tau), 0.0, rc.steps);
      emit(std::ldexp(1.0, -lev), rc.tau, lev, rc.steps, r.final_error);
    }
  }
  else
    throw ConfigError("kind: unknown value '" + kind + "' (time, space)");
  return 0;
}

int cmd_tableau(const RunConfig &rc)
{
  const fs::path dir = output_dir(rc);
  const ButcherTableau t = radau_iia(rc.stages);
  const TriangularFactors lu = crout_lu(t.a_inv);
  const RealSpectralFactors rs = spectral_real(lu.lower);
  const ComplexSpectralFactors cs = spectral_complex(t.a_inv);
  auto os = open_csv(dir / "tableau.csv");
  os << "quantity,row,col,re,im\n";
  auto real_matrix = [&](const char *name, const Matrix &m) {
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j)
        os << name << ',' << i << ',' << j << ',' << fmt(m(i, j)) << ",0\n";
  };
  auto complex_matrix = [&](const char *name, const ComplexMatrix &m) {
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j)
        os << name << ',' << i << ',' << j << ',' << fmt(m(i, j).real()) << ',' << fmt(m(i, j).imag()) << '\n';
  };
  auto vector = [&](const char *name, const std::vector<double> &v) {
    for (std::size_t i = 0; i < v.size(); ++i)
      os << name << ',' << i << ",0," << fmt(v[i]) << ",0\n";
  };
  real_matrix("A", t.a);
  vector("b", t.b);
  vector("c", t.c);
  real_matrix("A_inv", t.a_inv);
  real_matrix("L", lu.lower);
  real_matrix("U", lu.upper);
  vector("lambda_L", rs.lambdas);
  real_matrix("S_L", rs.basis);
  real_matrix("S_L_inv", rs.basis_inv);
  for (std::size_t i = 0; i < cs.eigenvalues.size(); ++i)
    os << "eigenvalue," << i << ",0," << fmt(cs.eigenvalues[i].real()) << ',' << fmt(cs.eigenvalues[i].imag())
       << '\n';
  complex_matrix("S", cs.basis);
  complex_matrix("S_inv", cs.basis_inv);
  os << "reconstruction_L,0,0," << fmt(reconstruction_error(rs, lu.lower)) << ",0\n";
  os << "reconstruction_A_inv,0,0," << fmt(reconstruction_error(cs, t.a_inv)) << ",0\n";

  // Butcher layout: c_i, a_i1..a_iQ per row, then the weights behind an empty c.
  auto bs = open_csv(dir / "butcher.csv");
  bs << "c";
  for (int j = 1; j <= rc.stages; ++j)
    bs << ",a" << j;
  bs << '\n';
  for (std::size_t i = 0; i < t.a.rows(); ++i)
  {
    bs << fmt(t.c[i]);
    for (std::size_t j = 0; j < t.a.cols(); ++j)
      bs << ',' << fmt(t.a(i, j));
    bs << '\n';
  }
  for (double w : t.b)
    bs << ',' << fmt(w);
  bs << '\n';
  std::printf("Q=%d: wrote %s and %s\n", rc.stages, (dir / "tableau.csv").string().c_str(),
              (dir / "butcher.csv").string().c_str());
  return 0;
}

std::vector<std::string> split_csv_line(const std::string &line)
{
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ','))
    f.push_back(item);
  return f;
}

std::vector<ScheduleRecord> read_solve_log(const std::string &file)
{
  std::ifstream is(file);
  if (!is)
    throw ConfigError("log: cannot read " + file);
  std::string line;
  std::getline(is, line);
  const auto header = split_csv_line(line);
  auto column = [&](const std::string &name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name)
        return i;
    throw ConfigError("log: " + file + " has no column '" + name + "'");
  };
  const std::size_t c_it = column("outer_iterations"), c_tot = column("vcycles_total"),
                    c_crit = column("vcycles_critical"), c_grp = column("group_vcycles");
  std::vector<ScheduleRecord> out;
  while (std::getline(is, line))
  {
    if (line.empty())
      continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw ConfigError("log: malformed row '" + line + "'");
    ScheduleRecord r;
    r.outer_iterations = std::stod(f[c_it]);
    r.vcycles_total = std::stod(f[c_tot]);
    r.vcycles_critical = std::stod(f[c_crit]);
    std::stringstream gs(f[c_grp]);
    std::string g;
    while (std::getline(gs, g, ';'))
      r.group_vcycles.push_back(std::stod(g));
    out.push_back(std::move(r));
  }
  return out;
}

int cmd_model(const RunConfig &rc, const std::string &log, const std::string &sequential_log,
              double sequential_total)
{
  const auto steps = read_solve_log(log);
  std::optional<double> seq;
  if (!sequential_log.empty())
  {
    double sum = 0.0;
    const auto s = read_solve_log(sequential_log);
    for (const auto &r : s)
      sum += r.vcycles_total;
    seq = sum / static_cast<double>(s.size());
  }
  else if (sequential_total > 0.0)
    seq = sequential_total;
  const ValidationSummary v = validate_against_counters(steps, seq);
  const fs::path dir = output_dir(rc);
  auto os = open_csv(dir / "model.csv");
  os << "groups,steps,avg_iterations,avg_vcycles_total,avg_vcycles_critical,predicted_speedup,irk_entry,"
        "spirk_entry,consistent,mismatches\n";
  std::string mism;
  for (const auto &m : v.mismatches)
    mism += (mism.empty() ? "" : " | ") + m;
  os << v.groups << ',' << v.steps << ',' << fmt(v.avg_iterations) << ',' << fmt(v.avg_vcycles_total) << ','
     << fmt(v.avg_vcycles_critical) << ',' << fmt(v.predicted_speedup) << ",\"" << v.irk_entry << "\",\""
     << v.spirk_entry << "\"," << (v.consistent() ? 1 : 0) << ",\"" << mism << "\"\n";
  std::printf("groups %d, speedup %.3f, IRK %s, SPIRK %s, %s\n", v.groups, v.predicted_speedup,
              v.irk_entry.c_str(), v.spirk_entry.c_str(), v.consistent() ? "consistent" : mism.c_str());
  return v.consistent() ? 0 : 4;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Stage-parallel Radau IIA solver kit"};
  app.require_subcommand(1);
  RunConfig rc;

  auto *solve = app.add_subcommand("solve", "run the time loop and write solve/counter logs");
  add_run_options(*solve, rc);
  solve->add_flag("--solution", rc.solution, "also write the final nodal solution");

  auto *conv = app.add_subcommand("convergence", "temporal or spatial convergence sweep");
  add_run_options(*conv, rc);
  std::string kind = "time", taus = "0.2,0.1,0.05,0.025", levels = "2,3,4,5";
  double t_end = 1.0;
  conv->add_option("--kind", kind, "time | space")->capture_default_str();
  conv->add_option("--taus", taus, "comma-separated time steps (time sweep)")->capture_default_str();
  conv->add_option("--levels", levels, "comma-separated levels (space sweep)")->capture_default_str();
  conv->add_option("--t-end", t_end, "end time of the time sweep")->capture_default_str();

  auto *tab = app.add_subcommand("tableau", "export the tableau and its factorizations");
  tab->add_option("--Q", rc.stages, "Radau IIA stages (1-9)")->capture_default_str();
  tab->add_option("--out", rc.out, "output directory (SPIRK_OUT overrides)")->capture_default_str();

  auto *model = app.add_subcommand("model", "validate the cost model against a solve log");
  std::string log, seq_log;
  double seq_total = 0.0;
  model->add_option("--log", log, "solve_log.csv of a stage_parallel run")->required();
  model->add_option("--sequential-log", seq_log, "solve_log.csv of the matching sequential run");
  model->add_option("--sequential-total", seq_total, "sequential V-cycles per step");
  model->add_option("--out", rc.out, "output directory (SPIRK_OUT overrides)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try
  {
    if (*solve)
      return cmd_solve(rc);
    if (*conv)
      return cmd_convergence(rc, kind, taus, levels, t_end);
    if (*tab)
      return cmd_tableau(rc);
    return cmd_model(rc, log, seq_log, seq_total);
  }
  catch (const spirk::Error &e)
  {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  catch (const std::exception &e)
  {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
