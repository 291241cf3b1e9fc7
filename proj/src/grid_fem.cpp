// SPDX-License-Identifier: Apache-2.0
#include "spirk/grid_fem.hpp"

#include "spirk/kernels.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

namespace spirk {
namespace {

constexpr double kPi = std::numbers::pi;

int ipow(int base, int e)
{
  int r = 1;
  for (int i = 0; i < e; ++i)
    r *= base;
  return r;
}

// Local node a of a cell has bit d set when it sits at the upper end in direction d.
int bit(int a, int d) { return (a >> d) & 1; }

struct CellIndexing
{
  int dim;
  int np;
  std::size_t stride_last;  // index offset of one layer
  std::array<std::size_t, 8> offsets{};

  CellIndexing(int d, const GridLevel &lvl) : dim(d), np(lvl.nodes_per_dir)
  {
    stride_last = lvl.layer_size;
    const std::size_t strides[3] = {1, static_cast<std::size_t>(np),
                                    static_cast<std::size_t>(np) * np};
    for (int a = 0; a < (1 << dim); ++a)
    {
      std::size_t off = 0;
      for (int k = 0; k < dim; ++k)
        off += bit(a, k) * strides[k];
      offsets[a] = off;
    }
  }
};

// Visits every cell whose slowest-coordinate index lies in [c_begin, c_end),
// passing the global index of its lower-left node and that cell index.
template <typename F>
void for_cells(int dim, const GridLevel &lvl, int c_begin, int c_end, F &&f)
{
  const int n = lvl.cells_per_dir;
  const std::size_t np = static_cast<std::size_t>(lvl.nodes_per_dir);
  const int mid = dim >= 3 ? n : 1;
  const int fast = dim >= 2 ? n : 1;
  for (int c = c_begin; c < c_end; ++c)
    for (int j = 0; j < mid; ++j)
      for (int i = 0; i < fast; ++i)
      {
        std::size_t base = 0;
        if (dim == 1)
          base = static_cast<std::size_t>(c);
        else if (dim == 2)
          base = static_cast<std::size_t>(i) + np * c;
        else
          base = static_cast<std::size_t>(i) + np * (j + np * c);
        f(base, c);
      }
}

std::vector<double> tensor_element(int dim, const double (&m)[2][2], const double (&k)[2][2],
                                   bool stiffness)
{
  const int nc = 1 << dim;
  std::vector<double> e(static_cast<std::size_t>(nc * nc), 0.0);
  for (int a = 0; a < nc; ++a)
    for (int b = 0; b < nc; ++b)
    {
      double v = 0.0;
      if (!stiffness)
      {
        v = 1.0;
        for (int d = 0; d < dim; ++d)
          v *= m[bit(a, d)][bit(b, d)];
      }
      else
        for (int g = 0; g < dim; ++g)
        {
          double t = 1.0;
          for (int d = 0; d < dim; ++d)
            t *= d == g ? k[bit(a, d)][bit(b, d)] : m[bit(a, d)][bit(b, d)];
          v += t;
        }
      e[static_cast<std::size_t>(b * nc + a)] = v;  // column-major
    }
  return e;
}

void check_level(const GridHierarchy &g, int l)
{
  if (l < 0 || l > g.max_level())
    throw ConfigError("grid level " + std::to_string(l) + " outside [0, " +
                      std::to_string(g.max_level()) + "]");
}

}  // namespace

GridHierarchy::GridHierarchy(int dim, int max_level) : dim_(dim), max_level_(max_level)
{
  if (dim < 1 || dim > 3)
    throw ConfigError("dimension must be 1, 2 or 3 (got " + std::to_string(dim) + ")");
  if (max_level < 1 || max_level > kMaxLevel)
    throw ConfigError("refinement level must lie in [1, " + std::to_string(kMaxLevel) +
                      "] (got " + std::to_string(max_level) + ")");
  for (int l = 0; l <= max_level; ++l)
  {
    GridLevel lvl;
    lvl.level = l;
    lvl.cells_per_dir = 1 << l;
    lvl.nodes_per_dir = lvl.cells_per_dir + 1;
    lvl.h = 1.0 / lvl.cells_per_dir;
    lvl.n = static_cast<std::size_t>(ipow(lvl.nodes_per_dir, dim));
    lvl.cells = static_cast<std::size_t>(ipow(lvl.cells_per_dir, dim));
    lvl.layer_size = static_cast<std::size_t>(ipow(lvl.nodes_per_dir, dim - 1));
    lvl.boundary.assign(lvl.n, 0);
    const int np = lvl.nodes_per_dir;
    for (std::size_t idx = 0; idx < lvl.n; ++idx)
    {
      std::size_t rest = idx;
      bool on_boundary = false;
      for (int d = 0; d < dim; ++d)
      {
        const int c = static_cast<int>(rest % np);
        rest /= np;
        on_boundary = on_boundary || c == 0 || c == np - 1;
      }
      if (on_boundary)
      {
        lvl.boundary[idx] = 1;
        lvl.boundary_dofs.push_back(idx);
      }
    }
    lvl.interior_count = lvl.n - lvl.boundary_dofs.size();
    levels_.push_back(std::move(lvl));

    const double h = 1.0 / (1 << l);
    const double m[2][2] = {{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}};
    const double k[2][2] = {{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}};
    mass_.push_back(tensor_element(dim, m, k, false));
    stiffness_.push_back(tensor_element(dim, m, k, true));
  }
}

const GridLevel &GridHierarchy::level(int l) const
{
  check_level(*this, l);
  return levels_[static_cast<std::size_t>(l)];
}

Point GridHierarchy::coordinates(int l, std::size_t node) const
{
  const GridLevel &lvl = level(l);
  Point p{0.0, 0.0, 0.0};
  std::size_t rest = node;
  for (int d = 0; d < dim_; ++d)
  {
    p[d] = static_cast<double>(rest % lvl.nodes_per_dir) * lvl.h;
    rest /= lvl.nodes_per_dir;
  }
  return p;
}

std::size_t GridHierarchy::node_index(int l, const std::array<int, 3> &ijk) const
{
  const std::size_t np = static_cast<std::size_t>(level(l).nodes_per_dir);
  std::size_t idx = 0;
  for (int d = dim_; d-- > 0;)
    idx = idx * np + static_cast<std::size_t>(ijk[d]);
  return idx;
}

const std::vector<double> &GridHierarchy::element_mass(int l) const
{
  check_level(*this, l);
  return mass_[static_cast<std::size_t>(l)];
}

const std::vector<double> &GridHierarchy::element_stiffness(int l) const
{
  check_level(*this, l);
  return stiffness_[static_cast<std::size_t>(l)];
}

GridHierarchy build_hierarchy(int dim, int max_level) { return GridHierarchy(dim, max_level); }

LayerRange input_layers(const GridLevel &lvl, LayerRange rows)
{
  return {std::max(rows.begin - 1, 0), std::min(rows.end + 1, lvl.layers())};
}

void element_apply(const GridHierarchy &grid, int level, const double *elem, const double *x,
                   LayerRange window, LayerRange rows, double *y, Constraint c)
{
  const GridLevel &lvl = grid.level(level);
  const int dim = grid.dim();
  const int nc = 1 << dim;
  const CellIndexing ix(dim, lvl);
  const auto &kt = kernels::active();
  const bool homogeneous = c == Constraint::homogeneous;
  const std::size_t shift = static_cast<std::size_t>(window.begin) * lvl.layer_size;
  const int c_begin = std::max(rows.begin - 1, 0);
  const int c_end = std::min(rows.end, lvl.cells_per_dir);
  if (c_begin < window.begin || c_end + 1 > window.end)
  {
    if (c_end > c_begin)
      throw DimensionError("element_apply: input window does not cover the requested rows");
  }
  const int top_bit = dim - 1;
  double xe[8];
  double ye[8];
  for_cells(dim, lvl, c_begin, c_end, [&](std::size_t base, int cell_layer) {
    for (int a = 0; a < nc; ++a)
    {
      const std::size_t g = base + ix.offsets[a];
      xe[a] = homogeneous && lvl.boundary[g] ? 0.0 : x[g - shift];
    }
    kt.small_gemv(elem, xe, ye, static_cast<std::size_t>(nc), static_cast<std::size_t>(nc));
    for (int a = 0; a < nc; ++a)
    {
      const int layer = cell_layer + bit(a, top_bit);
      if (!rows.contains(layer))
        continue;
      const std::size_t g = base + ix.offsets[a];
      if (homogeneous && lvl.boundary[g])
        continue;
      y[g] += ye[a];
    }
  });
}

void apply_combination(const GridHierarchy &grid, int level, double alpha, double beta,
                       std::span<const double> x, std::span<double> y, Constraint c)
{
  const GridLevel &lvl = grid.level(level);
  if (x.size() != lvl.n || y.size() != lvl.n)
    throw DimensionError("apply_combination: vector length " + std::to_string(x.size()) +
                         "/" + std::to_string(y.size()) + " on a level with " +
                         std::to_string(lvl.n) + " nodes");
  const auto &m = grid.element_mass(level);
  const auto &k = grid.element_stiffness(level);
  std::vector<double> e(m.size());
  for (std::size_t i = 0; i < e.size(); ++i)
    e[i] = alpha * m[i] + beta * k[i];
  std::fill(y.begin(), y.end(), 0.0);
  const LayerRange all{0, lvl.layers()};
  element_apply(grid, level, e.data(), x.data(), all, all, y.data(), c);
}

void apply_mass(const GridHierarchy &grid, int level, std::span<const double> x,
                std::span<double> y, Constraint c)
{
  apply_combination(grid, level, 1.0, 0.0, x, y, c);
}

void apply_stiffness(const GridHierarchy &grid, int level, std::span<const double> x,
                     std::span<double> y, Constraint c)
{
  apply_combination(grid, level, 0.0, 1.0, x, y, c);
}

std::vector<double> operator_diagonal(const GridHierarchy &grid, int level, double alpha,
                                      double beta)
{
  const GridLevel &lvl = grid.level(level);
  const int nc = grid.nodes_per_cell();
  const auto &m = grid.element_mass(level);
  const auto &k = grid.element_stiffness(level);
  const CellIndexing ix(grid.dim(), lvl);
  std::vector<double> d(lvl.n, 0.0);
  for_cells(grid.dim(), lvl, 0, lvl.cells_per_dir, [&](std::size_t base, int) {
    for (int a = 0; a < nc; ++a)
    {
      const std::size_t e = static_cast<std::size_t>(a * nc + a);
      d[base + ix.offsets[a]] += alpha * m[e] + beta * k[e];
    }
  });
  return d;
}

std::vector<double> interpolate(const GridHierarchy &grid, int level, const SpaceFunction &f)
{
  const GridLevel &lvl = grid.level(level);
  std::vector<double> v(lvl.n);
  for (std::size_t i = 0; i < lvl.n; ++i)
    v[i] = f(grid.coordinates(level, i));
  return v;
}

void constrain(const GridHierarchy &grid, int level, std::span<double> v,
               const SpaceFunction &boundary_value)
{
  const GridLevel &lvl = grid.level(level);
  if (v.size() != lvl.n)
    throw DimensionError("constrain: vector length mismatch");
  for (std::size_t i : lvl.boundary_dofs)
    v[i] = boundary_value(grid.coordinates(level, i));
}

void constrain_homogeneous(const GridHierarchy &grid, int level, std::span<double> v)
{
  const GridLevel &lvl = grid.level(level);
  if (v.size() != lvl.n)
    throw DimensionError("constrain: vector length mismatch");
  for (std::size_t i : lvl.boundary_dofs)
    v[i] = 0.0;
}

std::vector<double> load_vector(const GridHierarchy &grid, int level, const SpaceFunction &f)
{
  const GridLevel &lvl = grid.level(level);
  const int dim = grid.dim();
  const int nc = 1 << dim;
  const CellIndexing ix(dim, lvl);
  const double g = 0.5 / std::sqrt(3.0);
  const double pts[2] = {0.5 - g, 0.5 + g};
  const double cell_weight = std::pow(lvl.h, dim) / nc;
  std::vector<double> rhs(lvl.n, 0.0);
  for_cells(dim, lvl, 0, lvl.cells_per_dir, [&](std::size_t base, int) {
    const Point origin = grid.coordinates(level, base);
    for (int qp = 0; qp < nc; ++qp)
    {
      Point x = origin;
      double xi[3] = {0.0, 0.0, 0.0};
      for (int d = 0; d < dim; ++d)
      {
        xi[d] = pts[bit(qp, d)];
        x[d] += lvl.h * xi[d];
      }
      const double fw = f(x) * cell_weight;
      for (int a = 0; a < nc; ++a)
      {
        double phi = 1.0;
        for (int d = 0; d < dim; ++d)
          phi *= bit(a, d) ? xi[d] : 1.0 - xi[d];
        rhs[base + ix.offsets[a]] += fw * phi;
      }
    }
  });
  return rhs;
}

double l2_error(const GridHierarchy &grid, int level, std::span<const double> uh,
                const SpaceFunction &u)
{
  const GridLevel &lvl = grid.level(level);
  if (uh.size() != lvl.n)
    throw DimensionError("l2_error: vector length mismatch");
  const int dim = grid.dim();
  const int nc = 1 << dim;
  const CellIndexing ix(dim, lvl);
  const double g = 0.5 * std::sqrt(0.6);
  const double pts[3] = {0.5 - g, 0.5, 0.5 + g};
  const double wts[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  const int nq = dim == 1 ? 3 : dim == 2 ? 9 : 27;
  const double vol = std::pow(lvl.h, dim);
  double sum = 0.0;
  for_cells(dim, lvl, 0, lvl.cells_per_dir, [&](std::size_t base, int) {
    const Point origin = grid.coordinates(level, base);
    for (int qp = 0; qp < nq; ++qp)
    {
      Point x = origin;
      double xi[3] = {0.0, 0.0, 0.0};
      double w = vol;
      int rest = qp;
      for (int d = 0; d < dim; ++d)
      {
        const int q1 = rest % 3;
        rest /= 3;
        xi[d] = pts[q1];
        w *= wts[q1];
        x[d] += lvl.h * xi[d];
      }
      double val = 0.0;
      for (int a = 0; a < nc; ++a)
      {
        double phi = 1.0;
        for (int d = 0; d < dim; ++d)
          phi *= bit(a, d) ? xi[d] : 1.0 - xi[d];
        val += phi * uh[base + ix.offsets[a]];
      }
      const double e = val - u(x);
      sum += w * e * e;
    }
  });
  return std::sqrt(sum);
}

LayerRange prolongation_input(const GridLevel &coarse, LayerRange fine_rows)
{
  if (fine_rows.count() == 0)
    return {0, 0};
  return {fine_rows.begin / 2, std::min(fine_rows.end / 2 + 1, coarse.layers())};
}

LayerRange restriction_input(const GridLevel &fine, LayerRange coarse_rows)
{
  if (coarse_rows.count() == 0)
    return {0, 0};
  return {std::max(2 * coarse_rows.begin - 1, 0), std::min(2 * coarse_rows.end, fine.layers())};
}

namespace {

// Per-direction 1D interpolation stencil of fine index i: coarse indices and weights.
int stencil(int i, int (&idx)[2], double (&w)[2])
{
  if (i % 2 == 0)
  {
    idx[0] = i / 2;
    w[0] = 1.0;
    return 1;
  }
  idx[0] = (i - 1) / 2;
  idx[1] = (i + 1) / 2;
  w[0] = w[1] = 0.5;
  return 2;
}

}  // namespace

void prolongate(const GridHierarchy &grid, int coarse_level, const double *coarse,
                LayerRange window, LayerRange fine_rows, double *fine)
{
  const GridLevel &cl = grid.level(coarse_level);
  const GridLevel &fl = grid.level(coarse_level + 1);
  const int dim = grid.dim();
  const std::size_t cnp = static_cast<std::size_t>(cl.nodes_per_dir);
  const std::size_t shift = static_cast<std::size_t>(window.begin) * cl.layer_size;
  const int fnp = fl.nodes_per_dir;
  const int mid = dim >= 3 ? fnp : 1;
  const int fast = dim >= 2 ? fnp : 1;
  for (int l = fine_rows.begin; l < fine_rows.end; ++l)
    for (int j = 0; j < mid; ++j)
      for (int i = 0; i < fast; ++i)
      {
        int f3[3] = {i, j, l};
        if (dim == 1)
          f3[0] = l;
        else if (dim == 2)
          f3[1] = l;
        int ci[3][2];
        double cw[3][2];
        int cnt[3] = {1, 1, 1};
        for (int d = 0; d < dim; ++d)
          cnt[d] = stencil(f3[d], ci[d], cw[d]);
        for (int d = dim; d < 3; ++d)
        {
          ci[d][0] = 0;
          cw[d][0] = 1.0;
        }
        double v = 0.0;
        for (int c = 0; c < cnt[2]; ++c)
          for (int b = 0; b < cnt[1]; ++b)
            for (int a = 0; a < cnt[0]; ++a)
            {
              const std::size_t g = static_cast<std::size_t>(ci[0][a]) +
                                    cnp * (static_cast<std::size_t>(ci[1][b]) +
                                           cnp * static_cast<std::size_t>(ci[2][c]));
              v += cw[0][a] * cw[1][b] * cw[2][c] * coarse[g - shift];
            }
        std::size_t fidx = 0;
        for (int d = dim; d-- > 0;)
          fidx = fidx * static_cast<std::size_t>(fnp) + static_cast<std::size_t>(f3[d]);
        fine[fidx] += v;
      }
}

void restrict_residual(const GridHierarchy &grid, int coarse_level, const double *fine,
                       LayerRange window, LayerRange coarse_rows, double *coarse)
{
  const GridLevel &cl = grid.level(coarse_level);
  const GridLevel &fl = grid.level(coarse_level + 1);
  const int dim = grid.dim();
  const int fnp = fl.nodes_per_dir;
  const std::size_t shift = static_cast<std::size_t>(window.begin) * fl.layer_size;
  const int cnp = cl.nodes_per_dir;
  const int mid = dim >= 3 ? cnp : 1;
  const int fast = dim >= 2 ? cnp : 1;
  for (int l = coarse_rows.begin; l < coarse_rows.end; ++l)
    for (int j = 0; j < mid; ++j)
      for (int i = 0; i < fast; ++i)
      {
        int c3[3] = {i, j, l};
        if (dim == 1)
          c3[0] = l;
        else if (dim == 2)
          c3[1] = l;
        std::size_t cidx = 0;
        for (int d = dim; d-- > 0;)
          cidx = cidx * static_cast<std::size_t>(cnp) + static_cast<std::size_t>(c3[d]);
        if (cl.boundary[cidx])
        {
          coarse[cidx] = 0.0;
          continue;
        }
        // Interior coarse nodes have all fine neighbours 2I-1..2I+1 in range.
        int lo[3] = {0, 0, 0};
        int hi[3] = {0, 0, 0};
        for (int d = 0; d < dim; ++d)
        {
          lo[d] = -1;
          hi[d] = 1;
        }
        double v = 0.0;
        for (int dc = lo[2]; dc <= hi[2]; ++dc)
          for (int db = lo[1]; db <= hi[1]; ++db)
            for (int da = lo[0]; da <= hi[0]; ++da)
            {
              const int d3[3] = {da, db, dc};
              std::size_t fidx = 0;
              double w = 1.0;
              for (int d = dim; d-- > 0;)
              {
                fidx = fidx * static_cast<std::size_t>(fnp) +
                       static_cast<std::size_t>(2 * c3[d] + d3[d]);
                w *= d3[d] == 0 ? 1.0 : 0.5;
              }
              v += w * fine[fidx - shift];
            }
        coarse[cidx] = v;
      }
}

double ManufacturedSolution::spatial(const Point &x) const
{
  double s = 1.0;
  for (int d = 0; d < dim_; ++d)
    s *= std::sin(2.0 * kPi * x[d]);
  return s;
}

double ManufacturedSolution::u(const Point &x, double t) const
{
  return spatial(x) * (1.0 + std::sin(kPi * t)) * std::exp(-0.5 * t);
}

double ManufacturedSolution::u_t(const Point &x, double t) const
{
  const double e = std::exp(-0.5 * t);
  return spatial(x) * (kPi * std::cos(kPi * t) * e - 0.5 * (1.0 + std::sin(kPi * t)) * e);
}

double ManufacturedSolution::f(const Point &x, double t) const
{
  return u_t(x, t) + dim_ * 4.0 * kPi * kPi * u(x, t);
}

void write_nodal_csv(std::ostream &os, const GridHierarchy &grid, int level,
                     std::span<const double> v)
{
  const GridLevel &lvl = grid.level(level);
  if (v.size() != lvl.n)
    throw DimensionError("write_nodal_csv: vector length mismatch");
  static const char *names[3] = {"x", "y", "z"};
  for (int d = 0; d < grid.dim(); ++d)
    os << names[d] << ',';
  os << "value\n";
  os.precision(17);
  for (std::size_t i = 0; i < lvl.n; ++i)
  {
    const Point p = grid.coordinates(level, i);
    for (int d = 0; d < grid.dim(); ++d)
      os << p[d] << ',';
    os << v[i] << '\n';
  }
}

}  // namespace spirk
