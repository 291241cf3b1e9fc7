// SPDX-License-Identifier: Apache-2.0
#pragma once

// Nested uniform grids on [0,1]^dim with multilinear (Q1) finite elements,
// matrix-free mass/stiffness operators, Dirichlet constraints and the
// manufactured heat-equation solution used for verification.

#include "spirk/partition.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace spirk {

using Point = std::array<double, 3>;

inline constexpr int kMaxLevel = 7;

struct GridLevel
{
  int level = 0;
  int cells_per_dir = 1;
  int nodes_per_dir = 2;
  double h = 1.0;
  std::size_t n = 0;           // nodes (= DoFs for Q1)
  std::size_t cells = 0;
  std::size_t layer_size = 0;  // nodes per layer of the slowest coordinate
  std::vector<std::uint8_t> boundary;
  std::vector<std::size_t> boundary_dofs;
  std::size_t interior_count = 0;

  int layers() const noexcept { return nodes_per_dir; }
  SlabShape shape(int blocks = 1) const { return {nodes_per_dir, layer_size, blocks}; }
};

class GridHierarchy
{
public:
  GridHierarchy() = default;
  GridHierarchy(int dim, int max_level);

  int dim() const noexcept { return dim_; }
  int max_level() const noexcept { return max_level_; }
  const GridLevel &level(int l) const;
  const GridLevel &finest() const { return level(max_level_); }

  Point coordinates(int l, std::size_t node) const;
  // Lexicographic node index from per-direction indices.
  std::size_t node_index(int l, const std::array<int, 3> &ijk) const;

  // Element matrices of the reference cell scaled for level l, column-major
  // with 2^dim rows (nodes ordered lexicographically, x fastest).
  const std::vector<double> &element_mass(int l) const;
  const std::vector<double> &element_stiffness(int l) const;
  int nodes_per_cell() const noexcept { return 1 << dim_; }

private:
  int dim_ = 0;
  int max_level_ = 0;
  std::vector<GridLevel> levels_;
  std::vector<std::vector<double>> mass_;
  std::vector<std::vector<double>> stiffness_;
};

// Throws ConfigError for dim outside [1,3] or max_level outside [1,kMaxLevel].
GridHierarchy build_hierarchy(int dim, int max_level);

// How boundary DoFs enter an operator application.
//   none:        plain assembled operator.
//   homogeneous: boundary inputs are treated as zero and boundary rows are
//                written as zero, i.e. the operator restricted to interior DoFs.
enum class Constraint { none, homogeneous };

// y[rows] += E x over all cells touching `rows`, with the element matrix E
// (column-major, 2^dim square). x holds the layers `window` of one block.
void element_apply(const GridHierarchy &grid, int level, const double *elem, const double *x,
                   LayerRange window, LayerRange rows, double *y, Constraint c);

// Layers of x that element_apply reads to produce `rows`.
LayerRange input_layers(const GridLevel &lvl, LayerRange rows);

// y = (alpha M + beta K) x, single process.
void apply_combination(const GridHierarchy &grid, int level, double alpha, double beta,
                       std::span<const double> x, std::span<double> y,
                       Constraint c = Constraint::none);
void apply_mass(const GridHierarchy &grid, int level, std::span<const double> x,
                std::span<double> y, Constraint c = Constraint::none);
void apply_stiffness(const GridHierarchy &grid, int level, std::span<const double> x,
                     std::span<double> y, Constraint c = Constraint::none);

// Diagonal of alpha M + beta K (boundary entries are the unconstrained ones).
std::vector<double> operator_diagonal(const GridHierarchy &grid, int level, double alpha,
                                      double beta);

using SpaceFunction = std::function<double(const Point &)>;

std::vector<double> interpolate(const GridHierarchy &grid, int level, const SpaceFunction &f);

// Overwrites boundary DoFs with the values of `boundary_value`.
void constrain(const GridHierarchy &grid, int level, std::span<double> v,
               const SpaceFunction &boundary_value);
void constrain_homogeneous(const GridHierarchy &grid, int level, std::span<double> v);

// Load vector (f, phi_i) by tensor Gauss quadrature with two points per direction.
std::vector<double> load_vector(const GridHierarchy &grid, int level, const SpaceFunction &f);

// || u_h - u ||_{L2} with three Gauss points per direction.
double l2_error(const GridHierarchy &grid, int level, std::span<const double> uh,
                const SpaceFunction &u);

// Coarse-to-fine linear interpolation and its transpose.
// fine[rows] += P coarse, with the coarse block given by its window.
void prolongate(const GridHierarchy &grid, int coarse_level, const double *coarse,
                LayerRange window, LayerRange fine_rows, double *fine);
// coarse[rows] = P^T fine on interior rows, zero on boundary rows.
void restrict_residual(const GridHierarchy &grid, int coarse_level, const double *fine,
                       LayerRange window, LayerRange coarse_rows, double *coarse);
// Layers of the coarse (resp. fine) level needed to produce the given rows.
LayerRange prolongation_input(const GridLevel &coarse, LayerRange fine_rows);
LayerRange restriction_input(const GridLevel &fine, LayerRange coarse_rows);

// u = sin(2 pi x) sin(2 pi y) sin(2 pi z) (1 + sin(pi t)) exp(-t/2), with the
// unused factors dropped below three dimensions; f = du/dt - laplace(u).
class ManufacturedSolution
{
public:
  explicit ManufacturedSolution(int dim) : dim_(dim) {}

  int dim() const noexcept { return dim_; }
  double u(const Point &x, double t) const;
  double u_t(const Point &x, double t) const;
  double f(const Point &x, double t) const;
  // Boundary data and its time derivative (the restriction of u and u_t).
  double boundary(const Point &x, double t) const { return u(x, t); }
  double boundary_rate(const Point &x, double t) const { return u_t(x, t); }

private:
  int dim_;
  double spatial(const Point &x) const;
};

// CSV with columns x[,y[,z]],value.
void write_nodal_csv(std::ostream &os, const GridHierarchy &grid, int level,
                     std::span<const double> v);

}  // namespace spirk
