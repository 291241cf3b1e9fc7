// SPDX-License-Identifier: Apache-2.0
#include "spirk/tensor_ops.hpp"

#include "spirk/kernels.hpp"

#include <algorithm>

namespace spirk {

int pair_count(int stages) { return (stages + 1) / 2; }

StageBlockVector scale_blocks(const BlockMap &apply_c, const StageBlockVector &u)
{
  StageBlockVector v(u.stages, u.n);
  for (int i = 0; i < u.stages; ++i)
    apply_c(u.block(i), v.block(i));
  return v;
}

StageBlockVector dense_combine(const Matrix &d, const StageBlockVector &u)
{
  if (d.rows() != static_cast<std::size_t>(u.stages) || d.cols() != static_cast<std::size_t>(u.stages))
    throw DimensionError("dense_combine: " + std::to_string(d.rows()) + "x" +
                         std::to_string(d.cols()) + " matrix for " + std::to_string(u.stages) +
                         " stages");
  StageBlockVector v(u.stages, u.n);
  for (int i = 0; i < u.stages; ++i)
    for (int j = 0; j < u.stages; ++j)
      if (d(i, j) != 0.0)
        kernels::axpy(d(i, j), u.block(j), v.block(i));
  return v;
}

ComplexBlockVector dense_combine(const ComplexMatrix &d, const ComplexBlockVector &u)
{
  if (d.cols() != static_cast<std::size_t>(u.blocks))
    throw DimensionError("dense_combine: matrix columns do not match the block count");
  ComplexBlockVector v(static_cast<int>(d.rows()), u.n);
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (int j = 0; j < u.blocks; ++j)
    {
      const cplx c = d(i, static_cast<std::size_t>(j));
      auto src = u.block(j);
      auto dst = v.block(static_cast<int>(i));
      for (std::size_t k = 0; k < u.n; ++k)
        dst[k] += c * src[k];
    }
  return v;
}

ComplexBlockVector dense_combine_to_complex(const ComplexMatrix &d, const StageBlockVector &u)
{
  if (d.cols() != static_cast<std::size_t>(u.stages))
    throw DimensionError("dense_combine_to_complex: matrix columns do not match the stage count");
  ComplexBlockVector w(static_cast<int>(d.rows()), u.n);
  for (std::size_t p = 0; p < d.rows(); ++p)
    for (int j = 0; j < u.stages; ++j)
    {
      const cplx c = d(p, static_cast<std::size_t>(j));
      auto src = u.block(j);
      auto dst = w.block(static_cast<int>(p));
      for (std::size_t k = 0; k < u.n; ++k)
        dst[k] += c * src[k];
    }
  return w;
}

StageBlockVector dense_combine_real_part(const ComplexMatrix &d, const ComplexBlockVector &z)
{
  if (d.cols() != static_cast<std::size_t>(z.blocks))
    throw DimensionError("dense_combine_real_part: matrix columns do not match the block count");
  StageBlockVector k(static_cast<int>(d.rows()), z.n);
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (int p = 0; p < z.blocks; ++p)
    {
      const cplx c = d(i, static_cast<std::size_t>(p));
      auto src = z.block(p);
      auto dst = k.block(static_cast<int>(i));
      for (std::size_t m = 0; m < z.n; ++m)
        dst[m] += c.real() * src[m].real() - c.imag() * src[m].imag();
    }
  return k;
}

namespace {

struct Slice
{
  std::size_t begin = 0;
  std::size_t len = 0;
};

Slice slice_of(const SlabShape &shape, int parts, int b)
{
  const LayerRange r = owned_layers(shape.layers, parts, b);
  return {static_cast<std::size_t>(r.begin) * shape.layer_size,
          static_cast<std::size_t>(r.count()) * shape.layer_size};
}

void check_shape(const SlabShape &shape, std::size_t n)
{
  if (shape.block_size() != n)
    throw DimensionError("combine: slab shape covers " + std::to_string(shape.block_size()) +
                         " entries, blocks have " + std::to_string(n));
}

// Rotation over `rows` rank rows. Row p starts with payload(p) and in round r
// holds the payload of row (p + r) mod rows; accumulate(p, j, held, slice)
// adds its contribution.
template <typename Payload, typename Accumulate>
void rotate_rows(simrt::Runtime &rt, const SlabShape &shape, int rows, Payload &&payload,
                 Accumulate &&accumulate)
{
  const auto &grid = rt.grid();
  if (grid.stages() != rows)
    throw DimensionError("rotate: grid has " + std::to_string(grid.stages()) + " rows, operand needs " +
                         std::to_string(rows));
  for (int b = 0; b < grid.partitions(); ++b)
  {
    const auto group = grid.row_group(b);
    const Slice s = slice_of(shape, grid.partitions(), b);
    std::vector<std::vector<double>> held(static_cast<std::size_t>(rows));
    for (int p = 0; p < rows; ++p)
      held[static_cast<std::size_t>(p)] = payload(p, s);
    for (int r = 0; r < rows; ++r)
    {
      for (int p = 0; p < rows; ++p)
        accumulate(p, (p + r) % rows, held[static_cast<std::size_t>(p)], s);
      if (r + 1 < rows)
        rt.ring_shift_up(group, held);
    }
  }
}

std::vector<double> pair_payload(const StageBlockVector &u, int j, Slice s)
{
  std::vector<double> p(2 * s.len, 0.0);
  for (int t = 0; t < 2; ++t)
  {
    const int stage = 2 * j + t;
    if (stage >= u.stages)
      continue;
    std::copy_n(u.data.begin() + static_cast<std::ptrdiff_t>(stage * u.n + s.begin), s.len,
                p.begin() + static_cast<std::ptrdiff_t>(t * s.len));
  }
  return p;
}

}  // namespace

StageBlockVector rotate_combine(const Matrix &d, const StageBlockVector &u, simrt::Runtime &rt,
                                const SlabShape &shape)
{
  if (d.rows() != static_cast<std::size_t>(u.stages) || d.cols() != static_cast<std::size_t>(u.stages))
    throw DimensionError("rotate_combine: matrix does not match the stage count");
  check_shape(shape, u.n);
  StageBlockVector v(u.stages, u.n);
  const auto &kt = kernels::active();
  rotate_rows(
    rt, shape, u.stages,
    [&](int p, Slice s) {
      auto blk = u.block(p).subspan(s.begin, s.len);
      return std::vector<double>(blk.begin(), blk.end());
    },
    [&](int i, int j, const std::vector<double> &held, Slice s) {
      if (d(i, j) != 0.0)
        kt.axpy(d(i, j), held.data(), v.block(i).data() + s.begin, s.len);
    });
  return v;
}

StageBlockVector sharedmem_combine(const Matrix &d, const StageBlockVector &u, simrt::Runtime &rt,
                                   const SlabShape &shape)
{
  const auto &grid = rt.grid();
  if (grid.topology() != simrt::Topology::row_major_padded)
    throw ConfigError("sharedmem_combine: topology '" + simrt::to_string(grid.topology()) +
                      "' does not co-locate the stages of a partition (padded required)");
  if (d.rows() != static_cast<std::size_t>(u.stages) || d.cols() != static_cast<std::size_t>(u.stages))
    throw DimensionError("sharedmem_combine: matrix does not match the stage count");
  if (grid.stages() != u.stages)
    throw DimensionError("sharedmem_combine: grid rows do not match the stage count");
  check_shape(shape, u.n);
  StageBlockVector v(u.stages, u.n);
  const auto &kt = kernels::active();
  for (int b = 0; b < grid.partitions(); ++b)
  {
    const auto group = grid.row_group(b);
    const Slice s = slice_of(shape, grid.partitions(), b);
    rt.barrier(group);  // source blocks are complete and visible
    for (int i = 0; i < u.stages; ++i)
      for (int j = 0; j < u.stages; ++j)
        if (d(i, j) != 0.0)
          kt.axpy(d(i, j), u.block(j).data() + s.begin, v.block(i).data() + s.begin, s.len);
    rt.barrier(group);  // nobody overwrites a source block still being read
  }
  return v;
}

std::string to_string(CombineBackend b)
{
  switch (b)
  {
    case CombineBackend::dense:
      return "dense";
    case CombineBackend::rotate:
      return "rotate";
    case CombineBackend::sharedmem:
      return "sharedmem";
  }
  return "unknown";
}

CombineBackend parse_combine_backend(const std::string &name)
{
  if (name == "dense")
    return CombineBackend::dense;
  if (name == "rotate")
    return CombineBackend::rotate;
  if (name == "sharedmem")
    return CombineBackend::sharedmem;
  throw ConfigError("combine: unknown backend '" + name + "' (dense|rotate|sharedmem)");
}

CombineBackend default_backend(const simrt::RankGrid &grid)
{
  return grid.topology() == simrt::Topology::row_major_padded ? CombineBackend::sharedmem
                                                              : CombineBackend::rotate;
}

StageBlockVector combine(CombineBackend backend, const Matrix &d, const StageBlockVector &u,
                         simrt::Runtime *rt, const SlabShape &shape)
{
  if (backend == CombineBackend::dense || rt == nullptr)
    return dense_combine(d, u);
  if (backend == CombineBackend::rotate)
    return rotate_combine(d, u, *rt, shape);
  return sharedmem_combine(d, u, *rt, shape);
}

ComplexBlockVector rotate_combine_paired(const ComplexMatrix &d, const StageBlockVector &u,
                                         simrt::Runtime &rt, const SlabShape &shape)
{
  const int pairs = pair_count(u.stages);
  if (d.rows() != static_cast<std::size_t>(pairs) || d.cols() != static_cast<std::size_t>(u.stages))
    throw DimensionError("rotate_combine_paired: expected a " + std::to_string(pairs) + "x" +
                         std::to_string(u.stages) + " matrix");
  check_shape(shape, u.n);
  ComplexBlockVector w(pairs, u.n);
  rotate_rows(
    rt, shape, pairs, [&](int j, Slice s) { return pair_payload(u, j, s); },
    [&](int p, int j, const std::vector<double> &held, Slice s) {
      cplx *dst = w.block(p).data() + s.begin;
      for (int t = 0; t < 2; ++t)
      {
        const int stage = 2 * j + t;
        if (stage >= u.stages)
          continue;
        const cplx c = d(static_cast<std::size_t>(p), static_cast<std::size_t>(stage));
        const double *src = held.data() + t * s.len;
        for (std::size_t k = 0; k < s.len; ++k)
          dst[k] += c * src[k];
      }
    });
  return w;
}

StageBlockVector rotate_combine_paired(const ComplexMatrix &d, const ComplexBlockVector &z,
                                       simrt::Runtime &rt, const SlabShape &shape)
{
  const int stages = static_cast<int>(d.rows());
  const int pairs = pair_count(stages);
  if (z.blocks != pairs || d.cols() != static_cast<std::size_t>(pairs))
    throw DimensionError("rotate_combine_paired: expected a Qx" + std::to_string(pairs) +
                         " matrix for " + std::to_string(z.blocks) + " complex blocks");
  check_shape(shape, z.n);
  StageBlockVector k(stages, z.n);
  rotate_rows(
    rt, shape, pairs,
    [&](int j, Slice s) {
      std::vector<double> p(2 * s.len);
      const cplx *src = z.block(j).data() + s.begin;
      for (std::size_t m = 0; m < s.len; ++m)
      {
        p[m] = src[m].real();
        p[s.len + m] = src[m].imag();
      }
      return p;
    },
    [&](int p, int j, const std::vector<double> &held, Slice s) {
      for (int t = 0; t < 2; ++t)
      {
        const int stage = 2 * p + t;
        if (stage >= stages)
          continue;
        const cplx c = d(static_cast<std::size_t>(stage), static_cast<std::size_t>(j));
        double *dst = k.block(stage).data() + s.begin;
        for (std::size_t m = 0; m < s.len; ++m)
          dst[m] += c.real() * held[m] - c.imag() * held[s.len + m];
      }
    });
  return k;
}

StageBlockVector rotate_combine_paired(const Matrix &d, const StageBlockVector &u,
                                       simrt::Runtime &rt, const SlabShape &shape)
{
  if (d.rows() != static_cast<std::size_t>(u.stages) || d.cols() != static_cast<std::size_t>(u.stages))
    throw DimensionError("rotate_combine_paired: matrix does not match the stage count");
  check_shape(shape, u.n);
  const int pairs = pair_count(u.stages);
  StageBlockVector v(u.stages, u.n);
  const auto &kt = kernels::active();
  rotate_rows(
    rt, shape, pairs, [&](int j, Slice s) { return pair_payload(u, j, s); },
    [&](int p, int j, const std::vector<double> &held, Slice s) {
      for (int t = 0; t < 2; ++t)
      {
        const int i = 2 * p + t;
        if (i >= u.stages)
          continue;
        for (int c = 0; c < 2; ++c)
        {
          const int src = 2 * j + c;
          if (src < u.stages && d(i, src) != 0.0)
            kt.axpy(d(i, src), held.data() + c * s.len, v.block(i).data() + s.begin, s.len);
        }
      }
    });
  return v;
}

}  // namespace spirk
