// SPDX-License-Identifier: Apache-2.0
#pragma once

// Kronecker primitives on stage block vectors:
//   scale_blocks:  v = (I_Q (x) C) u   (C applied to every stage block)
//   *_combine:     v = (D (x) I_n) u   (v_i = sum_j D_ij u_j)
//
// dense_combine is the single-process reference. rotate_combine computes the
// same product on a RankGrid by Q summation rounds with a cyclic shift of the
// held source block between rounds; sharedmem_combine reads peer blocks
// directly between two row barriers. The paired variants operate on stage
// pairs (2p, 2p+1) held by one rank row, for the complex basis changes.

#include "spirk/dense.hpp"
#include "spirk/partition.hpp"
#include "spirk/simrt.hpp"

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace spirk {

using cplx = std::complex<double>;

struct StageBlockVector
{
  int stages = 0;
  std::size_t n = 0;
  std::vector<double> data;

  StageBlockVector() = default;
  StageBlockVector(int q, std::size_t len) : stages(q), n(len), data(static_cast<std::size_t>(q) * len, 0.0) {}

  std::span<double> block(int i) { return {data.data() + static_cast<std::size_t>(i) * n, n}; }
  std::span<const double> block(int i) const
  {
    return {data.data() + static_cast<std::size_t>(i) * n, n};
  }
};

struct ComplexBlockVector
{
  int blocks = 0;
  std::size_t n = 0;
  std::vector<cplx> data;

  ComplexBlockVector() = default;
  ComplexBlockVector(int p, std::size_t len) : blocks(p), n(len), data(static_cast<std::size_t>(p) * len) {}

  std::span<cplx> block(int i) { return {data.data() + static_cast<std::size_t>(i) * n, n}; }
  std::span<const cplx> block(int i) const
  {
    return {data.data() + static_cast<std::size_t>(i) * n, n};
  }
};

int pair_count(int stages);

using BlockMap = std::function<void(std::span<const double>, std::span<double>)>;

StageBlockVector scale_blocks(const BlockMap &apply_c, const StageBlockVector &u);

StageBlockVector dense_combine(const Matrix &d, const StageBlockVector &u);
ComplexBlockVector dense_combine(const ComplexMatrix &d, const ComplexBlockVector &u);

// Collective over every row group of the runtime's grid (one per partition);
// `shape` describes how a single stage block is split into slab layers.
StageBlockVector rotate_combine(const Matrix &d, const StageBlockVector &u, simrt::Runtime &rt,
                                const SlabShape &shape);
// Requires the padded topology; throws ConfigError otherwise.
StageBlockVector sharedmem_combine(const Matrix &d, const StageBlockVector &u, simrt::Runtime &rt,
                                   const SlabShape &shape);

enum class CombineBackend { dense, rotate, sharedmem };

std::string to_string(CombineBackend b);
CombineBackend parse_combine_backend(const std::string &name);
// Shared memory when the topology keeps stage blocks of a partition on one
// node, rotation otherwise.
CombineBackend default_backend(const simrt::RankGrid &grid);

StageBlockVector combine(CombineBackend backend, const Matrix &d, const StageBlockVector &u,
                         simrt::Runtime *rt, const SlabShape &shape);

// Pair-row variants: the grid has pair_count(Q) stages (rows); row p holds
// stage blocks 2p and 2p+1 (a zero block stands in for the missing partner of
// an odd Q) or complex block p.
//
// real -> complex, D is P x Q:   w_p = sum_j D_pj u_j
ComplexBlockVector rotate_combine_paired(const ComplexMatrix &d, const StageBlockVector &u,
                                         simrt::Runtime &rt, const SlabShape &shape);
// complex -> real, D is Q x P:   k_i = Re sum_p D_ip z_p
StageBlockVector rotate_combine_paired(const ComplexMatrix &d, const ComplexBlockVector &z,
                                       simrt::Runtime &rt, const SlabShape &shape);
// real -> real, D is Q x Q
StageBlockVector rotate_combine_paired(const Matrix &d, const StageBlockVector &u,
                                       simrt::Runtime &rt, const SlabShape &shape);

// Single-process references for the paired products.
ComplexBlockVector dense_combine_to_complex(const ComplexMatrix &d, const StageBlockVector &u);
StageBlockVector dense_combine_real_part(const ComplexMatrix &d, const ComplexBlockVector &z);

}  // namespace spirk
