// SPDX-License-Identifier: Apache-2.0
#pragma once

// Slab decomposition of nodal vectors over a group of simulated ranks.
//
// Nodes are numbered lexicographically with the last coordinate slowest, so a
// "layer" (all nodes sharing the last coordinate) is a contiguous index range.
// Partition b of B owns layers [floor(b L / B), floor((b + 1) L / B)).

#include "spirk/simrt.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace spirk {

struct LayerRange
{
  int begin = 0;
  int end = 0;

  int count() const noexcept { return end > begin ? end - begin : 0; }
  bool contains(int layer) const noexcept { return layer >= begin && layer < end; }
};

LayerRange owned_layers(int layers, int parts, int b);

// Ranks that cooperate on one vector. An empty rank list (or no runtime)
// means a single process without any messaging.
struct Team
{
  simrt::Runtime *runtime = nullptr;
  std::vector<int> ranks;

  int size() const noexcept { return ranks.empty() ? 1 : static_cast<int>(ranks.size()); }
  bool distributed() const noexcept { return runtime != nullptr && ranks.size() > 1; }
  int rank(int b) const { return ranks.empty() ? 0 : ranks[static_cast<std::size_t>(b)]; }
};

// Shape of a multi-block nodal vector: `blocks` consecutive blocks of
// `layers * layer_size` entries.
struct SlabShape
{
  int layers = 0;
  std::size_t layer_size = 0;
  int blocks = 1;

  std::size_t block_size() const noexcept { return static_cast<std::size_t>(layers) * layer_size; }
};

// Window of layers [range.begin, range.end) of every block, block-major.
struct Window
{
  LayerRange range;
  std::vector<double> data;
};

// For each member b, collects the layers `want[b]` of the global vector x.
// Layers owned by another member travel as one message per (owner, member)
// pair; locally owned layers are copied.
std::vector<Window> exchange_windows(const Team &team, const SlabShape &shape, const double *x,
                                     const std::vector<LayerRange> &want);

// Every member receives the full vector (the slices of all other members).
// Returns nothing: the global storage already holds the data, only the
// traffic is recorded and checked.
void allgather(const Team &team, const SlabShape &shape, const double *x);

// Deterministic sum of per-member partials in member order.
double team_sum(const Team &team, const std::vector<double> &partials);

// Inner product of two slab-distributed vectors: one partial per member over
// its owned layers of every block, summed with team_sum.
double slab_dot(const Team &team, const SlabShape &shape, std::span<const double> a,
                std::span<const double> b);

}  // namespace spirk
