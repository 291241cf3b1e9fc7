// SPDX-License-Identifier: Apache-2.0
#include "spirk/partition.hpp"

#include "spirk/kernels.hpp"

#include <algorithm>
#include <cstring>

namespace spirk {

LayerRange owned_layers(int layers, int parts, int b)
{
  if (parts < 1 || b < 0 || b >= parts)
    throw ConfigError("owned_layers: partition " + std::to_string(b) + " of " +
                      std::to_string(parts));
  const long long l = layers;
  return {static_cast<int>(b * l / parts), static_cast<int>((b + 1) * l / parts)};
}

namespace {

void copy_layers(const SlabShape &shape, const double *x, LayerRange part, Window &w)
{
  const std::size_t wn = static_cast<std::size_t>(w.range.count()) * shape.layer_size;
  const std::size_t len = static_cast<std::size_t>(part.count()) * shape.layer_size;
  for (int blk = 0; blk < shape.blocks; ++blk)
  {
    const double *src = x + blk * shape.block_size() + part.begin * shape.layer_size;
    double *dst = w.data.data() + blk * wn + (part.begin - w.range.begin) * shape.layer_size;
    std::memcpy(dst, src, len * sizeof(double));
  }
}

LayerRange intersect(LayerRange a, LayerRange b)
{
  return {std::max(a.begin, b.begin), std::min(a.end, b.end)};
}

}  // namespace

std::vector<Window> exchange_windows(const Team &team, const SlabShape &shape, const double *x,
                                     const std::vector<LayerRange> &want)
{
  const int parts = team.size();
  if (static_cast<int>(want.size()) != parts)
    throw DimensionError("exchange_windows: one window request per member expected");
  std::vector<Window> windows(want.size());
  for (int b = 0; b < parts; ++b)
  {
    windows[b].range = want[b];
    windows[b].data.assign(static_cast<std::size_t>(want[b].count()) * shape.layer_size *
                             static_cast<std::size_t>(shape.blocks),
                           0.0);
  }

  if (!team.distributed())
  {
    for (int b = 0; b < parts; ++b)
      copy_layers(shape, x, want[b], windows[b]);
    return windows;
  }

  std::vector<LayerRange> owned(parts);
  for (int o = 0; o < parts; ++o)
    owned[o] = owned_layers(shape.layers, parts, o);

  // Send phase: every owner ships the requested part of its slab.
  for (int b = 0; b < parts; ++b)
    for (int o = 0; o < parts; ++o)
    {
      if (o == b)
        continue;
      const LayerRange part = intersect(owned[o], want[b]);
      if (part.count() == 0)
        continue;
      std::vector<double> payload;
      payload.reserve(static_cast<std::size_t>(part.count()) * shape.layer_size *
                      static_cast<std::size_t>(shape.blocks));
      for (int blk = 0; blk < shape.blocks; ++blk)
      {
        const double *src = x + blk * shape.block_size() + part.begin * shape.layer_size;
        payload.insert(payload.end(), src, src + part.count() * shape.layer_size);
      }
      team.runtime->send(team.rank(o), team.rank(b), std::move(payload));
    }

  // Receive phase.
  for (int b = 0; b < parts; ++b)
  {
    Window &w = windows[b];
    const std::size_t wn = static_cast<std::size_t>(w.range.count()) * shape.layer_size;
    for (int o = 0; o < parts; ++o)
    {
      const LayerRange part = intersect(owned[o], want[b]);
      if (part.count() == 0)
        continue;
      if (o == b)
      {
        copy_layers(shape, x, part, w);
        continue;
      }
      const auto payload = team.runtime->recv(team.rank(b), team.rank(o));
      const std::size_t len = static_cast<std::size_t>(part.count()) * shape.layer_size;
      if (payload.size() != len * static_cast<std::size_t>(shape.blocks))
        throw ProtocolError("exchange_windows: unexpected payload size");
      for (int blk = 0; blk < shape.blocks; ++blk)
        std::memcpy(w.data.data() + blk * wn + (part.begin - w.range.begin) * shape.layer_size,
                    payload.data() + blk * len, len * sizeof(double));
    }
  }
  return windows;
}

void allgather(const Team &team, const SlabShape &shape, const double *x)
{
  if (!team.distributed())
    return;
  const int parts = team.size();
  std::vector<LayerRange> all(parts, LayerRange{0, shape.layers});
  exchange_windows(team, shape, x, all);
}

double team_sum(const Team &team, const std::vector<double> &partials)
{
  if (!team.distributed())
  {
    double s = 0.0;
    for (double p : partials)
      s += p;
    return s;
  }
  return team.runtime->allreduce_sum(team.ranks, partials);
}

double slab_dot(const Team &team, const SlabShape &shape, std::span<const double> a,
                std::span<const double> b)
{
  const int parts = team.size();
  std::vector<double> partials(static_cast<std::size_t>(parts), 0.0);
  for (int m = 0; m < parts; ++m)
  {
    const LayerRange own = owned_layers(shape.layers, parts, m);
    double s = 0.0;
    for (int blk = 0; blk < shape.blocks; ++blk)
    {
      const std::size_t lo = static_cast<std::size_t>(blk) * shape.block_size() +
                             static_cast<std::size_t>(own.begin) * shape.layer_size;
      const std::size_t len = static_cast<std::size_t>(own.count()) * shape.layer_size;
      s += kernels::dot(a.subspan(lo, len), b.subspan(lo, len));
    }
    partials[static_cast<std::size_t>(m)] = s;
  }
  return team_sum(team, partials);
}

}  // namespace spirk
