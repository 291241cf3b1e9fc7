// SPDX-License-Identifier: Apache-2.0
#include "spirk/simrt.hpp"

#include <algorithm>
#include <set>

namespace spirk::simrt {

std::string to_string(Topology t)
{
  switch (t)
  {
    case Topology::row_major:
      return "row_major";
    case Topology::row_major_padded:
      return "padded";
    case Topology::column_major:
      return "column_major";
  }
  return "unknown";
}

Topology parse_topology(const std::string &name)
{
  if (name == "row_major" || name == "row")
    return Topology::row_major;
  if (name == "padded" || name == "row_major_padded")
    return Topology::row_major_padded;
  if (name == "column_major" || name == "column")
    return Topology::column_major;
  throw ConfigError("unknown topology '" + name + "' (row_major|column_major|padded)");
}

RankGrid::RankGrid(int stages, int partitions, Topology topology, int node_size)
  : stages_(stages), partitions_(partitions), topology_(topology)
{
  if (stages < 1 || partitions < 1)
    throw ConfigError("RankGrid: need at least one stage and one partition");
  node_size_ = node_size == 0 ? partitions : node_size;
  if (node_size_ < 1)
    throw ConfigError("RankGrid: node size must be positive");
  if (topology == Topology::row_major_padded && node_size_ < partitions)
    throw ConfigError("RankGrid: padded topology needs node_size >= B (got " +
                      std::to_string(node_size_) + " < " + std::to_string(partitions) + ")");

  rank_of_.assign(static_cast<std::size_t>(stages * partitions), 0);
  int total = stages * partitions;
  int stride = partitions;
  if (topology == Topology::row_major_padded)
  {
    stride = ((partitions + node_size_ - 1) / node_size_) * node_size_;
    total = stages * stride;
  }
  coords_.assign(static_cast<std::size_t>(total), std::nullopt);
  for (int q = 0; q < stages; ++q)
    for (int b = 0; b < partitions; ++b)
    {
      int r = 0;
      switch (topology)
      {
        case Topology::row_major:
          r = q * partitions + b;
          break;
        case Topology::column_major:
          r = b * stages + q;
          break;
        case Topology::row_major_padded:
          r = q * stride + b;
          break;
      }
      rank_of_[static_cast<std::size_t>(q * partitions + b)] = r;
      coords_[static_cast<std::size_t>(r)] = RankCoords{q, b};
    }
}

int RankGrid::rank(int q, int b) const
{
  if (q < 0 || q >= stages_ || b < 0 || b >= partitions_)
    throw ConfigError("RankGrid: coordinates (" + std::to_string(q) + ", " + std::to_string(b) +
                      ") out of range");
  return rank_of_[static_cast<std::size_t>(q * partitions_ + b)];
}

bool RankGrid::idle(int rank) const
{
  if (rank < 0 || rank >= size())
    throw ConfigError("RankGrid: rank " + std::to_string(rank) + " out of range");
  return !coords_[static_cast<std::size_t>(rank)].has_value();
}

RankCoords RankGrid::coords(int rank) const
{
  if (idle(rank))
    throw ConfigError("RankGrid: rank " + std::to_string(rank) + " is idle");
  return *coords_[static_cast<std::size_t>(rank)];
}

std::vector<int> RankGrid::row_group(int b) const
{
  std::vector<int> g;
  for (int q = 0; q < stages_; ++q)
    g.push_back(rank(q, b));
  return g;
}

std::vector<int> RankGrid::column_group(int q) const
{
  std::vector<int> g;
  for (int b = 0; b < partitions_; ++b)
    g.push_back(rank(q, b));
  return g;
}

std::vector<int> RankGrid::active_ranks() const
{
  std::vector<int> g;
  for (int q = 0; q < stages_; ++q)
    for (int b = 0; b < partitions_; ++b)
      g.push_back(rank(q, b));
  return g;
}

std::vector<int> RankGrid::global_group() const
{
  std::vector<int> g(static_cast<std::size_t>(size()));
  for (int r = 0; r < size(); ++r)
    g[static_cast<std::size_t>(r)] = r;
  return g;
}

RankCounters CounterSnapshot::sum() const
{
  RankCounters s;
  for (const auto &c : ranks)
  {
    s.messages += c.messages;
    s.bytes += c.bytes;
    s.inter_node_messages += c.inter_node_messages;
    s.barriers += c.barriers;
    s.shift_rounds += c.shift_rounds;
  }
  return s;
}

RankCounters CounterSnapshot::max() const
{
  RankCounters m;
  for (const auto &c : ranks)
  {
    m.messages = std::max(m.messages, c.messages);
    m.bytes = std::max(m.bytes, c.bytes);
    m.inter_node_messages = std::max(m.inter_node_messages, c.inter_node_messages);
    m.barriers = std::max(m.barriers, c.barriers);
    m.shift_rounds = std::max(m.shift_rounds, c.shift_rounds);
  }
  return m;
}

CounterSnapshot operator-(const CounterSnapshot &after, const CounterSnapshot &before)
{
  if (after.ranks.size() != before.ranks.size())
    throw DimensionError("counter snapshots cover different rank sets");
  CounterSnapshot d = after;
  for (std::size_t r = 0; r < d.ranks.size(); ++r)
  {
    d.ranks[r].messages -= before.ranks[r].messages;
    d.ranks[r].bytes -= before.ranks[r].bytes;
    d.ranks[r].inter_node_messages -= before.ranks[r].inter_node_messages;
    d.ranks[r].barriers -= before.ranks[r].barriers;
    d.ranks[r].shift_rounds -= before.ranks[r].shift_rounds;
  }
  return d;
}

Runtime::Runtime(RankGrid grid)
  : grid_(std::move(grid)), counters_(static_cast<std::size_t>(grid_.size()))
{}

void Runtime::check_rank(int rank) const
{
  if (rank < 0 || rank >= grid_.size())
    throw ProtocolError("rank " + std::to_string(rank) + " does not exist");
}

void Runtime::send(int src, int dst, std::vector<double> payload)
{
  check_rank(src);
  check_rank(dst);
  auto &c = counters_[static_cast<std::size_t>(src)];
  ++c.messages;
  c.bytes += payload.size() * sizeof(double);
  if (grid_.node(src) != grid_.node(dst))
    ++c.inter_node_messages;
  channels_[{src, dst}].push_back(std::move(payload));
}

std::vector<double> Runtime::recv(int dst, int src)
{
  check_rank(src);
  check_rank(dst);
  auto it = channels_.find({src, dst});
  if (it == channels_.end() || it->second.empty())
    throw ProtocolError("rank " + std::to_string(dst) + " waits on a message from rank " +
                        std::to_string(src) + " that was never sent");
  std::vector<double> p = std::move(it->second.front());
  it->second.pop_front();
  if (it->second.empty())
    channels_.erase(it);
  return p;
}

bool Runtime::quiescent() const { return channels_.empty(); }

void Runtime::require_quiescent(const std::string &where) const
{
  if (channels_.empty())
    return;
  std::string msg = where + ": undelivered messages";
  for (const auto &[key, queue] : channels_)
    msg += " " + std::to_string(key.first) + "->" + std::to_string(key.second) + " (" +
           std::to_string(queue.size()) + ")";
  throw ProtocolError(msg);
}

void Runtime::barrier(const std::vector<int> &group, const std::vector<int> &arrived)
{
  const std::set<int> here(arrived.begin(), arrived.end());
  std::string missing;
  for (int r : group)
  {
    check_rank(r);
    if (!here.count(r))
      missing += (missing.empty() ? "" : ", ") + std::to_string(r);
  }
  if (!missing.empty())
    throw ProtocolError("barrier never completes: rank(s) " + missing + " did not arrive");
  for (int r : arrived)
    if (std::find(group.begin(), group.end(), r) == group.end())
      throw ProtocolError("rank " + std::to_string(r) + " entered a barrier of a group it does not belong to");
  for (int r : group)
    ++counters_[static_cast<std::size_t>(r)].barriers;
}

void Runtime::ring_shift_up(const std::vector<int> &group,
                            std::vector<std::vector<double>> &payloads)
{
  if (payloads.size() != group.size())
    throw ProtocolError("ring_shift_up: " + std::to_string(payloads.size()) +
                        " payloads for a group of " + std::to_string(group.size()));
  for (const auto &p : payloads)
    if (p.size() != payloads.front().size())
      throw ProtocolError("ring_shift_up: payload lengths differ within the group");
  const std::size_t g = group.size();
  if (g == 1)
  {
    ++counters_[static_cast<std::size_t>(group.front())].shift_rounds;
    return;
  }
  // Member i sends to its predecessor, which then holds the payload of i.
  for (std::size_t i = 0; i < g; ++i)
    send(group[i], group[(i + g - 1) % g], payloads[i]);
  for (std::size_t i = 0; i < g; ++i)
  {
    payloads[i] = recv(group[i], group[(i + 1) % g]);
    ++counters_[static_cast<std::size_t>(group[i])].shift_rounds;
  }
}

double Runtime::allreduce_sum(const std::vector<int> &group, const std::vector<double> &partials)
{
  if (partials.size() != group.size())
    throw ProtocolError("allreduce_sum: " + std::to_string(partials.size()) +
                        " contributions for a group of " + std::to_string(group.size()));
  if (group.size() == 1)
    return partials.front();
  const int root = group.front();
  for (std::size_t i = 1; i < group.size(); ++i)
    send(group[i], root, {partials[i]});
  double s = partials.front();
  for (std::size_t i = 1; i < group.size(); ++i)
    s += recv(root, group[i]).front();
  for (std::size_t i = 1; i < group.size(); ++i)
    send(root, group[i], {s});
  for (std::size_t i = 1; i < group.size(); ++i)
    s = recv(group[i], root).front();
  return s;
}

CounterSnapshot Runtime::counters() const { return CounterSnapshot{counters_}; }

void Runtime::reset_counters()
{
  std::fill(counters_.begin(), counters_.end(), RankCounters{});
}

}  // namespace spirk::simrt
