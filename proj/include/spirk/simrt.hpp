// SPDX-License-Identifier: Apache-2.0
#pragma once

// Deterministic in-process stand-in for a message-passing runtime.
//
// Ranks are laid out on a (stage q, partition b) grid. Code that runs "on"
// the ranks is written in lockstep phases: every rank posts its sends, then
// every rank drains its receives. Channels are FIFO per (source, destination)
// pair, so a receive on an empty channel can never be satisfied later in the
// same phase and is reported as a protocol error instead of hanging.

#include "spirk/error.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spirk::simrt {

enum class Topology { row_major, row_major_padded, column_major };

std::string to_string(Topology t);
Topology parse_topology(const std::string &name);

struct RankCoords
{
  int q = 0;
  int b = 0;
};

class RankGrid
{
public:
  // node_size == 0 picks B (one stage block per node) for every topology.
  RankGrid(int stages, int partitions, Topology topology = Topology::row_major,
           int node_size = 0);

  int stages() const noexcept { return stages_; }
  int partitions() const noexcept { return partitions_; }
  Topology topology() const noexcept { return topology_; }
  int node_size() const noexcept { return node_size_; }

  // Total number of ranks including idle padding ranks.
  int size() const noexcept { return static_cast<int>(coords_.size()); }
  int active_size() const noexcept { return stages_ * partitions_; }

  int rank(int q, int b) const;
  bool idle(int rank) const;
  // Throws ConfigError for idle ranks.
  RankCoords coords(int rank) const;
  int node(int rank) const { return rank / node_size_; }

  // Ranks sharing partition b, ordered by stage.
  std::vector<int> row_group(int b) const;
  // Ranks sharing stage q, ordered by partition.
  std::vector<int> column_group(int q) const;
  // All active ranks in logical (q, b) order.
  std::vector<int> active_ranks() const;
  // Every rank, idle ones included.
  std::vector<int> global_group() const;

private:
  int stages_;
  int partitions_;
  Topology topology_;
  int node_size_;
  std::vector<int> rank_of_;                   // q * B + b -> rank
  std::vector<std::optional<RankCoords>> coords_;  // rank -> (q, b)
};

struct RankCounters
{
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
  std::uint64_t inter_node_messages = 0;
  std::uint64_t barriers = 0;
  std::uint64_t shift_rounds = 0;
};

struct CounterSnapshot
{
  std::vector<RankCounters> ranks;

  RankCounters sum() const;
  RankCounters max() const;
};

CounterSnapshot operator-(const CounterSnapshot &after, const CounterSnapshot &before);

class Runtime
{
public:
  explicit Runtime(RankGrid grid);

  const RankGrid &grid() const noexcept { return grid_; }

  void send(int src, int dst, std::vector<double> payload);
  // Throws ProtocolError when nothing from `src` is queued for `dst`.
  std::vector<double> recv(int dst, int src);
  bool quiescent() const;
  // Throws ProtocolError listing undelivered messages.
  void require_quiescent(const std::string &where) const;

  // Rendezvous of `group`; `arrived` lists the ranks that reached it.
  void barrier(const std::vector<int> &group, const std::vector<int> &arrived);
  void barrier(const std::vector<int> &group) { barrier(group, group); }

  // Cyclic shift within an ordered group: member i ends up with the payload of
  // member i + 1. One message per member, one shift round per member.
  void ring_shift_up(const std::vector<int> &group, std::vector<std::vector<double>> &payloads);

  // Sum of per-member partials in group order, reduced on the first member
  // and sent back to the others: 2(g - 1) messages.
  double allreduce_sum(const std::vector<int> &group, const std::vector<double> &partials);

  CounterSnapshot counters() const;
  void reset_counters();

private:
  RankGrid grid_;
  std::vector<RankCounters> counters_;
  std::map<std::pair<int, int>, std::deque<std::vector<double>>> channels_;

  void check_rank(int rank) const;
};

}  // namespace spirk::simrt
