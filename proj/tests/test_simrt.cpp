// SPDX-License-Identifier: Apache-2.0
#include "spirk/error.hpp"
#include "spirk/simrt.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace spirk;
using namespace spirk::simrt;

TEST(RankGrid, RowMajorMapping)
{
  const RankGrid g(6, 4, Topology::row_major);
  EXPECT_EQ(g.rank(1, 2), 6);
  EXPECT_EQ(g.size(), 24);
  for (int q = 0; q < 6; ++q)
    for (int b = 0; b < 4; ++b)
      EXPECT_EQ(g.rank(q, b), q * 4 + b);
}

TEST(RankGrid, ColumnMajorMapping)
{
  const RankGrid g(2, 3, Topology::column_major);
  EXPECT_EQ(g.rank(0, 0), 0);
  EXPECT_EQ(g.rank(1, 0), 1);
  EXPECT_EQ(g.rank(0, 1), 2);
}

TEST(RankGrid, PaddedKeepsStagesOnOneNode)
{
  const RankGrid g(4, 3, Topology::row_major_padded, 4);
  EXPECT_EQ(g.size(), 16);
  for (int q = 0; q < 4; ++q)
  {
    for (int b = 0; b < 3; ++b)
    {
      EXPECT_EQ(g.rank(q, b), 4 * q + b);
      EXPECT_EQ(g.node(g.rank(q, b)), g.node(g.rank(q, 0)));
    }
    EXPECT_TRUE(g.idle(4 * q + 3));
  }
  EXPECT_THROW(RankGrid(4, 3, Topology::row_major_padded, 2), ConfigError);
}

TEST(RankGrid, MappingIsBijectiveAndGroupsAreConsistent)
{
  for (auto topo : {Topology::row_major, Topology::column_major, Topology::row_major_padded})
    for (int q : {1, 2, 3, 4, 9})
      for (int b : {1, 2, 4})
      {
        const RankGrid g(q, b, topo, topo == Topology::row_major_padded ? b + 1 : 0);
        std::set<int> seen;
        for (int i = 0; i < q; ++i)
          for (int j = 0; j < b; ++j)
          {
            const int r = g.rank(i, j);
            EXPECT_TRUE(seen.insert(r).second);
            EXPECT_FALSE(g.idle(r));
            EXPECT_EQ(g.coords(r).q, i);
            EXPECT_EQ(g.coords(r).b, j);
          }
        EXPECT_EQ(static_cast<int>(seen.size()), q * b);
        for (int j = 0; j < b; ++j)
        {
          const auto row = g.row_group(j);
          ASSERT_EQ(static_cast<int>(row.size()), q);
          for (int i = 0; i < q; ++i)
            EXPECT_EQ(row[i], g.rank(i, j));
        }
        for (int i = 0; i < q; ++i)
        {
          const auto col = g.column_group(i);
          ASSERT_EQ(static_cast<int>(col.size()), b);
          for (int j = 0; j < b; ++j)
            EXPECT_EQ(col[j], g.rank(i, j));
        }
        EXPECT_EQ(static_cast<int>(g.global_group().size()), g.size());
        EXPECT_EQ(static_cast<int>(g.active_ranks().size()), q * b);
      }
}

TEST(Runtime, FreshCountersAreZero)
{
  const Runtime rt(RankGrid(3, 2));
  const auto s = rt.counters().sum();
  EXPECT_EQ(s.messages, 0u);
  EXPECT_EQ(s.bytes, 0u);
  EXPECT_EQ(s.barriers, 0u);
  EXPECT_EQ(s.shift_rounds, 0u);
  EXPECT_TRUE(rt.quiescent());
}

TEST(Runtime, MessagesAreOrderedPerChannel)
{
  Runtime rt(RankGrid(2, 1));
  rt.send(0, 1, {1.0});
  rt.send(0, 1, {2.0, 3.0});
  EXPECT_FALSE(rt.quiescent());
  EXPECT_EQ(rt.recv(1, 0), (std::vector<double>{1.0}));
  EXPECT_EQ(rt.recv(1, 0), (std::vector<double>{2.0, 3.0}));
  EXPECT_TRUE(rt.quiescent());
  EXPECT_EQ(rt.counters().ranks[0].messages, 2u);
  EXPECT_EQ(rt.counters().ranks[0].bytes, 3 * sizeof(double));
}

TEST(Runtime, ReceivingWithoutSenderIsDetected)
{
  Runtime rt(RankGrid(2, 1));
  EXPECT_THROW(rt.recv(1, 0), ProtocolError);
  rt.send(0, 1, {1.0});
  EXPECT_THROW(rt.require_quiescent("test"), ProtocolError);
}

TEST(Runtime, BarrierNamesMissingRanks)
{
  Runtime rt(RankGrid(3, 1));
  try
  {
    rt.barrier({0, 1, 2}, {0, 2});
    FAIL() << "expected a protocol error";
  }
  catch (const ProtocolError &e)
  {
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
  rt.barrier({1});
  EXPECT_EQ(rt.counters().ranks[1].barriers, 1u);
}

TEST(Runtime, RingShiftRotatesPayloads)
{
  Runtime rt(RankGrid(3, 1));
  const std::vector<int> group{0, 1, 2};
  std::vector<std::vector<double>> p{{1.0}, {2.0}, {3.0}};
  rt.ring_shift_up(group, p);
  EXPECT_EQ(p, (std::vector<std::vector<double>>{{2.0}, {3.0}, {1.0}}));
  rt.ring_shift_up(group, p);
  rt.ring_shift_up(group, p);
  EXPECT_EQ(p, (std::vector<std::vector<double>>{{1.0}, {2.0}, {3.0}}));
  for (int r = 0; r < 3; ++r)
  {
    EXPECT_EQ(rt.counters().ranks[r].messages, 3u);
    EXPECT_EQ(rt.counters().ranks[r].shift_rounds, 3u);
  }
  EXPECT_TRUE(rt.quiescent());
}

TEST(Runtime, RingShiftOfSingleRankKeepsPayload)
{
  Runtime rt(RankGrid(1, 1));
  std::vector<std::vector<double>> p{{4.0, 5.0}};
  rt.ring_shift_up({0}, p);
  EXPECT_EQ(p.front(), (std::vector<double>{4.0, 5.0}));
  EXPECT_EQ(rt.counters().ranks[0].messages, 0u);
}

TEST(Runtime, RingShiftRejectsMismatchedPayloads)
{
  Runtime rt(RankGrid(2, 1));
  std::vector<std::vector<double>> p{{1.0}, {1.0, 2.0}};
  EXPECT_THROW(rt.ring_shift_up({0, 1}, p), ProtocolError);
}

TEST(Runtime, AllreduceSumsInGroupOrder)
{
  Runtime rt(RankGrid(4, 1));
  const double s = rt.allreduce_sum({0, 1, 2, 3}, {1e16, 1.0, -1e16, 1.0});
  EXPECT_EQ(s, ((1e16 + 1.0) - 1e16) + 1.0);
  EXPECT_EQ(rt.counters().sum().messages, 6u);
  EXPECT_TRUE(rt.quiescent());
}

TEST(Runtime, InterNodeTrafficIsCounted)
{
  Runtime rt(RankGrid(2, 2, Topology::row_major, 2));
  rt.send(0, 1, {1.0});
  rt.send(0, 2, {1.0});
  rt.recv(1, 0);
  rt.recv(2, 0);
  EXPECT_EQ(rt.counters().ranks[0].inter_node_messages, 1u);
}

TEST(Runtime, SnapshotDifference)
{
  Runtime rt(RankGrid(2, 1));
  const auto before = rt.counters();
  rt.barrier({0, 1});
  const auto delta = rt.counters() - before;
  EXPECT_EQ(delta.sum().barriers, 2u);
  EXPECT_EQ(delta.max().barriers, 1u);
  rt.reset_counters();
  EXPECT_EQ(rt.counters().sum().barriers, 0u);
}

TEST(Topology, ParsesNames)
{
  EXPECT_EQ(parse_topology("row"), Topology::row_major);
  EXPECT_EQ(parse_topology("column"), Topology::column_major);
  EXPECT_EQ(parse_topology("padded"), Topology::row_major_padded);
  EXPECT_THROW(parse_topology("diagonal"), ConfigError);
}
