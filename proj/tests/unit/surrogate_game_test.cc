// Copyright 2026 The Brokerage Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "brokerage/errors.h"
#include "brokerage/surrogate_game.h"

namespace brokerage {
namespace {

// Minimax number of losing rounds against the halving adversary when `size`
// instances survive. Playing outside the segment never shrinks it, so only
// inside plays matter; the adversary's move is fixed by the play's position.
std::vector<std::int64_t> minimax_table(std::int64_t max_size) {
  std::vector<std::int64_t> w(max_size + 1, 0);
  for (std::int64_t s = 2; s <= max_size; ++s) {
    std::int64_t best = INT64_MAX;
    for (std::int64_t j = 0; j < s; ++j) {
      const std::int64_t left = s - 1 - j;  // play a + j below the midpoint
      const std::int64_t next = 2 * j < s - 1 ? left : j;
      best = std::min(best, next);
    }
    w[s] = 1 + w[best];
  }
  return w;
}

TEST(Adversary, Examples) {
  SurrogateGame g2(2);
  auto r = g2.respond(2);
  EXPECT_TRUE(r.bit);
  EXPECT_EQ(g2.lower(), 3);
  EXPECT_EQ(g2.upper(), 4);
  r = g2.respond(4);
  EXPECT_FALSE(r.bit);
  EXPECT_EQ(g2.lower(), 3);
  EXPECT_EQ(g2.upper(), 3);
  EXPECT_EQ(g2.loss(), 1.0);

  SurrogateGame g3(3);
  g3.respond(7);  // [1, 6]
  g3.respond(6);  // [1, 5]
  EXPECT_EQ(g3.upper(), 5);
  r = g3.respond(8);
  EXPECT_FALSE(r.bit);
  EXPECT_EQ(g3.lower(), 1);
  EXPECT_EQ(g3.upper(), 5);
}

TEST(Adversary, OutsidePlayLeavesSegment) {
  SurrogateGame g(3);
  g.respond(1);  // [2, 8]
  const auto r = g.respond(1);
  EXPECT_TRUE(r.bit);
  EXPECT_EQ(g.lower(), 2);
  EXPECT_EQ(g.upper(), 8);
  EXPECT_EQ(g.rounds(), 2);
}

TEST(Adversary, EndsOnlyWhenTheLastInstanceIsNamed) {
  SurrogateGame g(1);
  EXPECT_FALSE(g.respond(1).game_over);  // [2, 2]
  EXPECT_EQ(g.committed(), 2);
  EXPECT_FALSE(g.respond(1).game_over);
  const auto r = g.respond(2);
  EXPECT_TRUE(r.game_over);
  EXPECT_TRUE(r.bit);
  EXPECT_EQ(g.loss(), 1.0);
  EXPECT_THROW(g.respond(2), StateError);
}

TEST(Adversary, RejectsPlaysOutOfRange) {
  SurrogateGame g(3);
  EXPECT_THROW(g.respond(0), std::domain_error);
  EXPECT_THROW(g.respond(9), std::domain_error);
  EXPECT_THROW(SurrogateGame(0), std::domain_error);
}

TEST(Cells, Boundaries) {
  EXPECT_EQ(cell_of_price(0.0, 2), 1);
  EXPECT_EQ(cell_of_price(0.2499, 2), 1);
  EXPECT_EQ(cell_of_price(0.25, 2), 2);
  EXPECT_EQ(cell_of_price(0.75, 2), 4);
  EXPECT_EQ(cell_of_price(1.0, 2), 4);
  EXPECT_EQ(cell_of_price(0.5, 1), 2);
  EXPECT_THROW(cell_of_price(1.5, 2), std::domain_error);
}

TEST(Minimax, BisectionAchievesTheGameValue) {
  const auto w = minimax_table(1 << 10);
  for (int n = 1; n <= 10; ++n) {
    EXPECT_EQ(w[std::int64_t{1} << n], n) << n;
    BisectStrategy s(n);
    const auto r = play_game(s, n, 1000);
    EXPECT_TRUE(r.won);
    EXPECT_EQ(r.rounds_survived, w[std::int64_t{1} << n]);
    EXPECT_EQ(r.loss, 0.5 * n);
  }
}

TEST(Minimax, FourLevelBisection) {
  BisectStrategy s(4);
  const auto r = play_game(s, 4, 100);
  EXPECT_EQ(r.plays, (std::vector<std::int64_t>{8, 12, 14, 15, 16}));
  EXPECT_EQ(r.segment_sizes, (std::vector<std::int64_t>{8, 4, 2, 1}));
  EXPECT_GE(r.loss, 1.5);
  EXPECT_EQ(r.loss, 2.0);
}

void check_invariants(const GameResult& r, int n) {
  for (std::size_t t = 1; t <= r.segment_sizes.size(); ++t) {
    if (static_cast<int>(t) <= n - 1) {
      EXPECT_GE(r.segment_sizes[t - 1], (std::int64_t{1} << (n - t)) - 1)
          << r.strategy << " t=" << t;
    }
  }
  // Every bit agrees with every instance that survives the round.
  for (std::size_t t = 0; t < r.segments.size(); ++t) {
    const auto [a, b] = r.segments[t];
    for (std::int64_t k = a; k <= b; ++k) {
      ASSERT_EQ(r.bits[t], r.plays[t] <= k) << r.strategy << " t=" << t;
    }
  }
}

TEST(Strategies, EveryMatchRespectsTheBarrier) {
  for (int n : {2, 4, 8}) {
    std::vector<std::unique_ptr<CellStrategy>> players;
    players.push_back(make_strategy("bisect", n, 0, 2000));
    players.push_back(make_strategy("mbs-wrapper", n, 0, 2000));
    players.push_back(make_strategy("grid_ucb-wrapper", n, 0, 2000));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      players.push_back(make_strategy("random", n, seed, 2000));
    }
    for (auto& p : players) {
      const auto r = play_game(*p, n, 2000);
      EXPECT_GE(r.rounds_survived, n - 1) << r.strategy;
      EXPECT_GE(r.loss, 0.5 * (n - 1)) << r.strategy;
      EXPECT_EQ(r.loss, 0.5 * static_cast<double>(r.rounds_survived));
      check_invariants(r, n);
    }
  }
}

TEST(Strategies, RandomCellsSurviveAtLeastThreeRounds) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RandomCellStrategy s(4, seed);
    const auto r = play_game(s, 4, 100);
    EXPECT_GE(r.rounds_survived, 3) << seed;
  }
}

TEST(Strategies, BrokerWrapperFeedsDuplicatedBits) {
  BrokerSpec spec;
  spec.algo = "mbs";
  spec.delta = 0.5;
  spec.horizon = 100;
  auto broker = make_broker(spec, 100);
  BrokerCellStrategy s(std::move(broker), 3);
  EXPECT_EQ(s.play(1), 5);  // price 1/2 sits in cell 5 of 8
  s.feedback(1, true);
  EXPECT_EQ(s.play(2), 5);
  s.feedback(2, true);
  // Two all-one rounds at delta = 1/2 move the price to 1/4.
  EXPECT_EQ(s.play(3), 3);
  spec.algo = "fem";
  EXPECT_THROW(BrokerCellStrategy(make_broker(spec, 100), 3), ConfigError);
  EXPECT_THROW(make_strategy("oracle", 3, 0, 10), ConfigError);
}

}  // namespace
}  // namespace brokerage
