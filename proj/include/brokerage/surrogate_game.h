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

#ifndef BROKERAGE_SURROGATE_GAME_H_
#define BROKERAGE_SURROGATE_GAME_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "brokerage/brokers.h"
#include "brokerage/protocol.h"
#include "brokerage/rng.h"

namespace brokerage {

// Discrete search game over instances 1..2^n against a segment-halving
// adversary. The adversary keeps a segment [a, b] of instances that are all
// consistent with the feedback given so far. A play inside the segment
// discards the half that contains it plus the play itself; a play outside
// leaves it alone. Every round that does not hit the instance costs 1/2 and
// returns I{play <= k*}. The game ends only when the player names the last
// surviving instance.
class SurrogateGame {
 public:
  // n in [1, 62]; std::domain_error otherwise.
  explicit SurrogateGame(int n);

  struct Response {
    bool bit = false;
    bool game_over = false;
  };

  // Throws std::domain_error for plays outside [1, 2^n] and StateError once
  // the game is over.
  Response respond(std::int64_t play);

  int levels() const { return n_; }
  std::int64_t cells() const { return std::int64_t{1} << n_; }
  std::int64_t lower() const { return a_; }
  std::int64_t upper() const { return b_; }
  std::int64_t segment_size() const { return b_ - a_ + 1; }
  std::int64_t rounds() const { return rounds_; }
  double loss() const { return 0.5 * static_cast<double>(rounds_); }
  bool over() const { return over_; }
  // The instance, once the segment has shrunk to a single element.
  std::optional<std::int64_t> committed() const {
    if (a_ == b_) return a_;
    return std::nullopt;
  }

 private:
  int n_;
  std::int64_t a_;
  std::int64_t b_;
  std::int64_t rounds_ = 0;
  bool over_ = false;
};

inline SurrogateGame::Response adversary_respond(SurrogateGame& game,
                                                 std::int64_t play) {
  return game.respond(play);
}

// Index k of the cell [(k-1) 2^-n, k 2^-n) holding p; the last cell is
// closed at 1.
std::int64_t cell_of_price(double p, int n);

// A player of the surrogate game.
class CellStrategy {
 public:
  virtual ~CellStrategy() = default;
  virtual std::string name() const = 0;
  virtual std::int64_t play(Round t) = 0;
  virtual void feedback(Round t, bool bit) = 0;
};

// Plays the midpoint of the instances still consistent with its feedback.
class BisectStrategy final : public CellStrategy {
 public:
  explicit BisectStrategy(int n) : lo_(1), hi_(std::int64_t{1} << n) {}
  std::string name() const override { return "bisect"; }
  std::int64_t play(Round t) override;
  void feedback(Round t, bool bit) override;

 private:
  std::int64_t lo_;
  std::int64_t hi_;
  std::int64_t last_ = 1;
};

class RandomCellStrategy final : public CellStrategy {
 public:
  RandomCellStrategy(int n, std::uint64_t seed) : n_(n), rng_(seed) {}
  std::string name() const override { return "random"; }
  std::int64_t play(Round) override {
    return rng_.uniform_int(1, std::int64_t{1} << n_);
  }
  void feedback(Round, bool) override {}

 private:
  int n_;
  Rng rng_;
};

// Runs a two-bit broker on [0, 1]: its price is mapped to a cell and the
// game's bit b is passed back as the pair (b, b).
class BrokerCellStrategy final : public CellStrategy {
 public:
  BrokerCellStrategy(std::unique_ptr<Broker> broker, int n);
  std::string name() const override { return broker_->name() + "-wrapper"; }
  std::int64_t play(Round t) override;
  void feedback(Round t, bool bit) override;

 private:
  std::unique_ptr<Broker> broker_;
  int n_;
  Price last_;
};

// bisect | random | mbs-wrapper | grid_ucb-wrapper. The wrapped brokers use
// their defaults for a run of `horizon` rounds. ConfigError on unknown names.
std::unique_ptr<CellStrategy> make_strategy(const std::string& name, int n,
                                            std::uint64_t seed,
                                            std::int64_t horizon);

struct GameResult {
  int levels = 0;
  std::string strategy;
  std::int64_t rounds_survived = 0;  // rounds lost before the game ended
  double loss = 0.0;
  bool won = false;                  // ended before the horizon
  std::vector<std::int64_t> plays;
  std::vector<bool> bits;
  std::vector<std::int64_t> segment_sizes;  // after each response
  std::vector<std::pair<std::int64_t, std::int64_t>> segments;
};

// Plays until the game ends or `horizon` rounds have been played.
GameResult play_game(CellStrategy& strategy, int n, std::int64_t horizon);

}  // namespace brokerage

#endif  // BROKERAGE_SURROGATE_GAME_H_
