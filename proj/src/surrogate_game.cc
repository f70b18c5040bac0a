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

#include "brokerage/surrogate_game.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "brokerage/errors.h"

namespace brokerage {

SurrogateGame::SurrogateGame(int n) : n_(n), a_(1), b_(0) {
  if (n < 1 || n > 62) throw std::domain_error("levels must lie in [1, 62]");
  b_ = cells();
}

SurrogateGame::Response SurrogateGame::respond(std::int64_t play) {
  if (over_) throw StateError("the game is over");
  if (play < 1 || play > cells()) {
    throw std::domain_error("play must lie in [1, 2^n], got " +
                            std::to_string(play));
  }
  Response r;
  if (play < a_) {
    r.bit = true;
  } else if (play > b_) {
    r.bit = false;
  } else if (a_ == b_) {
    // play is the only surviving instance: the player wins.
    r.bit = true;
    r.game_over = true;
    over_ = true;
    return r;
  } else if (2 * play < a_ + b_) {
    a_ = play + 1;
    r.bit = true;
  } else {
    b_ = play - 1;
    r.bit = false;
  }
  ++rounds_;
  return r;
}

std::int64_t cell_of_price(double p, int n) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("price must lie in [0, 1]");
  }
  const std::int64_t cells = std::int64_t{1} << n;
  const auto k = static_cast<std::int64_t>(std::floor(std::ldexp(p, n))) + 1;
  return std::min(k, cells);
}

std::int64_t BisectStrategy::play(Round) {
  last_ = lo_ + (hi_ - lo_) / 2;
  return last_;
}

void BisectStrategy::feedback(Round, bool bit) {
  // The game went on, so last_ is not the instance.
  if (bit) {
    lo_ = std::min(last_ + 1, hi_);
  } else {
    hi_ = std::max(last_ - 1, lo_);
  }
}

BrokerCellStrategy::BrokerCellStrategy(std::unique_ptr<Broker> broker, int n)
    : broker_(std::move(broker)), n_(n) {
  if (broker_->required_feedback() == FeedbackKind::kFull) {
    throw ConfigError("the surrogate game only supplies two-bit feedback");
  }
}

std::int64_t BrokerCellStrategy::play(Round t) {
  last_ = broker_->propose(t);
  return cell_of_price(last_.value(), n_);
}

void BrokerCellStrategy::feedback(Round t, bool bit) {
  broker_->observe(t, last_, TwoBitFeedback{bit, bit});
}

std::unique_ptr<CellStrategy> make_strategy(const std::string& name, int n,
                                            std::uint64_t seed,
                                            std::int64_t horizon) {
  if (name == "bisect") return std::make_unique<BisectStrategy>(n);
  if (name == "random") return std::make_unique<RandomCellStrategy>(n, seed);
  if (name == "mbs-wrapper" || name == "grid_ucb-wrapper") {
    BrokerSpec spec;
    spec.algo = name == "mbs-wrapper" ? "mbs" : "grid_ucb";
    auto broker = make_broker(spec, horizon);
    broker->reset(seed);
    return std::make_unique<BrokerCellStrategy>(std::move(broker), n);
  }
  throw ConfigError("unknown strategy '" + name +
                    "' (expected bisect, random, mbs-wrapper or "
                    "grid_ucb-wrapper)");
}

GameResult play_game(CellStrategy& strategy, int n, std::int64_t horizon) {
  SurrogateGame game(n);
  GameResult out;
  out.levels = n;
  out.strategy = strategy.name();
  for (Round t = 1; t <= horizon; ++t) {
    const std::int64_t cell = strategy.play(t);
    const auto response = game.respond(cell);
    out.plays.push_back(cell);
    out.bits.push_back(response.bit);
    if (response.game_over) {
      out.won = true;
      break;
    }
    out.segment_sizes.push_back(game.segment_size());
    out.segments.emplace_back(game.lower(), game.upper());
    strategy.feedback(t, response.bit);
  }
  out.rounds_survived = game.rounds();
  out.loss = game.loss();
  return out;
}

}  // namespace brokerage
