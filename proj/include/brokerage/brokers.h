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

#ifndef BROKERAGE_BROKERS_H_
#define BROKERAGE_BROKERS_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "brokerage/protocol.h"
#include "brokerage/rng.h"

namespace brokerage {

// Price-posting strategy driven one round at a time: propose(t), then
// observe(t, price, feedback) exactly once, for t = 1, 2, ...
//
// The public entry points enforce the call order and throw StateError when
// it is violated; concrete brokers implement the do_* hooks.
class Broker {
 public:
  virtual ~Broker() = default;

  Price propose(Round t);
  void observe(Round t, Price price, const Feedback& fb);
  void reset(std::uint64_t seed);

  virtual std::string name() const = 0;
  // The feedback kind the broker consumes; nullopt when any kind works.
  virtual std::optional<FeedbackKind> required_feedback() const = 0;

 protected:
  virtual Price do_propose(Round t) = 0;
  virtual void do_observe(Round t, Price price, const Feedback& fb) = 0;
  virtual void do_reset(std::uint64_t seed) = 0;

 private:
  std::optional<Round> pending_;
  Round next_round_ = 1;
};

// ---------------------------------------------------------------------------
// Follow the Empirical Median.

// Streaming median of an even-size sample, kept as two balanced heaps:
// `lower_` holds the smallest half, `upper_` the largest half.
class FemState {
 public:
  void insert_pair(double v1, double v2);

  std::size_t size() const { return lower_.size() + upper_.size(); }
  // Mean of the k-th and (k+1)-th order statistics of the 2k stored values.
  double empirical_median() const;
  // The stored multiset in increasing order (copies; for inspection only).
  std::vector<double> sorted_sample() const;

 private:
  void insert(double v);

  std::priority_queue<double> lower_;
  std::priority_queue<double, std::vector<double>, std::greater<>> upper_;
};

// t = 1 posts 1/2; later rounds post the empirical median of the 2(t-1)
// observed valuations. Throws StateError on a sample-size mismatch.
Price fem_propose(const FemState& state, Round t);
// Throws FeedbackKindError for two-bit feedback.
void fem_observe(FemState& state, const Feedback& fb);

class FemBroker final : public Broker {
 public:
  std::string name() const override { return "fem"; }
  std::optional<FeedbackKind> required_feedback() const override {
    return FeedbackKind::kFull;
  }
  const FemState& state() const { return state_; }

 protected:
  Price do_propose(Round t) override { return fem_propose(state_, t); }
  void do_observe(Round, Price, const Feedback& fb) override {
    fem_observe(state_, fb);
  }
  void do_reset(std::uint64_t) override { state_ = FemState{}; }

 private:
  FemState state_;
};

// ---------------------------------------------------------------------------
// Median Binary Search.

enum class EpochDecision { kContinue, kMoveRight, kMoveLeft };

struct MbsEpoch {
  int tau = 1;
  double price = 0.5;
  std::int64_t bits = 0;  // s_tau: indicators collected during the epoch
  EpochDecision decision = EpochDecision::kContinue;
};

struct MbsState {
  MbsState(double delta, std::int64_t horizon);

  double q = 0.5;         // dyadic price under test
  int tau = 1;            // epoch index
  std::int64_t s = 0;     // indicators collected this epoch
  std::int64_t y = 0;     // how many of them were <= q
  double delta;           // confidence
  std::int64_t horizon;   // rounds the search runs for
  std::int64_t rounds = 0;
  std::vector<MbsEpoch> completed;  // epochs that ended with a move
};

// Folds one pair of indicators collected at price state.q into the epoch and
// applies the confidence test. On a move, Q <- Q +/- 2^-(tau+1) and a new
// epoch starts. Once the dyadic step no longer changes Q inside (0, 1) the
// price stays where it is.
EpochDecision mbs_step(MbsState& state, const TwoBitFeedback& fb);

class MbsBroker final : public Broker {
 public:
  MbsBroker(double delta, std::int64_t horizon);

  std::string name() const override { return "mbs"; }
  std::optional<FeedbackKind> required_feedback() const override {
    return FeedbackKind::kTwoBit;
  }
  const MbsState& state() const { return state_; }

 protected:
  Price do_propose(Round t) override;
  void do_observe(Round t, Price price, const Feedback& fb) override;
  void do_reset(std::uint64_t seed) override;

 private:
  MbsState state_;
};

// ---------------------------------------------------------------------------
// Follow the Empirical Psi.

enum class PsiVariant {
  kPlugin,  // 2 F (mass strictly above) + F * (mass at p)
  kExact,  // 1 - F(p-)^2 - (1 - F(p))^2
};

std::string_view to_string(PsiVariant variant);
PsiVariant parse_psi_variant(std::string_view name);

// Sorted multiset of observed valuations with the empirical objective.
class FePsiState {
 public:
  void insert(double v);

  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted_sample() const { return sorted_; }

  // Empirical objective at an arbitrary price.
  double objective(double p, PsiVariant variant) const;

  // Smallest maximizer over {0, 1}, the observed values, and the midpoints
  // of consecutive distinct observed values. Requires a nonempty sample.
  double argmax(PsiVariant variant) const;

 private:
  std::vector<double> sorted_;
  std::int64_t max_multiplicity_ = 0;
};

Price fepsi_propose(const FePsiState& state, Round t, PsiVariant variant);

class FePsiBroker final : public Broker {
 public:
  explicit FePsiBroker(PsiVariant variant = PsiVariant::kPlugin)
      : variant_(variant) {}

  std::string name() const override { return "fepsi"; }
  std::optional<FeedbackKind> required_feedback() const override {
    return FeedbackKind::kFull;
  }
  PsiVariant variant() const { return variant_; }
  const FePsiState& state() const { return state_; }

 protected:
  Price do_propose(Round t) override;
  void do_observe(Round t, Price price, const Feedback& fb) override;
  void do_reset(std::uint64_t) override { state_ = FePsiState{}; }

 private:
  PsiVariant variant_;
  FePsiState state_;
};

// ---------------------------------------------------------------------------
// Baselines.

// UCB1 over K evenly spaced prices (2i - 1) / (2K), fed with the bandit
// reward reconstructed from two-bit feedback.
struct GridUcbState {
  explicit GridUcbState(std::int64_t arms);

  std::int64_t arms;
  std::vector<std::int64_t> counts;
  std::vector<double> sums;

  double arm_price(std::int64_t arm) const;  // arm is 0-based
  // Unplayed arms first (lowest index), then argmax of
  // mean + sqrt(2 ln t / count), ties to the lowest index.
  std::int64_t select(Round t) const;
  void update(std::int64_t arm, bool reward);
};

Price grid_ucb_propose(const GridUcbState& state, Round t);

class GridUcbBroker final : public Broker {
 public:
  explicit GridUcbBroker(std::int64_t arms) : state_(arms) {}

  std::string name() const override { return "grid_ucb"; }
  std::optional<FeedbackKind> required_feedback() const override {
    return FeedbackKind::kTwoBit;
  }
  const GridUcbState& state() const { return state_; }

 protected:
  Price do_propose(Round t) override;
  void do_observe(Round t, Price price, const Feedback& fb) override;
  void do_reset(std::uint64_t) override { state_ = GridUcbState(state_.arms); }

 private:
  GridUcbState state_;
  std::int64_t last_arm_ = 0;
};

class FixedPriceBroker final : public Broker {
 public:
  explicit FixedPriceBroker(Price p) : price_(p) {}

  std::string name() const override { return "fixed"; }
  std::optional<FeedbackKind> required_feedback() const override {
    return std::nullopt;
  }

 protected:
  Price do_propose(Round) override { return price_; }
  void do_observe(Round, Price, const Feedback&) override {}
  void do_reset(std::uint64_t) override {}

 private:
  Price price_;
};

// Posts a uniformly random price each round; owns its generator.
class RandomPriceBroker final : public Broker {
 public:
  explicit RandomPriceBroker(std::uint64_t seed = 0) : rng_(seed) {}

  std::string name() const override { return "random"; }
  std::optional<FeedbackKind> required_feedback() const override {
    return std::nullopt;
  }

 protected:
  Price do_propose(Round) override { return Price(rng_.uniform()); }
  void do_observe(Round, Price, const Feedback&) override {}
  void do_reset(std::uint64_t seed) override { rng_.reseed(seed); }

 private:
  Rng rng_;
};

// ---------------------------------------------------------------------------
// Construction from configuration.

struct BrokerSpec {
  std::string algo;  // fem | mbs | fepsi | fixed | grid_ucb | random
  std::optional<double> delta;
  std::optional<std::int64_t> horizon;
  std::optional<double> p;
  std::optional<std::int64_t> arms;
  PsiVariant variant = PsiVariant::kPlugin;
};

// Defaults that depend on the run length T: MBS uses delta = 2/T^3 and
// n = T; the grid baseline uses K = ceil(T^(2/3)). Throws ConfigError.
std::unique_ptr<Broker> make_broker(const BrokerSpec& spec,
                                    std::int64_t run_horizon);

// Feedback kind the algorithm needs, nullopt when it accepts either.
std::optional<FeedbackKind> required_feedback(std::string_view algo);

// True when the broker's behaviour does not depend on the run length, so a
// length-T trajectory's prefixes are the trajectories of shorter runs.
bool horizon_independent(const BrokerSpec& spec);

double mbs_default_delta(std::int64_t horizon);
std::int64_t grid_ucb_default_arms(std::int64_t horizon);

}  // namespace brokerage

#endif  // BROKERAGE_BROKERS_H_
