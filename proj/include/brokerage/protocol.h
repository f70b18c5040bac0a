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

#ifndef BROKERAGE_PROTOCOL_H_
#define BROKERAGE_PROTOCOL_H_

#include <compare>
#include <cstdint>
#include <string_view>
#include <variant>

namespace brokerage {

// Rounds are 1-indexed.
using Round = std::int64_t;

// A posted price in [0, 1].
class Price {
 public:
  constexpr Price() = default;
  // Throws std::domain_error outside [0, 1].
  explicit Price(double value);

  constexpr double value() const { return value_; }

  friend constexpr auto operator<=>(Price, Price) = default;

 private:
  double value_ = 0.5;
};

struct ValuationPair {
  double v1 = 0.0;  // first trader of the round
  double v2 = 0.0;  // second trader of the round
};

enum class FeedbackKind { kFull, kTwoBit };

std::string_view to_string(FeedbackKind kind);
// Accepts "full" and "two_bit"; throws ConfigError otherwise.
FeedbackKind parse_feedback_kind(std::string_view name);

// Full feedback reveals both valuations after the price is posted.
struct FullFeedback {
  double v1 = 0.0;
  double v2 = 0.0;
};

// Two-bit feedback reveals only I{v1 <= p} and I{v2 <= p}.
struct TwoBitFeedback {
  bool b1 = false;
  bool b2 = false;
};

using Feedback = std::variant<FullFeedback, TwoBitFeedback>;

FeedbackKind kind_of(const Feedback& fb);

struct RoundOutcome {
  Round t = 1;
  Price price;
  ValuationPair valuations;
  bool reward = false;
  Feedback feedback;
};

// Trade indicator: 1 iff min(v1, v2) <= p <= max(v1, v2).
// Throws std::domain_error if any argument lies outside [0, 1].
bool g(double p, double v1, double v2);
inline bool g(Price p, ValuationPair v) { return g(p.value(), v.v1, v.v2); }

Feedback make_feedback(FeedbackKind kind, Price p, ValuationPair v);

// Bandit reward recovered from two-bit feedback: I{b1 != b2}. It misses the
// event {both <= p, max = p}, so it equals g almost surely only when the
// valuation law has no atoms.
bool reconstruct_bandit_reward(const TwoBitFeedback& fb);

}  // namespace brokerage

#endif  // BROKERAGE_PROTOCOL_H_
