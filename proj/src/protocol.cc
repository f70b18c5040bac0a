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

#include "brokerage/protocol.h"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "brokerage/errors.h"

namespace brokerage {
namespace {

void require_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error(std::string(what) + " must lie in [0, 1], got " +
                            std::to_string(x));
  }
}

}  // namespace

Price::Price(double value) : value_(value) { require_unit(value, "price"); }

std::string_view to_string(FeedbackKind kind) {
  return kind == FeedbackKind::kFull ? "full" : "two_bit";
}

FeedbackKind parse_feedback_kind(std::string_view name) {
  if (name == "full") return FeedbackKind::kFull;
  if (name == "two_bit" || name == "2bit" || name == "two-bit") {
    return FeedbackKind::kTwoBit;
  }
  throw ConfigError("unknown feedback kind '" + std::string(name) +
                    "' (expected full or two_bit)");
}

FeedbackKind kind_of(const Feedback& fb) {
  return std::holds_alternative<FullFeedback>(fb) ? FeedbackKind::kFull
                                                  : FeedbackKind::kTwoBit;
}

bool g(double p, double v1, double v2) {
  require_unit(p, "price");
  require_unit(v1, "valuation");
  require_unit(v2, "valuation");
  return std::min(v1, v2) <= p && p <= std::max(v1, v2);
}

Feedback make_feedback(FeedbackKind kind, Price p, ValuationPair v) {
  if (kind == FeedbackKind::kFull) return FullFeedback{v.v1, v.v2};
  return TwoBitFeedback{v.v1 <= p.value(), v.v2 <= p.value()};
}

bool reconstruct_bandit_reward(const TwoBitFeedback& fb) {
  return fb.b1 != fb.b2;
}

}  // namespace brokerage
