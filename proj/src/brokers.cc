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

#include "brokerage/brokers.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "brokerage/errors.h"

namespace brokerage {

// --- Broker ----------------------------------------------------------------

Price Broker::propose(Round t) {
  if (pending_) {
    throw StateError("propose(" + std::to_string(t) +
                     ") called before observe for round " +
                     std::to_string(*pending_));
  }
  if (t != next_round_) {
    throw StateError("expected round " + std::to_string(next_round_) +
                     ", got " + std::to_string(t));
  }
  const Price p = do_propose(t);
  pending_ = t;
  return p;
}

void Broker::observe(Round t, Price price, const Feedback& fb) {
  if (!pending_ || *pending_ != t) {
    throw StateError("observe(" + std::to_string(t) +
                     ") without a matching propose");
  }
  do_observe(t, price, fb);
  pending_.reset();
  ++next_round_;
}

void Broker::reset(std::uint64_t seed) {
  pending_.reset();
  next_round_ = 1;
  do_reset(seed);
}

// --- FEM -------------------------------------------------------------------

void FemState::insert(double v) {
  if (lower_.empty() || v <= lower_.top()) {
    lower_.push(v);
  } else {
    upper_.push(v);
  }
  if (lower_.size() > upper_.size() + 1) {
    upper_.push(lower_.top());
    lower_.pop();
  } else if (upper_.size() > lower_.size()) {
    lower_.push(upper_.top());
    upper_.pop();
  }
}

void FemState::insert_pair(double v1, double v2) {
  insert(v1);
  insert(v2);
}

double FemState::empirical_median() const {
  if (size() == 0 || size() % 2 != 0) {
    throw StateError("empirical median needs a nonempty even-size sample");
  }
  return 0.5 * (lower_.top() + upper_.top());
}

std::vector<double> FemState::sorted_sample() const {
  std::vector<double> out;
  out.reserve(size());
  auto lo = lower_;
  while (!lo.empty()) {
    out.push_back(lo.top());
    lo.pop();
  }
  std::reverse(out.begin(), out.end());
  auto hi = upper_;
  while (!hi.empty()) {
    out.push_back(hi.top());
    hi.pop();
  }
  return out;
}

Price fem_propose(const FemState& state, Round t) {
  if (t < 1) throw StateError("rounds start at 1");
  const auto expected = static_cast<std::size_t>(2 * (t - 1));
  if (state.size() != expected) {
    throw StateError("FEM at round " + std::to_string(t) + " expects " +
                     std::to_string(expected) + " valuations, holds " +
                     std::to_string(state.size()));
  }
  if (t == 1) return Price(0.5);
  return Price(state.empirical_median());
}

void fem_observe(FemState& state, const Feedback& fb) {
  const auto* full = std::get_if<FullFeedback>(&fb);
  if (full == nullptr) {
    throw FeedbackKindError("FEM requires full feedback");
  }
  state.insert_pair(full->v1, full->v2);
}

// --- MBS -------------------------------------------------------------------

MbsState::MbsState(double delta_in, std::int64_t horizon_in)
    : delta(delta_in), horizon(horizon_in) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("MBS confidence delta must lie in (0, 1)");
  }
  if (horizon < 1) throw ConfigError("MBS horizon must be at least 1");
}

EpochDecision mbs_step(MbsState& state, const TwoBitFeedback& fb) {
  state.s += 2;
  state.y += static_cast<int>(fb.b1) + static_cast<int>(fb.b2);
  const double s = static_cast<double>(state.s);
  const double mean = static_cast<double>(state.y) / s;
  const double radius = std::sqrt(std::log(2.0 / state.delta) / (2.0 * s));

  EpochDecision decision = EpochDecision::kContinue;
  if (mean + radius < 0.5) {
    decision = EpochDecision::kMoveRight;
  } else if (mean - radius > 0.5) {
    decision = EpochDecision::kMoveLeft;
  }
  if (decision == EpochDecision::kContinue) return decision;

  state.completed.push_back({state.tau, state.q, state.s, decision});
  const double step = std::ldexp(1.0, -(state.tau + 1));
  const double next =
      decision == EpochDecision::kMoveRight ? state.q + step : state.q - step;
  if (next > 0.0 && next < 1.0) state.q = next;
  ++state.tau;
  state.s = 0;
  state.y = 0;
  return decision;
}

MbsBroker::MbsBroker(double delta, std::int64_t horizon)
    : state_(delta, horizon) {}

Price MbsBroker::do_propose(Round) { return Price(state_.q); }

void MbsBroker::do_observe(Round, Price price, const Feedback& fb) {
  const auto* bits = std::get_if<TwoBitFeedback>(&fb);
  if (bits == nullptr) throw FeedbackKindError("MBS requires two-bit feedback");
  if (price.value() != state_.q) {
    throw StateError("MBS feedback must come from its own posted price");
  }
  // The search runs for `horizon` rounds; later rounds keep the last price.
  if (state_.rounds >= state_.horizon) return;
  ++state_.rounds;
  mbs_step(state_, *bits);
}

void MbsBroker::do_reset(std::uint64_t) {
  state_ = MbsState(state_.delta, state_.horizon);
}

// --- FEPsi -----------------------------------------------------------------

std::string_view to_string(PsiVariant variant) {
  return variant == PsiVariant::kPlugin ? "plugin" : "exact";
}

PsiVariant parse_psi_variant(std::string_view name) {
  if (name == "plugin") return PsiVariant::kPlugin;
  if (name == "exact") return PsiVariant::kExact;
  throw ConfigError("unknown FEPsi variant '" + std::string(name) +
                    "' (expected plugin or exact)");
}

namespace {

// Objectives scaled by n^2 so that comparisons (and ties) are exact.
// `below` counts values < p, `at` values == p, n the sample size.
std::int64_t scaled_objective(std::int64_t below, std::int64_t at,
                              std::int64_t n, PsiVariant variant) {
  const std::int64_t le = below + at;
  const std::int64_t above = n - le;
  if (variant == PsiVariant::kPlugin) return le * (2 * above + at);
  return n * n - below * below - above * above;
}

}  // namespace

void FePsiState::insert(double v) {
  auto pos = std::upper_bound(sorted_.begin(), sorted_.end(), v);
  pos = sorted_.insert(pos, v);
  const auto first = std::lower_bound(sorted_.begin(), pos, v);
  max_multiplicity_ = std::max<std::int64_t>(max_multiplicity_,
                                             pos - first + 1);
}

double FePsiState::objective(double p, PsiVariant variant) const {
  const auto n = static_cast<std::int64_t>(sorted_.size());
  if (n == 0) return 0.0;
  auto [lo, hi] = std::equal_range(sorted_.begin(), sorted_.end(), p);
  const std::int64_t below = lo - sorted_.begin();
  const std::int64_t at = hi - lo;
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  return static_cast<double>(scaled_objective(below, at, n, variant)) / nn;
}

// The objective is constant on the open gaps between distinct observed
// values, so the candidate set is exhaustive. Groups of equal values are
// scanned outward from the one holding the sample median and the scan stops
// once an upper bound on every remaining candidate falls strictly below the
// best value found: with x = values < p on the right side (x >= n/2) or
// x = values <= p on the left side (x <= n/2), every candidate is at most
// 2x(n - x) + 2n * max_multiplicity, which decreases away from the median.
double FePsiState::argmax(PsiVariant variant) const {
  const auto n = static_cast<std::int64_t>(sorted_.size());
  if (n == 0) throw StateError("FEPsi argmax needs a nonempty sample");

  std::int64_t best_value = -1;
  double best_price = 0.0;
  auto consider = [&](std::int64_t value, double price) {
    if (value > best_value || (value == best_value && price < best_price)) {
      best_value = value;
      best_price = price;
    }
  };
  auto bound = [&](std::int64_t x) {
    return 2 * x * (n - x) + 2 * n * max_multiplicity_;
  };
  // Group starting at index i: [i, end).
  auto group_end = [&](std::int64_t i) {
    return static_cast<std::int64_t>(
        std::upper_bound(sorted_.begin() + i, sorted_.end(), sorted_[i]) -
        sorted_.begin());
  };
  auto group_begin = [&](std::int64_t last) {
    return static_cast<std::int64_t>(
        std::lower_bound(sorted_.begin(), sorted_.begin() + last,
                         sorted_[last]) -
        sorted_.begin());
  };
  // Evaluates the group [i, end) and the gap that follows it.
  auto evaluate_group = [&](std::int64_t i, std::int64_t end) {
    consider(scaled_objective(i, end - i, n, variant), sorted_[i]);
    if (end < n) {
      consider(scaled_objective(end, 0, n, variant),
               0.5 * (sorted_[i] + sorted_[end]));
    }
  };

  if (sorted_.front() > 0.0) consider(0, 0.0);
  if (sorted_.back() < 1.0) consider(scaled_objective(n, 0, n, variant), 1.0);

  const std::int64_t mid_begin = group_begin(n / 2);
  const std::int64_t mid_end = group_end(mid_begin);
  evaluate_group(mid_begin, mid_end);

  for (std::int64_t i = mid_end; i < n;) {
    if (bound(i) < best_value) break;
    const std::int64_t end = group_end(i);
    evaluate_group(i, end);
    i = end;
  }
  for (std::int64_t end = mid_begin; end > 0;) {
    if (bound(end) < best_value) break;
    const std::int64_t begin = group_begin(end - 1);
    evaluate_group(begin, end);
    end = begin;
  }
  return best_price;
}

Price fepsi_propose(const FePsiState& state, Round t, PsiVariant variant) {
  if (t < 1) throw StateError("rounds start at 1");
  const auto expected = static_cast<std::size_t>(2 * (t - 1));
  if (state.size() != expected) {
    throw StateError("FEPsi at round " + std::to_string(t) + " expects " +
                     std::to_string(expected) + " valuations, holds " +
                     std::to_string(state.size()));
  }
  if (t == 1) return Price(0.5);
  return Price(state.argmax(variant));
}

Price FePsiBroker::do_propose(Round t) {
  return fepsi_propose(state_, t, variant_);
}

void FePsiBroker::do_observe(Round, Price, const Feedback& fb) {
  const auto* full = std::get_if<FullFeedback>(&fb);
  if (full == nullptr) throw FeedbackKindError("FEPsi requires full feedback");
  state_.insert(full->v1);
  state_.insert(full->v2);
}

// --- Grid UCB --------------------------------------------------------------

GridUcbState::GridUcbState(std::int64_t k)
    : arms(k),
      counts(static_cast<std::size_t>(std::max<std::int64_t>(k, 0)), 0),
      sums(static_cast<std::size_t>(std::max<std::int64_t>(k, 0)), 0.0) {
  if (k < 1) throw ConfigError("grid_ucb needs at least one arm");
}

double GridUcbState::arm_price(std::int64_t arm) const {
  return static_cast<double>(2 * arm + 1) / static_cast<double>(2 * arms);
}

std::int64_t GridUcbState::select(Round t) const {
  for (std::int64_t i = 0; i < arms; ++i) {
    if (counts[i] == 0) return i;
  }
  const double log_t = std::log(static_cast<double>(t));
  std::int64_t best = 0;
  double best_index = -1.0;
  for (std::int64_t i = 0; i < arms; ++i) {
    const double c = static_cast<double>(counts[i]);
    const double index = sums[i] / c + std::sqrt(2.0 * log_t / c);
    if (index > best_index) {
      best_index = index;
      best = i;
    }
  }
  return best;
}

void GridUcbState::update(std::int64_t arm, bool reward) {
  ++counts[arm];
  sums[arm] += reward ? 1.0 : 0.0;
}

Price grid_ucb_propose(const GridUcbState& state, Round t) {
  return Price(state.arm_price(state.select(t)));
}

Price GridUcbBroker::do_propose(Round t) {
  last_arm_ = state_.select(t);
  return Price(state_.arm_price(last_arm_));
}

void GridUcbBroker::do_observe(Round, Price, const Feedback& fb) {
  const auto* bits = std::get_if<TwoBitFeedback>(&fb);
  if (bits == nullptr) {
    throw FeedbackKindError("grid_ucb requires two-bit feedback");
  }
  state_.update(last_arm_, reconstruct_bandit_reward(*bits));
}

// --- Factory ---------------------------------------------------------------

double mbs_default_delta(std::int64_t horizon) {
  const double t = static_cast<double>(horizon);
  return std::min(0.5, 2.0 / (t * t * t));
}

std::int64_t grid_ucb_default_arms(std::int64_t horizon) {
  return std::max<std::int64_t>(
      1, static_cast<std::int64_t>(
             std::ceil(std::cbrt(static_cast<double>(horizon) *
                                 static_cast<double>(horizon)) -
                       1e-9)));
}

std::optional<FeedbackKind> required_feedback(std::string_view algo) {
  if (algo == "fem" || algo == "fepsi") return FeedbackKind::kFull;
  if (algo == "mbs" || algo == "grid_ucb") return FeedbackKind::kTwoBit;
  if (algo == "fixed" || algo == "random") return std::nullopt;
  throw ConfigError("unknown algorithm '" + std::string(algo) + "'");
}

bool horizon_independent(const BrokerSpec& spec) {
  if (spec.algo == "mbs") return spec.delta.has_value() && spec.horizon;
  if (spec.algo == "grid_ucb") return spec.arms.has_value();
  return true;
}

std::unique_ptr<Broker> make_broker(const BrokerSpec& spec,
                                    std::int64_t run_horizon) {
  if (run_horizon < 1) throw ConfigError("horizon must be at least 1");
  if (spec.algo == "fem") return std::make_unique<FemBroker>();
  if (spec.algo == "fepsi") return std::make_unique<FePsiBroker>(spec.variant);
  if (spec.algo == "mbs") {
    const std::int64_t n = spec.horizon.value_or(run_horizon);
    const double delta = spec.delta.value_or(mbs_default_delta(n));
    return std::make_unique<MbsBroker>(delta, n);
  }
  if (spec.algo == "grid_ucb") {
    return std::make_unique<GridUcbBroker>(
        spec.arms.value_or(grid_ucb_default_arms(run_horizon)));
  }
  if (spec.algo == "fixed") {
    if (!spec.p) throw ConfigError("fixed broker needs a price p");
    if (!(*spec.p >= 0.0 && *spec.p <= 1.0)) {
      throw ConfigError("fixed price must lie in [0, 1]");
    }
    return std::make_unique<FixedPriceBroker>(Price(*spec.p));
  }
  if (spec.algo == "random") return std::make_unique<RandomPriceBroker>();
  throw ConfigError("unknown algorithm '" + spec.algo + "'");
}

}  // namespace brokerage
