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
#include <cmath>
#include <cstdint>
#include <vector>

#include "brokerage/brokers.h"
#include "brokerage/distributions.h"
#include "brokerage/errors.h"
#include "brokerage/protocol.h"
#include "brokerage/rng.h"

namespace brokerage {
namespace {

// Drives a broker for `rounds` rounds on `d` with the feedback it needs.
void drive(Broker& b, const Distribution& d, Rng& rng, std::int64_t rounds) {
  const FeedbackKind kind =
      b.required_feedback().value_or(FeedbackKind::kFull);
  for (Round t = 1; t <= rounds; ++t) {
    const Price p = b.propose(t);
    const ValuationPair v{sample(d, rng), sample(d, rng)};
    b.observe(t, p, make_feedback(kind, p, v));
  }
}

// --- FEM --------------------------------------------------------------------

TEST(Fem, Examples) {
  FemState s;
  EXPECT_EQ(fem_propose(s, 1).value(), 0.5);
  s.insert_pair(0.2, 0.8);
  EXPECT_DOUBLE_EQ(fem_propose(s, 2).value(), 0.5);
  FemState s3;
  s3.insert_pair(0.1, 0.9);
  s3.insert_pair(0.3, 0.2);
  EXPECT_DOUBLE_EQ(fem_propose(s3, 3).value(), 0.25);
}

TEST(Fem, ObserveKeepsSortedMultiset) {
  FemState s;
  s.insert_pair(0.2, 0.8);
  fem_observe(s, FullFeedback{0.7, 0.1});
  EXPECT_EQ(s.sorted_sample(), (std::vector<double>{0.1, 0.2, 0.7, 0.8}));
  FemState d;
  fem_observe(d, FullFeedback{0.5, 0.5});
  EXPECT_EQ(d.sorted_sample(), (std::vector<double>{0.5, 0.5}));
  fem_observe(d, FullFeedback{0.0, 1.0});
  EXPECT_EQ(d.sorted_sample(), (std::vector<double>{0.0, 0.5, 0.5, 1.0}));
}

TEST(Fem, Errors) {
  FemState s;
  EXPECT_THROW(fem_propose(s, 2), StateError);
  EXPECT_THROW(fem_observe(s, TwoBitFeedback{true, false}), FeedbackKindError);
  FemBroker b;
  EXPECT_THROW(b.observe(1, Price(0.5), FullFeedback{0.1, 0.2}), StateError);
  b.propose(1);
  EXPECT_THROW(b.propose(1), StateError);
  EXPECT_THROW(b.observe(2, Price(0.5), FullFeedback{0.1, 0.2}), StateError);
}

TEST(Fem, MedianPropertyOnRandomMultisets) {
  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    FemState s;
    std::vector<double> all;
    const int k = 1 + static_cast<int>(rng.uniform_int(0, 40));
    for (int i = 0; i < k; ++i) {
      // Coarse values force ties.
      const double a = rng.uniform_int(0, 10) / 10.0;
      const double b = rng.uniform_int(0, 10) / 10.0;
      s.insert_pair(a, b);
      all.push_back(a);
      all.push_back(b);
    }
    const double m = fem_propose(s, k + 1).value();
    const auto le = std::count_if(all.begin(), all.end(),
                                  [m](double v) { return v <= m; });
    const auto ge = std::count_if(all.begin(), all.end(),
                                  [m](double v) { return v >= m; });
    EXPECT_GE(le, k);
    EXPECT_GE(ge, k);
    std::sort(all.begin(), all.end());
    EXPECT_DOUBLE_EQ(m, 0.5 * (all[k - 1] + all[k]));
    EXPECT_EQ(s.sorted_sample(), all);
  }
}

// --- MBS --------------------------------------------------------------------

TEST(Mbs, ContinueExample) {
  MbsState s(0.01, 100);
  EXPECT_EQ(mbs_step(s, {false, false}), EpochDecision::kContinue);
  EXPECT_EQ(s.s, 2);
  EXPECT_EQ(s.y, 0);
  EXPECT_NEAR(std::sqrt(std::log(200.0) / 4.0), 1.151, 1e-3);
}

TEST(Mbs, MovesRightThenLeft) {
  MbsState s(0.01, 1000);
  EpochDecision d = EpochDecision::kContinue;
  while ((d = mbs_step(s, {false, false})) == EpochDecision::kContinue) {
  }
  EXPECT_EQ(d, EpochDecision::kMoveRight);
  EXPECT_EQ(s.q, 0.75);
  EXPECT_EQ(s.tau, 2);
  EXPECT_EQ(s.s, 0);
  while ((d = mbs_step(s, {true, true})) == EpochDecision::kContinue) {
  }
  EXPECT_EQ(d, EpochDecision::kMoveLeft);
  EXPECT_EQ(s.q, 0.625);
  ASSERT_EQ(s.completed.size(), 2u);
  EXPECT_EQ(s.completed[0].price, 0.5);
  EXPECT_EQ(s.completed[1].price, 0.75);
}

TEST(Mbs, FirstMoveNeedsTheRadiusBelowOneHalf) {
  // With all-zero bits the move fires once sqrt(ln(2/delta)/(2s)) < 1/2.
  for (double delta : {0.5, 0.01, 2e-12}) {
    MbsState s(delta, 1 << 20);
    while (mbs_step(s, {false, false}) == EpochDecision::kContinue) {
    }
    const double need = 2.0 * std::log(2.0 / delta);
    const std::int64_t expected =
        2 * static_cast<std::int64_t>(std::floor(need / 2.0) + 1);
    EXPECT_EQ(s.completed[0].bits, expected) << delta;
  }
}

TEST(Mbs, RejectsBadConfig) {
  EXPECT_THROW(MbsState(0.0, 10), ConfigError);
  EXPECT_THROW(MbsState(1.0, 10), ConfigError);
  EXPECT_THROW(MbsState(0.1, 0), ConfigError);
  MbsBroker b(0.1, 10);
  const Price p = b.propose(1);
  EXPECT_THROW(b.observe(1, p, FullFeedback{0.1, 0.2}), FeedbackKindError);
  MbsBroker c(0.1, 10);
  c.propose(1);
  EXPECT_THROW(c.observe(1, Price(0.3), TwoBitFeedback{}), StateError);
}

TEST(Mbs, DyadicInvariantAlongRandomRuns) {
  Rng rng(4);
  for (int run = 0; run < 50; ++run) {
    MbsState s(0.3, 100000);
    for (int i = 0; i < 20000; ++i) {
      const bool b1 = rng.bernoulli(0.45);
      const bool b2 = rng.bernoulli(0.45);
      const int before = s.tau;
      mbs_step(s, {b1, b2});
      ASSERT_EQ(s.s % 2, 0);
      ASSERT_LE(s.y, s.s);
      ASSERT_GT(s.q, 0.0);
      ASSERT_LT(s.q, 1.0);
      if (s.tau != before && s.tau < 50) {
        EXPECT_LE(std::abs(s.q - 0.5), 0.5 - std::ldexp(1.0, -s.tau) + 1e-15);
        // q is an odd multiple of 2^-tau.
        const double scaled = std::ldexp(s.q, s.tau);
        EXPECT_EQ(scaled, std::floor(scaled));
        EXPECT_EQ(std::fmod(scaled, 2.0), 1.0);
      }
    }
  }
}

TEST(Mbs, StopsUpdatingAfterItsHorizon) {
  MbsBroker b(0.5, 5);
  for (Round t = 1; t <= 50; ++t) {
    const Price p = b.propose(t);
    b.observe(t, p, TwoBitFeedback{false, false});
  }
  // delta = 1/2 moves after every second all-zero round.
  EXPECT_EQ(b.state().rounds, 5);
  EXPECT_EQ(b.state().completed.size(), 2u);
  EXPECT_EQ(b.state().s, 2);
  EXPECT_EQ(b.state().q, 0.875);
  EXPECT_EQ(b.propose(51).value(), 0.875);
}

// Noiseless recursion on the true cdf.
std::vector<double> noiseless_path(const Distribution& d, int epochs) {
  std::vector<double> q = {0.5};
  for (int tau = 1; tau < epochs; ++tau) {
    const double f = cdf(d, q.back());
    if (f == 0.5) break;
    const double step = std::ldexp(1.0, -(tau + 1));
    q.push_back(f < 0.5 ? q.back() + step : q.back() - step);
  }
  return q;
}

double tracking_rate(const Distribution& d, int runs, std::int64_t horizon,
                     std::size_t min_epochs) {
  const auto path = noiseless_path(d, 60);
  int good = 0;
  for (int r = 0; r < runs; ++r) {
    Rng rng(1000 + r);
    const double delta = 2.0 / std::pow(static_cast<double>(horizon), 3);
    MbsBroker b(delta, horizon);
    drive(b, d, rng, horizon);
    const auto& done = b.state().completed;
    bool ok = done.size() >= min_epochs;
    for (std::size_t i = 0; ok && i < done.size(); ++i) {
      ok = i < path.size() && done[i].price == path[i];
    }
    good += ok;
  }
  return static_cast<double>(good) / runs;
}

TEST(Mbs, TracksNoiselessRecursionOnUniform) {
  EXPECT_GE(tracking_rate(Distribution::uniform(), 1000, 10000, 0), 0.99);
}

TEST(Mbs, TracksNoiselessRecursionOnShiftedMedian) {
  const auto d = Distribution::piecewise_lb(0.25);
  const auto path = noiseless_path(d, 60);
  ASSERT_EQ(path, (std::vector<double>{0.5, 0.75, 0.625, 0.5625}));
  EXPECT_GE(tracking_rate(d, 200, 10000, 3), 0.99);
}

TEST(Mbs, EpochLengthWithinConfidenceBound) {
  const std::int64_t horizon = 8192;
  const double delta = 2.0 / std::pow(static_cast<double>(horizon), 3);
  int checked = 0;
  int violations = 0;
  for (const auto& d :
       {Distribution::piecewise_lb(0.25), Distribution::interval_uniform(3, 3),
        Distribution::piecewise_lb(0.9)}) {
    for (int r = 0; r < 40; ++r) {
      Rng rng(77 + r);
      MbsBroker b(delta, horizon);
      drive(b, d, rng, horizon);
      for (const auto& e : b.state().completed) {
        const double gap = 0.5 - cdf(d, e.price);
        if (gap == 0.0) continue;
        ++checked;
        violations += e.bits > 2.0 * std::log(2.0 / delta) / (gap * gap) + 2.0;
      }
    }
  }
  EXPECT_GT(checked, 100);
  EXPECT_EQ(violations, 0);
}

// --- FEPsi ------------------------------------------------------------------

// Smallest maximizer of n^2 * objective over the candidate set, by counting.
double fepsi_oracle(std::vector<double> xs, PsiVariant variant) {
  std::sort(xs.begin(), xs.end());
  const std::int64_t n = static_cast<std::int64_t>(xs.size());
  std::vector<double> cand = {0.0, 1.0};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cand.push_back(xs[i]);
    if (i > 0 && xs[i] != xs[i - 1]) cand.push_back(0.5 * (xs[i - 1] + xs[i]));
  }
  std::sort(cand.begin(), cand.end());
  double best_p = 0.0;
  std::int64_t best = -1;
  for (double p : cand) {
    std::int64_t below = 0;
    std::int64_t at = 0;
    for (double v : xs) {
      below += v < p;
      at += v == p;
    }
    const std::int64_t upto = below + at;
    const std::int64_t above = n - upto;
    const std::int64_t val = variant == PsiVariant::kPlugin
                                 ? 2 * upto * above + upto * at
                                 : n * n - below * below - above * above;
    if (val > best) {
      best = val;
      best_p = p;
    }
  }
  return best_p;
}

double empirical_objective(const std::vector<double>& xs, double p,
                           PsiVariant variant) {
  const double n = static_cast<double>(xs.size());
  double below = 0;
  double at = 0;
  for (double v : xs) {
    below += v < p;
    at += v == p;
  }
  const double f = (below + at) / n;
  const double fl = below / n;
  if (variant == PsiVariant::kPlugin) return 2 * f * (1 - f) + f * (at / n);
  return 1 - fl * fl - (1 - f) * (1 - f);
}

TEST(FePsi, Examples) {
  FePsiState s;
  EXPECT_EQ(fepsi_propose(s, 1, PsiVariant::kPlugin).value(), 0.5);
  s.insert(0.2);
  s.insert(0.8);
  EXPECT_DOUBLE_EQ(s.objective(0.2, PsiVariant::kPlugin), 0.75);
  EXPECT_DOUBLE_EQ(s.objective(0.5, PsiVariant::kPlugin), 0.5);
  EXPECT_DOUBLE_EQ(s.objective(0.8, PsiVariant::kPlugin), 0.5);
  EXPECT_DOUBLE_EQ(s.objective(0.2, PsiVariant::kExact), 0.75);
  EXPECT_DOUBLE_EQ(s.objective(0.5, PsiVariant::kExact), 0.5);
  EXPECT_EQ(fepsi_propose(s, 2, PsiVariant::kPlugin).value(), 0.2);
  EXPECT_EQ(fepsi_propose(s, 2, PsiVariant::kExact).value(), 0.2);
}

TEST(FePsi, ArgmaxMatchesBruteForce) {
  Rng rng(21);
  for (int trial = 0; trial < 400; ++trial) {
    FePsiState s;
    std::vector<double> xs;
    const int pairs = 1 + static_cast<int>(rng.uniform_int(0, 30));
    const int grid = 1 + static_cast<int>(rng.uniform_int(1, 12));
    for (int i = 0; i < 2 * pairs; ++i) {
      const double v = trial % 3 == 0 ? rng.uniform()
                                      : rng.uniform_int(0, grid) /
                                            static_cast<double>(grid);
      s.insert(v);
      xs.push_back(v);
    }
    for (auto variant : {PsiVariant::kPlugin, PsiVariant::kExact}) {
      EXPECT_EQ(s.argmax(variant), fepsi_oracle(xs, variant)) << trial;
      for (double p : {0.0, 0.25, 0.5, xs[0], 1.0}) {
        EXPECT_NEAR(s.objective(p, variant),
                    empirical_objective(xs, p, variant), 1e-14);
      }
    }
  }
}

TEST(FePsi, ConvergesToTheMedianOnUniform) {
  for (auto variant : {PsiVariant::kPlugin, PsiVariant::kExact}) {
    int close = 0;
    for (int r = 0; r < 100; ++r) {
      Rng rng(500 + r);
      FePsiBroker b(variant);
      drive(b, Distribution::uniform(), rng, 9999);
      close += std::abs(b.propose(10000).value() - 0.5) <= 0.05;
    }
    EXPECT_GE(close, 95) << to_string(variant);
  }
}

TEST(FePsi, VariantNames) {
  EXPECT_EQ(parse_psi_variant("plugin"), PsiVariant::kPlugin);
  EXPECT_EQ(parse_psi_variant("exact"), PsiVariant::kExact);
  EXPECT_THROW(parse_psi_variant("other"), ConfigError);
}

// --- GridUCB ----------------------------------------------------------------

TEST(GridUcb, ExplorationOrder) {
  GridUcbBroker b(4);
  EXPECT_EQ(b.propose(1).value(), 0.125);
  b.observe(1, Price(0.125), TwoBitFeedback{true, false});
  EXPECT_EQ(b.propose(2).value(), 0.375);
  b.observe(2, Price(0.375), TwoBitFeedback{true, true});
  EXPECT_EQ(b.propose(3).value(), 0.625);
}

TEST(GridUcb, IndexExample) {
  GridUcbState s(2);
  s.update(0, true);
  s.update(1, false);
  EXPECT_EQ(s.select(3), 0);
  EXPECT_EQ(grid_ucb_propose(s, 3).value(), 0.25);
}

TEST(GridUcb, PricesStayOnTheGrid) {
  Rng rng(6);
  const std::int64_t k = grid_ucb_default_arms(1000);
  EXPECT_EQ(k, 100);
  GridUcbBroker b(k);
  for (Round t = 1; t <= 1000; ++t) {
    const Price p = b.propose(t);
    const double i = (p.value() * 2 * k - 1) / 2;
    ASSERT_NEAR(i, std::round(i), 1e-9);
    ASSERT_GT(p.value(), 0.0);
    ASSERT_LT(p.value(), 1.0);
    const ValuationPair v{rng.uniform(), rng.uniform()};
    b.observe(t, p, make_feedback(FeedbackKind::kTwoBit, p, v));
  }
  std::int64_t total = 0;
  for (auto c : b.state().counts) total += c;
  EXPECT_EQ(total, 1000);
}

// --- Baselines and construction -----------------------------------------------

TEST(Fixed, AlwaysPostsItsPrice) {
  for (double p : {0.5, 0.0, 1.0}) {
    FixedPriceBroker b{Price(p)};
    for (Round t = 1; t <= 5; ++t) {
      EXPECT_EQ(b.propose(t).value(), p);
      b.observe(t, Price(p), FullFeedback{0.1, 0.9});
    }
  }
}

TEST(MakeBroker, DefaultsAndErrors) {
  BrokerSpec spec;
  spec.algo = "mbs";
  auto b = make_broker(spec, 1000);
  auto* mbs = dynamic_cast<MbsBroker*>(b.get());
  ASSERT_NE(mbs, nullptr);
  EXPECT_DOUBLE_EQ(mbs->state().delta, 2.0 / 1e9);
  EXPECT_EQ(mbs->state().horizon, 1000);
  EXPECT_EQ(mbs_default_delta(1), 0.5);

  spec.algo = "fixed";
  EXPECT_THROW(make_broker(spec, 10), ConfigError);
  spec.p = 0.3;
  EXPECT_EQ(make_broker(spec, 10)->propose(1).value(), 0.3);
  spec.algo = "nope";
  EXPECT_THROW(make_broker(spec, 10), ConfigError);
  EXPECT_THROW(required_feedback("nope"), ConfigError);
  EXPECT_EQ(required_feedback("fem"), FeedbackKind::kFull);
  EXPECT_EQ(required_feedback("grid_ucb"), FeedbackKind::kTwoBit);
}

TEST(MakeBroker, ResetReproducesRandomBaseline) {
  RandomPriceBroker b(3);
  std::vector<double> first;
  for (Round t = 1; t <= 20; ++t) {
    first.push_back(b.propose(t).value());
    b.observe(t, Price(first.back()), FullFeedback{0.2, 0.4});
  }
  b.reset(3);
  for (Round t = 1; t <= 20; ++t) {
    EXPECT_EQ(b.propose(t).value(), first[t - 1]);
    b.observe(t, Price(first[t - 1]), FullFeedback{0.2, 0.4});
  }
}

}  // namespace
}  // namespace brokerage
