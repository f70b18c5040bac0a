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

#include <cstdlib>
#include <sstream>
#include <string>
#include <variant>

#include "brokerage/errors.h"
#include "brokerage/evaluation.h"
#include "brokerage/io.h"

namespace brokerage {
namespace {

TEST(MiniLanguage, Families) {
  EXPECT_TRUE(std::holds_alternative<Uniform01>(
      parse_distribution("uniform").spec()));
  auto d = parse_distribution("piecewise_lb:eps=0.25");
  EXPECT_EQ(std::get<PiecewiseLinearLB>(d.spec()).eps, 0.25);
  d = parse_distribution("four_atom:eps=-0.1");
  EXPECT_EQ(std::get<FourAtom>(d.spec()).eps, -0.1);
  d = parse_distribution("interval_uniform:k=3,n=2");
  EXPECT_EQ(std::get<IntervalUniform>(d.spec()).k, 3);
  EXPECT_EQ(std::get<IntervalUniform>(d.spec()).n, 2);
  d = parse_distribution("interval_uniform:n=6");
  EXPECT_EQ(std::get<IntervalUniform>(d.spec()).k, 1);
  EXPECT_EQ(std::get<IntervalUniform>(d.spec()).n, 6);
}

TEST(MiniLanguage, Errors) {
  EXPECT_THROW(parse_distribution("gaussian"), ConfigError);
  EXPECT_THROW(parse_distribution("four_atom:eps=0.5"), ConfigError);
  EXPECT_THROW(parse_distribution("four_atom:e=0.1"), ConfigError);
  EXPECT_THROW(parse_distribution("four_atom:eps=abc"), ConfigError);
  EXPECT_THROW(parse_distribution("interval_uniform:k=3"), ConfigError);
  EXPECT_THROW(parse_distribution("uniform:eps=0.1"), ConfigError);
  EXPECT_THROW(parse_distribution("piecewise_lb:eps"), ConfigError);
}

TEST(DistributionJson, RoundTrip) {
  Mixture m;
  m.atoms = {{0.2, 0.3}};
  m.continuous = {{0.0, 0.0}, {1.0, 1.0}};
  m.weight = 0.7;
  for (const Distribution& d :
       {Distribution::uniform(), Distribution::piecewise_lb(0.1),
        Distribution::four_atom(0.2), Distribution::interval_uniform(7, 4),
        Distribution(m)}) {
    const auto back = distribution_from_json(distribution_to_json(d));
    EXPECT_EQ(label(back), label(d));
    for (int i = 0; i <= 50; ++i) {
      EXPECT_EQ(cdf(back, i / 50.0), cdf(d, i / 50.0));
    }
  }
  EXPECT_THROW(distribution_from_json("{\"family\": \"four_atom\", \"eps\": "
                                      "\"x\"}"),
               ConfigError);
  EXPECT_THROW(distribution_from_json("{"), ConfigError);
  EXPECT_EQ(label(parse_distribution("{\"family\":\"piecewise_lb\",\"eps\":0.5}")),
            "piecewise_lb:eps=0.5");
}

TEST(BrokerJson, RoundTrip) {
  BrokerSpec s;
  s.algo = "mbs";
  s.delta = 0.01;
  s.horizon = 500;
  const auto back = broker_from_json(broker_to_json(s));
  EXPECT_EQ(back.algo, "mbs");
  EXPECT_EQ(back.delta, 0.01);
  EXPECT_EQ(back.horizon, 500);
  const auto g = broker_from_json(
      R"({"algo": "grid_ucb", "params": {"K": 12}})");
  EXPECT_EQ(g.arms, 12);
  const auto f = broker_from_json(
      R"({"algo": "fepsi", "params": {"variant": "exact"}})");
  EXPECT_EQ(f.variant, PsiVariant::kExact);
  EXPECT_THROW(broker_from_json(R"({"algo": "mbs", "params": {"eta": 1}})"),
               ConfigError);
  EXPECT_THROW(broker_from_json(R"({"algo": "ucb"})"), ConfigError);
  EXPECT_THROW(broker_from_json(R"({"params": {}})"), ConfigError);
}

TEST(Experiment, ParsesAndValidates) {
  const auto e = parse_experiment(R"({
    "distribution": {"family": "interval_uniform", "k": 1, "n": 6},
    "broker": {"algo": "mbs"},
    "horizons": [100, 400],
    "replications": 5,
    "seed": 3,
    "feedback": "two_bit",
    "regret_mode": "realized",
    "output": "out.csv"})");
  EXPECT_EQ(e.horizons, (std::vector<std::int64_t>{100, 400}));
  EXPECT_EQ(e.replications, 5);
  EXPECT_EQ(e.seed, 3u);
  EXPECT_EQ(e.feedback, FeedbackKind::kTwoBit);
  EXPECT_EQ(e.regret_mode, RegretMode::kRealized);
  EXPECT_EQ(e.output, "out.csv");

  const std::string base =
      R"("distribution": "uniform", "broker": {"algo": "fem"})";
  EXPECT_THROW(parse_experiment("{" + base + R"(, "horizons": []})"),
               ConfigError);
  EXPECT_THROW(parse_experiment("{" + base + R"(, "horizons": [10, 10]})"),
               ConfigError);
  EXPECT_THROW(parse_experiment("{" + base + R"(, "horizons": [20, 10]})"),
               ConfigError);
  EXPECT_THROW(parse_experiment("{" + base +
                                R"(, "horizons": [10], "replications": 0})"),
               ConfigError);
  EXPECT_THROW(parse_experiment(R"({"broker": {"algo": "fem"}, "horizons": [1]})"),
               ConfigError);
  EXPECT_THROW(load_experiment("/nonexistent/file.json"), ConfigError);
}

TEST(Format, SeventeenDigitsRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 2.0 / 3.0, 1e-300, 123456.789, 0.0}) {
    EXPECT_EQ(std::strtod(format_double(x).c_str(), nullptr), x);
  }
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(Csv, SweepColumnsAndQuoting) {
  std::vector<SweepRow> rows = {
      {"mbs", "interval_uniform:k=1,n=6", 100, 5, 1.5, 0.25, 9.0, true},
      {"grid_ucb", "uniform", 100, 5, 2.0, 0.5, std::nullopt, std::nullopt}};
  std::ostringstream out;
  write_sweep_csv(out, rows);
  EXPECT_EQ(out.str(),
            "algo,dist,T,reps,mean_regret,stderr,bound,pass\n"
            "mbs,\"interval_uniform:k=1,n=6\",100,5,1.5,0.25,9,true\n"
            "grid_ucb,uniform,100,5,2,0.5,,\n");
}

TEST(Csv, RunColumns) {
  RunRecord r;
  r.prices = {0.5, 0.25};
  r.rewards = {1, 0};
  r.cum_pseudo = {0.0, 0.125};
  std::vector<RunRecord> runs = {r};
  std::ostringstream out;
  write_run_csv(out, runs);
  EXPECT_EQ(out.str(),
            "rep,t,price,reward,cum_pseudo_regret\n"
            "0,1,0.5,1,0\n"
            "0,2,0.25,0,0.125\n");
}

TEST(SweepRows, MbsBoundUsesTheFamilyConstant) {
  BrokerSpec mbs;
  mbs.algo = "mbs";
  const auto d = parse_distribution("interval_uniform:n=6");
  RegretCurve c;
  c.points = {{100, 10.0, 1.0, 4}, {400, 20.0, 1.0, 4}};
  const auto rows = sweep_rows(mbs, d, c);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(*rows[0].bound, regret_bound(BoundKind::kMbs, 100, 64.0));
  EXPECT_EQ(*rows[1].bound, regret_bound(BoundKind::kMbs, 400, 64.0));
  EXPECT_TRUE(*rows[0].pass);
  BrokerSpec grid;
  grid.algo = "grid_ucb";
  EXPECT_FALSE(sweep_rows(grid, d, c)[0].bound.has_value());
}

TEST(Summary, MirrorsRows) {
  std::vector<SweepRow> rows = {
      {"fem", "uniform", 100, 5, 1.5, 0.25, 9.0, true}};
  std::vector<GrowthFit> fits = {{GrowthModel::kLog, 1.0, 2.0, 0.99}};
  const std::string js = summary_json(rows, fits);
  EXPECT_NE(js.find("\"mean_regret\": 1.5"), std::string::npos);
  EXPECT_NE(js.find("\"model\": \"log\""), std::string::npos);
  EXPECT_NE(js.find("\"pass\": true"), std::string::npos);
}

}  // namespace
}  // namespace brokerage
