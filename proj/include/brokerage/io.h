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

#ifndef BROKERAGE_IO_H_
#define BROKERAGE_IO_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "brokerage/brokers.h"
#include "brokerage/distributions.h"
#include "brokerage/evaluation.h"

namespace brokerage {

// Every parser here throws ConfigError on malformed input.

// Mini-language `family[:key=val,...]`:
//   uniform
//   piecewise_lb:eps=0.25
//   four_atom:eps=0.1
//   interval_uniform:k=3,n=2   (k defaults to 1)
// Text starting with '{' is read as a JSON distribution object.
Distribution parse_distribution(std::string_view text);

// {"family": "uniform" | "piecewise_lb" | "four_atom" | "interval_uniform" |
//  "mixture", "eps": ..., "k": ..., "n": ...,
//  "atoms": [[x, mass], ...], "knots": [[x, cdf], ...], "weight": ...}
std::string distribution_to_json(const Distribution& d);
Distribution distribution_from_json(std::string_view json);

// {"algo": ..., "params": {"delta", "horizon", "p", "K", "variant"}}
std::string broker_to_json(const BrokerSpec& spec);
BrokerSpec broker_from_json(std::string_view json);

struct ExperimentFile {
  Distribution distribution;
  BrokerSpec broker;
  std::vector<std::int64_t> horizons;
  std::int64_t replications = 1;
  std::uint64_t seed = 0;
  std::optional<FeedbackKind> feedback;
  RegretMode regret_mode = RegretMode::kPseudo;
  std::string output;
};

ExperimentFile parse_experiment(std::string_view json);
ExperimentFile load_experiment(const std::string& path);

// %.17g
std::string format_double(double x);

struct SweepRow {
  std::string algo;
  std::string dist;
  std::int64_t horizon = 0;
  std::int64_t reps = 0;
  double mean_regret = 0.0;
  double std_error = 0.0;
  std::optional<double> bound;
  std::optional<bool> pass;
};

// Rows for a curve, with bound columns filled when a bound applies.
std::vector<SweepRow> sweep_rows(const BrokerSpec& broker,
                                 const Distribution& d,
                                 const RegretCurve& curve);

// algo,dist,T,reps,mean_regret,stderr,bound,pass
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
// rep,t,price,reward,cum_pseudo_regret
void write_run_csv(std::ostream& out, std::span<const RunRecord> runs);

std::string summary_json(std::span<const SweepRow> rows,
                         std::span<const GrowthFit> fits);

}  // namespace brokerage

#endif  // BROKERAGE_IO_H_
