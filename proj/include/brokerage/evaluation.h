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

#ifndef BROKERAGE_EVALUATION_H_
#define BROKERAGE_EVALUATION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "brokerage/brokers.h"
#include "brokerage/distributions.h"
#include "brokerage/protocol.h"

namespace brokerage {

enum class RegretMode {
  kPseudo,    // sum of psi(p*) - psi(P_t): exact conditional expectation
  kRealized,  // sum of g(p*, V) - g(P_t, V) on the drawn valuations
};

std::string_view to_string(RegretMode mode);
RegretMode parse_regret_mode(std::string_view name);

struct RunConfig {
  Distribution distribution;
  BrokerSpec broker;
  std::int64_t horizon = 1;
  std::int64_t replications = 1;
  std::uint64_t base_seed = 0;
  // Defaults to the broker's required kind (full for brokers that take both).
  std::optional<FeedbackKind> feedback;
  RegretMode regret_mode = RegretMode::kPseudo;
  // Keep per-round prices, rewards and cumulative regret in each record.
  bool keep_trajectory = true;
  // Worker threads for replications; 0 reads THREADS, falling back to the
  // hardware concurrency.
  int threads = 0;
};

// Throws ConfigError on invalid values or a feedback kind the broker cannot
// consume.
void validate(const RunConfig& cfg);
FeedbackKind effective_feedback(const RunConfig& cfg);

struct RunRecord {
  std::uint64_t seed = 0;
  std::int64_t horizon = 0;
  double final_pseudo = 0.0;
  double final_realized = 0.0;
  double min_pseudo_increment = 0.0;
  // Per round, present when keep_trajectory is set.
  std::vector<double> prices;
  std::vector<std::uint8_t> rewards;
  std::vector<double> cum_pseudo;
  std::vector<double> cum_realized;
  // Completed epochs when the broker is MBS.
  std::vector<MbsEpoch> mbs_epochs;

  double final_regret(RegretMode mode) const {
    return mode == RegretMode::kPseudo ? final_pseudo : final_realized;
  }
  // Cumulative regret after the first `t` rounds; needs the trajectory.
  double regret_at(std::int64_t t, RegretMode mode) const;
};

// Simulates cfg.horizon rounds with the valuation stream seeded by `seed`.
RunRecord run_once(const RunConfig& cfg, std::uint64_t seed);

struct Replicated {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(R); 0 when R = 1
  std::vector<RunRecord> runs;
};

// Replication i uses seed base_seed + i.
Replicated run_replicated(const RunConfig& cfg);

struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;
};
MeanStderr mean_stderr(std::span<const double> values);

struct CurvePoint {
  std::int64_t horizon = 0;
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t replications = 0;
};

struct RegretCurve {
  std::vector<CurvePoint> points;  // strictly increasing horizons
};

// Replicated regret at every horizon. Brokers that do not depend on the run
// length are simulated once at the largest horizon and read at prefixes,
// which yields the same numbers as separate runs with the same seeds.
RegretCurve regret_curve(RunConfig cfg, std::span<const std::int64_t> horizons);

// Reads a curve off stored trajectories.
RegretCurve curve_from_prefixes(std::span<const RunRecord> runs,
                                std::span<const std::int64_t> horizons,
                                RegretMode mode);

// --- Bounds ----------------------------------------------------------------

enum class BoundKind { kFem, kMbs, kFePsi };

std::string_view to_string(BoundKind kind);
// Upper bound on the expected regret at horizon T. The MBS bound needs the
// Lipschitz constant M >= 1 of the cdf; ConfigError otherwise.
double regret_bound(BoundKind kind, std::int64_t horizon,
                    std::optional<double> lipschitz = std::nullopt);

struct BoundCheck {
  std::int64_t horizon = 0;
  double bound = 0.0;
  double upper = 0.0;  // mean + 3 stderr
  bool pass = false;
};

std::vector<BoundCheck> check_bound(const RegretCurve& curve, BoundKind kind,
                                    std::optional<double> lipschitz =
                                        std::nullopt);

// Which bound, if any, applies to this algorithm on this distribution.
std::optional<BoundKind> applicable_bound(const BrokerSpec& spec,
                                          const Distribution& d);

// --- Growth fits -----------------------------------------------------------

enum class GrowthModel {
  kLog,   // a + b ln T
  kSqrt,  // b sqrt(T)
};

std::string_view to_string(GrowthModel model);

struct GrowthFit {
  GrowthModel model = GrowthModel::kLog;
  double a = 0.0;  // intercept (0 for kSqrt)
  double b = 0.0;
  double r2 = 0.0;  // 1 - SSE / SST about the mean of y; 1 when SST = SSE = 0
};

// Least squares over at least four points; FitError otherwise or when every
// horizon is equal.
GrowthFit fit_growth(std::span<const double> horizons,
                     std::span<const double> values, GrowthModel model);
GrowthFit fit_growth(const RegretCurve& curve, GrowthModel model);

// --- Empirical cdf and Psi closeness ---------------------------------------

// sup_x |F_n(x) - F(x)| for a sorted sample.
double ks_distance(const Distribution& d, std::span<const double> sorted);
// Two-sample sup distance between empirical cdfs of two sorted samples.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

struct PsiEnvelope {
  double sup_deviation = 0.0;  // max |Psi_hat - psi| over the candidate grid
  double ks = 0.0;             // sup |F_hat - F|
  double bound = 0.0;          // 2 ks + 1/(2t), t = half the sample size
  bool within = false;
};

// Compares the empirical objective built from `sample` (2t values) with the
// exact trade probability at every sample point, every midpoint of
// consecutive distinct values, and at 0 and 1.
PsiEnvelope psi_envelope(const Distribution& d, std::vector<double> sample);

struct DkwSummary {
  double max_sup_deviation = 0.0;
  double max_ks = 0.0;
  std::int64_t trials = 0;
  std::int64_t within = 0;  // trials satisfying the envelope

  bool all_within() const { return within == trials; }
};

// Repeats psi_envelope on fresh samples of 2t draws. The law must be
// atomless; PreconditionError otherwise.
DkwSummary dkw_psi_closeness(const Distribution& d, std::int64_t t,
                             std::int64_t trials, std::uint64_t seed);

}  // namespace brokerage

#endif  // BROKERAGE_EVALUATION_H_
