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

#include "brokerage/evaluation.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>

#include "brokerage/errors.h"

namespace brokerage {
namespace {

// Decorrelates a randomized broker's generator from the valuation stream.
constexpr std::uint64_t kBrokerSeedSalt = 0x9e3779b97f4a7c15ULL;

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

int worker_count(const RunConfig& cfg) {
  int threads = cfg.threads;
  if (threads <= 0) {
    if (const char* env = std::getenv("THREADS")) threads = std::atoi(env);
  }
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
  }
  threads = std::max(threads, 1);
  return static_cast<int>(
      std::min<std::int64_t>(threads, std::max<std::int64_t>(1, cfg.replications)));
}

void validate_horizons(std::span<const std::int64_t> horizons) {
  if (horizons.empty()) throw ConfigError("horizon list is empty");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] < 1) throw ConfigError("horizons must be at least 1");
    if (i > 0 && horizons[i] <= horizons[i - 1]) {
      throw ConfigError("horizons must be strictly increasing");
    }
  }
}

}  // namespace

std::string_view to_string(RegretMode mode) {
  return mode == RegretMode::kPseudo ? "pseudo" : "realized";
}

RegretMode parse_regret_mode(std::string_view name) {
  if (name == "pseudo") return RegretMode::kPseudo;
  if (name == "realized") return RegretMode::kRealized;
  throw ConfigError("unknown regret mode '" + std::string(name) +
                    "' (expected pseudo or realized)");
}

FeedbackKind effective_feedback(const RunConfig& cfg) {
  if (cfg.feedback) return *cfg.feedback;
  return required_feedback(cfg.broker.algo).value_or(FeedbackKind::kFull);
}

void validate(const RunConfig& cfg) {
  if (cfg.horizon < 1) throw ConfigError("horizon must be at least 1");
  if (cfg.replications < 1) {
    throw ConfigError("replications must be at least 1");
  }
  const auto needed = required_feedback(cfg.broker.algo);
  if (needed && cfg.feedback && *needed != *cfg.feedback) {
    throw ConfigError(cfg.broker.algo + " requires " +
                      std::string(to_string(*needed)) + " feedback, got " +
                      std::string(to_string(*cfg.feedback)));
  }
}

double RunRecord::regret_at(std::int64_t t, RegretMode mode) const {
  if (t == 0) return 0.0;
  const auto& cum = mode == RegretMode::kPseudo ? cum_pseudo : cum_realized;
  if (t < 0 || static_cast<std::size_t>(t) > cum.size()) {
    throw std::out_of_range("round outside the stored trajectory");
  }
  return cum[static_cast<std::size_t>(t - 1)];
}

RunRecord run_once(const RunConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  const Distribution& d = cfg.distribution;
  const FeedbackKind kind = effective_feedback(cfg);
  const BestPrice best = best_price(d);
  const Price best_p(best.price);

  auto broker = make_broker(cfg.broker, cfg.horizon);
  broker->reset(seed ^ kBrokerSeedSalt);
  Rng rng(seed);

  RunRecord rec;
  rec.seed = seed;
  rec.horizon = cfg.horizon;
  if (cfg.keep_trajectory) {
    const auto n = static_cast<std::size_t>(cfg.horizon);
    rec.prices.reserve(n);
    rec.rewards.reserve(n);
    rec.cum_pseudo.reserve(n);
    rec.cum_realized.reserve(n);
  }

  double pseudo = 0.0;
  double realized = 0.0;
  double min_increment = 0.0;
  for (Round t = 1; t <= cfg.horizon; ++t) {
    // The pair is drawn before the broker moves; the broker only ever sees
    // feedback from earlier rounds.
    const ValuationPair v{sample(d, rng), sample(d, rng)};
    const Price p = broker->propose(t);
    const bool reward = g(p, v);
    broker->observe(t, p, make_feedback(kind, p, v));

    const double increment = best.value - psi_true(d, p.value());
    min_increment = t == 1 ? increment : std::min(min_increment, increment);
    pseudo += increment;
    realized += static_cast<double>(g(best_p, v)) - static_cast<double>(reward);
    if (cfg.keep_trajectory) {
      rec.prices.push_back(p.value());
      rec.rewards.push_back(reward ? 1 : 0);
      rec.cum_pseudo.push_back(pseudo);
      rec.cum_realized.push_back(realized);
    }
  }
  rec.final_pseudo = pseudo;
  rec.final_realized = realized;
  rec.min_pseudo_increment = min_increment;
  if (const auto* mbs = dynamic_cast<const MbsBroker*>(broker.get())) {
    rec.mbs_epochs = mbs->state().completed;
  }
  return rec;
}

MeanStderr mean_stderr(std::span<const double> values) {
  MeanStderr out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = pairwise_sum(values) / n;
  if (values.size() == 1) return out;
  std::vector<double> sq(values.size());
  std::transform(values.begin(), values.end(), sq.begin(), [&](double x) {
    return (x - out.mean) * (x - out.mean);
  });
  const double variance = pairwise_sum(sq) / (n - 1.0);
  out.std_error = std::sqrt(variance / n);
  return out;
}

Replicated run_replicated(const RunConfig& cfg) {
  validate(cfg);
  const auto reps = static_cast<std::size_t>(cfg.replications);
  Replicated out;
  out.runs.resize(reps);

  const int workers = worker_count(cfg);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < reps; i = next++) {
      try {
        out.runs[i] = run_once(cfg, cfg.base_seed + i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<double> finals(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    finals[i] = out.runs[i].final_regret(cfg.regret_mode);
  }
  const MeanStderr ms = mean_stderr(finals);
  out.mean = ms.mean;
  out.std_error = ms.std_error;
  return out;
}

RegretCurve curve_from_prefixes(std::span<const RunRecord> runs,
                                std::span<const std::int64_t> horizons,
                                RegretMode mode) {
  validate_horizons(horizons);
  RegretCurve curve;
  std::vector<double> values(runs.size());
  for (std::int64_t h : horizons) {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      values[i] = runs[i].regret_at(h, mode);
    }
    const MeanStderr ms = mean_stderr(values);
    curve.points.push_back(
        {h, ms.mean, ms.std_error, static_cast<std::int64_t>(runs.size())});
  }
  return curve;
}

RegretCurve regret_curve(RunConfig cfg,
                         std::span<const std::int64_t> horizons) {
  validate_horizons(horizons);
  if (horizon_independent(cfg.broker)) {
    cfg.horizon = horizons.back();
    cfg.keep_trajectory = true;
    const Replicated rep = run_replicated(cfg);
    return curve_from_prefixes(rep.runs, horizons, cfg.regret_mode);
  }
  RegretCurve curve;
  cfg.keep_trajectory = false;
  for (std::int64_t h : horizons) {
    cfg.horizon = h;
    const Replicated rep = run_replicated(cfg);
    curve.points.push_back({h, rep.mean, rep.std_error, cfg.replications});
  }
  return curve;
}

// --- Bounds ----------------------------------------------------------------

std::string_view to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::kFem:
      return "fem";
    case BoundKind::kMbs:
      return "mbs";
    case BoundKind::kFePsi:
      return "fepsi";
  }
  return "unknown";
}

double regret_bound(BoundKind kind, std::int64_t horizon,
                    std::optional<double> lipschitz) {
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  const double t = static_cast<double>(horizon);
  switch (kind) {
    case BoundKind::kFem:
      if (horizon == 1) return 0.5;
      return 0.5 + std::numbers::pi / 2.0 * (1.0 + std::log(t - 1.0));
    case BoundKind::kMbs:
      if (!lipschitz) {
        throw ConfigError("the MBS bound needs the Lipschitz constant M");
      }
      if (!(*lipschitz >= 1.0)) {
        throw ConfigError("the MBS bound needs M >= 1");
      }
      return 2.0 + 6.0 * std::log2(*lipschitz * t) * std::log(t);
    case BoundKind::kFePsi:
      return 1.0 + 8.0 * std::sqrt(std::numbers::pi) * std::sqrt(t - 1.0);
  }
  throw ConfigError("unknown bound");
}

std::vector<BoundCheck> check_bound(const RegretCurve& curve, BoundKind kind,
                                    std::optional<double> lipschitz) {
  std::vector<BoundCheck> out;
  out.reserve(curve.points.size());
  for (const CurvePoint& pt : curve.points) {
    BoundCheck c;
    c.horizon = pt.horizon;
    c.bound = regret_bound(kind, pt.horizon, lipschitz);
    c.upper = pt.mean + 3.0 * pt.std_error;
    c.pass = c.upper <= c.bound;
    out.push_back(c);
  }
  return out;
}

std::optional<BoundKind> applicable_bound(const BrokerSpec& spec,
                                          const Distribution& d) {
  if (spec.algo == "fem") {
    if (has_atoms(d)) return std::nullopt;
    return BoundKind::kFem;
  }
  if (spec.algo == "mbs") {
    // The guarantee is stated for the default tuning only.
    if (spec.delta || spec.horizon) return std::nullopt;
    if (!lipschitz_constant(d)) return std::nullopt;
    return BoundKind::kMbs;
  }
  if (spec.algo == "fepsi") return BoundKind::kFePsi;
  return std::nullopt;
}

// --- Growth fits -----------------------------------------------------------

std::string_view to_string(GrowthModel model) {
  return model == GrowthModel::kLog ? "log" : "sqrt";
}

GrowthFit fit_growth(std::span<const double> horizons,
                     std::span<const double> values, GrowthModel model) {
  if (horizons.size() != values.size()) {
    throw FitError("horizons and values differ in length");
  }
  if (horizons.size() < 4) throw FitError("growth fits need at least 4 points");
  if (std::all_of(horizons.begin(), horizons.end(),
                  [&](double h) { return h == horizons.front(); })) {
    throw FitError("degenerate design: every horizon is equal");
  }
  for (double h : horizons) {
    if (!(h > 0.0)) throw FitError("horizons must be positive");
  }

  const std::size_t n = horizons.size();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = model == GrowthModel::kLog ? std::log(horizons[i])
                                      : std::sqrt(horizons[i]);
  }
  const double y_mean = pairwise_sum(values) / static_cast<double>(n);

  GrowthFit fit;
  fit.model = model;
  if (model == GrowthModel::kLog) {
    const double x_mean = pairwise_sum(x) / static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sxx += (x[i] - x_mean) * (x[i] - x_mean);
      sxy += (x[i] - x_mean) * (values[i] - y_mean);
    }
    fit.b = sxy / sxx;
    fit.a = y_mean - fit.b * x_mean;
  } else {
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sxx += x[i] * x[i];
      sxy += x[i] * values[i];
    }
    fit.a = 0.0;
    fit.b = sxy / sxx;
  }

  double sse = 0.0;
  double sst = 0.0;
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = values[i] - (fit.a + fit.b * x[i]);
    sse += r * r;
    sst += (values[i] - y_mean) * (values[i] - y_mean);
    scale += values[i] * values[i];
  }
  const double tiny = 1e-20 * scale;
  if (sst <= tiny) {
    fit.r2 = sse <= tiny ? 1.0 : 0.0;
  } else {
    fit.r2 = 1.0 - sse / sst;
  }
  return fit;
}

GrowthFit fit_growth(const RegretCurve& curve, GrowthModel model) {
  std::vector<double> h;
  std::vector<double> v;
  for (const CurvePoint& p : curve.points) {
    h.push_back(static_cast<double>(p.horizon));
    v.push_back(p.mean);
  }
  return fit_growth(h, v, model);
}

// --- Empirical cdf and Psi closeness ---------------------------------------

double ks_distance(const Distribution& d, std::span<const double> sorted) {
  const double n = static_cast<double>(sorted.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double x = sorted[i];
    sup = std::max(sup, std::abs(static_cast<double>(j) / n - cdf(d, x)));
    sup = std::max(sup, std::abs(static_cast<double>(i) / n - cdf_left(d, x)));
    i = j;
  }
  return sup;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double sup = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / na -
                                 static_cast<double>(j) / nb));
  }
  return sup;
}

PsiEnvelope psi_envelope(const Distribution& d, std::vector<double> sample) {
  if (sample.empty() || sample.size() % 2 != 0) {
    throw PreconditionError("the sample must hold 2t >= 2 values");
  }
  std::sort(sample.begin(), sample.end());
  FePsiState empirical;
  for (double v : sample) empirical.insert(v);
  const double t = static_cast<double>(sample.size()) / 2.0;

  PsiEnvelope env;
  auto check = [&](double p) {
    const double dev = std::abs(empirical.objective(p, PsiVariant::kPlugin) -
                                psi_true(d, p));
    env.sup_deviation = std::max(env.sup_deviation, dev);
  };
  check(0.0);
  check(1.0);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (i > 0 && sample[i] == sample[i - 1]) continue;
    check(sample[i]);
    if (i + 1 < sample.size() && sample[i + 1] != sample[i]) {
      check(0.5 * (sample[i] + sample[i + 1]));
    }
  }
  env.ks = ks_distance(d, sample);
  env.bound = 2.0 * env.ks + 1.0 / (2.0 * t);
  env.within = env.sup_deviation <= env.bound;
  return env;
}

DkwSummary dkw_psi_closeness(const Distribution& d, std::int64_t t,
                             std::int64_t trials, std::uint64_t seed) {
  if (has_atoms(d)) {
    throw PreconditionError("the envelope check needs an atomless law");
  }
  if (t < 1 || trials < 1) {
    throw PreconditionError("t and trials must be at least 1");
  }
  Rng rng(seed);
  DkwSummary out;
  std::vector<double> sample(static_cast<std::size_t>(2 * t));
  for (std::int64_t k = 0; k < trials; ++k) {
    for (double& v : sample) v = brokerage::sample(d, rng);
    const PsiEnvelope env = psi_envelope(d, sample);
    out.max_sup_deviation = std::max(out.max_sup_deviation, env.sup_deviation);
    out.max_ks = std::max(out.max_ks, env.ks);
    ++out.trials;
    if (env.within) ++out.within;
  }
  return out;
}

}  // namespace brokerage
