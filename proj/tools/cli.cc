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

#include "cli.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "brokerage/brokers.h"
#include "brokerage/distributions.h"
#include "brokerage/errors.h"
#include "brokerage/evaluation.h"
#include "brokerage/io.h"
#include "brokerage/rng.h"
#include "brokerage/surrogate_game.h"

namespace brokerage::cli {
namespace {

struct RunArgs {
  std::string algo;
  std::string dist = "uniform";
  std::int64_t horizon = 0;
  std::int64_t reps = 1;
  std::uint64_t seed = 0;
  std::string out;
  std::string trajectory;
  std::optional<double> delta;
  std::optional<std::int64_t> mbs_n;
  std::optional<std::int64_t> k;
  std::optional<double> p;
  std::string variant = "plugin";
  std::string regret_mode = "pseudo";
  std::string feedback;
};

struct SweepArgs {
  std::string file;
  std::string out;
};

struct ValidateArgs {
  std::string check;
  std::int64_t t = 5000;
  std::int64_t trials = 100;
  std::uint64_t seed = 1;
};

struct GameArgs {
  int levels = 0;
  std::string strategy = "bisect";
  std::int64_t seeds = 1;
  std::uint64_t seed = 0;
  std::int64_t horizon = 1024;
};

std::string json_path(const std::string& csv) {
  const auto slash = csv.find_last_of('/');
  const auto dot = csv.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
    return csv.substr(0, dot) + ".json";
  }
  return csv + ".json";
}

void emit(const std::string& out, const std::vector<SweepRow>& rows,
          const std::vector<GrowthFit>& fits) {
  if (out.empty()) {
    write_sweep_csv(std::cout, rows);
    return;
  }
  std::ofstream csv(out);
  if (!csv) throw std::runtime_error("cannot write '" + out + "'");
  write_sweep_csv(csv, rows);
  std::ofstream js(json_path(out));
  if (!js) throw std::runtime_error("cannot write '" + json_path(out) + "'");
  js << summary_json(rows, fits);
}

int cmd_run(const RunArgs& a) {
  RunConfig cfg;
  cfg.distribution = parse_distribution(a.dist);
  cfg.broker.algo = a.algo;
  required_feedback(a.algo);
  cfg.broker.delta = a.delta;
  cfg.broker.horizon = a.mbs_n;
  cfg.broker.arms = a.k;
  cfg.broker.p = a.p;
  cfg.broker.variant = parse_psi_variant(a.variant);
  cfg.horizon = a.horizon;
  cfg.replications = a.reps;
  cfg.base_seed = a.seed;
  if (!a.feedback.empty()) cfg.feedback = parse_feedback_kind(a.feedback);
  cfg.regret_mode = parse_regret_mode(a.regret_mode);
  cfg.keep_trajectory = !a.trajectory.empty();
  validate(cfg);
  make_broker(cfg.broker, cfg.horizon);

  const Replicated res = run_replicated(cfg);
  RegretCurve curve;
  curve.points.push_back({cfg.horizon, res.mean, res.std_error, cfg.replications});
  emit(a.out, sweep_rows(cfg.broker, cfg.distribution, curve), {});
  if (!a.trajectory.empty()) {
    std::ofstream traj(a.trajectory);
    if (!traj) throw std::runtime_error("cannot write '" + a.trajectory + "'");
    write_run_csv(traj, res.runs);
  }
  return 0;
}

int cmd_sweep(const SweepArgs& a) {
  const ExperimentFile e = load_experiment(a.file);
  RunConfig cfg;
  cfg.distribution = e.distribution;
  cfg.broker = e.broker;
  cfg.replications = e.replications;
  cfg.base_seed = e.seed;
  cfg.feedback = e.feedback;
  cfg.regret_mode = e.regret_mode;
  cfg.keep_trajectory = false;
  cfg.horizon = e.horizons.back();
  validate(cfg);
  make_broker(cfg.broker, cfg.horizon);

  const RegretCurve curve = regret_curve(cfg, e.horizons);
  std::vector<GrowthFit> fits;
  if (curve.points.size() >= 4) {
    fits.push_back(fit_growth(curve, GrowthModel::kLog));
    fits.push_back(fit_growth(curve, GrowthModel::kSqrt));
    for (const auto& f : fits) {
      std::cerr << "fit " << to_string(f.model) << " a=" << format_double(f.a)
                << " b=" << format_double(f.b) << " r2=" << format_double(f.r2)
                << "\n";
    }
  } else {
    std::cerr << "fit skipped: needs at least 4 horizons\n";
  }
  emit(a.out.empty() ? e.output : a.out,
       sweep_rows(cfg.broker, cfg.distribution, curve), fits);
  return 0;
}

bool report(const std::string& name, double deviation, double tol) {
  const bool ok = deviation <= tol;
  std::cout << name << " max_dev=" << format_double(deviation)
            << " tol=" << tol << (ok ? " ok" : " FAIL") << "\n";
  return ok;
}

bool check_median() {
  const std::vector<Distribution> laws = {
      Distribution::uniform(),           Distribution::piecewise_lb(0.0),
      Distribution::piecewise_lb(0.25),  Distribution::piecewise_lb(0.5),
      Distribution::piecewise_lb(1.0),   Distribution::interval_uniform(3, 2)};
  bool ok = true;
  for (const auto& d : laws) {
    double dev_a = 0.0;
    double dev_b = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double p = i / 999.0;
      const double f = cdf(d, p);
      const double psi = psi_true(d, p);
      dev_a = std::max(dev_a, std::abs(psi - 2.0 * f * (1.0 - f)));
      dev_b = std::max(dev_b,
                       std::abs(0.5 - psi - 2.0 * (0.5 - f) * (0.5 - f)));
    }
    ok &= report(label(d) + " product", dev_a, 1e-12);
    ok &= report(label(d) + " gap", dev_b, 1e-12);
  }
  return ok;
}

bool check_psi() {
  bool ok = true;
  for (double eps : {-0.25, -0.1, 0.0, 0.1, 0.25}) {
    const auto d = Distribution::four_atom(eps);
    const double lo = psi_true(d, 1.0 / 3.0);
    const double hi = psi_true(d, 2.0 / 3.0);
    const double dev =
        std::max(std::abs(lo - (11.0 / 16 - eps / 8 - eps * eps / 8)),
                 std::abs(hi - (11.0 / 16 + eps / 8 - eps * eps / 8)));
    ok &= report(label(d) + " closed form", dev, 1e-12);
    ok &= report(label(d) + " gap", std::abs((hi - lo) - eps / 4), 1e-12);
  }
  return ok;
}

bool check_dkw(const ValidateArgs& a) {
  bool ok = true;
  std::uint64_t seed = a.seed;
  for (const auto& d :
       {Distribution::uniform(), Distribution::piecewise_lb(0.5)}) {
    const DkwSummary s = dkw_psi_closeness(d, a.t, a.trials, seed++);
    std::cout << label(d) << " trials=" << s.trials << " within=" << s.within
              << " max_sup_dev=" << format_double(s.max_sup_deviation)
              << " max_ks=" << format_double(s.max_ks)
              << (s.all_within() ? " ok" : " FAIL") << "\n";
    ok &= s.all_within();
  }
  return ok;
}

std::vector<double> draw(int count, Rng& rng, auto&& sampler) {
  std::vector<double> xs(count);
  for (auto& x : xs) x = sampler(rng);
  std::sort(xs.begin(), xs.end());
  return xs;
}

bool check_sampler(const ValidateArgs& a) {
  constexpr int kDraws = 100000;
  bool ok = true;
  Rng rng(a.seed);
  const std::vector<Distribution> laws = {
      Distribution::uniform(), Distribution::piecewise_lb(0.3),
      Distribution::four_atom(0.1), Distribution::interval_uniform(3, 3)};
  for (const auto& d : laws) {
    const auto xs = draw(kDraws, rng, [&](Rng& r) { return sample(d, r); });
    ok &= report(label(d) + " ks", ks_distance(d, xs), 0.01);
  }
  for (double eps : {0.0, 0.3, 1.0}) {
    const auto d = Distribution::piecewise_lb(eps);
    const auto inv = draw(kDraws, rng, [&](Rng& r) { return sample(d, r); });
    const auto rep = draw(kDraws, rng, [&](Rng& r) {
      return sample_representation_lb(eps, r);
    });
    ok &= report(label(d) + " two-sample ks", ks_two_sample(inv, rep), 0.015);
  }
  return ok;
}

int cmd_validate(const ValidateArgs& a) {
  bool ok = false;
  if (a.check == "median") {
    ok = check_median();
  } else if (a.check == "psi") {
    ok = check_psi();
  } else if (a.check == "dkw") {
    ok = check_dkw(a);
  } else if (a.check == "sampler") {
    ok = check_sampler(a);
  } else {
    throw ConfigError("unknown check '" + a.check +
                      "' (expected median, psi, dkw or sampler)");
  }
  return ok ? 0 : 1;
}

int cmd_game(const GameArgs& a) {
  if (a.levels < 2 || a.levels > 62) {
    throw ConfigError("--levels must lie in [2, 62]");
  }
  if (a.seeds < 1) throw ConfigError("--seeds must be at least 1");
  if (a.horizon < a.levels - 1) {
    throw ConfigError("--horizon must be at least levels - 1");
  }
  const double floor_loss = 0.5 * (a.levels - 1);
  bool ok = true;
  for (std::int64_t i = 0; i < a.seeds; ++i) {
    const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(i);
    auto strategy = make_strategy(a.strategy, a.levels, seed, a.horizon);
    const GameResult r = play_game(*strategy, a.levels, a.horizon);
    const bool pass = r.loss >= floor_loss;
    ok &= pass;
    std::cout << "n=" << r.levels << " strategy=" << r.strategy
              << " seed=" << seed << " rounds=" << r.rounds_survived
              << " loss=" << format_double(r.loss)
              << (pass ? "" : " BELOW_FLOOR") << "\n";
  }
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Simulate and evaluate brokerage learners"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "replicated run at one horizon");
  run_cmd->add_option("--algo", run.algo, "fem|mbs|fepsi|grid_ucb|fixed|random")
      ->required();
  run_cmd->add_option("--dist", run.dist, "distribution, e.g. four_atom:eps=0.1");
  run_cmd->add_option("--horizon", run.horizon, "rounds T")->required();
  run_cmd->add_option("--reps", run.reps, "replications");
  run_cmd->add_option("--seed", run.seed, "base seed");
  run_cmd->add_option("--out", run.out, "sweep CSV path (stdout if empty)");
  run_cmd->add_option("--trajectory", run.trajectory, "per-round CSV path");
  run_cmd->add_option("--delta", run.delta, "MBS confidence (default 2/T^3)");
  run_cmd->add_option("--n", run.mbs_n, "MBS horizon parameter (default T)");
  run_cmd->add_option("--k", run.k, "grid arms (default ceil(T^(2/3)))");
  run_cmd->add_option("--p", run.p, "fixed price");
  run_cmd->add_option("--variant", run.variant, "fepsi objective: plugin|exact");
  run_cmd->add_option("--regret-mode", run.regret_mode, "pseudo|realized");
  run_cmd->add_option("--feedback", run.feedback, "full|two_bit");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "regret curve from a file");
  sweep_cmd->add_option("file", sweep.file, "experiment JSON")->required();
  sweep_cmd->add_option("--out", sweep.out, "overrides the file's output");

  ValidateArgs val;
  auto* val_cmd = app.add_subcommand("validate", "property checks");
  val_cmd->add_option("--check", val.check, "median|psi|dkw|sampler")
      ->required();
  val_cmd->add_option("--t", val.t, "dkw: half sample size");
  val_cmd->add_option("--trials", val.trials, "dkw: trials");
  val_cmd->add_option("--seed", val.seed, "seed");

  GameArgs game;
  auto* game_cmd = app.add_subcommand("game", "surrogate search game");
  game_cmd->add_option("--levels", game.levels, "n (2^n cells)")->required();
  game_cmd->add_option("--strategy", game.strategy,
                       "bisect|random|mbs-wrapper|grid_ucb-wrapper");
  game_cmd->add_option("--seeds", game.seeds, "matches to play");
  game_cmd->add_option("--seed", game.seed, "first seed");
  game_cmd->add_option("--horizon", game.horizon, "round limit per match");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*sweep_cmd) return cmd_sweep(sweep);
    if (*val_cmd) return cmd_validate(val);
    if (*game_cmd) return cmd_game(game);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FeedbackKindError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace brokerage::cli
