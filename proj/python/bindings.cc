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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "brokerage/brokers.h"
#include "brokerage/distributions.h"
#include "brokerage/errors.h"
#include "brokerage/evaluation.h"
#include "brokerage/io.h"
#include "brokerage/protocol.h"
#include "brokerage/rng.h"
#include "brokerage/surrogate_game.h"

namespace py = pybind11;
using namespace brokerage;

namespace {

BrokerSpec make_spec(const std::string& algo, std::optional<double> delta,
                     std::optional<std::int64_t> n,
                     std::optional<std::int64_t> k, std::optional<double> p,
                     const std::string& variant) {
  BrokerSpec spec;
  spec.algo = algo;
  required_feedback(algo);
  spec.delta = delta;
  spec.horizon = n;
  spec.arms = k;
  spec.p = p;
  spec.variant = parse_psi_variant(variant);
  return spec;
}

RunConfig make_config(const std::string& algo, const std::string& dist,
                      std::int64_t horizon, std::int64_t reps,
                      std::uint64_t seed, std::optional<double> delta,
                      std::optional<std::int64_t> n,
                      std::optional<std::int64_t> k, std::optional<double> p,
                      const std::string& variant,
                      std::optional<std::string> feedback,
                      const std::string& regret_mode) {
  RunConfig cfg;
  cfg.distribution = parse_distribution(dist);
  cfg.broker = make_spec(algo, delta, n, k, p, variant);
  cfg.horizon = horizon;
  cfg.replications = reps;
  cfg.base_seed = seed;
  if (feedback) cfg.feedback = parse_feedback_kind(*feedback);
  cfg.regret_mode = parse_regret_mode(regret_mode);
  cfg.keep_trajectory = false;
  validate(cfg);
  return cfg;
}

py::dict fit_dict(const GrowthFit& f) {
  py::dict d;
  d["model"] = std::string(to_string(f.model));
  d["a"] = f.a;
  d["b"] = f.b;
  d["r2"] = f.r2;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Brokerage learners, valuation laws and regret evaluation";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<FeedbackKindError>(m, "FeedbackKindError",
                                            PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError",
                                            PyExc_ValueError);
  py::register_exception<StateError>(m, "StateError", PyExc_RuntimeError);
  py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);

  m.def("g", py::overload_cast<double, double, double>(&g), py::arg("p"),
        py::arg("v1"), py::arg("v2"), "Trade indicator.");

  py::class_<Distribution>(m, "Distribution")
      .def_static("parse", &parse_distribution, py::arg("text"))
      .def_static("from_json", &distribution_from_json, py::arg("json"))
      .def_static("uniform", &Distribution::uniform)
      .def_static("piecewise_lb", &Distribution::piecewise_lb, py::arg("eps"))
      .def_static("four_atom", &Distribution::four_atom, py::arg("eps"))
      .def_static("interval_uniform", &Distribution::interval_uniform,
                  py::arg("k"), py::arg("n"))
      .def("to_json", [](const Distribution& d) { return distribution_to_json(d); })
      .def("cdf", [](const Distribution& d, double x) { return cdf(d, x); })
      .def("cdf_left",
           [](const Distribution& d, double x) { return cdf_left(d, x); })
      .def("quantile",
           [](const Distribution& d, double u) { return quantile(d, u); })
      .def("median", [](const Distribution& d) { return median(d); })
      .def("psi_true",
           [](const Distribution& d, double p) { return psi_true(d, p); })
      .def("psi_plugin",
           [](const Distribution& d, double p) { return psi_plugin(d, p); })
      .def("best_price",
           [](const Distribution& d) {
             const auto b = best_price(d);
             return py::make_tuple(b.price, b.value);
           })
      .def("has_atoms", [](const Distribution& d) { return has_atoms(d); })
      .def("lipschitz_constant",
           [](const Distribution& d) { return lipschitz_constant(d); })
      .def("sample",
           [](const Distribution& d, std::int64_t count, std::uint64_t seed) {
             Rng rng(seed);
             std::vector<double> xs(static_cast<std::size_t>(count));
             for (auto& x : xs) x = sample(d, rng);
             return xs;
           },
           py::arg("count"), py::arg("seed") = 0)
      .def("__repr__", [](const Distribution& d) {
        return "Distribution('" + label(d) + "')";
      })
      .def_property_readonly("label",
                             [](const Distribution& d) { return label(d); });

  py::class_<Broker>(m, "Broker")
      .def_static(
          "make",
          [](const std::string& algo, std::int64_t horizon,
             std::optional<double> delta, std::optional<std::int64_t> n,
             std::optional<std::int64_t> k, std::optional<double> p,
             const std::string& variant) {
            return make_broker(make_spec(algo, delta, n, k, p, variant),
                               horizon);
          },
          py::arg("algo"), py::arg("horizon"), py::arg("delta") = py::none(),
          py::arg("n") = py::none(), py::arg("k") = py::none(),
          py::arg("p") = py::none(), py::arg("variant") = "plugin")
      .def_property_readonly("name", &Broker::name)
      .def("propose",
           [](Broker& b, Round t) { return b.propose(t).value(); })
      .def("observe_full",
           [](Broker& b, Round t, double p, double v1, double v2) {
             b.observe(t, Price(p), FullFeedback{v1, v2});
           },
           py::arg("t"), py::arg("price"), py::arg("v1"), py::arg("v2"))
      .def("observe_two_bit",
           [](Broker& b, Round t, double p, bool b1, bool b2) {
             b.observe(t, Price(p), TwoBitFeedback{b1, b2});
           },
           py::arg("t"), py::arg("price"), py::arg("b1"), py::arg("b2"))
      .def("reset", &Broker::reset, py::arg("seed"));

  m.def(
      "run",
      [](const std::string& algo, const std::string& dist,
         std::int64_t horizon, std::int64_t reps, std::uint64_t seed,
         std::optional<double> delta, std::optional<std::int64_t> n,
         std::optional<std::int64_t> k, std::optional<double> p,
         const std::string& variant, std::optional<std::string> feedback,
         const std::string& regret_mode) {
        const RunConfig cfg = make_config(algo, dist, horizon, reps, seed,
                                          delta, n, k, p, variant, feedback,
                                          regret_mode);
        Replicated res;
        {
          py::gil_scoped_release release;
          res = run_replicated(cfg);
        }
        std::vector<double> finals;
        for (const auto& r : res.runs) {
          finals.push_back(r.final_regret(cfg.regret_mode));
        }
        py::dict out;
        out["mean"] = res.mean;
        out["stderr"] = res.std_error;
        out["finals"] = finals;
        return out;
      },
      py::arg("algo"), py::arg("dist") = "uniform", py::arg("horizon"),
      py::arg("reps") = 1, py::arg("seed") = 0, py::arg("delta") = py::none(),
      py::arg("n") = py::none(), py::arg("k") = py::none(),
      py::arg("p") = py::none(), py::arg("variant") = "plugin",
      py::arg("feedback") = py::none(), py::arg("regret_mode") = "pseudo",
      "Replicated regret at one horizon.");

  m.def(
      "regret_curve",
      [](const std::string& algo, const std::string& dist,
         std::vector<std::int64_t> horizons, std::int64_t reps,
         std::uint64_t seed, std::optional<double> delta,
         std::optional<std::int64_t> n, std::optional<std::int64_t> k,
         std::optional<double> p, const std::string& variant,
         std::optional<std::string> feedback, const std::string& regret_mode) {
        if (horizons.empty()) throw ConfigError("horizons must be nonempty");
        RunConfig cfg = make_config(algo, dist, horizons.back(), reps, seed,
                                    delta, n, k, p, variant, feedback,
                                    regret_mode);
        RegretCurve curve;
        {
          py::gil_scoped_release release;
          curve = regret_curve(cfg, horizons);
        }
        py::list rows;
        for (const auto& row :
             sweep_rows(cfg.broker, cfg.distribution, curve)) {
          py::dict d;
          d["algo"] = row.algo;
          d["dist"] = row.dist;
          d["T"] = row.horizon;
          d["reps"] = row.reps;
          d["mean_regret"] = row.mean_regret;
          d["stderr"] = row.std_error;
          d["bound"] = row.bound;
          d["pass"] = row.pass;
          rows.append(d);
        }
        return rows;
      },
      py::arg("algo"), py::arg("dist"), py::arg("horizons"),
      py::arg("reps") = 1, py::arg("seed") = 0, py::arg("delta") = py::none(),
      py::arg("n") = py::none(), py::arg("k") = py::none(),
      py::arg("p") = py::none(), py::arg("variant") = "plugin",
      py::arg("feedback") = py::none(), py::arg("regret_mode") = "pseudo",
      "Sweep rows with bound columns.");

  m.def(
      "regret_bound",
      [](const std::string& kind, std::int64_t horizon,
         std::optional<double> lipschitz) {
        BoundKind k;
        if (kind == "fem") {
          k = BoundKind::kFem;
        } else if (kind == "mbs") {
          k = BoundKind::kMbs;
        } else if (kind == "fepsi") {
          k = BoundKind::kFePsi;
        } else {
          throw ConfigError("unknown bound '" + kind + "'");
        }
        return regret_bound(k, horizon, lipschitz);
      },
      py::arg("kind"), py::arg("horizon"), py::arg("lipschitz") = py::none());

  m.def(
      "fit_growth",
      [](const std::vector<double>& horizons, const std::vector<double>& values,
         const std::string& model) {
        GrowthModel gm;
        if (model == "log") {
          gm = GrowthModel::kLog;
        } else if (model == "sqrt") {
          gm = GrowthModel::kSqrt;
        } else {
          throw ConfigError("unknown model '" + model + "'");
        }
        return fit_dict(fit_growth(horizons, values, gm));
      },
      py::arg("horizons"), py::arg("values"), py::arg("model"));

  m.def(
      "play_game",
      [](int levels, const std::string& strategy, std::uint64_t seed,
         std::int64_t horizon) {
        auto s = make_strategy(strategy, levels, seed, horizon);
        const GameResult r = play_game(*s, levels, horizon);
        py::dict d;
        d["levels"] = r.levels;
        d["strategy"] = r.strategy;
        d["rounds_survived"] = r.rounds_survived;
        d["loss"] = r.loss;
        d["won"] = r.won;
        d["plays"] = r.plays;
        d["segment_sizes"] = r.segment_sizes;
        return d;
      },
      py::arg("levels"), py::arg("strategy") = "bisect", py::arg("seed") = 0,
      py::arg("horizon") = 1024);
}
