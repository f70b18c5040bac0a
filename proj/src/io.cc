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

#include "brokerage/io.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "brokerage/errors.h"
#include "json.hpp"

namespace brokerage {
namespace {

using nlohmann::json;

template <typename... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(std::string_view key, std::string_view v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("bad number for '" + std::string(key) + "': '" +
                      std::string(v) + "'");
  }
  return x;
}

std::int64_t to_int(std::string_view key, std::string_view v) {
  std::int64_t x = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("bad integer for '" + std::string(key) + "': '" +
                      std::string(v) + "'");
  }
  return x;
}

Distribution build(DistributionSpec spec) {
  try {
    return Distribution(std::move(spec));
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
}

Distribution from_json_value(const json& j) {
  if (j.is_string()) return parse_distribution(j.get<std::string>());
  if (!j.is_object() || !j.contains("family")) {
    throw ConfigError("distribution needs a \"family\" field");
  }
  const auto family = j.at("family").get<std::string>();
  if (family == "uniform" || family == "uniform01") return build(Uniform01{});
  if (family == "piecewise_lb") {
    return build(PiecewiseLinearLB{j.value("eps", 0.0)});
  }
  if (family == "four_atom") return build(FourAtom{j.value("eps", 0.0)});
  if (family == "interval_uniform") {
    return build(IntervalUniform{j.value("k", std::int64_t{1}),
                                 j.at("n").get<int>()});
  }
  if (family == "mixture") {
    Mixture m;
    for (const auto& a : j.value("atoms", json::array())) {
      m.atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
    }
    for (const auto& k : j.value("knots", json::array())) {
      m.continuous.push_back({k.at(0).get<double>(), k.at(1).get<double>()});
    }
    m.weight = j.value("weight", 0.0);
    return build(std::move(m));
  }
  throw ConfigError("unknown distribution family '" + family + "'");
}

json to_json_value(const Distribution& d) {
  return std::visit(
      Overloaded{
          [](const Uniform01&) { return json{{"family", "uniform"}}; },
          [](const PiecewiseLinearLB& s) {
            return json{{"family", "piecewise_lb"}, {"eps", s.eps}};
          },
          [](const FourAtom& s) {
            return json{{"family", "four_atom"}, {"eps", s.eps}};
          },
          [](const IntervalUniform& s) {
            return json{{"family", "interval_uniform"}, {"k", s.k}, {"n", s.n}};
          },
          [](const Mixture& s) {
            json atoms = json::array();
            for (const auto& a : s.atoms) atoms.push_back({a.location, a.mass});
            json knots = json::array();
            for (const auto& k : s.continuous) knots.push_back({k.x, k.cdf});
            return json{{"family", "mixture"},
                        {"atoms", atoms},
                        {"knots", knots},
                        {"weight", s.weight}};
          },
      },
      d.spec());
}

BrokerSpec broker_from_value(const json& j) {
  if (!j.is_object() || !j.contains("algo")) {
    throw ConfigError("broker needs an \"algo\" field");
  }
  BrokerSpec spec;
  spec.algo = j.at("algo").get<std::string>();
  required_feedback(spec.algo);
  const json params = j.value("params", json::object());
  if (!params.is_object()) throw ConfigError("broker params must be an object");
  for (const auto& [key, v] : params.items()) {
    if (key == "delta") {
      spec.delta = v.get<double>();
    } else if (key == "horizon") {
      spec.horizon = v.get<std::int64_t>();
    } else if (key == "p") {
      spec.p = v.get<double>();
    } else if (key == "K") {
      spec.arms = v.get<std::int64_t>();
    } else if (key == "variant") {
      spec.variant = parse_psi_variant(v.get<std::string>());
    } else {
      throw ConfigError("unknown broker parameter '" + key + "'");
    }
  }
  return spec;
}

json broker_to_value(const BrokerSpec& spec) {
  json params = json::object();
  if (spec.delta) params["delta"] = *spec.delta;
  if (spec.horizon) params["horizon"] = *spec.horizon;
  if (spec.p) params["p"] = *spec.p;
  if (spec.arms) params["K"] = *spec.arms;
  if (spec.algo == "fepsi") params["variant"] = to_string(spec.variant);
  return json{{"algo", spec.algo}, {"params", params}};
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

// nlohmann reports type mismatches as json::exception.
template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid field: ") + e.what());
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Distribution parse_distribution(std::string_view text) {
  const std::string s = trim(text);
  if (!s.empty() && s.front() == '{') {
    return guarded([&] { return from_json_value(parse_json(s)); });
  }
  const auto colon = s.find(':');
  const std::string family = s.substr(0, colon);
  std::vector<std::pair<std::string, std::string>> kv;
  if (colon != std::string::npos) {
    std::string_view rest(s);
    rest.remove_prefix(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string item(rest.substr(0, comma));
      const auto eq = item.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("expected key=value in '" + item + "'");
      }
      kv.emplace_back(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  }
  auto take = [&](std::initializer_list<std::string_view> allowed) {
    for (const auto& [k, v] : kv) {
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
        throw ConfigError("unknown parameter '" + k + "' for " + family);
      }
    }
  };
  auto find = [&](const std::string& key) -> std::optional<std::string> {
    for (const auto& [k, v] : kv) {
      if (k == key) return v;
    }
    return std::nullopt;
  };

  if (family == "uniform" || family == "uniform01") {
    take({});
    return build(Uniform01{});
  }
  if (family == "piecewise_lb" || family == "four_atom") {
    take({"eps"});
    const auto eps = find("eps");
    const double e = eps ? to_double("eps", *eps) : 0.0;
    if (family == "piecewise_lb") return build(PiecewiseLinearLB{e});
    return build(FourAtom{e});
  }
  if (family == "interval_uniform") {
    take({"k", "n"});
    const auto n = find("n");
    if (!n) throw ConfigError("interval_uniform needs n");
    const auto k = find("k");
    const std::int64_t nn = to_int("n", *n);
    if (nn < 1 || nn > 62) throw ConfigError("n must lie in [1, 62]");
    return build(IntervalUniform{k ? to_int("k", *k) : 1,
                                 static_cast<int>(nn)});
  }
  throw ConfigError("unknown distribution '" + family +
                    "' (expected uniform, piecewise_lb, four_atom or "
                    "interval_uniform)");
}

std::string distribution_to_json(const Distribution& d) {
  return to_json_value(d).dump();
}

Distribution distribution_from_json(std::string_view text) {
  return guarded([&] { return from_json_value(parse_json(text)); });
}

std::string broker_to_json(const BrokerSpec& spec) {
  return broker_to_value(spec).dump();
}

BrokerSpec broker_from_json(std::string_view text) {
  return guarded([&] { return broker_from_value(parse_json(text)); });
}

ExperimentFile parse_experiment(std::string_view text) {
  return guarded([&] {
    const json j = parse_json(text);
    if (!j.is_object()) throw ConfigError("experiment must be a JSON object");
    for (const char* key : {"distribution", "broker", "horizons"}) {
      if (!j.contains(key)) {
        throw ConfigError(std::string("experiment is missing \"") + key +
                          "\"");
      }
    }
    ExperimentFile e;
    e.distribution = from_json_value(j.at("distribution"));
    e.broker = broker_from_value(j.at("broker"));
    e.horizons = j.at("horizons").get<std::vector<std::int64_t>>();
    if (e.horizons.empty()) throw ConfigError("horizons must be nonempty");
    for (std::size_t i = 0; i < e.horizons.size(); ++i) {
      if (e.horizons[i] < 1) throw ConfigError("horizons must be positive");
      if (i > 0 && e.horizons[i] <= e.horizons[i - 1]) {
        throw ConfigError("horizons must be strictly increasing");
      }
    }
    e.replications = j.value("replications", std::int64_t{1});
    if (e.replications < 1) throw ConfigError("replications must be >= 1");
    e.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("feedback")) {
      e.feedback = parse_feedback_kind(j.at("feedback").get<std::string>());
    }
    if (j.contains("regret_mode")) {
      e.regret_mode = parse_regret_mode(j.at("regret_mode").get<std::string>());
    }
    e.output = j.value("output", std::string());
    return e;
  });
}

ExperimentFile load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open experiment file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment(buf.str());
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<SweepRow> sweep_rows(const BrokerSpec& broker,
                                 const Distribution& d,
                                 const RegretCurve& curve) {
  std::vector<SweepRow> rows;
  const auto kind = applicable_bound(broker, d);
  std::vector<BoundCheck> checks;
  if (kind) checks = check_bound(curve, *kind, lipschitz_constant(d));
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& pt = curve.points[i];
    SweepRow row{broker.algo, label(d),     pt.horizon, pt.replications,
                 pt.mean,     pt.std_error, std::nullopt, std::nullopt};
    if (kind) {
      row.bound = checks[i].bound;
      row.pass = checks[i].pass;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "algo,dist,T,reps,mean_regret,stderr,bound,pass\n";
  for (const auto& r : rows) {
    out << csv_field(r.algo) << ',' << csv_field(r.dist) << ',' << r.horizon
        << ',' << r.reps << ',' << format_double(r.mean_regret) << ','
        << format_double(r.std_error) << ','
        << (r.bound ? format_double(*r.bound) : "") << ','
        << (r.pass ? (*r.pass ? "true" : "false") : "") << '\n';
  }
}

void write_run_csv(std::ostream& out, std::span<const RunRecord> runs) {
  out << "rep,t,price,reward,cum_pseudo_regret\n";
  for (std::size_t rep = 0; rep < runs.size(); ++rep) {
    const auto& r = runs[rep];
    for (std::size_t t = 0; t < r.prices.size(); ++t) {
      out << rep << ',' << t + 1 << ',' << format_double(r.prices[t]) << ','
          << static_cast<int>(r.rewards[t]) << ','
          << format_double(r.cum_pseudo[t]) << '\n';
    }
  }
}

std::string summary_json(std::span<const SweepRow> rows,
                         std::span<const GrowthFit> fits) {
  json j;
  j["rows"] = json::array();
  for (const auto& r : rows) {
    json row{{"algo", r.algo},
             {"dist", r.dist},
             {"T", r.horizon},
             {"reps", r.reps},
             {"mean_regret", r.mean_regret},
             {"stderr", r.std_error},
             {"bound", nullptr},
             {"pass", nullptr}};
    if (r.bound) row["bound"] = *r.bound;
    if (r.pass) row["pass"] = *r.pass;
    j["rows"].push_back(std::move(row));
  }
  j["fits"] = json::array();
  for (const auto& f : fits) {
    j["fits"].push_back(json{{"model", to_string(f.model)},
                             {"a", f.a},
                             {"b", f.b},
                             {"r2", f.r2}});
  }
  return j.dump(2) + "\n";
}

}  // namespace brokerage
