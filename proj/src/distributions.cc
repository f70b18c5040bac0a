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

#include "brokerage/distributions.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace brokerage {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kThird = 1.0 / 3.0;
constexpr double kTwoThirds = 2.0 / 3.0;
constexpr double kMassTolerance = 1e-9;

void require_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error(std::string(what) + " must lie in [0, 1], got " +
                            std::to_string(x));
  }
}

double interval_width(int n) { return std::ldexp(1.0, -n); }

void validate(const DistributionSpec& spec) {
  std::visit(
      Overloaded{
          [](const Uniform01&) {},
          [](const PiecewiseLinearLB& s) {
            if (!(s.eps >= 0.0 && s.eps <= 1.0)) {
              throw std::domain_error("piecewise_lb eps must lie in [0, 1]");
            }
          },
          [](const FourAtom& s) {
            if (!(s.eps >= -0.25 && s.eps <= 0.25)) {
              throw std::domain_error(
                  "four_atom eps must lie in [-1/4, 1/4]");
            }
          },
          [](const IntervalUniform& s) {
            if (s.n < 1 || s.n > 62) {
              throw std::domain_error("interval_uniform n must lie in [1, 62]");
            }
            if (s.k < 1 || s.k > (std::int64_t{1} << s.n)) {
              throw std::domain_error("interval_uniform k must lie in [1, 2^n]");
            }
          },
          [](const Mixture& s) {
            if (!(s.weight >= 0.0 && s.weight <= 1.0)) {
              throw std::domain_error("mixture weight must lie in [0, 1]");
            }
            double total = s.weight;
            for (std::size_t i = 0; i < s.atoms.size(); ++i) {
              const Atom& a = s.atoms[i];
              require_unit(a.location, "atom location");
              if (!(a.mass > 0.0)) {
                throw std::domain_error("atom masses must be positive");
              }
              if (i > 0 && !(a.location > s.atoms[i - 1].location)) {
                throw std::domain_error(
                    "atom locations must be strictly increasing");
              }
              total += a.mass;
            }
            if (s.weight > 0.0) {
              if (s.continuous.size() < 2) {
                throw std::domain_error(
                    "continuous component needs at least two knots");
              }
              for (std::size_t i = 0; i < s.continuous.size(); ++i) {
                const Knot& k = s.continuous[i];
                require_unit(k.x, "knot position");
                require_unit(k.cdf, "knot cdf");
                if (i > 0 && !(k.x > s.continuous[i - 1].x)) {
                  throw std::domain_error(
                      "knot positions must be strictly increasing");
                }
                if (i > 0 && k.cdf < s.continuous[i - 1].cdf) {
                  throw std::domain_error("knot cdf values must be nondecreasing");
                }
              }
              if (s.continuous.front().cdf != 0.0 ||
                  s.continuous.back().cdf != 1.0) {
                throw std::domain_error(
                    "continuous cdf must run from 0 to 1 across the knots");
              }
            }
            if (std::abs(total - 1.0) > kMassTolerance) {
              throw std::domain_error("mixture mass must sum to 1");
            }
          },
      },
      spec);
}

// Piecewise-linear component G evaluated at x.
double continuous_cdf(const std::vector<Knot>& knots, double x) {
  if (knots.empty() || x < knots.front().x) return 0.0;
  if (x >= knots.back().x) return 1.0;
  auto hi = std::upper_bound(knots.begin(), knots.end(), x,
                             [](double v, const Knot& k) { return v < k.x; });
  auto lo = hi - 1;
  const double frac = (x - lo->x) / (hi->x - lo->x);
  return lo->cdf + frac * (hi->cdf - lo->cdf);
}

struct MixtureMass {
  double below = 0.0;  // atoms strictly below x
  double at = 0.0;     // atom at x
};

MixtureMass atom_mass(const std::vector<Atom>& atoms, double x) {
  MixtureMass m;
  for (const Atom& a : atoms) {
    if (a.location < x) {
      m.below += a.mass;
    } else if (a.location == x) {
      m.at = a.mass;
    } else {
      break;
    }
  }
  return m;
}

// Returns {F(x-), F(x)} in one pass.
std::pair<double, double> cdf_pair(const DistributionSpec& spec, double x) {
  return std::visit(
      Overloaded{
          [x](const Uniform01&) { return std::pair{x, x}; },
          [x](const PiecewiseLinearLB& s) {
            double f;
            if (x <= 0.125) {
              f = 2.0 * s.eps * x;
            } else if (x < 0.875) {
              f = (2.0 * s.eps - 1.0) / 8.0 + x;
            } else {
              f = 2.0 * s.eps - 1.0 - 2.0 * (s.eps - 1.0) * x;
            }
            if (x >= 1.0) f = 1.0;
            return std::pair{f, f};
          },
          [x](const FourAtom& s) {
            const double masses[4] = {(1.0 - s.eps) / 4.0, 0.25, 0.25,
                                      (1.0 + s.eps) / 4.0};
            const double locations[4] = {0.0, kThird, kTwoThirds, 1.0};
            double left = 0.0;
            double right = 0.0;
            for (int i = 0; i < 4; ++i) {
              if (locations[i] < x) left += masses[i];
              if (locations[i] <= x) right += masses[i];
            }
            if (x >= 1.0) right = 1.0;
            return std::pair{left, right};
          },
          [x](const IntervalUniform& s) {
            const double w = interval_width(s.n);
            const double lo = static_cast<double>(s.k - 1) * w;
            const double f = std::clamp((x - lo) / w, 0.0, 1.0);
            return std::pair{f, f};
          },
          [x](const Mixture& s) {
            const double cont = s.weight * continuous_cdf(s.continuous, x);
            const MixtureMass m = atom_mass(s.atoms, x);
            double right = std::min(1.0, cont + m.below + m.at);
            if (x >= 1.0) right = 1.0;
            return std::pair{std::min(1.0, cont + m.below), right};
          },
      },
      spec);
}

}  // namespace

Distribution::Distribution(DistributionSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  if (const auto* mix = std::get_if<Mixture>(&spec_)) {
    std::vector<double> xs = {0.0, 1.0};
    for (const Atom& a : mix->atoms) xs.push_back(a.location);
    if (mix->weight > 0.0) {
      for (const Knot& k : mix->continuous) xs.push_back(k.x);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    breakpoints_.reserve(xs.size());
    for (double x : xs) {
      auto [left, right] = cdf_pair(spec_, x);
      breakpoints_.push_back({x, left, right});
    }
  }
}

double cdf(const Distribution& d, double x) {
  require_unit(x, "cdf argument");
  return cdf_pair(d.spec(), x).second;
}

double cdf_left(const Distribution& d, double x) {
  require_unit(x, "cdf argument");
  return cdf_pair(d.spec(), x).first;
}

double atom(const Distribution& d, double x) {
  require_unit(x, "atom argument");
  auto [left, right] = cdf_pair(d.spec(), x);
  return right - left;
}

double quantile(const Distribution& d, double u) {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw std::domain_error("quantile level must lie in [0, 1]");
  }
  if (u <= 0.0) return 0.0;
  return std::visit(
      Overloaded{
          [u](const Uniform01&) { return u; },
          [u](const PiecewiseLinearLB& s) {
            if (u <= s.eps / 4.0) return u / (2.0 * s.eps);
            if (u <= s.eps / 4.0 + 0.75) return u - (2.0 * s.eps - 1.0) / 8.0;
            return (u - 2.0 * s.eps + 1.0) / (2.0 * (1.0 - s.eps));
          },
          [u](const FourAtom& s) {
            if (u <= (1.0 - s.eps) / 4.0) return 0.0;
            if (u <= (2.0 - s.eps) / 4.0) return kThird;
            if (u <= (3.0 - s.eps) / 4.0) return kTwoThirds;
            return 1.0;
          },
          [u](const IntervalUniform& s) {
            return (static_cast<double>(s.k - 1) + u) * interval_width(s.n);
          },
          [u, &d](const Mixture&) {
            const auto& bps = d.breakpoints();
            auto it = std::lower_bound(
                bps.begin(), bps.end(), u,
                [](const Distribution::Breakpoint& b, double v) {
                  return b.right < v;
                });
            if (it == bps.end()) return 1.0;
            if (it == bps.begin() || u > it->left) return it->x;
            const auto prev = it - 1;
            const double span = it->left - prev->right;
            const double frac = span > 0.0 ? (u - prev->right) / span : 0.0;
            return prev->x + frac * (it->x - prev->x);
          },
      },
      d.spec());
}

double sample(const Distribution& d, Rng& rng) {
  return quantile(d, rng.uniform_open_closed());
}

double median(const Distribution& d) {
  return std::visit(
      Overloaded{
          [](const Uniform01&) { return 0.5; },
          [](const PiecewiseLinearLB& s) { return (5.0 - 2.0 * s.eps) / 8.0; },
          [](const FourAtom& s) { return s.eps <= 0.0 ? kThird : kTwoThirds; },
          [](const IntervalUniform& s) {
            return (static_cast<double>(s.k) - 0.5) * interval_width(s.n);
          },
          [&d](const Mixture&) { return quantile(d, 0.5); },
      },
      d.spec());
}

double psi_true(const Distribution& d, double p) {
  require_unit(p, "price");
  auto [left, right] = cdf_pair(d.spec(), p);
  if (left == right) return 2.0 * right * (1.0 - right);
  return 1.0 - left * left - (1.0 - right) * (1.0 - right);
}

double psi_plugin(const Distribution& d, double p) {
  require_unit(p, "price");
  auto [left, right] = cdf_pair(d.spec(), p);
  return 2.0 * right * (1.0 - right) + right * (right - left);
}

BestPrice best_price(const Distribution& d) {
  std::vector<double> candidates = std::visit(
      Overloaded{
          [](const FourAtom&) {
            return std::vector<double>{0.0, kThird, kTwoThirds, 1.0};
          },
          [&d](const Mixture&) {
            std::vector<double> xs;
            for (const auto& b : d.breakpoints()) xs.push_back(b.x);
            xs.push_back(median(d));
            std::sort(xs.begin(), xs.end());
            return xs;
          },
          [&d](const auto&) { return std::vector<double>{median(d)}; },
      },
      d.spec());
  BestPrice best{candidates.front(), psi_true(d, candidates.front())};
  for (double p : candidates) {
    const double v = psi_true(d, p);
    if (v > best.value + 1e-14) best = {p, v};
  }
  return best;
}

bool has_atoms(const Distribution& d) {
  if (std::holds_alternative<FourAtom>(d.spec())) return true;
  if (const auto* m = std::get_if<Mixture>(&d.spec())) return !m->atoms.empty();
  return false;
}

std::optional<double> lipschitz_constant(const Distribution& d) {
  return std::visit(
      Overloaded{
          [](const Uniform01&) -> std::optional<double> { return 1.0; },
          [](const PiecewiseLinearLB&) -> std::optional<double> { return 2.0; },
          [](const FourAtom&) -> std::optional<double> { return std::nullopt; },
          [](const IntervalUniform& s) -> std::optional<double> {
            return std::ldexp(1.0, s.n);
          },
          [](const Mixture& s) -> std::optional<double> {
            if (!s.atoms.empty()) return std::nullopt;
            double slope = 0.0;
            for (std::size_t i = 1; i < s.continuous.size(); ++i) {
              const Knot& a = s.continuous[i - 1];
              const Knot& b = s.continuous[i];
              slope = std::max(slope, (b.cdf - a.cdf) / (b.x - a.x));
            }
            return s.weight * slope;
          },
      },
      d.spec());
}

std::string label(const Distribution& d) {
  std::ostringstream out;
  out.precision(17);
  std::visit(Overloaded{
                 [&](const Uniform01&) { out << "uniform"; },
                 [&](const PiecewiseLinearLB& s) {
                   out << "piecewise_lb:eps=" << s.eps;
                 },
                 [&](const FourAtom& s) { out << "four_atom:eps=" << s.eps; },
                 [&](const IntervalUniform& s) {
                   out << "interval_uniform:k=" << s.k << ",n=" << s.n;
                 },
                 [&](const Mixture&) { out << "mixture"; },
             },
             d.spec());
  return out.str();
}

double representation_lb(bool d, bool b, double u) {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw std::domain_error("uniform draw must lie in [0, 1]");
  }
  if (d) return b ? u / 8.0 : (7.0 + u) / 8.0;
  return 0.125 + 0.75 * u;
}

double sample_representation_lb(double eps, Rng& rng) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw std::domain_error("eps must lie in [0, 1]");
  }
  const bool d = rng.bernoulli(0.25);
  const bool b = rng.bernoulli(eps);
  const double u = rng.uniform();
  return representation_lb(d, b, u);
}

}  // namespace brokerage
