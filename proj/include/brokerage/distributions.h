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

#ifndef BROKERAGE_DISTRIBUTIONS_H_
#define BROKERAGE_DISTRIBUTIONS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "brokerage/protocol.h"
#include "brokerage/rng.h"

namespace brokerage {

// Valuation laws on [0, 1].

struct Uniform01 {};

// Density 2*eps on [0, 1/8], 1 on (1/8, 7/8), 2*(1 - eps) on [7/8, 1].
// eps in [0, 1]; the cdf is 2-Lipschitz and its median is (5 - 2*eps)/8.
struct PiecewiseLinearLB {
  double eps = 0.0;
};

// Atoms (1-eps)/4 at 0, 1/4 at 1/3, 1/4 at 2/3 and (1+eps)/4 at 1.
// eps in [-1/4, 1/4].
struct FourAtom {
  double eps = 0.0;
};

// Uniform on ((k-1)/2^n, k/2^n), k in [1, 2^n], n >= 1.
struct IntervalUniform {
  std::int64_t k = 1;
  int n = 1;
};

struct Atom {
  double location = 0.0;
  double mass = 0.0;
};

// Knot of a piecewise-linear cdf: (x, G(x)).
struct Knot {
  double x = 0.0;
  double cdf = 0.0;
};

// weight * G + sum of atoms, where G is the piecewise-linear cdf through the
// knots (0 left of the first knot, 1 right of the last one).
struct Mixture {
  std::vector<Atom> atoms;
  std::vector<Knot> continuous;
  double weight = 0.0;
};

using DistributionSpec =
    std::variant<Uniform01, PiecewiseLinearLB, FourAtom, IntervalUniform,
                 Mixture>;

// Validated, immutable valuation law. Construction throws std::domain_error
// on invalid parameters.
class Distribution {
 public:
  Distribution() : Distribution(Uniform01{}) {}
  Distribution(DistributionSpec spec);  // NOLINT(google-explicit-constructor)

  static Distribution uniform() { return Distribution(Uniform01{}); }
  static Distribution piecewise_lb(double eps) {
    return Distribution(PiecewiseLinearLB{eps});
  }
  static Distribution four_atom(double eps) {
    return Distribution(FourAtom{eps});
  }
  static Distribution interval_uniform(std::int64_t k, int n) {
    return Distribution(IntervalUniform{k, n});
  }

  const DistributionSpec& spec() const { return spec_; }

  // Mixture breakpoints (knots and atoms together with 0 and 1), sorted.
  struct Breakpoint {
    double x;
    double left;   // F(x-)
    double right;  // F(x)
  };
  const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }

 private:
  DistributionSpec spec_;
  std::vector<Breakpoint> breakpoints_;
};

// F(x) = nu[0, x]. Throws std::domain_error outside [0, 1].
double cdf(const Distribution& d, double x);
// F(x-) = nu[0, x), with F(0-) = 0.
double cdf_left(const Distribution& d, double x);
// nu[{x}].
double atom(const Distribution& d, double x);

// Generalized quantile inf{x in [0, 1] : F(x) >= u}.
double quantile(const Distribution& d, double u);
double sample(const Distribution& d, Rng& rng);

// inf{x : F(x) >= 1/2}.
double median(const Distribution& d);

// Exact trade probability E[g(p, V1, V2)] = 1 - F(p-)^2 - (1 - F(p))^2.
double psi_true(const Distribution& d, double p);
// 2F(p)(1 - F(p)) + F(p) nu[{p}]; agrees with psi_true where nu has no atom.
double psi_plugin(const Distribution& d, double p);

struct BestPrice {
  double price = 0.5;
  double value = 0.5;
};
// Maximizer of psi_true, smallest one on ties.
BestPrice best_price(const Distribution& d);

bool has_atoms(const Distribution& d);
// Lipschitz constant certified by the family, if the cdf is Lipschitz.
std::optional<double> lipschitz_constant(const Distribution& d);

// Short label such as "four_atom:eps=0.1".
std::string label(const Distribution& d);

// Compositional draw for PiecewiseLinearLB:
// D (B U/8 + (1-B)(7+U)/8) + (1-D)(1/8 + 3U/4).
double representation_lb(bool d, bool b, double u);
// Draws D ~ Bernoulli(1/4), B ~ Bernoulli(eps), U ~ Uniform[0, 1].
double sample_representation_lb(double eps, Rng& rng);

}  // namespace brokerage

#endif  // BROKERAGE_DISTRIBUTIONS_H_
