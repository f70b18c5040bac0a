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

#ifndef BROKERAGE_ERRORS_H_
#define BROKERAGE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace brokerage {

// Out-of-range argument (prices, valuations, family parameters) raise
// std::domain_error. The remaining failure classes get their own types so
// callers such as the CLI can map them onto exit codes.

// Invalid experiment or broker configuration.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A broker was driven out of protocol order or with an inconsistent state.
class StateError : public std::logic_error {
 public:
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

// A broker received a feedback kind it cannot consume.
class FeedbackKindError : public std::invalid_argument {
 public:
  explicit FeedbackKindError(const std::string& what)
      : std::invalid_argument(what) {}
};

// Least-squares fit with too few points or a degenerate design.
class FitError : public std::runtime_error {
 public:
  explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

// A routine was called on an input outside its stated precondition.
class PreconditionError : public std::invalid_argument {
 public:
  explicit PreconditionError(const std::string& what)
      : std::invalid_argument(what) {}
};

}  // namespace brokerage

#endif  // BROKERAGE_ERRORS_H_
