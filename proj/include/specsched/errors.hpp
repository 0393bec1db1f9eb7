// Copyright 2026 The specsched Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace specsched {

// Caller passed a value outside an operation's domain (bad token id,
// mismatched vocabularies, malformed file).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configuration document failed validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal precondition between components was broken, e.g. a drafter
// emitted a token its own distribution assigns zero mass.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A runtime invariant monitor fired (deadlock, trace inconsistency).
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace specsched
