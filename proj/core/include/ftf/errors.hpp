// Copyright 2026 The ftfsim Authors
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

#include <numbers>
#include <stdexcept>
#include <string>

namespace ftf {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Inputs that parse but violate an invariant or precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Requested problem exceeds a size guard.
class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Solver, integrator or fit failures.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A dressed state could not be assigned to a bare label with confidence.
class AmbiguityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace ftf
