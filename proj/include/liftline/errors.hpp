// Copyright 2026 The Liftline Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace liftline {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A value violates a structural precondition (non-skew matrix, non-unit
/// vector, bad dimensions, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A math-domain precondition failed (log of a non-positive number, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Cable length at or below the minimum admissible value; the direction
/// dynamics divide by L.
class CableDegenerate : public Error {
 public:
  using Error::Error;
};

/// A barrier-constrained error left its admissible set. The control law is
/// undefined outside the barrier domain, so the simulation aborts loudly.
class BarrierViolation : public Error {
 public:
  BarrierViolation(const std::string& layer, double value, double bound)
      : Error(layer + ": barrier violated, |value| " + std::to_string(value) +
              " >= bound " + std::to_string(bound)),
        layer_(layer),
        value_(value),
        bound_(bound) {}
  const std::string& layer() const { return layer_; }
  double value() const { return value_; }
  double bound() const { return bound_; }

 private:
  std::string layer_;
  double value_;
  double bound_;
};

/// A commanded virtual force is too small to define a direction.
class DegenerateForce : public Error {
 public:
  using Error::Error;
};

/// Stability-gain selection produced a matrix that is not positive definite.
class GainSelectionError : public Error {
 public:
  using Error::Error;
};

/// Scenario / configuration file problem.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The horizon solver was handed an initial state outside the controller
/// domain (barrier or force degeneracy at the very first node).
class InfeasibleInitial : public Error {
 public:
  using Error::Error;
};

}  // namespace liftline
