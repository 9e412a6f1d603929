// Copyright 2026 The biasforge Authors
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

#ifndef BIASFORGE_ERRORS_H
#define BIASFORGE_ERRORS_H

#include <stdexcept>
#include <string>

namespace biasforge {

/// Register too large or empty.
class SizeError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// A gate or Pauli addressed a qubit that is out of range (or the same qubit twice).
class AddressingError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// A forced measurement outcome selected a branch of (numerically) zero probability.
class BranchError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Invalid gadget configuration, noise parameters or bound inputs.
class ConfigError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Fault enumeration was asked for an order it does not support.
class UnsupportedOrderError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Monte Carlo estimation produced no accepted trial.
class EstimationError : public std::runtime_error {
   public:
    EstimationError(const std::string &msg, double reject_rate) : std::runtime_error(msg), reject_rate(reject_rate) {
    }
    double reject_rate;
};

/// A concatenated distillation channel left [0, 1/2).
class SaturationError : public std::runtime_error {
   public:
    SaturationError(const std::string &msg, int layer) : std::runtime_error(msg), layer(layer) {
    }
    int layer;
};

/// The planner could not reach the target within the layer cap.
class FeasibilityError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

}  // namespace biasforge

#endif
