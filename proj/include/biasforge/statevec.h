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

#ifndef BIASFORGE_STATEVEC_H
#define BIASFORGE_STATEVEC_H

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace biasforge {

using Amplitude = std::complex<double>;

/// Largest register the dense simulator will allocate (2^22 amplitudes, 64 MiB).
constexpr size_t kMaxQubits = 22;

/// A Pauli operator stored as X and Z support bitmasks over at most 64 qubits.
///
/// Phases are not tracked. When applied to a state the operator is taken to be
/// i^{|xs & zs|} X^xs Z^zs, i.e. Y = iXZ on each qubit where both bits are set.
struct PauliString {
    uint64_t xs = 0;
    uint64_t zs = 0;

    static PauliString x(size_t q);
    static PauliString y(size_t q);
    static PauliString z(size_t q);
    /// Z on every qubit in [first, first + count).
    static PauliString z_range(size_t first, size_t count);

    bool is_identity() const {
        return xs == 0 && zs == 0;
    }
    /// True when the two operators commute (symplectic inner product is even).
    bool commutes_with(const PauliString &other) const;
    /// Product up to phase.
    PauliString &operator*=(const PauliString &other) {
        xs ^= other.xs;
        zs ^= other.zs;
        return *this;
    }
    PauliString operator*(const PauliString &other) const {
        PauliString r = *this;
        r *= other;
        return r;
    }
    bool operator==(const PauliString &other) const = default;
    /// Highest qubit index in the support plus one (0 for the identity).
    size_t span() const;
    /// Dense text form such as "IXZY" (qubit 0 first).
    std::string str(size_t num_qubits) const;
};

/// Result of a single X-basis measurement.
struct MeasurementOutcome {
    int value;           // +1 or -1
    double probability;  // probability of the selected branch
};

/// Dense state vector. Basis index bit k is the computational value of qubit k.
class StateVector {
   public:
    /// |+>^q.
    static StateVector plus_state(size_t num_qubits);
    /// Computational basis state with the given bits.
    static StateVector basis_state(size_t num_qubits, uint64_t bits);
    /// Takes ownership of explicit amplitudes; length must be a power of two.
    explicit StateVector(std::vector<Amplitude> amplitudes);

    size_t num_qubits() const {
        return num_qubits_;
    }
    std::span<const Amplitude> amplitudes() const {
        return amplitudes_;
    }
    const Amplitude &operator[](uint64_t index) const {
        return amplitudes_[index];
    }
    double norm() const;

    /// exp(-i theta/2 Z_i Z_j).
    void apply_cz_theta(size_t i, size_t j, double theta);
    /// diag(1, 1, 1, -1) on qubits i and j.
    void apply_cphase(size_t i, size_t j);
    void apply_pauli(const PauliString &p);
    /// exp(i theta/2 Z_q) on a single qubit.
    void apply_z_rotation(size_t q, double theta);

    /// Probability that an X measurement of qubit q yields `value`.
    double probability_x(size_t q, int value) const;
    /// Projects qubit q onto the X eigenstate selected by `forced`, or by the
    /// Born rule using `rng` when no outcome is forced.
    MeasurementOutcome measure_x(size_t q, std::optional<int> forced, std::mt19937_64 *rng);
    /// Projects onto the given X outcome whose probability is already known.
    void project_x(size_t q, int value, double probability);

    /// Adds a fresh |+> qubit as the new highest index.
    void append_plus_qubit();
    /// Removes qubit q, which must already be in the X eigenstate `value`.
    /// Qubits above q shift down by one.
    void remove_x_eigenqubit(size_t q, int value);

   private:
    void check_qubit(size_t q) const;
    void check_pair(size_t i, size_t j) const;

    size_t num_qubits_;
    std::vector<Amplitude> amplitudes_;
};

/// |<s|t>|^2.
double fidelity(const StateVector &s, const StateVector &t);

// Value-semantic wrappers. Each returns the transformed copy.
StateVector new_plus_state(size_t num_qubits);
StateVector apply_cz_theta(StateVector s, size_t i, size_t j, double theta);
StateVector apply_cphase(StateVector s, size_t i, size_t j);
StateVector apply_pauli(StateVector s, const PauliString &p);
std::pair<MeasurementOutcome, StateVector> measure_x(
    StateVector s, size_t q, std::optional<int> forced, std::mt19937_64 &rng);

}  // namespace biasforge

#endif
