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

#include "biasforge/statevec.h"

#include <bit>
#include <cmath>

#include "biasforge/errors.h"

namespace biasforge {

namespace {

// Conditional branch probabilities at or below this are treated as impossible.
constexpr double kBranchEpsilon = 1e-12;

}  // namespace

PauliString PauliString::x(size_t q) {
    return PauliString{uint64_t{1} << q, 0};
}

PauliString PauliString::y(size_t q) {
    return PauliString{uint64_t{1} << q, uint64_t{1} << q};
}

PauliString PauliString::z(size_t q) {
    return PauliString{0, uint64_t{1} << q};
}

PauliString PauliString::z_range(size_t first, size_t count) {
    uint64_t mask = count >= 64 ? ~uint64_t{0} : ((uint64_t{1} << count) - 1);
    return PauliString{0, mask << first};
}

bool PauliString::commutes_with(const PauliString &other) const {
    return (std::popcount(xs & other.zs) + std::popcount(zs & other.xs)) % 2 == 0;
}

size_t PauliString::span() const {
    uint64_t all = xs | zs;
    return all == 0 ? 0 : 64 - std::countl_zero(all);
}

std::string PauliString::str(size_t num_qubits) const {
    std::string out;
    out.reserve(num_qubits);
    for (size_t q = 0; q < num_qubits; q++) {
        bool x = (xs >> q) & 1;
        bool z = (zs >> q) & 1;
        out.push_back(x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I'));
    }
    return out;
}

StateVector StateVector::plus_state(size_t num_qubits) {
    if (num_qubits < 1 || num_qubits > kMaxQubits) {
        throw SizeError("register size " + std::to_string(num_qubits) + " outside [1, " + std::to_string(kMaxQubits) + "]");
    }
    size_t dim = size_t{1} << num_qubits;
    double a = 1.0 / std::sqrt(static_cast<double>(dim));
    return StateVector(std::vector<Amplitude>(dim, Amplitude{a, 0}));
}

StateVector StateVector::basis_state(size_t num_qubits, uint64_t bits) {
    if (num_qubits < 1 || num_qubits > kMaxQubits) {
        throw SizeError("register size " + std::to_string(num_qubits) + " outside [1, " + std::to_string(kMaxQubits) + "]");
    }
    if (bits >> num_qubits) {
        throw AddressingError("basis index has bits beyond the register");
    }
    std::vector<Amplitude> amps(size_t{1} << num_qubits);
    amps[bits] = 1;
    return StateVector(std::move(amps));
}

StateVector::StateVector(std::vector<Amplitude> amplitudes) : amplitudes_(std::move(amplitudes)) {
    size_t dim = amplitudes_.size();
    if (dim < 2 || !std::has_single_bit(dim)) {
        throw SizeError("amplitude count must be a power of two and at least 2");
    }
    num_qubits_ = std::countr_zero(dim);
    if (num_qubits_ > kMaxQubits) {
        throw SizeError("register exceeds " + std::to_string(kMaxQubits) + " qubits");
    }
}

double StateVector::norm() const {
    double total = 0;
    for (const auto &a : amplitudes_) {
        total += std::norm(a);
    }
    return std::sqrt(total);
}

void StateVector::check_qubit(size_t q) const {
    if (q >= num_qubits_) {
        throw AddressingError("qubit " + std::to_string(q) + " out of range for " + std::to_string(num_qubits_) + " qubits");
    }
}

void StateVector::check_pair(size_t i, size_t j) const {
    check_qubit(i);
    check_qubit(j);
    if (i == j) {
        throw AddressingError("two-qubit gate applied to qubit " + std::to_string(i) + " twice");
    }
}

void StateVector::apply_cz_theta(size_t i, size_t j, double theta) {
    check_pair(i, j);
    const Amplitude same = std::polar(1.0, -theta / 2);
    const Amplitude diff = std::polar(1.0, theta / 2);
    for (uint64_t k = 0; k < amplitudes_.size(); k++) {
        bool parity = ((k >> i) ^ (k >> j)) & 1;
        amplitudes_[k] *= parity ? diff : same;
    }
}

void StateVector::apply_cphase(size_t i, size_t j) {
    check_pair(i, j);
    uint64_t both = (uint64_t{1} << i) | (uint64_t{1} << j);
    for (uint64_t k = 0; k < amplitudes_.size(); k++) {
        if ((k & both) == both) {
            amplitudes_[k] = -amplitudes_[k];
        }
    }
}

void StateVector::apply_z_rotation(size_t q, double theta) {
    check_qubit(q);
    const Amplitude zero = std::polar(1.0, theta / 2);
    const Amplitude one = std::polar(1.0, -theta / 2);
    for (uint64_t k = 0; k < amplitudes_.size(); k++) {
        amplitudes_[k] *= ((k >> q) & 1) ? one : zero;
    }
}

void StateVector::apply_pauli(const PauliString &p) {
    if (p.span() > num_qubits_) {
        throw AddressingError("Pauli support exceeds the " + std::to_string(num_qubits_) + "-qubit register");
    }
    if (p.is_identity()) {
        return;
    }
    // i^{#Y} X^xs Z^zs: Z first, then X, then the Y phase.
    static const Amplitude kIPowers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const Amplitude phase = kIPowers[std::popcount(p.xs & p.zs) % 4];
    std::vector<Amplitude> out(amplitudes_.size());
    for (uint64_t k = 0; k < amplitudes_.size(); k++) {
        Amplitude a = amplitudes_[k];
        if (std::popcount(k & p.zs) & 1) {
            a = -a;
        }
        out[k ^ p.xs] = a * phase;
    }
    amplitudes_ = std::move(out);
}

double StateVector::probability_x(size_t q, int value) const {
    check_qubit(q);
    if (value != 1 && value != -1) {
        throw std::invalid_argument("measurement value must be +1 or -1");
    }
    const uint64_t stride = uint64_t{1} << q;
    double plus = 0;
    double minus = 0;
    for (uint64_t k = 0; k < amplitudes_.size(); k++) {
        if (k & stride) {
            continue;
        }
        const Amplitude a0 = amplitudes_[k];
        const Amplitude a1 = amplitudes_[k | stride];
        plus += std::norm(a0 + a1);
        minus += std::norm(a0 - a1);
    }
    double total = plus + minus;
    return (value == 1 ? plus : minus) / total;
}

void StateVector::project_x(size_t q, int value, double probability) {
    check_qubit(q);
    const uint64_t stride = uint64_t{1} << q;
    const double scale = 0.5 / std::sqrt(probability);
    for (uint64_t k = 0; k < amplitudes_.size(); k++) {
        if (k & stride) {
            continue;
        }
        const Amplitude a0 = amplitudes_[k];
        const Amplitude a1 = amplitudes_[k | stride];
        const Amplitude c = (value == 1 ? a0 + a1 : a0 - a1) * scale;
        amplitudes_[k] = c;
        amplitudes_[k | stride] = value == 1 ? c : -c;
    }
}

MeasurementOutcome StateVector::measure_x(size_t q, std::optional<int> forced, std::mt19937_64 *rng) {
    const double p_plus = probability_x(q, 1);
    int value;
    if (forced.has_value()) {
        value = *forced;
        if (value != 1 && value != -1) {
            throw std::invalid_argument("forced outcome must be +1 or -1");
        }
    } else {
        if (rng == nullptr) {
            throw std::invalid_argument("unforced measurement needs a random source");
        }
        value = std::uniform_real_distribution<double>(0.0, 1.0)(*rng) < p_plus ? 1 : -1;
    }
    const double p = value == 1 ? p_plus : 1 - p_plus;
    if (p <= kBranchEpsilon) {
        throw BranchError(
            "X outcome " + std::to_string(value) + " on qubit " + std::to_string(q) + " has probability " +
            std::to_string(p));
    }
    project_x(q, value, p);
    return MeasurementOutcome{value, p};
}

void StateVector::append_plus_qubit() {
    if (num_qubits_ + 1 > kMaxQubits) {
        throw SizeError("register would exceed " + std::to_string(kMaxQubits) + " qubits");
    }
    const size_t dim = amplitudes_.size();
    const double s = 1.0 / std::sqrt(2.0);
    amplitudes_.resize(2 * dim);
    for (size_t k = 0; k < dim; k++) {
        amplitudes_[k] *= s;
        amplitudes_[k + dim] = amplitudes_[k];
    }
    num_qubits_++;
}

void StateVector::remove_x_eigenqubit(size_t q, int value) {
    check_qubit(q);
    if (num_qubits_ == 1) {
        throw SizeError("cannot remove the last qubit of a register");
    }
    const uint64_t stride = uint64_t{1} << q;
    const uint64_t low_mask = stride - 1;
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<Amplitude> out(amplitudes_.size() / 2);
    for (uint64_t k = 0; k < out.size(); k++) {
        uint64_t idx0 = ((k & ~low_mask) << 1) | (k & low_mask);
        const Amplitude a0 = amplitudes_[idx0];
        const Amplitude a1 = amplitudes_[idx0 | stride];
        out[k] = (value == 1 ? a0 + a1 : a0 - a1) * s;
    }
    amplitudes_ = std::move(out);
    num_qubits_--;
}

double fidelity(const StateVector &s, const StateVector &t) {
    if (s.num_qubits() != t.num_qubits()) {
        throw SizeError("fidelity of states with different qubit counts");
    }
    Amplitude overlap = 0;
    auto a = s.amplitudes();
    auto b = t.amplitudes();
    for (size_t k = 0; k < a.size(); k++) {
        overlap += std::conj(a[k]) * b[k];
    }
    return std::norm(overlap);
}

StateVector new_plus_state(size_t num_qubits) {
    return StateVector::plus_state(num_qubits);
}

StateVector apply_cz_theta(StateVector s, size_t i, size_t j, double theta) {
    s.apply_cz_theta(i, j, theta);
    return s;
}

StateVector apply_cphase(StateVector s, size_t i, size_t j) {
    s.apply_cphase(i, j);
    return s;
}

StateVector apply_pauli(StateVector s, const PauliString &p) {
    s.apply_pauli(p);
    return s;
}

std::pair<MeasurementOutcome, StateVector> measure_x(
    StateVector s, size_t q, std::optional<int> forced, std::mt19937_64 &rng) {
    MeasurementOutcome m = s.measure_x(q, forced, &rng);
    return {m, std::move(s)};
}

}  // namespace biasforge
