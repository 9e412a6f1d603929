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

#ifndef BIASFORGE_GADGET_H
#define BIASFORGE_GADGET_H

#include <array>
#include <boost/rational.hpp>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "biasforge/statevec.h"

namespace biasforge {

/// Which magic state the gadget is asked to produce.
enum class Target : uint8_t {
    kPlusI,   // theta = pi/2, output |+i>_L
    kT,       // theta = pi/4, output |T>_L
    kCustom,  // caller-supplied theta, output |0>_L + e^{i theta}|1>_L
};

struct GadgetConfig {
    int n = 3;
    double theta = std::numbers::pi / 4;
    int r_z = 3;
    int r_zz = 3;
    Target target = Target::kT;

    /// Config for a named target with r_z = r_zz = r. `theta` is only read for kCustom.
    static GadgetConfig make(Target target, int n, int r, double theta = 0);

    /// Throws ConfigError unless n, r_z, r_zz are odd and positive, theta matches
    /// a named target and the circuit fits the simulator.
    void validate() const;
};

enum class LocationKind : uint8_t { kPrepX, kMeasX, kCZTheta, kCphase };

enum class Block : uint8_t { kBlock1, kBlock2, kBlock3, kAncilla };

/// One elementary operation of the circuit and the coordinate of fault injection.
struct Location {
    LocationKind kind;
    uint32_t num_qubits;
    std::array<uint32_t, 2> qubits;
    uint32_t step;

    std::span<const uint32_t> targets() const {
        return {qubits.data(), num_qubits};
    }
};

/// Circuit qubit numbering is block-major: block 1 is [0, n), block 2 is [n, 2n),
/// block 3 is [2n, 3n), and ancillas follow in order of first use.
struct QubitRole {
    Block block;
    uint32_t index;
};

struct Circuit {
    int n = 0;
    int r_z = 0;
    int r_zz = 0;
    std::vector<Location> locations;
    std::vector<QubitRole> qubits;

    size_t num_qubits() const {
        return qubits.size();
    }
    size_t num_measurements() const;
    uint32_t data_qubit(Block block, int index) const;
};

/// 2n + n + r_z(n+2) + n + n + r_zz(2n+2) + n.
size_t expected_location_count(const GadgetConfig &cfg);

/// Fig.-1 ordering: prep blocks 1,2; CZ(theta) pairs; r_z x M_ZL on block 1;
/// X-measure block 1; prep block 3; r_zz x M_ZLZL on blocks 2,3; X-measure block 2.
Circuit build_circuit(const GadgetConfig &cfg);

/// A Pauli injected right after a location (right before readout for MeasX).
/// The Pauli is written in circuit-qubit coordinates.
struct Fault {
    uint32_t location;
    PauliString pauli;
    bool operator==(const Fault &) const = default;
};

enum class LogicalClass : uint8_t { kI = 0, kXL = 1, kZL = 2, kYL = 3, kRejected = 4 };

std::string logical_class_name(LogicalClass c);

/// How residual Z errors left on the output block are attributed.
enum class ResidualZPolicy : uint8_t {
    // Z patterns on fewer than n output qubits are left for the next error
    // correction round; only an undetectable Z^n counts as Z_L.
    kSyndromeFree,
    // Ideal minimum-weight repetition-code decoding is applied to the output first.
    kMinWeight,
};

struct Classification {
    LogicalClass logical_class = LogicalClass::kI;
    double fidelity = 1;       // fidelity with the chosen class image of the target
    bool wrong_angle = false;  // no Pauli image matched; counted as Z_L
    bool anomalous = false;    // every class fidelity below 1/2
};

/// Measurement bits use 0 for outcome +1 and 1 for outcome -1, in circuit order.
struct GadgetOutcome {
    bool accepted = false;
    uint8_t b = 0;          // majority of the M_ZLZL ancilla bits
    uint8_t zl_parity = 0;  // majority of the M_ZL ancilla bits
    std::vector<int8_t> block1_x;
    std::vector<int8_t> block2_x;
    PauliString correction;  // on block 3, circuit coordinates
    LogicalClass logical_class = LogicalClass::kRejected;
    double fidelity = 0;
    bool wrong_angle = false;
    bool anomalous = false;
};

/// Per-measurement forcing: 0 samples, +1/-1 forces that outcome.
using ForcedOutcomes = std::vector<int8_t>;

/// Aggregate over every measurement branch of one fault configuration.
struct BranchSummary {
    double total = 0;       // sum of visited branch probabilities
    double accepted = 0;    // P(accept)
    std::array<double, 4> by_class{};  // P(accept and class), indexed by LogicalClass
    double anomalous = 0;
    double wrong_angle = 0;
};

/// A leaf of the measurement-branch tree.
struct Branch {
    double probability;
    std::span<const uint8_t> record;
    const StateVector &block3;
};

/// Exact 2^{1-n} C(n, (n-1)/2).
boost::rational<int64_t> accept_probability_exact(int n);

/// Fraction of the 2^n equiprobable noiseless block-2 patterns (block 1
/// correlated) that pass the acceptance rule. Counts patterns only, so it
/// reaches sizes the state simulator cannot. Custom targets fall back to the
/// correction table of a constructed Gadget.
boost::rational<int64_t> accept_probability_by_branch_count(const GadgetConfig &cfg);

/// The magic-state preparation gadget for one configuration: circuit, ideal
/// correction lookup, execution and decoding.
class Gadget {
   public:
    explicit Gadget(GadgetConfig cfg, ResidualZPolicy policy = ResidualZPolicy::kSyndromeFree);

    const GadgetConfig &config() const {
        return cfg_;
    }
    const Circuit &circuit() const {
        return circuit_;
    }
    ResidualZPolicy policy() const {
        return policy_;
    }

    /// Executes once, sampling unforced measurements from `rng`.
    GadgetOutcome run(std::span<const Fault> faults, const ForcedOutcomes *forced, std::mt19937_64 &rng) const;

    /// Visits every measurement branch whose probability exceeds 1e-12 relative to its parent.
    void for_each_branch(std::span<const Fault> faults, const std::function<void(const Branch &)> &visit) const;

    /// Decodes and classifies every branch of one fault configuration.
    BranchSummary summarize(std::span<const Fault> faults) const;

    /// Classical decoding. `logical_class` is kI for accepted records (the
    /// quantum state is needed to refine it) and kRejected otherwise.
    GadgetOutcome decode(std::span<const uint8_t> raw) const;

    /// Classifies a block-3 output state (n-qubit register) after applying
    /// `correction` (circuit coordinates).
    Classification classify(const StateVector &block3, const PauliString &correction) const;

    /// |0>_L + e^{i theta}|1>_L on n qubits.
    StateVector target_state() const;

    /// Logical correction (0=I, 1=X_L, 2=Z_L, 3=Y_L) for an ideal branch key, if
    /// that branch can be corrected to the target.
    std::optional<int> correction_for(int zl_parity, int b, int alpha_count, bool anticorrelated) const;

    /// Physical Pauli on block 3 (circuit coordinates) for a logical index.
    PauliString logical_pauli(int logical) const;

    /// Acceptance predicate on block X outcomes alone (bits, 0 = +1).
    bool outcomes_accepted(std::span<const uint8_t> block1, std::span<const uint8_t> block2, int zl, int b) const;

   private:
    struct Frame;
    void build_corrections();
    void explore(
        size_t loc,
        Frame &frame,
        const std::vector<PauliString> &faults_by_loc,
        const ForcedOutcomes *forced,
        std::mt19937_64 *rng,
        const std::function<void(const Branch &)> &visit) const;
    std::vector<PauliString> place_faults(std::span<const Fault> faults) const;
    size_t key_index(int zl, int b, int alpha, bool anti) const;

    GadgetConfig cfg_;
    ResidualZPolicy policy_;
    Circuit circuit_;
    // Register slot of every circuit qubit at fault-injection time, per location (-1 if not live).
    std::vector<std::vector<int8_t>> fault_slots_;
    std::vector<std::optional<int>> corrections_;
    std::vector<uint32_t> classify_candidates_;
};

// Free-function forms.
GadgetOutcome run(
    const Circuit &circuit,
    const GadgetConfig &cfg,
    std::span<const Fault> faults,
    const ForcedOutcomes *forced,
    std::mt19937_64 &rng);
GadgetOutcome decode(const GadgetConfig &cfg, std::span<const uint8_t> raw);
Classification classify_logical(const StateVector &block3, const PauliString &correction, const GadgetConfig &cfg);

}  // namespace biasforge

#endif
