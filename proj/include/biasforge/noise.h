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

#ifndef BIASFORGE_NOISE_H
#define BIASFORGE_NOISE_H

#include <cstdint>
#include <random>
#include <vector>

#include "biasforge/gadget.h"

namespace biasforge {

struct NoiseParams {
    double p_x = 0;
    double p_z = 0;
    double p_zz = 0;
    /// Per-step idle noise on live, untouched qubits, as a multiple of p_z and p_x. Zero disables idle locations.
    double idle_multiplier = 0;

    /// p_z / p_x; infinite when p_x = 0 and p_z > 0, 1 when both vanish.
    double eta() const;

    /// Throws ConfigError unless 0 <= p_x <= p_z <= 1, 0 <= p_zz <= 1 and the idle rates are probabilities.
    void validate() const;

    /// p_x = p_z / eta; p_zz defaults to p_x when negative.
    static NoiseParams from_bias(double p_z, double eta, double p_zz = -1);
};

enum class EventKind : uint8_t { kZ, kX, kZZ, kIdleZ, kIdleX };

/// One independent elementary fault mechanism.
struct FaultEvent {
    uint32_t location;
    PauliString pauli;
    EventKind kind;

    double probability(const NoiseParams &np) const;
};

/// All elementary events of a circuit, ordered by location. X events at X-basis
/// preparations and measurements are omitted since they act trivially. Idle
/// events are included only when `include_idle` is set.
std::vector<FaultEvent> fault_events(const Circuit &circuit, bool include_idle);

struct FaultSet {
    std::vector<Fault> faults;  // merged per location, strictly increasing location
    double total_probability_weight = 1;
};

/// Merges faults at the same location (Pauli product) and sorts by location.
std::vector<Fault> merge_faults(std::vector<Fault> faults);

FaultSet sample_faults(const Circuit &circuit, const NoiseParams &np, std::mt19937_64 &rng);

struct RateEstimate {
    double e_x = 0;
    double e_z = 0;
    double e_y = 0;
    double reject_rate = 0;
    // Unconditional P(accept and class), the quantity a union bound over fault locations controls.
    double joint_e_x = 0;
    double joint_e_z = 0;
    double joint_e_y = 0;
    uint64_t trials_or_order = 0;
    double ci95_halfwidth = 0;  // largest of the three per-rate half-widths (Monte Carlo only)
    double ci95_x = 0;
    double ci95_z = 0;
    double ci95_y = 0;
    uint64_t accepted = 0;       // accepted trials (Monte Carlo only)
    double anomalous_rate = 0;   // conditional on acceptance, excluded from the three rates
    double wrong_angle_rate = 0; // conditional on acceptance, already included in e_z
    double total_probability_weight = 1;  // enumeration only: probability mass covered
};

/// Random source for trial `trial` of a run seeded with `seed`. Independent of thread layout.
std::mt19937_64 trial_rng(uint64_t seed, uint64_t trial);

/// `threads` = 0 uses the hardware concurrency.
RateEstimate estimate_rates_mc(
    const GadgetConfig &cfg,
    const NoiseParams &np,
    uint64_t trials,
    uint64_t seed,
    unsigned threads = 0,
    ResidualZPolicy policy = ResidualZPolicy::kSyndromeFree);

/// Branch summaries for every configuration of at most `max_order` elementary
/// events. Built once per circuit and reweighted for any noise parameters.
class FaultTable {
   public:
    FaultTable(const Gadget &gadget, int max_order, bool include_idle = false);

    int max_order() const {
        return max_order_;
    }
    const std::vector<FaultEvent> &events() const {
        return events_;
    }
    size_t num_configurations() const {
        return summaries_.size();
    }

    RateEstimate evaluate(const NoiseParams &np) const;

   private:
    int max_order_;
    std::vector<FaultEvent> events_;
    // Event indices of each configuration; -1 marks an unused slot.
    std::vector<std::array<int32_t, 2>> configs_;
    std::vector<BranchSummary> summaries_;
};

RateEstimate enumerate_faults(const GadgetConfig &cfg, const NoiseParams &np, int max_order);

}  // namespace biasforge

#endif
