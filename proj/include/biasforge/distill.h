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

#ifndef BIASFORGE_DISTILL_H
#define BIASFORGE_DISTILL_H

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "biasforge/bounds.h"

namespace biasforge {

/// A CSS code with bit-packed check rows (bit j = qubit j).
struct CssCode {
    int n_phys = 0;
    std::vector<uint32_t> x_checks;
    std::vector<uint32_t> z_checks;
    uint32_t logical_x = 0;
    uint32_t logical_z = 0;

    /// The punctured Reed-Muller [[15,1,3]] code: X-checks are the four bit
    /// planes of the column labels 1..15, Z-checks add their pairwise products.
    static CssCode reed_muller_15();

    /// Throws ConfigError if checks do not commute or the logicals are not a
    /// commuting-with-checks, mutually anticommuting pair.
    void validate() const;

    bool operator==(const CssCode &) const = default;
};

/// Plain-text fixture: '#' comments, then sections "n", "x_checks <k>",
/// "z_checks <k>", "logical_x", "logical_z", each followed by rows of 0/1.
std::string to_fixture(const CssCode &code);
CssCode parse_fixture(std::string_view text);
CssCode load_fixture(const std::string &path);

/// Counts, by Hamming weight, the error patterns of one Pauli type that have
/// trivial syndrome, split into harmless and logical ones.
struct WeightEnumerator {
    std::vector<uint64_t> harmless;
    std::vector<uint64_t> logical;
};

/// `checks` detect the errors; an undetected error is logical when it has odd
/// overlap with `dual_logical`. The pattern space is scanned in `partitions`
/// independent chunks; the result does not depend on the partition count.
WeightEnumerator undetected_enumerator(
    int n_phys, const std::vector<uint32_t> &checks, uint32_t dual_logical, int partitions = 1);

/// Minimum weight of an undetected logical pattern (0 if there is none).
int min_logical_weight(const WeightEnumerator &w);

/// Independent per-copy X and Z error rates.
struct Channel {
    long double e_x = 0;
    long double e_z = 0;

    /// Throws ConfigError unless both rates lie in [0, 1/2).
    void validate() const;
};

struct DetectionResult {
    Channel out;
    long double p_accept = 1;  // p_accept_x * p_accept_z
    long double p_accept_x = 1;
    long double p_accept_z = 1;
};

/// One round of error detection with ideal Cliffords, post-selected on trivial syndromes.
DetectionResult css_map(const CssCode &code, const Channel &in);
DetectionResult rm15_map(const Channel &in);

/// Applies rm15_map `layers` times. Throws SaturationError naming the layer
/// whose output leaves [0, 1/2).
Channel concatenate(Channel start, int layers);

/// Average non-Clifford gate count: 4 * 15^l with the gadget, 15^l without.
double overhead(bool use_gadget, int layers);

/// e_z / e_x, infinite when e_x = 0.
long double final_bias(const Channel &c);

/// Input channel model of the reference (no noise-biased encoding) preparation.
enum class BaselineModel {
    // The same gadget with n = 1: one CZ(theta), its repeated measurements, the bound rates.
    kUnencodedGadget,
    // A bare physical preparation with e_x = p_x, e_z = p_z.
    kBareChannel,
};

struct DistillPlan {
    bool use_gadget = false;
    int n = 1;
    int r = 0;  // 0 for the bare channel
    int layers = 0;
    Channel input;
    Channel achieved;
    double overhead = 1;
};

struct PlanOptions {
    PzzRule pzz;
    BaselineModel baseline = BaselineModel::kUnencodedGadget;
    int max_layers = 6;
};

struct PlanResult {
    DistillPlan gadget;
    DistillPlan baseline;

    double savings() const {
        return baseline.overhead / gadget.overhead;
    }
};

/// Throws FeasibilityError if either plan cannot reach `target` within the layer cap.
/// p_x = p_z / eta and p_zz follows `options.pzz`.
PlanResult plan(double target, double p_z, double eta, const PlanOptions &options = {});

/// Same, with explicit noise parameters (`options.pzz` is ignored).
PlanResult plan(double target, const NoiseParams &np, const PlanOptions &options = {});

}  // namespace biasforge

#endif
