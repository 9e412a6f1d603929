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

#include "biasforge/gadget.h"

#include <cmath>
#include <numbers>

#include "biasforge/errors.h"
#include "gtest/gtest.h"

using namespace biasforge;

namespace {

double binom(int n, int k) {
    double r = 1;
    for (int i = 1; i <= k; i++) {
        r = r * (n - k + i) / i;
    }
    return r;
}

// Born-rule acceptance: block-1 X outcomes are independent with P(+1) = cos^2(theta/2)
// and the block-2 pattern equals it or its complement.
double born_accept_probability(int n, double theta) {
    double p = std::pow(std::cos(theta / 2), 2);
    double sum = 0;
    for (int k = 0; k <= n; k++) {
        if (std::abs(n - 2 * k) == 1) {
            sum += binom(n, k) * std::pow(p, k) * std::pow(1 - p, n - k);
        }
    }
    return sum;
}

StateVector corrected(const Gadget &g, const Branch &br, const GadgetOutcome &out) {
    StateVector s = br.block3;
    const uint32_t shift = 2 * g.config().n;
    s.apply_pauli(PauliString{out.correction.xs >> shift, out.correction.zs >> shift});
    return s;
}

}  // namespace

TEST(gadget, config_validation) {
    EXPECT_NO_THROW(GadgetConfig::make(Target::kT, 3, 3).validate());
    EXPECT_THROW(GadgetConfig::make(Target::kT, 2, 3).validate(), ConfigError);
    EXPECT_THROW(GadgetConfig::make(Target::kT, 3, 2).validate(), ConfigError);
    GadgetConfig bad = GadgetConfig::make(Target::kT, 3, 3);
    bad.theta = 0.3;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad.target = Target::kCustom;
    EXPECT_NO_THROW(bad.validate());
    EXPECT_THROW(GadgetConfig::make(Target::kT, 11, 1).validate(), ConfigError);
}

TEST(gadget, circuit_shape) {
    for (int n : {1, 3, 5}) {
        for (int r : {1, 3, 5}) {
            GadgetConfig cfg = GadgetConfig::make(Target::kT, n, r);
            Circuit c = build_circuit(cfg);
            EXPECT_EQ(c.locations.size(), expected_location_count(cfg));
            EXPECT_EQ(c.num_qubits(), static_cast<size_t>(3 * n + 2 * r));
            EXPECT_EQ(c.num_measurements(), static_cast<size_t>(2 * n + 2 * r));
        }
    }
    EXPECT_EQ(build_circuit(GadgetConfig::make(Target::kT, 3, 3)).locations.size(), 57u);
    EXPECT_EQ(build_circuit(GadgetConfig::make(Target::kT, 1, 1)).locations.size(), 13u);

    Circuit c = build_circuit(GadgetConfig::make(Target::kT, 3, 1));
    int cz = 0;
    int cphase = 0;
    for (const Location &l : c.locations) {
        cz += l.kind == LocationKind::kCZTheta;
        cphase += l.kind == LocationKind::kCphase;
    }
    EXPECT_EQ(cz, 3);
    EXPECT_EQ(cphase, 3 + 6);
    EXPECT_EQ(c.data_qubit(Block::kBlock3, 2), 8u);
}

TEST(gadget, accept_probability_exact) {
    EXPECT_EQ(accept_probability_exact(1), boost::rational<int64_t>(1));
    EXPECT_EQ(accept_probability_exact(3), boost::rational<int64_t>(3, 4));
    EXPECT_EQ(accept_probability_exact(5), boost::rational<int64_t>(5, 8));
    EXPECT_EQ(accept_probability_exact(9), boost::rational<int64_t>(126, 256));
    EXPECT_THROW(accept_probability_exact(4), ConfigError);
}

TEST(gadget, accept_probability_by_branch_count) {
    for (int n : {1, 3, 5, 7, 9}) {
        EXPECT_EQ(accept_probability_by_branch_count(GadgetConfig::make(Target::kT, n, 1)), accept_probability_exact(n))
            << n;
        EXPECT_EQ(accept_probability_by_branch_count(GadgetConfig::make(Target::kPlusI, n, 1)), boost::rational<int64_t>(1));
    }
}

TEST(gadget, noiseless_branches_t) {
    for (int n : {3, 5}) {
        Gadget g(GadgetConfig::make(Target::kT, n, 1));
        double total = 0;
        double accepted_probability = 0;
        int leaves = 0;
        int accepted = 0;
        g.for_each_branch({}, [&](const Branch &br) {
            total += br.probability;
            leaves++;
            GadgetOutcome out = g.decode(br.record);
            if (!out.accepted) {
                return;
            }
            accepted++;
            accepted_probability += br.probability;
            EXPECT_GE(fidelity(corrected(g, br, out), g.target_state()), 1 - 1e-8);
        });
        EXPECT_NEAR(total, 1, 1e-9);
        EXPECT_EQ(boost::rational<int64_t>(accepted, leaves), accept_probability_exact(n));
        EXPECT_NEAR(accepted_probability, born_accept_probability(n, std::numbers::pi / 4), 1e-9);
    }
    EXPECT_NEAR(born_accept_probability(3, std::numbers::pi / 4), 3.0 / 8, 1e-12);
}

TEST(gadget, noiseless_branches_plus_i_always_accepted) {
    Gadget g(GadgetConfig::make(Target::kPlusI, 3, 3));
    double total = 0;
    g.for_each_branch({}, [&](const Branch &br) {
        total += br.probability;
        GadgetOutcome out = g.decode(br.record);
        ASSERT_TRUE(out.accepted);
        EXPECT_GE(fidelity(corrected(g, br, out), g.target_state()), 1 - 1e-8);
        EXPECT_EQ(g.classify(br.block3, out.correction).logical_class, LogicalClass::kI);
    });
    EXPECT_NEAR(total, 1, 1e-9);
}

TEST(gadget, target_state) {
    Gadget g(GadgetConfig::make(Target::kPlusI, 1, 1));
    StateVector t = g.target_state();
    EXPECT_NEAR(std::abs(t[0] - std::complex<double>(1 / std::sqrt(2), 0)), 0, 1e-15);
    EXPECT_NEAR(std::abs(t[1] - std::complex<double>(0, 1 / std::sqrt(2))), 0, 1e-15);
}

TEST(gadget, decode_examples) {
    Gadget plus_i(GadgetConfig::make(Target::kPlusI, 3, 1));
    // Record layout: r_z ancilla bits, block 1, r_zz ancilla bits, block 2.
    std::vector<uint8_t> rec = {0, 0, 1, 0, 0, 0, 1, 0};
    GadgetOutcome out = plus_i.decode(rec);
    EXPECT_TRUE(out.accepted);
    EXPECT_EQ(out.block1_x, (std::vector<int8_t>{1, -1, 1}));

    rec = {0, 0, 1, 0, 0, 0, 0, 0};
    EXPECT_FALSE(plus_i.decode(rec).accepted);
    EXPECT_EQ(plus_i.decode(rec).logical_class, LogicalClass::kRejected);
    // Anticorrelated blocks are accepted.
    rec = {0, 1, 0, 1, 0, 0, 1, 0};
    EXPECT_TRUE(plus_i.decode(rec).accepted);

    Gadget t(GadgetConfig::make(Target::kT, 3, 1));
    for (uint32_t pattern = 0; pattern < 8; pattern++) {
        std::vector<uint8_t> r = {0};
        for (int i = 0; i < 3; i++) {
            r.push_back((pattern >> i) & 1);
        }
        r.push_back(0);
        for (int i = 0; i < 3; i++) {
            r.push_back((pattern >> i) & 1);
        }
        int alpha = 3 - std::popcount(pattern);
        EXPECT_EQ(t.decode(r).accepted, alpha == 1 || alpha == 2) << pattern;
    }

    EXPECT_THROW(t.decode(std::vector<uint8_t>(3)), std::invalid_argument);
}

TEST(gadget, majority_votes) {
    Gadget g(GadgetConfig::make(Target::kPlusI, 1, 3));
    std::vector<uint8_t> rec = {1, 0, 1, 0, 0, 1, 1, 0};
    GadgetOutcome out = g.decode(rec);
    EXPECT_EQ(out.zl_parity, 1);
    EXPECT_EQ(out.b, 1);
}

TEST(gadget, forced_alpha_two_reaches_t) {
    Gadget g(GadgetConfig::make(Target::kT, 3, 3));
    // M_ZL bits, block 1, M_ZLZL bits, block 2 with |alpha| = 2.
    ForcedOutcomes forced = {1, 1, 1, 1, 1, -1, 1, 1, 1, 1, 1, -1};
    std::mt19937_64 rng(0);
    GadgetOutcome out = g.run({}, &forced, rng);
    EXPECT_TRUE(out.accepted);
    EXPECT_EQ(out.logical_class, LogicalClass::kI);
    EXPECT_GE(out.fidelity, 1 - 1e-8);
}

TEST(gadget, forced_zero_probability_branch) {
    Gadget g(GadgetConfig::make(Target::kT, 3, 1));
    // Blocks neither correlated nor anticorrelated, which never happens without faults.
    ForcedOutcomes forced = {1, 1, 1, -1, 1, 1, 1, 1};
    std::mt19937_64 rng(0);
    EXPECT_THROW(g.run({}, &forced, rng), BranchError);
}

TEST(gadget, correction_table_covers_accepted_keys) {
    Gadget g(GadgetConfig::make(Target::kT, 3, 1));
    for (int zl = 0; zl < 2; zl++) {
        for (int b = 0; b < 2; b++) {
            for (int alpha = 0; alpha <= 3; alpha++) {
                for (bool anti : {false, true}) {
                    EXPECT_EQ(g.correction_for(zl, b, alpha, anti).has_value(), alpha == 1 || alpha == 2);
                }
            }
        }
    }
    EXPECT_THROW(g.correction_for(0, 0, 4, false), std::out_of_range);
}

TEST(gadget, single_z_faults_never_cause_logical_errors) {
    Gadget g(GadgetConfig::make(Target::kT, 3, 3));
    const Circuit &c = g.circuit();
    for (uint32_t loc = 0; loc < c.locations.size(); loc++) {
        for (uint32_t q : c.locations[loc].targets()) {
            Fault f{loc, PauliString::z(q)};
            BranchSummary s = g.summarize({&f, 1});
            EXPECT_NEAR(s.by_class[1] + s.by_class[2] + s.by_class[3], 0, 1e-12) << loc << " " << q;
            EXPECT_NEAR(s.total, 1, 1e-9);
        }
    }
}

TEST(gadget, zz_fault_on_cz_theta_is_logical_z) {
    Gadget g(GadgetConfig::make(Target::kT, 3, 3));
    const Circuit &c = g.circuit();
    for (uint32_t loc = 0; loc < c.locations.size(); loc++) {
        const Location &l = c.locations[loc];
        if (l.kind != LocationKind::kCZTheta) {
            continue;
        }
        Fault f{loc, PauliString::z(l.qubits[0]) * PauliString::z(l.qubits[1])};
        BranchSummary s = g.summarize({&f, 1});
        EXPECT_GT(s.by_class[2], 0.5);
        EXPECT_GT(s.wrong_angle, 0);
        EXPECT_NEAR(s.by_class[2], s.accepted, 1e-9);
    }
}

TEST(gadget, x_fault_on_block3_is_logical_x) {
    Gadget g(GadgetConfig::make(Target::kT, 3, 1));
    const Circuit &c = g.circuit();
    bool found = false;
    for (uint32_t loc = 0; loc < c.locations.size(); loc++) {
        const Location &l = c.locations[loc];
        if (l.kind != LocationKind::kCphase || c.qubits[l.qubits[1]].block != Block::kBlock3) {
            continue;
        }
        Fault f{loc, PauliString::x(l.qubits[1])};
        BranchSummary s = g.summarize({&f, 1});
        found |= s.by_class[1] > 0;
    }
    EXPECT_TRUE(found);
}

TEST(gadget, residual_z_policies) {
    GadgetConfig cfg = GadgetConfig::make(Target::kT, 3, 1);
    Gadget lenient(cfg, ResidualZPolicy::kSyndromeFree);
    Gadget strict(cfg, ResidualZPolicy::kMinWeight);
    StateVector t = lenient.target_state();
    StateVector one = apply_pauli(t, PauliString::z(0));
    StateVector two = apply_pauli(t, PauliString::z(0) * PauliString::z(1));
    StateVector three = apply_pauli(t, PauliString::z_range(0, 3));
    EXPECT_EQ(lenient.classify(one, {}).logical_class, LogicalClass::kI);
    EXPECT_EQ(strict.classify(one, {}).logical_class, LogicalClass::kI);
    EXPECT_EQ(lenient.classify(two, {}).logical_class, LogicalClass::kI);
    EXPECT_EQ(strict.classify(two, {}).logical_class, LogicalClass::kZL);
    EXPECT_EQ(lenient.classify(three, {}).logical_class, LogicalClass::kZL);
    EXPECT_EQ(strict.classify(three, {}).logical_class, LogicalClass::kZL);

    StateVector x = apply_pauli(t, PauliString::x(1));
    EXPECT_EQ(lenient.classify(x, {}).logical_class, LogicalClass::kXL);
    StateVector y = apply_pauli(x, PauliString::z_range(0, 3));
    EXPECT_EQ(lenient.classify(y, {}).logical_class, LogicalClass::kYL);

    // The correction is given in circuit coordinates (block 3 starts at qubit 2n).
    EXPECT_EQ(lenient.classify(x, PauliString::x(7)).logical_class, LogicalClass::kI);
}

TEST(gadget, classify_flags_anomalies_and_wrong_angles) {
    Gadget g(GadgetConfig::make(Target::kT, 1, 1));
    Classification c = g.classify(StateVector({std::complex<double>(1 / std::sqrt(2)), std::complex<double>(0, 1 / std::sqrt(2))}), {});
    EXPECT_TRUE(c.wrong_angle);
    EXPECT_FALSE(c.anomalous);
    EXPECT_EQ(c.logical_class, LogicalClass::kZL);

    // |000> spreads its weight over every syndrome, so no Pauli image of |T>_L reaches 1/2.
    Gadget g3(GadgetConfig::make(Target::kT, 3, 1));
    Classification anomalous = g3.classify(StateVector::basis_state(3, 0), {});
    EXPECT_LT(anomalous.fidelity, 0.5);
    EXPECT_TRUE(anomalous.anomalous);

    EXPECT_THROW(g.classify(new_plus_state(2), {}), SizeError);
}

TEST(gadget, sampled_runs_are_reproducible) {
    Gadget g(GadgetConfig::make(Target::kT, 3, 1));
    Fault f{0, PauliString::z(0)};
    for (int seed = 0; seed < 5; seed++) {
        std::mt19937_64 a(seed);
        std::mt19937_64 b(seed);
        GadgetOutcome x = g.run({&f, 1}, nullptr, a);
        GadgetOutcome y = g.run({&f, 1}, nullptr, b);
        EXPECT_EQ(x.accepted, y.accepted);
        EXPECT_EQ(x.block2_x, y.block2_x);
        EXPECT_EQ(x.logical_class, y.logical_class);
    }
}

TEST(gadget, fault_addressing) {
    Gadget g(GadgetConfig::make(Target::kT, 1, 1));
    std::mt19937_64 rng(0);
    Fault out_of_range{100, PauliString::z(0)};
    EXPECT_THROW(g.run({&out_of_range, 1}, nullptr, rng), AddressingError);
    // Block 3 (qubit 2) does not exist at the first preparation.
    Fault not_live{0, PauliString::z(2)};
    EXPECT_THROW(g.run({&not_live, 1}, nullptr, rng), AddressingError);
}

TEST(gadget, free_functions) {
    GadgetConfig cfg = GadgetConfig::make(Target::kPlusI, 1, 1);
    Circuit c = build_circuit(cfg);
    std::mt19937_64 rng(3);
    GadgetOutcome out = run(c, cfg, {}, nullptr, rng);
    EXPECT_TRUE(out.accepted);
    EXPECT_EQ(out.logical_class, LogicalClass::kI);
    EXPECT_TRUE(decode(cfg, std::vector<uint8_t>{0, 1, 0, 1}).accepted);
    EXPECT_EQ(logical_class_name(LogicalClass::kYL), "YL");
}
