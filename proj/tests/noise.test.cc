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

#include "biasforge/noise.h"

#include <bit>
#include <cmath>

#include "biasforge/errors.h"
#include "gtest/gtest.h"

using namespace biasforge;

namespace {

NoiseParams params(double p_x, double p_z, double p_zz) {
    NoiseParams np;
    np.p_x = p_x;
    np.p_z = p_z;
    np.p_zz = p_zz;
    return np;
}

}  // namespace

TEST(noise, params_validation) {
    EXPECT_NO_THROW(params(0, 0, 0).validate());
    EXPECT_NO_THROW(params(1e-4, 1e-3, 1e-4).validate());
    EXPECT_THROW(params(1e-3, 1e-4, 0).validate(), ConfigError);
    EXPECT_THROW(params(0, 1.5, 0).validate(), ConfigError);
    EXPECT_THROW(params(0, 1e-3, -1).validate(), ConfigError);
    EXPECT_EQ(params(1e-5, 1e-3, 0).eta(), 100);
    EXPECT_TRUE(std::isinf(params(0, 1e-3, 0).eta()));

    NoiseParams np = NoiseParams::from_bias(1e-3, 1000);
    EXPECT_DOUBLE_EQ(np.p_x, 1e-6);
    EXPECT_DOUBLE_EQ(np.p_zz, 1e-6);
    EXPECT_DOUBLE_EQ(NoiseParams::from_bias(1e-3, 10, 0.5e-3).p_zz, 0.5e-3);
    EXPECT_THROW(NoiseParams::from_bias(1e-3, 0.5), ConfigError);
}

TEST(noise, event_inventory) {
    for (int n : {1, 3}) {
        for (int r : {1, 3}) {
            Circuit c = build_circuit(GadgetConfig::make(Target::kT, n, r));
            // Preparations and measurements: blocks 1-3 prepared, blocks 1-2 measured, ancillas both.
            int single = 5 * n + 2 * r + 2 * r;
            int gates = n + r * n + r * 2 * n;
            auto events = fault_events(c, false);
            EXPECT_EQ(events.size(), static_cast<size_t>(single + 5 * gates));
            for (size_t i = 1; i < events.size(); i++) {
                EXPECT_LE(events[i - 1].location, events[i].location);
            }
            EXPECT_GT(fault_events(c, true).size(), events.size());
        }
    }
}

TEST(noise, idle_events_touch_only_live_untouched_qubits) {
    Circuit c = build_circuit(GadgetConfig::make(Target::kT, 1, 1));
    for (const FaultEvent &e : fault_events(c, true)) {
        if (e.kind != EventKind::kIdleZ && e.kind != EventKind::kIdleX) {
            continue;
        }
        const Location &l = c.locations[e.location];
        uint32_t q = std::countr_zero(e.pauli.xs | e.pauli.zs);
        for (uint32_t j = 0; j < c.locations.size(); j++) {
            if (c.locations[j].step == l.step) {
                for (uint32_t t : c.locations[j].targets()) {
                    EXPECT_NE(t, q);
                }
            }
        }
    }
}

TEST(noise, merge_faults) {
    std::vector<Fault> f = {{3, PauliString::z(1)}, {1, PauliString::x(0)}, {3, PauliString::z(1)}, {1, PauliString::z(0)}};
    auto merged = merge_faults(f);
    ASSERT_EQ(merged.size(), 1u);
    EXPECT_EQ(merged[0].location, 1u);
    EXPECT_EQ(merged[0].pauli, PauliString::y(0));
}

TEST(noise, sample_faults_trivial_cases) {
    Circuit c = build_circuit(GadgetConfig::make(Target::kT, 3, 1));
    std::mt19937_64 rng(1);
    for (int t = 0; t < 100; t++) {
        EXPECT_TRUE(sample_faults(c, params(0, 0, 0), rng).faults.empty());
    }
    FaultSet all = sample_faults(c, params(0, 1, 0), rng);
    ASSERT_EQ(all.faults.size(), c.locations.size());
    for (size_t i = 0; i < all.faults.size(); i++) {
        EXPECT_EQ(all.faults[i].location, i);
        PauliString expected;
        for (uint32_t q : c.locations[i].targets()) {
            expected *= PauliString::z(q);
        }
        EXPECT_EQ(all.faults[i].pauli, expected);
    }
}

TEST(noise, sample_faults_mean_count) {
    Circuit c = build_circuit(GadgetConfig::make(Target::kT, 3, 3));
    size_t opportunities = 0;
    for (const Location &l : c.locations) {
        opportunities += l.num_qubits;
    }
    std::mt19937_64 rng(12345);
    const int samples = 100000;
    uint64_t z_count = 0;
    for (int s = 0; s < samples; s++) {
        FaultSet fs = sample_faults(c, params(0, 1e-3, 0), rng);
        for (size_t i = 1; i < fs.faults.size(); i++) {
            ASSERT_LT(fs.faults[i - 1].location, fs.faults[i].location);
        }
        for (const Fault &f : fs.faults) {
            EXPECT_EQ(f.pauli.xs, 0u);
            z_count += std::popcount(f.pauli.zs);
        }
    }
    double mean = static_cast<double>(opportunities) * 1e-3 * samples;
    EXPECT_NEAR(static_cast<double>(z_count), mean, 5 * std::sqrt(mean));
}

TEST(noise, mc_zero_noise) {
    RateEstimate e = estimate_rates_mc(GadgetConfig::make(Target::kT, 3, 1), params(0, 0, 0), 4000, 9, 1);
    EXPECT_EQ(e.e_x, 0);
    EXPECT_EQ(e.e_z, 0);
    EXPECT_EQ(e.e_y, 0);
    // Born-rule rejection for n = 3 at pi/4 is 1 - 3/8.
    double sigma = std::sqrt(0.625 * 0.375 / 4000);
    EXPECT_NEAR(e.reject_rate, 0.625, 5 * sigma);

    RateEstimate plus_i = estimate_rates_mc(GadgetConfig::make(Target::kPlusI, 3, 1), params(0, 0, 0), 500, 9, 1);
    EXPECT_EQ(plus_i.reject_rate, 0);
}

TEST(noise, mc_is_deterministic_across_threads) {
    GadgetConfig cfg = GadgetConfig::make(Target::kT, 3, 1);
    NoiseParams np = NoiseParams::from_bias(3e-3, 10);
    RateEstimate a = estimate_rates_mc(cfg, np, 3000, 42, 1);
    RateEstimate b = estimate_rates_mc(cfg, np, 3000, 42, 3);
    RateEstimate c = estimate_rates_mc(cfg, np, 3000, 42, 1);
    EXPECT_EQ(a.e_x, b.e_x);
    EXPECT_EQ(a.e_z, b.e_z);
    EXPECT_EQ(a.accepted, b.accepted);
    EXPECT_EQ(a.e_x, c.e_x);
    RateEstimate d = estimate_rates_mc(cfg, np, 3000, 43, 1);
    EXPECT_NE(a.accepted, d.accepted);
}

TEST(noise, mc_errors) {
    GadgetConfig cfg = GadgetConfig::make(Target::kT, 3, 1);
    EXPECT_THROW(estimate_rates_mc(cfg, params(0, 0, 0), 0, 1), ConfigError);
    bool thrown = false;
    for (uint64_t seed = 0; seed < 20 && !thrown; seed++) {
        try {
            estimate_rates_mc(cfg, params(0, 0, 0), 1, seed, 1);
        } catch (const EstimationError &e) {
            thrown = true;
            EXPECT_EQ(e.reject_rate, 1);
        }
    }
    EXPECT_TRUE(thrown);
}

TEST(noise, mc_agrees_with_enumeration) {
    GadgetConfig cfg = GadgetConfig::make(Target::kT, 3, 1);
    NoiseParams np = NoiseParams::from_bias(1e-3, 100);
    RateEstimate mc = estimate_rates_mc(cfg, np, 40000, 5, 0);
    RateEstimate en = enumerate_faults(cfg, np, 2);
    EXPECT_NEAR(mc.e_x, en.e_x, 3 * mc.ci95_x);
    EXPECT_NEAR(mc.reject_rate, en.reject_rate, 0.02);
}

TEST(noise, enumeration_orders) {
    GadgetConfig cfg = GadgetConfig::make(Target::kPlusI, 3, 3);
    EXPECT_THROW(enumerate_faults(cfg, params(0, 1e-3, 0), 3), UnsupportedOrderError);
    EXPECT_THROW(enumerate_faults(cfg, params(0, 1e-3, 0), 0), UnsupportedOrderError);

    // Without X or ZZ events no single fault yields an accepted Z_L.
    RateEstimate e = enumerate_faults(cfg, params(0, 1e-3, 0), 1);
    EXPECT_EQ(e.e_z, 0);
    EXPECT_EQ(e.e_x, 0);

    // On the T state X_L and Z_L are distinguishable. A single X on an M_ZLZL ancilla spreads to Z on all of block 3, so the
    // first-order Z_L rate is linear in p_x with coefficient at most 3nr.
    RateEstimate x_only = enumerate_faults(GadgetConfig::make(Target::kT, 3, 3), params(1e-7, 1e-7, 0), 1);
    EXPECT_GT(x_only.e_z, 0);
    EXPECT_LE(x_only.e_z / 1e-7, 3 * 3 * 3);
}

TEST(noise, first_order_x_coefficient) {
    GadgetConfig cfg = GadgetConfig::make(Target::kT, 3, 3);
    RateEstimate e = enumerate_faults(cfg, params(1e-8, 1e-8, 0), 1);
    double coefficient = e.e_x / 1e-8;
    EXPECT_GT(coefficient, 1);
    EXPECT_LE(coefficient, 3 * (3 * 3 + 2));
}

TEST(noise, correlated_zz_enters_at_first_order) {
    GadgetConfig cfg = GadgetConfig::make(Target::kT, 3, 3);
    NoiseParams np = params(1e-6, 1e-4, 1e-5);
    RateEstimate e = enumerate_faults(cfg, np, 2);
    EXPECT_GE(e.e_z, 3 * np.p_zz * (1 - 1e-2));
    EXPECT_GT(e.total_probability_weight, 0.99);
    EXPECT_LE(e.total_probability_weight, 1);
}

TEST(noise, fault_table_reweighting_matches_direct) {
    Gadget g(GadgetConfig::make(Target::kT, 1, 1));
    FaultTable table(g, 2);
    for (double p_z : {1e-4, 1e-3, 1e-2}) {
        NoiseParams np = NoiseParams::from_bias(p_z, 10);
        RateEstimate a = table.evaluate(np);
        RateEstimate b = enumerate_faults(g.config(), np, 2);
        EXPECT_EQ(a.e_x, b.e_x);
        EXPECT_EQ(a.e_z, b.e_z);
    }
    NoiseParams idle = NoiseParams::from_bias(1e-3, 10);
    idle.idle_multiplier = 1;
    EXPECT_THROW(table.evaluate(idle), ConfigError);
    EXPECT_NO_THROW(enumerate_faults(g.config(), idle, 1));
}

TEST(noise, enumeration_handles_certain_events) {
    // p_z = 1 makes every configuration without all Z events weightless.
    Gadget g(GadgetConfig::make(Target::kPlusI, 1, 1));
    FaultTable table(g, 1);
    EXPECT_THROW(table.evaluate(params(0, 1, 0)), EstimationError);
}

TEST(noise, first_order_rates_are_linear) {
    GadgetConfig cfg = GadgetConfig::make(Target::kT, 3, 1);
    RateEstimate a = enumerate_faults(cfg, params(1e-7, 1e-6, 0), 1);
    RateEstimate b = enumerate_faults(cfg, params(2e-7, 1e-6, 0), 1);
    RateEstimate c = enumerate_faults(cfg, params(4e-7, 1e-6, 0), 1);
    // Equal steps in p_x give equal steps in e_x up to O(p^2).
    EXPECT_NEAR((c.e_x - b.e_x) / (b.e_x - a.e_x), 2, 1e-3);
}
