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

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "biasforge/errors.h"

namespace biasforge {

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

bool is_probability(double p) {
    return p >= 0 && p <= 1;
}

struct Counts {
    uint64_t trials = 0;
    uint64_t accepted = 0;
    std::array<uint64_t, 4> by_class{};
    uint64_t anomalous = 0;
    uint64_t wrong_angle = 0;

    void operator+=(const Counts &o) {
        trials += o.trials;
        accepted += o.accepted;
        for (size_t k = 0; k < 4; k++) {
            by_class[k] += o.by_class[k];
        }
        anomalous += o.anomalous;
        wrong_angle += o.wrong_angle;
    }
};

}  // namespace

double NoiseParams::eta() const {
    if (p_x == 0) {
        return p_z == 0 ? 1 : std::numeric_limits<double>::infinity();
    }
    return p_z / p_x;
}

void NoiseParams::validate() const {
    if (!is_probability(p_x) || !is_probability(p_z) || !is_probability(p_zz)) {
        throw ConfigError("noise rates must lie in [0, 1]");
    }
    if (p_x > p_z) {
        throw ConfigError("noise must be Z-biased: p_x <= p_z");
    }
    if (!(idle_multiplier >= 0) || idle_multiplier * p_z > 1) {
        throw ConfigError("idle multiplier must be non-negative and keep idle rates below 1");
    }
}

NoiseParams NoiseParams::from_bias(double p_z, double eta, double p_zz) {
    if (!(eta >= 1)) {
        throw ConfigError("bias eta must be at least 1");
    }
    NoiseParams np;
    np.p_z = p_z;
    np.p_x = std::isinf(eta) ? 0 : p_z / eta;
    np.p_zz = p_zz < 0 ? np.p_x : p_zz;
    np.validate();
    return np;
}

double FaultEvent::probability(const NoiseParams &np) const {
    switch (kind) {
        case EventKind::kZ:
            return np.p_z;
        case EventKind::kX:
            return np.p_x;
        case EventKind::kZZ:
            return np.p_zz;
        case EventKind::kIdleZ:
            return np.idle_multiplier * np.p_z;
        case EventKind::kIdleX:
            return np.idle_multiplier * np.p_x;
    }
    return 0;
}

std::vector<FaultEvent> fault_events(const Circuit &circuit, bool include_idle) {
    std::vector<FaultEvent> events;
    const auto &locs = circuit.locations;

    // Lifetime of every qubit in steps, for idle events.
    std::vector<uint32_t> born(circuit.num_qubits(), 0);
    std::vector<uint32_t> dies(circuit.num_qubits(), 0);
    for (const Location &l : locs) {
        if (l.kind == LocationKind::kPrepX) {
            born[l.qubits[0]] = l.step;
        } else if (l.kind == LocationKind::kMeasX) {
            dies[l.qubits[0]] = l.step;
        }
    }

    for (uint32_t i = 0; i < locs.size(); i++) {
        const Location &l = locs[i];
        for (uint32_t q : l.targets()) {
            events.push_back({i, PauliString::z(q), EventKind::kZ});
            if (l.num_qubits == 2) {
                events.push_back({i, PauliString::x(q), EventKind::kX});
            }
        }
        if (l.num_qubits == 2) {
            events.push_back({i, PauliString::z(l.qubits[0]) * PauliString::z(l.qubits[1]), EventKind::kZZ});
        }
        bool first_at_step = i == 0 || locs[i - 1].step != l.step;
        if (!include_idle || !first_at_step) {
            continue;
        }
        std::vector<bool> touched(circuit.num_qubits(), false);
        for (uint32_t j = i; j < locs.size() && locs[j].step == l.step; j++) {
            for (uint32_t q : locs[j].targets()) {
                touched[q] = true;
            }
        }
        for (uint32_t q = 0; q < circuit.num_qubits(); q++) {
            if (!touched[q] && born[q] < l.step && dies[q] > l.step) {
                events.push_back({i, PauliString::z(q), EventKind::kIdleZ});
                events.push_back({i, PauliString::x(q), EventKind::kIdleX});
            }
        }
    }
    return events;
}

std::vector<Fault> merge_faults(std::vector<Fault> faults) {
    std::stable_sort(faults.begin(), faults.end(), [](const Fault &a, const Fault &b) {
        return a.location < b.location;
    });
    std::vector<Fault> out;
    for (const Fault &f : faults) {
        if (!out.empty() && out.back().location == f.location) {
            out.back().pauli *= f.pauli;
        } else {
            out.push_back(f);
        }
    }
    std::erase_if(out, [](const Fault &f) { return f.pauli.is_identity(); });
    return out;
}

namespace {

std::vector<Fault> sample_events(const std::vector<FaultEvent> &events, const NoiseParams &np, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Fault> fired;
    for (const FaultEvent &e : events) {
        double p = e.probability(np);
        if (p > 0 && unif(rng) < p) {
            fired.push_back({e.location, e.pauli});
        }
    }
    return merge_faults(std::move(fired));
}

}  // namespace

FaultSet sample_faults(const Circuit &circuit, const NoiseParams &np, std::mt19937_64 &rng) {
    np.validate();
    FaultSet out;
    out.faults = sample_events(fault_events(circuit, np.idle_multiplier > 0), np, rng);
    return out;
}

std::mt19937_64 trial_rng(uint64_t seed, uint64_t trial) {
    uint64_t a = splitmix64(seed);
    uint64_t b = splitmix64(a ^ splitmix64(trial));
    std::seed_seq seq{
        static_cast<uint32_t>(a), static_cast<uint32_t>(a >> 32), static_cast<uint32_t>(b),
        static_cast<uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

RateEstimate estimate_rates_mc(
    const GadgetConfig &cfg,
    const NoiseParams &np,
    uint64_t trials,
    uint64_t seed,
    unsigned threads,
    ResidualZPolicy policy) {
    if (trials == 0) {
        throw ConfigError("trials must be at least 1");
    }
    np.validate();
    const Gadget gadget(cfg, policy);
    const auto events = fault_events(gadget.circuit(), np.idle_multiplier > 0);

    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<uint64_t>(threads, trials));

    std::vector<Counts> partial(threads);
    auto work = [&](unsigned t) {
        uint64_t begin = trials * t / threads;
        uint64_t end = trials * (t + 1) / threads;
        Counts &c = partial[t];
        for (uint64_t i = begin; i < end; i++) {
            std::mt19937_64 rng = trial_rng(seed, i);
            std::vector<Fault> faults = sample_events(events, np, rng);
            GadgetOutcome out = gadget.run(faults, nullptr, rng);
            c.trials++;
            if (!out.accepted) {
                continue;
            }
            c.accepted++;
            if (out.anomalous) {
                c.anomalous++;
                continue;
            }
            c.wrong_angle += out.wrong_angle;
            c.by_class[static_cast<size_t>(out.logical_class)]++;
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; t++) {
            pool.emplace_back(work, t);
        }
        for (auto &th : pool) {
            th.join();
        }
    }
    Counts total;
    for (const Counts &c : partial) {
        total += c;
    }

    RateEstimate est;
    est.trials_or_order = trials;
    est.accepted = total.accepted;
    est.reject_rate = static_cast<double>(trials - total.accepted) / static_cast<double>(trials);
    if (total.accepted == 0) {
        throw EstimationError("no trial was accepted", est.reject_rate);
    }
    const double n_acc = static_cast<double>(total.accepted);
    auto rate = [&](uint64_t k) { return static_cast<double>(k) / n_acc; };
    auto ci = [&](double p) { return 1.96 * std::sqrt(p * (1 - p) / n_acc); };
    est.e_x = rate(total.by_class[1]);
    est.e_z = rate(total.by_class[2]);
    est.e_y = rate(total.by_class[3]);
    est.anomalous_rate = rate(total.anomalous);
    est.wrong_angle_rate = rate(total.wrong_angle);
    const double n_trials = static_cast<double>(trials);
    est.joint_e_x = static_cast<double>(total.by_class[1]) / n_trials;
    est.joint_e_z = static_cast<double>(total.by_class[2]) / n_trials;
    est.joint_e_y = static_cast<double>(total.by_class[3]) / n_trials;
    est.ci95_x = ci(est.e_x);
    est.ci95_z = ci(est.e_z);
    est.ci95_y = ci(est.e_y);
    est.ci95_halfwidth = std::max({est.ci95_x, est.ci95_z, est.ci95_y});
    return est;
}

FaultTable::FaultTable(const Gadget &gadget, int max_order, bool include_idle) : max_order_(max_order) {
    if (max_order < 1 || max_order > 2) {
        throw UnsupportedOrderError("fault enumeration supports orders 1 and 2, got " + std::to_string(max_order));
    }
    events_ = fault_events(gadget.circuit(), include_idle);
    const int32_t num = static_cast<int32_t>(events_.size());
    configs_.push_back({-1, -1});
    for (int32_t a = 0; a < num; a++) {
        configs_.push_back({a, -1});
    }
    if (max_order == 2) {
        for (int32_t a = 0; a < num; a++) {
            for (int32_t b = a + 1; b < num; b++) {
                configs_.push_back({a, b});
            }
        }
    }
    summaries_.reserve(configs_.size());
    for (const auto &cfg : configs_) {
        std::vector<Fault> faults;
        for (int32_t e : cfg) {
            if (e >= 0) {
                faults.push_back({events_[e].location, events_[e].pauli});
            }
        }
        faults = merge_faults(std::move(faults));
        summaries_.push_back(gadget.summarize(faults));
    }
}

RateEstimate FaultTable::evaluate(const NoiseParams &np) const {
    np.validate();
    const bool has_idle = std::any_of(events_.begin(), events_.end(), [](const FaultEvent &e) {
        return e.kind == EventKind::kIdleZ || e.kind == EventKind::kIdleX;
    });
    if (np.idle_multiplier > 0 && !has_idle) {
        throw ConfigError("fault table was built without idle locations");
    }

    std::vector<double> p(events_.size());
    for (size_t i = 0; i < events_.size(); i++) {
        p[i] = events_[i].probability(np);
    }
    // Weight of a configuration: product of p over firing events and (1 - p) over the rest.
    auto weight = [&](const std::array<int32_t, 2> &cfg) {
        double w = 1;
        for (size_t i = 0; i < p.size(); i++) {
            bool fires = cfg[0] == static_cast<int32_t>(i) || cfg[1] == static_cast<int32_t>(i);
            w *= fires ? p[i] : 1 - p[i];
        }
        return w;
    };
    const bool any_certain = std::any_of(p.begin(), p.end(), [](double x) { return x >= 1; });
    double base = 1;
    std::vector<double> ratio(p.size());
    if (!any_certain) {
        for (size_t i = 0; i < p.size(); i++) {
            base *= 1 - p[i];
            ratio[i] = p[i] / (1 - p[i]);
        }
    }

    double total = 0;
    double accepted = 0;
    std::array<double, 4> by_class{};
    double anomalous = 0;
    double wrong_angle = 0;
    for (size_t c = 0; c < configs_.size(); c++) {
        const auto &cfg = configs_[c];
        double w;
        if (any_certain) {
            w = weight(cfg);
        } else {
            w = base;
            for (int32_t e : cfg) {
                if (e >= 0) {
                    w *= ratio[e];
                }
            }
        }
        if (w == 0) {
            continue;
        }
        const BranchSummary &s = summaries_[c];
        total += w * s.total;
        accepted += w * s.accepted;
        for (size_t k = 0; k < 4; k++) {
            by_class[k] += w * s.by_class[k];
        }
        anomalous += w * s.anomalous;
        wrong_angle += w * s.wrong_angle;
    }

    RateEstimate est;
    est.trials_or_order = static_cast<uint64_t>(max_order_);
    est.total_probability_weight = total;
    if (accepted <= 0) {
        throw EstimationError("enumerated configurations are never accepted", 1);
    }
    est.reject_rate = 1 - accepted / total;
    est.e_x = by_class[1] / accepted;
    est.e_z = by_class[2] / accepted;
    est.e_y = by_class[3] / accepted;
    est.joint_e_x = by_class[1] / total;
    est.joint_e_z = by_class[2] / total;
    est.joint_e_y = by_class[3] / total;
    est.anomalous_rate = anomalous / accepted;
    est.wrong_angle_rate = wrong_angle / accepted;
    return est;
}

RateEstimate enumerate_faults(const GadgetConfig &cfg, const NoiseParams &np, int max_order) {
    if (max_order < 1 || max_order > 2) {
        throw UnsupportedOrderError("fault enumeration supports orders 1 and 2, got " + std::to_string(max_order));
    }
    np.validate();
    Gadget gadget(cfg);
    return FaultTable(gadget, max_order, np.idle_multiplier > 0).evaluate(np);
}

}  // namespace biasforge
