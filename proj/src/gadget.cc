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

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "biasforge/errors.h"

namespace biasforge {

namespace {

constexpr double kBranchEpsilon = 1e-12;
constexpr double kCorrectionFidelity = 1 - 1e-8;
constexpr double kClassFidelity = 0.99;

uint8_t majority(std::span<const uint8_t> bits) {
    size_t ones = std::count(bits.begin(), bits.end(), uint8_t{1});
    return 2 * ones > bits.size() ? 1 : 0;
}

// Acceptance rule on |alpha| beyond the block correlation check.
bool target_accepts_alpha(const GadgetConfig &cfg, int alpha_count) {
    if (cfg.target == Target::kT) {
        return std::abs(cfg.n - 2 * alpha_count) == 1;
    }
    return true;
}

PauliString to_slots(const PauliString &p, const std::vector<int8_t> &slots) {
    PauliString out;
    uint64_t support = p.xs | p.zs;
    while (support) {
        int q = std::countr_zero(support);
        support &= support - 1;
        if (static_cast<size_t>(q) >= slots.size() || slots[q] < 0) {
            throw AddressingError("fault acts on circuit qubit " + std::to_string(q) + " which is not live there");
        }
        uint64_t bit = uint64_t{1} << slots[q];
        if ((p.xs >> q) & 1) {
            out.xs |= bit;
        }
        if ((p.zs >> q) & 1) {
            out.zs |= bit;
        }
    }
    return out;
}

}  // namespace

GadgetConfig GadgetConfig::make(Target target, int n, int r, double theta) {
    GadgetConfig cfg;
    cfg.n = n;
    cfg.r_z = r;
    cfg.r_zz = r;
    cfg.target = target;
    switch (target) {
        case Target::kPlusI:
            cfg.theta = std::numbers::pi / 2;
            break;
        case Target::kT:
            cfg.theta = std::numbers::pi / 4;
            break;
        case Target::kCustom:
            cfg.theta = theta;
            break;
    }
    return cfg;
}

void GadgetConfig::validate() const {
    if (n < 1 || n % 2 == 0) {
        throw ConfigError("code length n must be odd and positive, got " + std::to_string(n));
    }
    if (r_z < 1 || r_z % 2 == 0 || r_zz < 1 || r_zz % 2 == 0) {
        throw ConfigError("repetition counts must be odd and positive");
    }
    if (!std::isfinite(theta)) {
        throw ConfigError("theta must be finite");
    }
    if (target == Target::kPlusI && std::abs(theta - std::numbers::pi / 2) > 1e-12) {
        throw ConfigError("target +i requires theta = pi/2");
    }
    if (target == Target::kT && std::abs(theta - std::numbers::pi / 4) > 1e-12) {
        throw ConfigError("target T requires theta = pi/4");
    }
    if (2 * n + 1 > static_cast<int>(kMaxQubits)) {
        throw ConfigError("n = " + std::to_string(n) + " needs more than " + std::to_string(kMaxQubits) + " live qubits");
    }
    if (3 * n + r_z + r_zz > 64) {
        throw ConfigError("circuit has more than 64 qubits");
    }
}

size_t Circuit::num_measurements() const {
    return std::count_if(
        locations.begin(), locations.end(), [](const Location &l) { return l.kind == LocationKind::kMeasX; });
}

uint32_t Circuit::data_qubit(Block block, int index) const {
    switch (block) {
        case Block::kBlock1:
            return index;
        case Block::kBlock2:
            return n + index;
        case Block::kBlock3:
            return 2 * n + index;
        case Block::kAncilla:
            return 3 * n + index;
    }
    throw std::invalid_argument("bad block");
}

size_t expected_location_count(const GadgetConfig &cfg) {
    size_t n = cfg.n;
    return 2 * n + n + cfg.r_z * (n + 2) + n + n + cfg.r_zz * (2 * n + 2) + n;
}

Circuit build_circuit(const GadgetConfig &cfg) {
    cfg.validate();
    Circuit c;
    c.n = cfg.n;
    c.r_z = cfg.r_z;
    c.r_zz = cfg.r_zz;
    const uint32_t n = cfg.n;
    for (Block block : {Block::kBlock1, Block::kBlock2, Block::kBlock3}) {
        for (uint32_t i = 0; i < n; i++) {
            c.qubits.push_back({block, i});
        }
    }
    uint32_t next_ancilla = 0;
    auto new_ancilla = [&]() {
        c.qubits.push_back({Block::kAncilla, next_ancilla++});
        return static_cast<uint32_t>(c.qubits.size() - 1);
    };
    auto one = [&](LocationKind kind, uint32_t q, uint32_t step) {
        c.locations.push_back(Location{kind, 1, {q, 0}, step});
    };
    auto two = [&](LocationKind kind, uint32_t a, uint32_t b, uint32_t step) {
        c.locations.push_back(Location{kind, 2, {a, b}, step});
    };

    uint32_t step = 0;
    for (uint32_t i = 0; i < 2 * n; i++) {
        one(LocationKind::kPrepX, i, step);
    }
    step++;
    for (uint32_t i = 0; i < n; i++) {
        two(LocationKind::kCZTheta, i, n + i, step);
    }
    step++;

    // M_ZL: one ancilla per repetition, CPHASE to every block-1 qubit.
    for (int rep = 0; rep < cfg.r_z; rep++) {
        uint32_t a = new_ancilla();
        one(LocationKind::kPrepX, a, step++);
        for (uint32_t i = 0; i < n; i++) {
            two(LocationKind::kCphase, a, i, step++);
        }
        one(LocationKind::kMeasX, a, step++);
    }

    for (uint32_t i = 0; i < n; i++) {
        one(LocationKind::kMeasX, i, step);
    }
    for (uint32_t i = 0; i < n; i++) {
        one(LocationKind::kPrepX, 2 * n + i, step);
    }
    step++;

    // M_ZLZL: CPHASE to block 2 then block 3.
    for (int rep = 0; rep < cfg.r_zz; rep++) {
        uint32_t a = new_ancilla();
        one(LocationKind::kPrepX, a, step++);
        for (uint32_t i = 0; i < n; i++) {
            two(LocationKind::kCphase, a, n + i, step++);
        }
        for (uint32_t i = 0; i < n; i++) {
            two(LocationKind::kCphase, a, 2 * n + i, step++);
        }
        one(LocationKind::kMeasX, a, step++);
    }

    for (uint32_t i = 0; i < n; i++) {
        one(LocationKind::kMeasX, n + i, step);
    }
    return c;
}

std::string logical_class_name(LogicalClass c) {
    switch (c) {
        case LogicalClass::kI:
            return "I";
        case LogicalClass::kXL:
            return "XL";
        case LogicalClass::kZL:
            return "ZL";
        case LogicalClass::kYL:
            return "YL";
        case LogicalClass::kRejected:
            return "rejected";
    }
    return "?";
}

boost::rational<int64_t> accept_probability_exact(int n) {
    if (n < 1 || n % 2 == 0) {
        throw ConfigError("acceptance probability needs odd n >= 1");
    }
    if (n > 61) {
        throw ConfigError("n too large for exact 64-bit rational");
    }
    // C(n, (n-1)/2) built incrementally; every partial product is an integer.
    int64_t binom = 1;
    int k = (n - 1) / 2;
    for (int i = 1; i <= k; i++) {
        binom = binom * (n - k + i) / i;
    }
    return boost::rational<int64_t>(binom, int64_t{1} << (n - 1));
}

struct Gadget::Frame {
    std::optional<StateVector> psi;
    std::vector<uint8_t> record;
    double probability = 1;
};

Gadget::Gadget(GadgetConfig cfg, ResidualZPolicy policy) : cfg_(cfg), policy_(policy), circuit_(build_circuit(cfg)) {
    const size_t num_q = circuit_.num_qubits();
    std::vector<int8_t> slots(num_q, -1);
    std::vector<uint32_t> live;
    auto reslot = [&]() {
        std::fill(slots.begin(), slots.end(), -1);
        for (size_t s = 0; s < live.size(); s++) {
            slots[live[s]] = static_cast<int8_t>(s);
        }
    };
    for (const Location &loc : circuit_.locations) {
        if (loc.kind == LocationKind::kPrepX) {
            live.push_back(loc.qubits[0]);
            reslot();
            fault_slots_.push_back(slots);
        } else if (loc.kind == LocationKind::kMeasX) {
            fault_slots_.push_back(slots);
            live.erase(std::find(live.begin(), live.end(), loc.qubits[0]));
            reslot();
        } else {
            fault_slots_.push_back(slots);
        }
    }

    const uint32_t n = cfg_.n;
    const uint32_t all = (uint32_t{1} << n) - 1;
    for (uint32_t c = 0; c <= all; c++) {
        int w = std::popcount(c);
        bool keep = policy_ == ResidualZPolicy::kSyndromeFree ? c != all : (2 * w < static_cast<int>(n));
        if (keep) {
            classify_candidates_.push_back(c);
        }
    }
    build_corrections();
}

size_t Gadget::key_index(int zl, int b, int alpha, bool anti) const {
    return ((static_cast<size_t>(zl) * 2 + b) * (cfg_.n + 1) + alpha) * 2 + (anti ? 1 : 0);
}

PauliString Gadget::logical_pauli(int logical) const {
    PauliString p;
    const uint32_t first = 2 * cfg_.n;
    if (logical & 1) {
        p.xs = uint64_t{1} << first;
    }
    if (logical & 2) {
        p = p * PauliString::z_range(first, cfg_.n);
    }
    return p;
}

StateVector Gadget::target_state() const {
    const size_t n = cfg_.n;
    const double scale = std::pow(2.0, -static_cast<double>(n) / 2);
    const Amplitude odd = std::polar(1.0, cfg_.theta);
    std::vector<Amplitude> amps(size_t{1} << n);
    for (uint64_t k = 0; k < amps.size(); k++) {
        amps[k] = (std::popcount(k) % 2 ? odd : Amplitude{1, 0}) * scale;
    }
    return StateVector(std::move(amps));
}

void Gadget::build_corrections() {
    const int n = cfg_.n;
    corrections_.assign(key_index(1, 1, n, true) + 1, std::nullopt);
    const StateVector target = target_state();
    std::mt19937_64 unused_rng(0);
    const size_t num_meas = circuit_.num_measurements();
    for (int zl = 0; zl < 2; zl++) {
        for (int b = 0; b < 2; b++) {
            for (int alpha = 0; alpha <= n; alpha++) {
                for (int anti = 0; anti < 2; anti++) {
                    // Representative branch: block-2 outcomes +1 on the first alpha qubits.
                    ForcedOutcomes forced;
                    forced.reserve(num_meas);
                    for (int i = 0; i < cfg_.r_z; i++) {
                        forced.push_back(zl ? -1 : 1);
                    }
                    for (int i = 0; i < n; i++) {
                        int a = i < alpha ? 1 : -1;
                        forced.push_back(static_cast<int8_t>(anti ? -a : a));
                    }
                    for (int i = 0; i < cfg_.r_zz; i++) {
                        forced.push_back(b ? -1 : 1);
                    }
                    for (int i = 0; i < n; i++) {
                        forced.push_back(i < alpha ? 1 : -1);
                    }
                    std::optional<StateVector> out;
                    try {
                        Frame frame;
                        explore(0, frame, std::vector<PauliString>(circuit_.locations.size()), &forced, &unused_rng,
                                [&](const Branch &br) { out.emplace(br.block3); });
                    } catch (const BranchError &) {
                        continue;
                    }
                    for (int logical = 0; logical < 4; logical++) {
                        StateVector corrected = *out;
                        PauliString p = logical_pauli(logical);
                        corrected.apply_pauli(PauliString{p.xs >> (2 * n), p.zs >> (2 * n)});
                        if (fidelity(corrected, target) >= kCorrectionFidelity) {
                            corrections_[key_index(zl, b, alpha, anti)] = logical;
                            break;
                        }
                    }
                }
            }
        }
    }
}

std::optional<int> Gadget::correction_for(int zl_parity, int b, int alpha_count, bool anticorrelated) const {
    if (zl_parity < 0 || zl_parity > 1 || b < 0 || b > 1 || alpha_count < 0 || alpha_count > cfg_.n) {
        throw std::out_of_range("correction key out of range");
    }
    return corrections_[key_index(zl_parity, b, alpha_count, anticorrelated)];
}

std::vector<PauliString> Gadget::place_faults(std::span<const Fault> faults) const {
    std::vector<PauliString> placed(circuit_.locations.size());
    for (const Fault &f : faults) {
        if (f.location >= circuit_.locations.size()) {
            throw AddressingError("fault location " + std::to_string(f.location) + " out of range");
        }
        placed[f.location] *= to_slots(f.pauli, fault_slots_[f.location]);
    }
    return placed;
}

void Gadget::explore(
    size_t loc,
    Frame &frame,
    const std::vector<PauliString> &faults_by_loc,
    const ForcedOutcomes *forced,
    std::mt19937_64 *rng,
    const std::function<void(const Branch &)> &visit) const {
    const auto &locations = circuit_.locations;
    for (; loc < locations.size(); loc++) {
        const Location &l = locations[loc];
        const auto &slots = fault_slots_[loc];
        const PauliString &fault = faults_by_loc[loc];
        switch (l.kind) {
            case LocationKind::kPrepX:
                if (frame.psi.has_value()) {
                    frame.psi->append_plus_qubit();
                } else {
                    frame.psi.emplace(StateVector::plus_state(1));
                }
                frame.psi->apply_pauli(fault);
                break;
            case LocationKind::kCZTheta:
                frame.psi->apply_cz_theta(slots[l.qubits[0]], slots[l.qubits[1]], cfg_.theta);
                frame.psi->apply_pauli(fault);
                break;
            case LocationKind::kCphase:
                frame.psi->apply_cphase(slots[l.qubits[0]], slots[l.qubits[1]]);
                frame.psi->apply_pauli(fault);
                break;
            case LocationKind::kMeasX: {
                frame.psi->apply_pauli(fault);
                const size_t slot = slots[l.qubits[0]];
                int8_t force = 0;
                if (forced != nullptr) {
                    if (forced->size() != circuit_.num_measurements()) {
                        throw std::invalid_argument("forced outcome list must cover every measurement");
                    }
                    force = (*forced)[frame.record.size()];
                }
                if (rng != nullptr) {
                    std::optional<int> f;
                    if (force != 0) {
                        f = force;
                    }
                    MeasurementOutcome m = frame.psi->measure_x(slot, f, rng);
                    frame.probability *= m.probability;
                    frame.psi->remove_x_eigenqubit(slot, m.value);
                    frame.record.push_back(m.value == 1 ? 0 : 1);
                    break;
                }
                const double p_plus = frame.psi->probability_x(slot, 1);
                const bool plus_ok = p_plus > kBranchEpsilon;
                const bool minus_ok = 1 - p_plus > kBranchEpsilon;
                if (plus_ok && minus_ok) {
                    Frame other = frame;
                    other.psi->project_x(slot, 1, p_plus);
                    other.psi->remove_x_eigenqubit(slot, 1);
                    other.probability *= p_plus;
                    other.record.push_back(0);
                    explore(loc + 1, other, faults_by_loc, forced, rng, visit);
                }
                const int value = minus_ok ? -1 : 1;
                const double p = value == 1 ? p_plus : 1 - p_plus;
                frame.psi->project_x(slot, value, p);
                frame.psi->remove_x_eigenqubit(slot, value);
                frame.probability *= p;
                frame.record.push_back(value == 1 ? 0 : 1);
                break;
            }
        }
    }
    visit(Branch{frame.probability, frame.record, *frame.psi});
}

void Gadget::for_each_branch(std::span<const Fault> faults, const std::function<void(const Branch &)> &visit) const {
    auto placed = place_faults(faults);
    Frame frame;
    explore(0, frame, placed, nullptr, nullptr, visit);
}

GadgetOutcome Gadget::run(std::span<const Fault> faults, const ForcedOutcomes *forced, std::mt19937_64 &rng) const {
    auto placed = place_faults(faults);
    Frame frame;
    std::optional<StateVector> block3;
    std::vector<uint8_t> record;
    explore(0, frame, placed, forced, &rng, [&](const Branch &br) {
        block3.emplace(br.block3);
        record.assign(br.record.begin(), br.record.end());
    });
    GadgetOutcome out = decode(record);
    if (out.accepted) {
        Classification c = classify(*block3, out.correction);
        out.logical_class = c.logical_class;
        out.fidelity = c.fidelity;
        out.wrong_angle = c.wrong_angle;
        out.anomalous = c.anomalous;
    }
    return out;
}

BranchSummary Gadget::summarize(std::span<const Fault> faults) const {
    BranchSummary s;
    for_each_branch(faults, [&](const Branch &br) {
        s.total += br.probability;
        GadgetOutcome out = decode(br.record);
        if (!out.accepted) {
            return;
        }
        s.accepted += br.probability;
        Classification c = classify(br.block3, out.correction);
        if (c.anomalous) {
            s.anomalous += br.probability;
            return;
        }
        if (c.wrong_angle) {
            s.wrong_angle += br.probability;
        }
        s.by_class[static_cast<size_t>(c.logical_class)] += br.probability;
    });
    return s;
}

bool Gadget::outcomes_accepted(
    std::span<const uint8_t> block1, std::span<const uint8_t> block2, int zl, int b) const {
    const int n = cfg_.n;
    bool correlated = true;
    bool anticorrelated = true;
    int alpha = 0;
    for (int i = 0; i < n; i++) {
        correlated &= block1[i] == block2[i];
        anticorrelated &= block1[i] != block2[i];
        alpha += block2[i] == 0;
    }
    if (!correlated && !anticorrelated) {
        return false;
    }
    if (!target_accepts_alpha(cfg_, alpha)) {
        return false;
    }
    return corrections_[key_index(zl, b, alpha, anticorrelated)].has_value();
}

GadgetOutcome Gadget::decode(std::span<const uint8_t> raw) const {
    const int n = cfg_.n;
    if (raw.size() != circuit_.num_measurements()) {
        throw std::invalid_argument(
            "measurement record has " + std::to_string(raw.size()) + " entries, expected " +
            std::to_string(circuit_.num_measurements()));
    }
    auto zl_bits = raw.subspan(0, cfg_.r_z);
    auto block1 = raw.subspan(cfg_.r_z, n);
    auto zz_bits = raw.subspan(cfg_.r_z + n, cfg_.r_zz);
    auto block2 = raw.subspan(cfg_.r_z + n + cfg_.r_zz, n);

    GadgetOutcome out;
    out.zl_parity = majority(zl_bits);
    out.b = majority(zz_bits);
    bool anticorrelated = true;
    int alpha = 0;
    for (int i = 0; i < n; i++) {
        out.block1_x.push_back(block1[i] ? -1 : 1);
        out.block2_x.push_back(block2[i] ? -1 : 1);
        anticorrelated &= block1[i] != block2[i];
        alpha += block2[i] == 0;
    }
    out.accepted = outcomes_accepted(block1, block2, out.zl_parity, out.b);
    if (out.accepted) {
        out.correction = logical_pauli(*corrections_[key_index(out.zl_parity, out.b, alpha, anticorrelated)]);
        out.logical_class = LogicalClass::kI;
        out.fidelity = 1;
    } else {
        out.logical_class = LogicalClass::kRejected;
    }
    return out;
}

Classification Gadget::classify(const StateVector &block3, const PauliString &correction) const {
    const uint32_t n = cfg_.n;
    if (block3.num_qubits() != n) {
        throw SizeError("output register must hold exactly the n block-3 qubits");
    }
    StateVector psi = block3;
    psi.apply_pauli(PauliString{correction.xs >> (2 * n), correction.zs >> (2 * n)});

    // Walsh-Hadamard transform: w[c] = <+^n| Z^c |psi>, and <-^n| Z^c |psi> = w[~c].
    std::vector<Amplitude> w(psi.amplitudes().begin(), psi.amplitudes().end());
    for (size_t h = 1; h < w.size(); h <<= 1) {
        for (size_t i = 0; i < w.size(); i += 2 * h) {
            for (size_t j = i; j < i + h; j++) {
                Amplitude a = w[j];
                Amplitude b = w[j + h];
                w[j] = a + b;
                w[j + h] = a - b;
            }
        }
    }
    const double scale = std::pow(2.0, -static_cast<double>(n) / 2);
    const uint32_t all = (uint32_t{1} << n) - 1;

    // Target in the (|+>_L, |->_L) basis and its images under X_L, Z_L, Y_L.
    const Amplitude e = std::polar(1.0, cfg_.theta);
    const Amplitude tp = (1.0 + e) / 2.0;
    const Amplitude tm = (1.0 - e) / 2.0;
    const std::array<std::array<Amplitude, 2>, 4> images = {{{tp, tm}, {tp, -tm}, {tm, tp}, {tm, -tp}}};

    std::array<double, 4> best{};
    for (uint32_t c : classify_candidates_) {
        const Amplitude u = w[c] * scale;
        const Amplitude v = w[all & ~c] * scale;
        for (size_t k = 0; k < 4; k++) {
            double f = std::norm(std::conj(images[k][0]) * u + std::conj(images[k][1]) * v);
            best[k] = std::max(best[k], f);
        }
    }

    Classification out;
    for (size_t k = 0; k < 4; k++) {
        if (best[k] > kClassFidelity) {
            out.logical_class = static_cast<LogicalClass>(k);
            out.fidelity = best[k];
            return out;
        }
    }
    size_t arg = std::max_element(best.begin(), best.end()) - best.begin();
    if (best[arg] < 0.5) {
        out.anomalous = true;
        out.logical_class = static_cast<LogicalClass>(arg);
        out.fidelity = best[arg];
        return out;
    }
    // Codeword with the wrong rotation angle: booked as a logical Z error.
    out.wrong_angle = true;
    out.logical_class = LogicalClass::kZL;
    out.fidelity = best[arg];
    return out;
}

boost::rational<int64_t> accept_probability_by_branch_count(const GadgetConfig &cfg) {
    if (cfg.n < 1 || cfg.n % 2 == 0 || cfg.n > 30) {
        throw ConfigError("branch count needs odd n in [1, 30]");
    }
    std::optional<Gadget> g;
    if (cfg.target == Target::kCustom) {
        g.emplace(cfg);
    }
    const uint32_t n = cfg.n;
    std::vector<uint8_t> bits(n);
    int64_t count = 0;
    for (uint32_t pattern = 0; pattern < (uint32_t{1} << n); pattern++) {
        for (uint32_t i = 0; i < n; i++) {
            bits[i] = (pattern >> i) & 1;
        }
        int alpha = n - std::popcount(pattern);
        bool ok = g ? g->outcomes_accepted(bits, bits, 0, 0) : target_accepts_alpha(cfg, alpha);
        count += ok;
    }
    return boost::rational<int64_t>(count, int64_t{1} << n);
}

GadgetOutcome run(
    const Circuit &circuit,
    const GadgetConfig &cfg,
    std::span<const Fault> faults,
    const ForcedOutcomes *forced,
    std::mt19937_64 &rng) {
    Gadget g(cfg);
    if (circuit.locations.size() != g.circuit().locations.size()) {
        throw std::invalid_argument("circuit was not built from this configuration");
    }
    return g.run(faults, forced, rng);
}

GadgetOutcome decode(const GadgetConfig &cfg, std::span<const uint8_t> raw) {
    return Gadget(cfg).decode(raw);
}

Classification classify_logical(const StateVector &block3, const PauliString &correction, const GadgetConfig &cfg) {
    return Gadget(cfg).classify(block3, correction);
}

}  // namespace biasforge
