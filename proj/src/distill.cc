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

#include "biasforge/distill.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "biasforge/errors.h"
#include "biasforge/gadget.h"

namespace biasforge {

namespace {

bool odd_overlap(uint32_t a, uint32_t b) {
    return std::popcount(a & b) % 2 == 1;
}

std::string row_string(uint32_t row, int n) {
    std::string s(n, '0');
    for (int j = 0; j < n; j++) {
        if ((row >> j) & 1) {
            s[j] = '1';
        }
    }
    return s;
}

uint32_t parse_row(const std::string &s, int n) {
    if (static_cast<int>(s.size()) != n) {
        throw ConfigError("fixture row '" + s + "' does not have length " + std::to_string(n));
    }
    uint32_t row = 0;
    for (int j = 0; j < n; j++) {
        if (s[j] == '1') {
            row |= uint32_t{1} << j;
        } else if (s[j] != '0') {
            throw ConfigError("fixture row '" + s + "' contains a character other than 0 or 1");
        }
    }
    return row;
}

long double weighted(const std::vector<uint64_t> &counts, long double e) {
    const int n = static_cast<int>(counts.size()) - 1;
    long double sum = 0;
    for (int w = 0; w <= n; w++) {
        if (counts[w] != 0) {
            sum += static_cast<long double>(counts[w]) * std::pow(e, w) * std::pow(1 - e, n - w);
        }
    }
    return sum;
}

// (P(accept), P(logical | accept)) for one error type.
std::pair<long double, long double> detect(const WeightEnumerator &w, long double e) {
    long double harmless = weighted(w.harmless, e);
    long double logical = weighted(w.logical, e);
    long double accept = harmless + logical;
    return {accept, logical / accept};
}

const std::pair<WeightEnumerator, WeightEnumerator> &rm15_enumerators() {
    static const auto enumerators = [] {
        CssCode code = CssCode::reed_muller_15();
        return std::make_pair(
            undetected_enumerator(code.n_phys, code.z_checks, code.logical_z),
            undetected_enumerator(code.n_phys, code.x_checks, code.logical_x));
    }();
    return enumerators;
}

DetectionResult map_with(const WeightEnumerator &x_errors, const WeightEnumerator &z_errors, const Channel &in) {
    in.validate();
    DetectionResult r;
    auto [acc_x, out_x] = detect(x_errors, in.e_x);
    auto [acc_z, out_z] = detect(z_errors, in.e_z);
    r.out = {out_x, out_z};
    r.p_accept_x = acc_x;
    r.p_accept_z = acc_z;
    r.p_accept = acc_x * acc_z;
    return r;
}

}  // namespace

CssCode CssCode::reed_muller_15() {
    CssCode code;
    code.n_phys = 15;
    for (int i = 0; i < 4; i++) {
        uint32_t row = 0;
        for (int j = 0; j < 15; j++) {
            if (((j + 1) >> i) & 1) {
                row |= uint32_t{1} << j;
            }
        }
        code.x_checks.push_back(row);
    }
    code.z_checks = code.x_checks;
    for (int i = 0; i < 4; i++) {
        for (int k = i + 1; k < 4; k++) {
            code.z_checks.push_back(code.x_checks[i] & code.x_checks[k]);
        }
    }
    code.logical_x = (uint32_t{1} << 15) - 1;
    code.logical_z = code.logical_x;
    return code;
}

void CssCode::validate() const {
    if (n_phys < 1 || n_phys > 30) {
        throw ConfigError("code length must lie in [1, 30]");
    }
    const uint32_t mask = (uint32_t{1} << n_phys) - 1;
    auto in_range = [&](uint32_t r) { return (r & ~mask) == 0; };
    for (uint32_t x : x_checks) {
        for (uint32_t z : z_checks) {
            if (odd_overlap(x, z)) {
                throw ConfigError("X-check " + row_string(x, n_phys) + " anticommutes with Z-check " + row_string(z, n_phys));
            }
        }
        if (!in_range(x) || odd_overlap(x, logical_z)) {
            throw ConfigError("logical Z does not commute with the X-checks");
        }
    }
    for (uint32_t z : z_checks) {
        if (!in_range(z) || odd_overlap(z, logical_x)) {
            throw ConfigError("logical X does not commute with the Z-checks");
        }
    }
    if (!in_range(logical_x) || !in_range(logical_z) || !odd_overlap(logical_x, logical_z)) {
        throw ConfigError("logical operators must anticommute");
    }
}

std::string to_fixture(const CssCode &code) {
    std::ostringstream out;
    out << "# CSS code check matrices. Row character j is qubit j.\n";
    out << "n " << code.n_phys << "\n";
    out << "x_checks " << code.x_checks.size() << "\n";
    for (uint32_t r : code.x_checks) {
        out << row_string(r, code.n_phys) << "\n";
    }
    out << "z_checks " << code.z_checks.size() << "\n";
    for (uint32_t r : code.z_checks) {
        out << row_string(r, code.n_phys) << "\n";
    }
    out << "logical_x\n" << row_string(code.logical_x, code.n_phys) << "\n";
    out << "logical_z\n" << row_string(code.logical_z, code.n_phys) << "\n";
    return out.str();
}

CssCode parse_fixture(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        std::istringstream words(line);
        std::string w;
        while (words >> w) {
            tokens.push_back(w);
        }
    }
    size_t pos = 0;
    auto next = [&]() -> const std::string & {
        if (pos >= tokens.size()) {
            throw ConfigError("fixture ended early");
        }
        return tokens[pos++];
    };
    auto expect = [&](const char *key) {
        if (next() != key) {
            throw ConfigError(std::string("fixture: expected '") + key + "'");
        }
    };
    auto count = [&]() {
        try {
            return std::stoi(next());
        } catch (const std::logic_error &) {
            throw ConfigError("fixture: expected an integer");
        }
    };

    CssCode code;
    expect("n");
    code.n_phys = count();
    if (code.n_phys < 1 || code.n_phys > 30) {
        throw ConfigError("fixture: code length out of range");
    }
    expect("x_checks");
    for (int k = count(); k > 0; k--) {
        code.x_checks.push_back(parse_row(next(), code.n_phys));
    }
    expect("z_checks");
    for (int k = count(); k > 0; k--) {
        code.z_checks.push_back(parse_row(next(), code.n_phys));
    }
    expect("logical_x");
    code.logical_x = parse_row(next(), code.n_phys);
    expect("logical_z");
    code.logical_z = parse_row(next(), code.n_phys);
    if (pos != tokens.size()) {
        throw ConfigError("fixture: trailing content");
    }
    code.validate();
    return code;
}

CssCode load_fixture(const std::string &path) {
    std::ifstream f(path);
    if (!f) {
        throw ConfigError("cannot open fixture " + path);
    }
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_fixture(buf.str());
}

WeightEnumerator undetected_enumerator(
    int n_phys, const std::vector<uint32_t> &checks, uint32_t dual_logical, int partitions) {
    if (n_phys < 1 || n_phys > 30) {
        throw ConfigError("code length must lie in [1, 30]");
    }
    if (partitions < 1) {
        throw ConfigError("partitions must be positive");
    }
    const uint64_t space = uint64_t{1} << n_phys;
    WeightEnumerator total{std::vector<uint64_t>(n_phys + 1), std::vector<uint64_t>(n_phys + 1)};
    for (int part = 0; part < partitions; part++) {
        const uint64_t begin = space * part / partitions;
        const uint64_t end = space * (part + 1) / partitions;
        WeightEnumerator chunk{std::vector<uint64_t>(n_phys + 1), std::vector<uint64_t>(n_phys + 1)};
        for (uint64_t e = begin; e < end; e++) {
            const uint32_t pattern = static_cast<uint32_t>(e);
            bool detected = std::any_of(checks.begin(), checks.end(), [&](uint32_t c) { return odd_overlap(c, pattern); });
            if (detected) {
                continue;
            }
            auto &bucket = odd_overlap(pattern, dual_logical) ? chunk.logical : chunk.harmless;
            bucket[std::popcount(pattern)]++;
        }
        for (int w = 0; w <= n_phys; w++) {
            total.harmless[w] += chunk.harmless[w];
            total.logical[w] += chunk.logical[w];
        }
    }
    return total;
}

int min_logical_weight(const WeightEnumerator &w) {
    for (size_t k = 0; k < w.logical.size(); k++) {
        if (w.logical[k] != 0) {
            return static_cast<int>(k);
        }
    }
    return 0;
}

void Channel::validate() const {
    if (!(e_x >= 0 && e_x < 0.5L) || !(e_z >= 0 && e_z < 0.5L)) {
        throw ConfigError("channel rates must lie in [0, 1/2)");
    }
}

DetectionResult css_map(const CssCode &code, const Channel &in) {
    code.validate();
    return map_with(
        undetected_enumerator(code.n_phys, code.z_checks, code.logical_z),
        undetected_enumerator(code.n_phys, code.x_checks, code.logical_x), in);
}

DetectionResult rm15_map(const Channel &in) {
    const auto &[x_errors, z_errors] = rm15_enumerators();
    return map_with(x_errors, z_errors, in);
}

Channel concatenate(Channel start, int layers) {
    if (layers < 0) {
        throw ConfigError("layer count must be non-negative");
    }
    start.validate();
    for (int layer = 1; layer <= layers; layer++) {
        start = rm15_map(start).out;
        if (!(start.e_x < 0.5L) || !(start.e_z < 0.5L)) {
            throw SaturationError("distillation saturates at layer " + std::to_string(layer), layer);
        }
    }
    return start;
}

double overhead(bool use_gadget, int layers) {
    if (layers < 0) {
        throw ConfigError("layer count must be non-negative");
    }
    return (use_gadget ? 4.0 : 1.0) * std::pow(15.0, layers);
}

long double final_bias(const Channel &c) {
    if (c.e_x == 0) {
        return std::numeric_limits<long double>::infinity();
    }
    return c.e_z / c.e_x;
}

namespace {

// Smallest layer count reaching `target` from `input`, if any within the cap.
std::optional<DistillPlan> fewest_layers(Channel input, double target, int max_layers) {
    if (!(input.e_x >= 0 && input.e_x < 0.5L && input.e_z >= 0 && input.e_z < 0.5L)) {
        return std::nullopt;
    }
    Channel c = input;
    for (int l = 0; l <= max_layers; l++) {
        if (std::max(c.e_x, c.e_z) <= target) {
            DistillPlan p;
            p.layers = l;
            p.input = input;
            p.achieved = c;
            return p;
        }
        if (l == max_layers) {
            break;
        }
        c = rm15_map(c).out;
        if (!(c.e_x < 0.5L) || !(c.e_z < 0.5L)) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

std::optional<DistillPlan> best_gadget_plan(int n, double target, const NoiseParams &np, const PlanOptions &opt) {
    const double cost_per_copy = n / boost::rational_cast<double>(accept_probability_exact(n));
    std::optional<DistillPlan> best;
    for (int r : {1, 3}) {
        Channel in{e_xl_bound(n, r, np.p_x, np.p_z), e_zl_bound(n, r, np.p_x, np.p_z, np.p_zz)};
        auto p = fewest_layers(in, target, opt.max_layers);
        if (!p) {
            continue;
        }
        p->use_gadget = n > 1;
        p->n = n;
        p->r = r;
        p->overhead = cost_per_copy * std::pow(15.0, p->layers);
        // Strictly better overhead, or equal overhead with fewer layers (r ascending breaks the rest).
        if (!best || p->overhead < best->overhead || (p->overhead == best->overhead && p->layers < best->layers)) {
            best = p;
        }
    }
    return best;
}

}  // namespace

PlanResult plan(double target, double p_z, double eta, const PlanOptions &options) {
    NoiseParams np = NoiseParams::from_bias(p_z, eta, 0);
    np.p_zz = options.pzz.apply(np.p_x);
    return plan(target, np, options);
}

PlanResult plan(double target, const NoiseParams &np, const PlanOptions &options) {
    if (!(target > 0 && target < 1)) {
        throw ConfigError("target must lie in (0, 1)");
    }
    if (options.max_layers < 0) {
        throw ConfigError("layer cap must be non-negative");
    }
    np.validate();

    PlanResult result;
    auto gadget = best_gadget_plan(3, target, np, options);
    if (!gadget) {
        throw FeasibilityError("gadget pipeline cannot reach the target within " + std::to_string(options.max_layers) + " layers");
    }
    result.gadget = *gadget;

    std::optional<DistillPlan> baseline;
    if (options.baseline == BaselineModel::kBareChannel) {
        baseline = fewest_layers(Channel{np.p_x, np.p_z}, target, options.max_layers);
        if (baseline) {
            baseline->use_gadget = false;
            baseline->n = 1;
            baseline->r = 0;
            baseline->overhead = std::pow(15.0, baseline->layers);
        }
    } else {
        baseline = best_gadget_plan(1, target, np, options);
    }
    if (!baseline) {
        throw FeasibilityError("baseline pipeline cannot reach the target within " + std::to_string(options.max_layers) + " layers");
    }
    result.baseline = *baseline;
    return result;
}

}  // namespace biasforge
