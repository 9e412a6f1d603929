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

#include "biasforge/bounds.h"

#include <boost/math/special_functions/binomial.hpp>
#include <cmath>

#include "biasforge/errors.h"

namespace biasforge {

namespace {

double binom(int n, int k) {
    return boost::math::binomial_coefficient<double>(n, k);
}

void check_odd(int r, const char *what) {
    if (r < 1 || r % 2 == 0) {
        throw ConfigError(std::string(what) + " must be odd and positive, got " + std::to_string(r));
    }
}

void check_rates(double p_x, double p_z, double p_zz) {
    if (!(p_x >= 0) || !(p_z >= 0) || !(p_zz >= 0)) {
        throw ConfigError("error rates must be non-negative");
    }
}

}  // namespace

int BoundInputs::m() const {
    if (r_z != r_zz) {
        throw ConfigError("m is defined only for r_z == r_zz");
    }
    return (r_z + 1) / 2;
}

void BoundInputs::validate() const {
    check_odd(n, "n");
    check_odd(r_z, "r_z");
    check_odd(r_zz, "r_zz");
    check_rates(np.p_x, np.p_z, np.p_zz);
}

BoundBreakdown breakdown(const BoundInputs &b) {
    b.validate();
    const double n = b.n;
    const double p_x = b.np.p_x;
    const double p_z = b.np.p_z;
    const int rz = b.r_z;
    const int rzz = b.r_zz;

    BoundBreakdown out;
    out.eps_x3 = rzz * n * p_x;
    out.eps_x_mz = n * (rz + 1) * p_x + binom(rz, (rz + 1) / 2) * std::pow((n + 2) * p_z, (rz + 1) / 2);
    out.eps_x2 = n * (rzz + 1) * p_x + out.eps_x_mz;
    out.eps_x_mzz = binom(rzz, (rzz + 1) / 2) * std::pow((2 * n + 2) * p_z, (rzz + 1) / 2) + out.eps_x2;
    out.eps_z1 = std::pow(((rz + 3) + (rzz + 3)) * p_z, n) + n * (rz + 2 * rzz) * p_x;
    out.eps_z2 = n * b.np.p_zz + n * std::pow((rz + 3) * p_z, 2);
    out.e_xl = out.eps_x3 + out.eps_x_mzz;
    out.e_zl = out.eps_z1 + out.eps_z2;
    return out;
}

double e_xl_bound(int n, int r, double p_x, double p_z) {
    check_odd(n, "n");
    check_odd(r, "r");
    check_rates(p_x, p_z, 0);
    const int m = (r + 1) / 2;
    return n * (3 * r + 2) * p_x + binom(r, m) * (std::pow(2.0 * (n + 1), m) + std::pow(n + 2.0, m)) * std::pow(p_z, m);
}

double e_zl_bound(int n, int r, double p_x, double p_z, double p_zz) {
    check_odd(n, "n");
    check_odd(r, "r");
    check_rates(p_x, p_z, p_zz);
    return std::pow(2.0 * (r + 3) * p_z, n) + n * p_zz + 3.0 * n * r * p_x + n * std::pow((r + 3) * p_z, 2);
}

double PzzRule::apply(double p_x) const {
    switch (kind) {
        case Kind::kEqualPx:
            return p_x;
        case Kind::kFixed:
            return value;
        case Kind::kScaled:
            return value * p_x;
    }
    return p_x;
}

std::vector<double> log_space(double lo, double hi, int points) {
    if (!(lo > 0) || !(hi >= lo) || points < 1 || (points == 1 && hi != lo)) {
        throw ConfigError("log_space needs 0 < lo <= hi and enough points");
    }
    std::vector<double> out;
    if (points == 1) {
        out.push_back(lo);
        return out;
    }
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (int i = 0; i < points; i++) {
        out.push_back(i == 0 ? lo : i == points - 1 ? hi : std::pow(10.0, a + (b - a) * i / (points - 1)));
    }
    return out;
}

std::vector<SweepRow> sweep(
    int n, int r, const std::vector<double> &etas, double pz_min, double pz_max, int points, PzzRule rule) {
    std::vector<SweepRow> rows;
    for (double eta : etas) {
        if (!(eta >= 1)) {
            throw ConfigError("bias must be at least 1");
        }
        for (double p_z : log_space(pz_min, pz_max, points)) {
            double p_x = std::isinf(eta) ? 0 : p_z / eta;
            rows.push_back({p_z, eta, e_xl_bound(n, r, p_x, p_z), e_zl_bound(n, r, p_x, p_z, rule.apply(p_x))});
        }
    }
    return rows;
}

}  // namespace biasforge
