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

#ifndef BIASFORGE_BOUNDS_H
#define BIASFORGE_BOUNDS_H

#include <vector>

#include "biasforge/noise.h"

namespace biasforge {

struct BoundInputs {
    int n = 3;
    int r_z = 3;
    int r_zz = 3;
    NoiseParams np;

    /// (r + 1) / 2; requires r_z == r_zz.
    int m() const;
    void validate() const;
};

struct BoundBreakdown {
    double eps_x3 = 0;
    double eps_x_mzz = 0;
    double eps_x2 = 0;
    double eps_x_mz = 0;
    double eps_z1 = 0;
    double eps_z2 = 0;
    double e_xl = 0;  // eps_x3 + eps_x_mzz
    double e_zl = 0;  // eps_z1 + eps_z2
};

/// Individual error contributions. Values are upper bounds and are not clamped to 1.
BoundBreakdown breakdown(const BoundInputs &b);

double e_xl_bound(int n, int r, double p_x, double p_z);
double e_zl_bound(int n, int r, double p_x, double p_z, double p_zz);

/// How p_zz is chosen along a sweep.
struct PzzRule {
    enum class Kind { kEqualPx, kFixed, kScaled } kind = Kind::kEqualPx;
    double value = 0;  // fixed p_zz, or the multiple of p_x for kScaled

    double apply(double p_x) const;
};

struct SweepRow {
    double p_z;
    double eta;
    double e_xl;
    double e_zl;
};

/// Log-spaced p_z in [pz_min, pz_max] for every eta, p_x = p_z / eta.
std::vector<SweepRow> sweep(
    int n, int r, const std::vector<double> &etas, double pz_min, double pz_max, int points, PzzRule rule = {});

/// `points` log-spaced values from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, int points);

}  // namespace biasforge

#endif
