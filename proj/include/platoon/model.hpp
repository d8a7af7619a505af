/*
 * Copyright (C) 2026 the platoon-lab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License"); you may not
 * use this file except in compliance with the License. You may obtain a copy of
 * the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
 * WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
 * License for the specific language governing permissions and limitations under
 * the License.
 */

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>

#include "platoon/errors.hpp"

namespace platoon {

// Sinusoidal input pulse applied to the leader: exactly one full sine cycle
// of the given angular frequency, starting at start_time. Outside the window
// the input is zero, so the pulse begins and ends continuously at zero.
struct DisturbanceSpec {
    double amplitude = 0.0;          // peak input [m/s^2]
    double angular_frequency = 1.0;  // [rad/s]
    double start_time = 0.0;         // [s]

    double duration() const { return 2.0 * std::numbers::pi / angular_frequency; }

    double value(double t) const {
        if (amplitude == 0.0) return 0.0;
        if (t < start_time || t >= start_time + duration()) return 0.0;
        return amplitude * std::sin(angular_frequency * (t - start_time));
    }
};

// Physical and scenario parameters for a homogeneous platoon: one leader
// (index 0) plus n followers, identical engine lag tau and time headway h.
struct PlatoonConfig {
    int n = 1;                    // number of followers, >= 1
    double tau = 0.5;             // engine time constant [s]
    double h = 0.6;               // time headway [s]
    double standstill_gap = 5.0;  // desired gap at zero speed [m]
    int r = 1;                    // nominal predecessor count, 1 <= r <= n
    double v0 = 20.0;             // leader cruise speed [m/s]
    double init_spacing = 5.0;    // initial inter-vehicle gap [m]
    DisturbanceSpec disturbance{};

    void validate() const {
        if (n < 1) throw InvalidParameter("PlatoonConfig: need at least one follower");
        if (!std::isfinite(tau) || tau <= 0.0)
            throw InvalidParameter("PlatoonConfig: tau must be positive and finite");
        if (!std::isfinite(h) || h <= 0.0)
            throw InvalidParameter("PlatoonConfig: h must be positive and finite");
        if (!std::isfinite(standstill_gap) || standstill_gap < 0.0)
            throw InvalidParameter("PlatoonConfig: standstill gap must be non-negative");
        if (r < 1 || r > n)
            throw InvalidParameter("PlatoonConfig: r must satisfy 1 <= r <= n");
        if (!std::isfinite(v0))
            throw InvalidParameter("PlatoonConfig: v0 must be finite");
        if (!std::isfinite(init_spacing) || init_spacing <= 0.0)
            throw InvalidParameter("PlatoonConfig: init spacing must be positive");
        if (!std::isfinite(disturbance.amplitude))
            throw InvalidParameter("PlatoonConfig: disturbance amplitude must be finite");
        if (!std::isfinite(disturbance.angular_frequency) || disturbance.angular_frequency <= 0.0)
            throw InvalidParameter("PlatoonConfig: disturbance frequency must be positive");
        if (!std::isfinite(disturbance.start_time) || disturbance.start_time < 0.0)
            throw InvalidParameter("PlatoonConfig: disturbance start must be non-negative");
    }
};

// Third-order longitudinal dynamics: position, speed, acceleration with a
// first-order engine lag. The disturbance column B1 feeds the position row
// and is never scaled by any gain.
struct SystemMatrices {
    std::array<std::array<double, 3>, 3> A{};
    std::array<double, 3> B{};
    std::array<double, 3> B1{};
};

inline SystemMatrices build_system(double tau) {
    if (!std::isfinite(tau) || tau <= 0.0)
        throw InvalidParameter("build_system: tau must be positive and finite");
    SystemMatrices m;
    m.A = {{{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {0.0, 0.0, -1.0 / tau}}};
    m.B = {0.0, 0.0, 1.0 / tau};
    m.B1 = {1.0, 0.0, 0.0};
    return m;
}

// Controller and observer scalars. k1, k2, k3 place all three closed-loop
// eigenvalues at -b; alpha weights the acceleration consensus injection.
struct Gains {
    double b = 0.0;
    double alpha = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    double k3 = 0.0;
    double alpha_bar = 0.0;     // alpha / tau
    std::array<double, 3> K{};  // feedback row, u = -K x_hat
    std::array<double, 3> L{};  // consensus row, alpha * B^T
};

// k3 = 3 b tau - 1 must come out positive, hence b > 1/(3 tau). alpha = 0 is
// allowed and simply switches the consensus channel off.
inline Gains gains_from_b(double b, double alpha, double tau) {
    if (!std::isfinite(tau) || tau <= 0.0)
        throw InvalidParameter("gains_from_b: tau must be positive and finite");
    if (!std::isfinite(b) || !std::isfinite(alpha))
        throw InvalidParameter("gains_from_b: b and alpha must be finite");
    if (alpha < 0.0)
        throw InvalidParameter("gains_from_b: alpha must be non-negative");
    if (b <= 1.0 / (3.0 * tau))
        throw DesignConstraintError("gains_from_b: need b > 1/(3 tau) so that k3 > 0");
    Gains g;
    g.b = b;
    g.alpha = alpha;
    g.k1 = b * b * b * tau;
    g.k2 = 3.0 * b * b * tau;
    g.k3 = 3.0 * b * tau - 1.0;
    g.alpha_bar = alpha / tau;
    g.K = {g.k1, g.k2, g.k3};
    g.L = {0.0, 0.0, alpha / tau};
    return g;
}

// Desired distance between vehicle i and vehicle i-j under the constant
// time-headway policy: h * (v_{i-1} + ... + v_{i-j}) + j * D.
// predecessor_speeds[0] is v_{i-1}, predecessor_speeds[j-1] is v_{i-j}.
inline double desired_gap(int i, int j, double h, double D,
                          std::span<const double> predecessor_speeds) {
    if (i < 1 || j < 1 || j > i)
        throw InvalidParameter("desired_gap: need 1 <= j <= i");
    if (std::cmp_less(predecessor_speeds.size(), j))
        throw InvalidParameter("desired_gap: speeds list shorter than j");
    double gap = 0.0;
    for (int l = 0; l < j; ++l) gap += h * predecessor_speeds[static_cast<std::size_t>(l)];
    return gap + j * D;
}

}  // namespace platoon
