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

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <vector>

#include "platoon/errors.hpp"
#include "platoon/freqdomain.hpp"
#include "platoon/model.hpp"

namespace platoon {

// Feasibility slack on the string-stability gate: a design passes when
// hinf <= 1 + kHinfSlack, absorbing sweep/refinement noise at the boundary.
inline constexpr double kHinfSlack = 1e-9;

struct DesignSpec {
    int r_bar = 1;        // upper bound on predecessor count
    double h_bar = 0.6;   // largest admissible time headway, s
    double tau = 0.5;     // powertrain lag, s
    double omega0 = 100.0;   // frequency where the W-tail bound is anchored
    double omega1 = 1000.0;  // top of the certified sweep band
    int k_max = 100;         // inner b-sweep resolution
    double tol = 1e-3;       // headway bisection tolerance, s
    int max_rounds = 128;    // hard cap on bisection rounds

    void validate() const {
        if (r_bar < 1) throw InvalidParameter("DesignSpec: r_bar must be >= 1");
        if (!std::isfinite(h_bar) || h_bar <= 0.0)
            throw InvalidParameter("DesignSpec: h_bar must be positive");
        if (!std::isfinite(tau) || tau <= 0.0)
            throw InvalidParameter("DesignSpec: tau must be positive");
        if (!std::isfinite(omega0) || omega0 <= 0.0)
            throw InvalidParameter("DesignSpec: omega0 must be positive");
        if (!std::isfinite(omega1) || omega1 < 10.0 * omega0)
            throw InvalidParameter("DesignSpec: omega1 must be >= 10*omega0");
        if (!std::isfinite(tol) || tol <= 0.0)
            throw InvalidParameter("DesignSpec: tol must be positive");
        if (k_max < 1) throw InvalidParameter("DesignSpec: k_max must be >= 1");
        if (max_rounds < 1)
            throw InvalidParameter("DesignSpec: max_rounds must be >= 1");
    }

    GridSpec sweep_grid() const {
        return GridSpec{1e-3, std::max(1e3, omega1), 400};
    }
};

struct MainRuleInterval {
    double b_lo = 0.0;
    double b_hi = 0.0;
    bool empty() const { return !(b_lo < b_hi); }
};

// Pole-placement interval: b_lo keeps the consensus loops damped, b_hi = 6/h
// keeps the headway term from overpowering the loop. Half-open [b_lo, b_hi).
inline MainRuleInterval main_rule_bounds(double alpha, int r, double tau, double h) {
    return {4.0 * alpha * (r - 1) / (9.0 * tau * tau) + 8.0 / (9.0 * tau), 6.0 / h};
}

inline bool complementary_rule(double alpha, double b, double tau, double h) {
    return 3.0 * b * tau * tau * (h * b - 5.0) + 2.0 * tau - alpha < 0.0;
}

struct DesignRound {
    int round = 0;
    double h_lo = 0.0;
    double h_up = 0.0;
    double h_tried = 0.0;
    double b_found = std::numeric_limits<double>::quiet_NaN();
    double hinf = std::numeric_limits<double>::quiet_NaN();
    bool accepted = false;
};

struct DesignResult {
    bool feasible = false;
    double alpha = 0.0;
    double b = 0.0;
    double h = 0.0;
    std::vector<double> bisection_trace;  // every headway tried, in order
    std::vector<DesignRound> rounds;
    FrequencyResponse verification;  // sweep of the accepted design
    WCoefficients w_advisory{};
    WConditionReport w_report{};
    bool has_w_advisory = false;
};

namespace detail {

inline void attach_w_advisory(DesignResult& res, const Gains& g, int r, double h,
                              double tau) {
    res.w_advisory = w_coefficients(g, r, h, tau);
    res.w_report =
        check_w_conditions(res.w_advisory, res.w_advisory.omega0.value_or(0.0));
    res.has_w_advisory = true;
}

}  // namespace detail

// Fixed-headway search: walk a small alpha grid, sweep b across the main-rule
// interval, drop candidates failing the complementary rule, and accept the
// first (alpha, b) whose sweep stays at or below 1. The W-condition report is
// advisory only; designs regularly pass the sweep while some W sign flips.
inline DesignResult heuristic_search(double h, int r, double tau,
                                     const DesignSpec& spec) {
    spec.validate();
    if (!std::isfinite(h) || h <= 0.0)
        throw InvalidParameter("heuristic_search: h must be positive");
    if (h > spec.h_bar)
        throw InvalidParameter("heuristic_search: h exceeds h_bar");
    if (r < 1) throw InvalidParameter("heuristic_search: r must be >= 1");

    const GridSpec grid = spec.sweep_grid();
    const double alpha_grid[] = {2.0 * tau, tau, 0.5 * tau, 0.2};
    DesignResult res;
    res.h = h;
    res.bisection_trace = {h};

    for (double alpha : alpha_grid) {
        const MainRuleInterval iv = main_rule_bounds(alpha, r, tau, h);
        if (iv.empty()) continue;
        const double step = (iv.b_hi - iv.b_lo) / spec.k_max;
        for (int k = 0; k <= spec.k_max; ++k) {
            const double b = iv.b_lo + k * step;
            if (!(b < iv.b_hi)) break;
            if (!complementary_rule(alpha, b, tau, h)) continue;
            const Gains g = gains_from_b(b, alpha, tau);
            const FrequencyResponse fr = hinf_norm(build_polys(g, r, h, tau), grid);
            if (fr.hinf <= 1.0 + kHinfSlack) {
                res.feasible = true;
                res.alpha = alpha;
                res.b = b;
                res.verification = fr;
                detail::attach_w_advisory(res, g, r, h, tau);
                return res;
            }
        }
    }
    return res;
}

// Headway minimization: bisection on h with alpha pinned to 2*tau and the
// inner sweep running b from the consensus lower bound up to 5/h. Each round
// tries the current h; feasible rounds pull the upper bracket down, failed
// ones push the lower bracket up. Terminates when the next midpoint sits
// within tol of the last verified headway, which is the value returned.
inline DesignResult minimize_headway(const DesignSpec& spec) {
    spec.validate();
    const double alpha = 2.0 * spec.tau;
    const double b_lo = 4.0 * alpha * (spec.r_bar - 1) / (9.0 * spec.tau * spec.tau) +
                        8.0 / (9.0 * spec.tau);
    const GridSpec grid = spec.sweep_grid();

    DesignResult res;
    res.alpha = alpha;

    double h_lo = 0.0;
    double h_up = spec.h_bar;
    double h = spec.h_bar;
    double h_prev = 0.0;

    for (int round = 1; round <= spec.max_rounds; ++round) {
        res.bisection_trace.push_back(h);
        const double step = (5.0 / h - b_lo) / spec.k_max;

        bool found = false;
        double b_found = std::numeric_limits<double>::quiet_NaN();
        double hinf_last = std::numeric_limits<double>::quiet_NaN();
        FrequencyResponse fr_found;
        if (step > 0.0) {
            for (int k = 0; k <= spec.k_max; ++k) {
                const double b = b_lo + k * step;
                const Gains g = gains_from_b(b, alpha, spec.tau);
                const FrequencyResponse fr =
                    hinf_norm(build_polys(g, spec.r_bar, h, spec.tau), grid);
                hinf_last = fr.hinf;
                if (fr.hinf <= 1.0 + kHinfSlack) {
                    found = true;
                    b_found = b;
                    fr_found = fr;
                    break;
                }
            }
        }
        res.rounds.push_back({round, h_lo, h_up, h, b_found, hinf_last, found});

        if (found) {
            h_up = h;
            h_prev = h;
            res.b = b_found;
            res.h = h_prev;
            res.verification = fr_found;
            const double h_next = 0.5 * (h_lo + h_up);
            if (std::abs(h_next - h_prev) <= spec.tol) {
                res.feasible = true;
                detail::attach_w_advisory(res, gains_from_b(res.b, alpha, spec.tau),
                                          spec.r_bar, res.h, spec.tau);
                return res;
            }
            h = h_next;
        } else {
            h_lo = h;
            const double h_next = 0.5 * (h_lo + h_up);
            if (h_next == h) {
                res.feasible = false;
                return res;  // bracket exhausted, h_bar itself may be infeasible
            }
            h = h_next;
        }
    }
    res.feasible = false;
    return res;
}

inline void write_design_trace_csv(const DesignResult& res, std::ostream& os) {
    os << "round,h_lo,h_up,h_tried,b_found,hinf,accepted\n";
    char buf[192];
    for (const DesignRound& r : res.rounds) {
        std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%d\n", r.round,
                      r.h_lo, r.h_up, r.h_tried, r.b_found, r.hinf,
                      r.accepted ? 1 : 0);
        os << buf;
    }
}

}  // namespace platoon
