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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <utility>
#include <vector>

#include "platoon/errors.hpp"
#include "platoon/model.hpp"
#include "platoon/observer_control.hpp"
#include "platoon/topology.hpp"

namespace platoon {

// One closed-loop run: leader + n followers + n observers, integrated with
// the classical 4-stage scheme at fixed dt.
//
// Initial condition: vehicle i at -i * init_spacing, every speed at v0,
// accelerations and observers at zero.
//
// Callers are expected to have run the internal stability check on the gains
// first (freqdomain.hpp), unless they deliberately want a negative-control
// run.
struct Scenario {
    PlatoonConfig config;
    Gains gains;
    Topology topology;
    double t_end = 120.0;
    double dt = 1e-3;
    int record_stride = 1;  // keep every k-th step in the trace

    void validate() const {
        config.validate();
        if (!std::isfinite(dt) || dt <= 0.0)
            throw InvalidParameter("Scenario: dt must be positive");
        if (!std::isfinite(t_end) || t_end <= 0.0)
            throw InvalidParameter("Scenario: t_end must be positive");
        if (config.disturbance.amplitude != 0.0 &&
            t_end <= config.disturbance.start_time + config.disturbance.duration())
            throw InvalidParameter("Scenario: t_end must cover the full disturbance cycle");
        if (record_stride < 1)
            throw InvalidParameter("Scenario: record stride must be >= 1");
        if (topology.n != config.n || topology.r != config.r)
            throw InvalidParameter("Scenario: topology does not match the config");
    }
};

struct SimTrace {
    std::vector<double> times;
    std::vector<std::vector<VehicleState>> states;      // [sample][vehicle 0..n]
    std::vector<std::vector<ObserverState>> observers;  // [sample][follower 1..n]
    std::vector<std::vector<double>> spacing_errors;    // [sample][follower 1..n]
    std::vector<std::vector<double>> xi_norms;          // [sample][follower 1..n]
    int n = 0;
};

// settle_times: first recorded time from which |e_bar| stays below epsilon
// through the rest of the settle window; +inf when that never happens.
// peak_errors: max |e_bar| per follower over the peak window.
// The two windows partition the trace at the disturbance onset.
struct StabilityReport {
    std::vector<double> settle_times;
    std::vector<double> peak_errors;
    bool string_stable_empirical = false;  // peaks non-increasing along the string
    bool converged = false;                // every |e_bar| < epsilon at the end
    double epsilon = 0.0;
    double delta_rel = 0.0;
    std::pair<double, double> settle_window{};  // [trace start, disturbance onset)
    std::pair<double, double> peak_window{};    // [disturbance onset, trace end]
};

inline SimTrace integrate(const Scenario& sc) {
    sc.validate();
    const PlatoonConfig& cfg = sc.config;
    const Gains& g = sc.gains;
    const int n = cfg.n;
    const int nv = 3 * (n + 1);      // leader + follower block
    const int dim = nv + 3 * n;      // plus observers

    std::vector<double> y(static_cast<std::size_t>(dim), 0.0);
    for (int i = 0; i <= n; ++i) {
        y[static_cast<std::size_t>(3 * i)] = -cfg.init_spacing * i;
        y[static_cast<std::size_t>(3 * i) + 1] = cfg.v0;
    }

    std::vector<double> k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()),
        stage(y.size());
    std::vector<VehicleState> nb_states(static_cast<std::size_t>(cfg.r));
    std::vector<ObserverState> nb_obs(static_cast<std::size_t>(cfg.r));
    std::vector<VehicleState> snapshot(static_cast<std::size_t>(n) + 1);

    auto rhs = [&](double t, const std::vector<double>& x, std::vector<double>& dx) {
        const double u0 = cfg.disturbance.value(t);
        const VehicleState lead{x[0], x[1], x[2]};
        const VehicleState dl = leader_rhs(lead, u0, cfg.tau);
        dx[0] = dl.p;
        dx[1] = dl.v;
        dx[2] = dl.a;
        for (int i = 1; i <= n; ++i) {
            const std::size_t si = static_cast<std::size_t>(3 * i);
            const std::size_t oi = static_cast<std::size_t>(nv + 3 * (i - 1));
            const VehicleState self{x[si], x[si + 1], x[si + 2]};
            const ObserverState obs{x[oi], x[oi + 1], x[oi + 2]};
            const int ri = sc.topology.r_of(i);
            for (int l = 1; l <= ri; ++l) {
                const int j = i - l;
                const std::size_t sj = static_cast<std::size_t>(3 * j);
                nb_states[static_cast<std::size_t>(l) - 1] = {x[sj], x[sj + 1], x[sj + 2]};
                if (j == 0) {
                    nb_obs[static_cast<std::size_t>(l) - 1] = ObserverState{};
                } else {
                    const std::size_t oj = static_cast<std::size_t>(nv + 3 * (j - 1));
                    nb_obs[static_cast<std::size_t>(l) - 1] = {x[oj], x[oj + 1], x[oj + 2]};
                }
            }
            const double u = control_input(obs, g);
            const VehicleState df = follower_rhs(self, u, cfg.tau);
            dx[si] = df.p;
            dx[si + 1] = df.v;
            dx[si + 2] = df.a;
            const ObserverState dob = observer_rhs(
                i, self, {nb_states.data(), static_cast<std::size_t>(ri)}, obs,
                {nb_obs.data(), static_cast<std::size_t>(ri)}, sc.topology.leader_link(i),
                g, cfg);
            dx[oi] = dob.p_hat;
            dx[oi + 1] = dob.v_hat;
            dx[oi + 2] = dob.a_hat;
        }
    };

    const long long steps = std::llround(sc.t_end / sc.dt);
    SimTrace tr;
    tr.n = n;
    const std::size_t reserve =
        static_cast<std::size_t>(steps / sc.record_stride) + 2;
    tr.times.reserve(reserve);
    tr.states.reserve(reserve);
    tr.observers.reserve(reserve);
    tr.spacing_errors.reserve(reserve);
    tr.xi_norms.reserve(reserve);

    auto record = [&](double t) {
        for (int i = 0; i <= n; ++i) {
            const std::size_t si = static_cast<std::size_t>(3 * i);
            snapshot[static_cast<std::size_t>(i)] = {y[si], y[si + 1], y[si + 2]};
        }
        const auto errs = compute_errors(snapshot, cfg);
        tr.times.push_back(t);
        tr.states.push_back(snapshot);
        std::vector<ObserverState> obs_row(static_cast<std::size_t>(n));
        std::vector<double> err_row(static_cast<std::size_t>(n));
        std::vector<double> xi_row(static_cast<std::size_t>(n));
        for (int i = 1; i <= n; ++i) {
            const std::size_t oi = static_cast<std::size_t>(nv + 3 * (i - 1));
            const ObserverState o{y[oi], y[oi + 1], y[oi + 2]};
            obs_row[static_cast<std::size_t>(i) - 1] = o;
            const ErrorState& e = errs[static_cast<std::size_t>(i) - 1];
            err_row[static_cast<std::size_t>(i) - 1] = e.bar[0];
            const double xp = e.tilde[0] - o.p_hat;
            const double xv = e.tilde[1] - o.v_hat;
            const double xa = e.tilde[2] - o.a_hat;
            xi_row[static_cast<std::size_t>(i) - 1] = std::sqrt(xp * xp + xv * xv + xa * xa);
        }
        tr.observers.push_back(std::move(obs_row));
        tr.spacing_errors.push_back(std::move(err_row));
        tr.xi_norms.push_back(std::move(xi_row));
    };

    record(0.0);
    for (long long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * sc.dt;
        rhs(t, y, k1);
        for (std::size_t j = 0; j < y.size(); ++j) stage[j] = y[j] + 0.5 * sc.dt * k1[j];
        rhs(t + 0.5 * sc.dt, stage, k2);
        for (std::size_t j = 0; j < y.size(); ++j) stage[j] = y[j] + 0.5 * sc.dt * k2[j];
        rhs(t + 0.5 * sc.dt, stage, k3);
        for (std::size_t j = 0; j < y.size(); ++j) stage[j] = y[j] + sc.dt * k3[j];
        rhs(t + sc.dt, stage, k4);
        for (std::size_t j = 0; j < y.size(); ++j)
            y[j] += (sc.dt / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);

        const double t_next = static_cast<double>(k + 1) * sc.dt;
        for (double v : y)
            if (!std::isfinite(v) || std::abs(v) > 1e9)
                throw DivergenceError("integrate: state diverged", t_next);
        if ((k + 1) % sc.record_stride == 0 || k + 1 == steps) record(t_next);
    }
    return tr;
}

inline StabilityReport stability_report(const SimTrace& tr, double epsilon,
                                        std::pair<double, double> disturbance_window,
                                        double delta_rel = 1e-3) {
    if (tr.times.empty() || tr.n < 1)
        throw InvalidParameter("stability_report: empty trace");
    if (!(epsilon > 0.0))
        throw InvalidParameter("stability_report: epsilon must be positive");
    if (delta_rel < 0.0)
        throw InvalidParameter("stability_report: delta_rel must be non-negative");
    const double t0 = tr.times.front();
    const double tN = tr.times.back();
    if (!(disturbance_window.first <= disturbance_window.second) ||
        disturbance_window.first < t0 || disturbance_window.second > tN)
        throw InvalidParameter("stability_report: disturbance window outside the trace");

    const std::size_t n = static_cast<std::size_t>(tr.n);
    const double onset = disturbance_window.first;
    StabilityReport rep;
    rep.epsilon = epsilon;
    rep.delta_rel = delta_rel;
    rep.settle_window = {t0, onset};
    rep.peak_window = {onset, tN};
    rep.settle_times.assign(n, std::numeric_limits<double>::infinity());
    rep.peak_errors.assign(n, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        // last violation inside the settle window decides the settle time
        std::ptrdiff_t last_violation = -1;
        std::size_t window_end = 0;  // one past the last settle-window sample
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            if (tr.times[k] >= onset) break;
            window_end = k + 1;
            if (std::abs(tr.spacing_errors[k][i]) >= epsilon)
                last_violation = static_cast<std::ptrdiff_t>(k);
        }
        if (last_violation < 0) {
            rep.settle_times[i] = t0;
        } else if (static_cast<std::size_t>(last_violation) + 1 < window_end) {
            rep.settle_times[i] = tr.times[static_cast<std::size_t>(last_violation) + 1];
        }  // else: still violating at the window's end, stays +inf

        double peak = 0.0;
        for (std::size_t k = 0; k < tr.times.size(); ++k)
            if (tr.times[k] >= onset)
                peak = std::max(peak, std::abs(tr.spacing_errors[k][i]));
        rep.peak_errors[i] = peak;
    }

    rep.converged = true;
    for (std::size_t i = 0; i < n; ++i)
        if (!(std::abs(tr.spacing_errors.back()[i]) < epsilon)) rep.converged = false;

    rep.string_stable_empirical = true;
    for (std::size_t i = 1; i < n; ++i)
        if (rep.peak_errors[i] > rep.peak_errors[i - 1] * (1.0 + delta_rel))
            rep.string_stable_empirical = false;
    return rep;
}

// Follower indices (1-based) sorted by settle time; equal settle times keep
// index order, so the expected outcome for a healthy run is 1, 2, ..., n.
inline std::vector<int> convergence_order(const StabilityReport& rep) {
    if (!rep.converged)
        throw NotApplicableError("convergence_order: run did not converge");
    std::vector<int> order(rep.settle_times.size());
    std::iota(order.begin(), order.end(), 1);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return rep.settle_times[static_cast<std::size_t>(a) - 1] <
               rep.settle_times[static_cast<std::size_t>(b) - 1];
    });
    return order;
}

// One row per (time, vehicle). Leader rows carry zeros in the observer and
// spacing-error columns.
inline void write_trace_csv(const SimTrace& tr, std::ostream& os) {
    os << "t,veh,p,v,a,p_hat,v_hat,a_hat,e_bar\n";
    char buf[256];
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        for (int i = 0; i <= tr.n; ++i) {
            const VehicleState& s = tr.states[k][static_cast<std::size_t>(i)];
            double ph = 0.0, vh = 0.0, ah = 0.0, eb = 0.0;
            if (i >= 1) {
                const ObserverState& o = tr.observers[k][static_cast<std::size_t>(i) - 1];
                ph = o.p_hat;
                vh = o.v_hat;
                ah = o.a_hat;
                eb = tr.spacing_errors[k][static_cast<std::size_t>(i) - 1];
            }
            std::snprintf(buf, sizeof buf,
                          "%.6f,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", tr.times[k],
                          i, s.p, s.v, s.a, ph, vh, ah, eb);
            os << buf;
        }
    }
}

}  // namespace platoon
