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
#include <array>
#include <span>
#include <vector>

#include "platoon/errors.hpp"
#include "platoon/model.hpp"

namespace platoon {

struct VehicleState {
    double p = 0.0;  // position [m]
    double v = 0.0;  // speed [m/s]
    double a = 0.0;  // acceleration [m/s^2]
};

// Each follower runs a local observer estimating its own leader-relative
// error state. Observers start at zero.
struct ObserverState {
    double p_hat = 0.0;
    double v_hat = 0.0;
    double a_hat = 0.0;
};

// Error coordinates of one follower.
//  tilde: leader-relative error (position error includes the accumulated
//         desired gaps i * (h v0 + D), with v0 the leader's instantaneous
//         speed).
//  bar:   predecessor-relative error; bar[0] is the spacing error e_bar.
//  omega: i * h * a0 coupling term from the time-headway policy.
//  xi:    observer estimation error tilde - hat; compute_errors has no
//         access to observer states and leaves it zero, the simulator
//         fills it in.
struct ErrorState {
    std::array<double, 3> tilde{};
    std::array<double, 3> bar{};
    double omega = 0.0;
    std::array<double, 3> xi{};
};

inline VehicleState leader_rhs(const VehicleState& s, double u0, double tau) {
    return {s.v, s.a, (-s.a + u0) / tau};
}

inline VehicleState follower_rhs(const VehicleState& s, double u, double tau) {
    return {s.v, s.a, (-s.a + u) / tau};
}

inline double control_input(const ObserverState& o, const Gains& g) {
    return -(g.k1 * o.p_hat + g.k2 * o.v_hat + g.k3 * o.a_hat);
}

// Observer dynamics of follower i.
//
// neighbor_states[l-1] / neighbor_obs[l-1] belong to vehicle i-l, ordered by
// offset l = 1..r_i with r_i = min(i, r). When the leader is among the
// neighbors (l == i) its observer entry must be the zero triple; its true
// acceleration travels with its state on that link.
//
// The derivative combines the local feedback -K x_hat, a correction driven
// by the measured predecessor-relative residuals, and an acceleration
// consensus term over all neighbors weighted by alpha / tau^2.
inline ObserverState observer_rhs(int i, const VehicleState& self,
                                  std::span<const VehicleState> neighbor_states,
                                  const ObserverState& obs,
                                  std::span<const ObserverState> neighbor_obs,
                                  bool leader_link, const Gains& g,
                                  const PlatoonConfig& cfg) {
    if (i < 1 || i > cfg.n)
        throw TopologyMismatch("observer_rhs: vehicle index out of range");
    const int ri = std::min(i, cfg.r);
    if (neighbor_states.size() != static_cast<std::size_t>(ri) ||
        neighbor_obs.size() != static_cast<std::size_t>(ri))
        throw TopologyMismatch("observer_rhs: neighbor lists do not match the topology fan-in");
    if (leader_link != (i <= cfg.r))
        throw TopologyMismatch("observer_rhs: leader link flag does not match the topology");

    const double tau = cfg.tau;
    const VehicleState& pred = neighbor_states[0];

    ObserverState d;
    d.p_hat = obs.v_hat;
    d.v_hat = obs.a_hat;

    const double spacing_residual =
        self.p - pred.p + cfg.h * pred.v + cfg.standstill_gap - obs.p_hat;
    const double speed_residual = self.v - pred.v - obs.v_hat;
    const double accel_residual = self.a - pred.a - obs.a_hat;

    double consensus = 0.0;
    for (int l = 1; l <= ri; ++l) {
        const VehicleState& nb = neighbor_states[static_cast<std::size_t>(l) - 1];
        const ObserverState& nbo = neighbor_obs[static_cast<std::size_t>(l) - 1];
        consensus += (self.a - nb.a) - (obs.a_hat - nbo.a_hat);
    }

    d.a_hat = -(g.k1 / tau) * obs.p_hat - (g.k2 / tau) * obs.v_hat -
              ((1.0 + g.k3) / tau) * obs.a_hat + (g.k1 / tau) * spacing_residual +
              (g.k2 / tau) * speed_residual + (g.k3 / tau) * accel_residual +
              (g.alpha / (tau * tau)) * consensus;
    return d;
}

// Error coordinates for every follower from one state snapshot.
// all_states[0] is the leader.
inline std::vector<ErrorState> compute_errors(std::span<const VehicleState> all_states,
                                              const PlatoonConfig& cfg) {
    if (all_states.size() != static_cast<std::size_t>(cfg.n) + 1)
        throw InvalidParameter("compute_errors: expected leader plus n followers");
    const VehicleState& lead = all_states[0];
    std::vector<ErrorState> out(static_cast<std::size_t>(cfg.n));
    for (int i = 1; i <= cfg.n; ++i) {
        const VehicleState& s = all_states[static_cast<std::size_t>(i)];
        const VehicleState& pred = all_states[static_cast<std::size_t>(i) - 1];
        ErrorState& e = out[static_cast<std::size_t>(i) - 1];
        e.tilde = {s.p - lead.p + i * (cfg.h * lead.v + cfg.standstill_gap),
                   s.v - lead.v, s.a - lead.a};
        e.bar = {s.p - pred.p + cfg.h * pred.v + cfg.standstill_gap,
                 s.v - pred.v, s.a - pred.a};
        e.omega = i * cfg.h * lead.a;
    }
    return out;
}

}  // namespace platoon
