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

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "platoon/errors.hpp"
#include "platoon/model.hpp"
#include "platoon/observer_control.hpp"
#include "platoon/topology.hpp"

using namespace platoon;

namespace {

bool close(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("vehicle dynamics right-hand sides") {
    const VehicleState s{100.0, 20.0, -1.5};
    const VehicleState dl = leader_rhs(s, 3.0, 0.5);
    CHECK(dl.p == 20.0);
    CHECK(dl.v == -1.5);
    CHECK(dl.a == (1.5 + 3.0) / 0.5);

    const VehicleState df = follower_rhs(s, -2.0, 0.5);
    CHECK(df.p == 20.0);
    CHECK(df.v == -1.5);
    CHECK(df.a == (1.5 - 2.0) / 0.5);
}

TEST_CASE("control input is the negative gain row applied to the estimate") {
    const Gains g = gains_from_b(4.0, 0.2, 0.5);
    const ObserverState o{1.0, -2.0, 0.5};
    CHECK(control_input(o, g) == -(32.0 * 1.0 + 24.0 * -2.0 + 5.0 * 0.5));
    CHECK(control_input(ObserverState{}, g) == 0.0);
}

TEST_CASE("observer_rhs rejects topology mismatches") {
    PlatoonConfig cfg;
    cfg.n = 5;
    cfg.r = 3;
    const Gains g = gains_from_b(4.0, 0.2, cfg.tau);
    const VehicleState self{};
    std::vector<VehicleState> nb(3);
    std::vector<ObserverState> nbo(3);

    CHECK_THROWS_AS(observer_rhs(0, self, {nb.data(), 1}, {}, {nbo.data(), 1}, true,
                                 g, cfg),
                    TopologyMismatch);
    CHECK_THROWS_AS(observer_rhs(6, self, {nb.data(), 3}, {}, {nbo.data(), 3}, false,
                                 g, cfg),
                    TopologyMismatch);
    // vehicle 2 hears exactly two predecessors
    CHECK_THROWS_AS(observer_rhs(2, self, {nb.data(), 3}, {}, {nbo.data(), 3}, true,
                                 g, cfg),
                    TopologyMismatch);
    CHECK_THROWS_AS(observer_rhs(2, self, {nb.data(), 2}, {}, {nbo.data(), 1}, true,
                                 g, cfg),
                    TopologyMismatch);
    // vehicle 2 <= r has a leader link, vehicle 4 does not
    CHECK_THROWS_AS(observer_rhs(2, self, {nb.data(), 2}, {}, {nbo.data(), 2}, false,
                                 g, cfg),
                    TopologyMismatch);
    CHECK_THROWS_AS(observer_rhs(4, self, {nb.data(), 3}, {}, {nbo.data(), 3}, true,
                                 g, cfg),
                    TopologyMismatch);
    CHECK_NOTHROW(observer_rhs(2, self, {nb.data(), 2}, {}, {nbo.data(), 2}, true, g,
                               cfg));
    CHECK_NOTHROW(observer_rhs(4, self, {nb.data(), 3}, {}, {nbo.data(), 3}, false,
                               g, cfg));
}

// Matrix-form oracle: the scalar observer derivative must equal
//   A x_hat + B u + B K (x_meas - x_hat) + B L sum_l (dx_l - dx_hat_l)
// with u = -K x_hat, built independently with Eigen.
TEST_CASE("observer_rhs agrees with its matrix form on random inputs") {
    std::mt19937 rng(20260819u);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    for (int trial = 0; trial < 200; ++trial) {
        PlatoonConfig cfg;
        cfg.tau = 0.2 + 0.8 * uni(rng);
        cfg.h = 0.05 + 1.95 * uni(rng);
        cfg.standstill_gap = 10.0 * uni(rng);
        cfg.n = 1 + static_cast<int>(uni(rng) * 8.0);
        cfg.r = 1 + static_cast<int>(uni(rng) * cfg.n);
        if (cfg.r > cfg.n) cfg.r = cfg.n;
        const double b = 1.0 / (3.0 * cfg.tau) + 0.1 + 9.0 * uni(rng);
        const double alpha = 3.0 * uni(rng);
        const Gains g = gains_from_b(b, alpha, cfg.tau);

        const int i = 1 + static_cast<int>(uni(rng) * cfg.n);
        const int ri = std::min(i, cfg.r);
        auto rand_state = [&] {
            return VehicleState{1000.0 * (uni(rng) - 0.5), 60.0 * (uni(rng) - 0.5),
                                10.0 * (uni(rng) - 0.5)};
        };
        auto rand_obs = [&] {
            return ObserverState{40.0 * (uni(rng) - 0.5), 20.0 * (uni(rng) - 0.5),
                                 8.0 * (uni(rng) - 0.5)};
        };
        const VehicleState self = rand_state();
        const ObserverState obs = rand_obs();
        std::vector<VehicleState> nb(static_cast<std::size_t>(ri));
        std::vector<ObserverState> nbo(static_cast<std::size_t>(ri));
        for (int l = 1; l <= ri; ++l) {
            nb[static_cast<std::size_t>(l) - 1] = rand_state();
            nbo[static_cast<std::size_t>(l) - 1] =
                (i - l == 0) ? ObserverState{} : rand_obs();
        }

        const ObserverState d = observer_rhs(
            i, self, {nb.data(), nb.size()}, obs, {nbo.data(), nbo.size()},
            i <= cfg.r, g, cfg);

        const SystemMatrices sys = build_system(cfg.tau);
        Eigen::Matrix3d A;
        Eigen::Vector3d B;
        for (int row = 0; row < 3; ++row) {
            B(row) = sys.B[static_cast<std::size_t>(row)];
            for (int col = 0; col < 3; ++col)
                A(row, col) = sys.A[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
        }
        Eigen::RowVector3d K(g.K[0], g.K[1], g.K[2]);
        Eigen::RowVector3d L(g.L[0], g.L[1], g.L[2]);

        const Eigen::Vector3d xhat(obs.p_hat, obs.v_hat, obs.a_hat);
        const Eigen::Vector3d xi(self.p, self.v, self.a);
        const VehicleState& pred = nb[0];
        const Eigen::Vector3d xmeas(
            self.p - pred.p + cfg.h * pred.v + cfg.standstill_gap,
            self.v - pred.v, self.a - pred.a);

        Eigen::Vector3d consensus = Eigen::Vector3d::Zero();
        for (int l = 1; l <= ri; ++l) {
            const VehicleState& s = nb[static_cast<std::size_t>(l) - 1];
            const ObserverState& o = nbo[static_cast<std::size_t>(l) - 1];
            const Eigen::Vector3d xl(s.p, s.v, s.a);
            const Eigen::Vector3d xhl(o.p_hat, o.v_hat, o.a_hat);
            consensus += (xi - xl) - (xhat - xhl);
        }

        const double u = -(K * xhat)(0);
        const Eigen::Vector3d ref = A * xhat + B * u + B * (K * (xmeas - xhat))(0) +
                                    B * (L * consensus)(0);

        INFO("trial " << trial << " i=" << i << " ri=" << ri);
        CHECK(close(d.p_hat, ref(0), 1e-12));
        CHECK(close(d.v_hat, ref(1), 1e-12));
        CHECK(close(d.a_hat, ref(2), 1e-12));
    }
}

TEST_CASE("compute_errors produces consistent error coordinates") {
    std::mt19937 rng(77u);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    PlatoonConfig cfg;
    cfg.n = 6;
    cfg.r = 2;
    cfg.h = 0.6;
    cfg.standstill_gap = 5.0;

    for (int trial = 0; trial < 50; ++trial) {
        std::vector<VehicleState> states(static_cast<std::size_t>(cfg.n) + 1);
        for (auto& s : states)
            s = {200.0 * uni(rng), 30.0 * uni(rng), 5.0 * uni(rng)};
        const auto errs = compute_errors(states, cfg);
        REQUIRE(errs.size() == static_cast<std::size_t>(cfg.n));

        // first follower: predecessor-relative and leader-relative coincide
        for (int k = 0; k < 3; ++k)
            CHECK(close(errs[0].bar[static_cast<std::size_t>(k)],
                        errs[0].tilde[static_cast<std::size_t>(k)], 1e-12));

        for (int i = 2; i <= cfg.n; ++i) {
            const ErrorState& e = errs[static_cast<std::size_t>(i) - 1];
            const ErrorState& ep = errs[static_cast<std::size_t>(i) - 2];
            // chain rule linking the two coordinate systems
            CHECK(close(e.bar[0], e.tilde[0] - ep.tilde[0] + cfg.h * ep.tilde[1], 1e-9));
            CHECK(close(e.bar[1], e.tilde[1] - ep.tilde[1], 1e-9));
            CHECK(close(e.bar[2], e.tilde[2] - ep.tilde[2], 1e-9));
        }
        for (int i = 1; i <= cfg.n; ++i) {
            const ErrorState& e = errs[static_cast<std::size_t>(i) - 1];
            CHECK(e.omega == i * cfg.h * states[0].a);
            CHECK(e.xi == std::array<double, 3>{0.0, 0.0, 0.0});
        }
    }

    std::vector<VehicleState> wrong(static_cast<std::size_t>(cfg.n));
    CHECK_THROWS_AS(compute_errors(wrong, cfg), InvalidParameter);
}

TEST_CASE("rigid-formation snapshot has uniform spacing error") {
    PlatoonConfig cfg;
    cfg.n = 7;
    cfg.r = 3;
    cfg.h = 0.6;
    cfg.standstill_gap = 5.0;
    cfg.v0 = 20.0;
    std::vector<VehicleState> states(8);
    for (int i = 0; i <= 7; ++i) states[static_cast<std::size_t>(i)] = {-5.0 * i, 20.0, 0.0};
    const auto errs = compute_errors(states, cfg);
    for (int i = 1; i <= 7; ++i) {
        // gap 5 m versus desired 0.6*20 + 5 = 17 m
        CHECK(errs[static_cast<std::size_t>(i) - 1].bar[0] == Catch::Approx(12.0));
        CHECK(errs[static_cast<std::size_t>(i) - 1].tilde[0] == Catch::Approx(12.0 * i));
        CHECK(errs[static_cast<std::size_t>(i) - 1].tilde[1] == 0.0);
        CHECK(errs[static_cast<std::size_t>(i) - 1].omega == 0.0);
    }
}
