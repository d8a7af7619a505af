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

#include <array>
#include <cmath>
#include <numbers>

#include "platoon/errors.hpp"
#include "platoon/model.hpp"

using namespace platoon;

TEST_CASE("build_system lays out the third-order lag dynamics") {
    const SystemMatrices m = build_system(0.5);
    CHECK(m.A[0] == std::array<double, 3>{0.0, 1.0, 0.0});
    CHECK(m.A[1] == std::array<double, 3>{0.0, 0.0, 1.0});
    CHECK(m.A[2] == std::array<double, 3>{0.0, 0.0, -2.0});
    CHECK(m.B == std::array<double, 3>{0.0, 0.0, 2.0});
    CHECK(m.B1 == std::array<double, 3>{1.0, 0.0, 0.0});
    CHECK_THROWS_AS(build_system(0.0), InvalidParameter);
    CHECK_THROWS_AS(build_system(-1.0), InvalidParameter);
}

TEST_CASE("gains_from_b places all poles at -b") {
    const Gains g = gains_from_b(4.0, 0.2, 0.5);
    CHECK(g.k1 == 32.0);
    CHECK(g.k2 == 24.0);
    CHECK(g.k3 == 5.0);
    CHECK(g.alpha_bar == 0.4);
    CHECK(g.K == std::array<double, 3>{32.0, 24.0, 5.0});
    CHECK(g.L == std::array<double, 3>{0.0, 0.0, 0.4});

    // monic closed-loop cubic must be (s+b)^3
    const double tau = 0.5;
    CHECK((1.0 + g.k3) / tau == 3.0 * 4.0);
    CHECK(g.k2 / tau == 3.0 * 16.0);
    CHECK(g.k1 / tau == 64.0);

    const Gains g2 = gains_from_b(7.0, 1.0, 0.5);
    CHECK(g2.k1 == 171.5);
    CHECK(g2.k2 == 73.5);
    CHECK(g2.k3 == 9.5);
    CHECK(g2.alpha_bar == 2.0);
}

TEST_CASE("gains_from_b rejects parameters that break the pole placement") {
    CHECK_THROWS_AS(gains_from_b(2.0 / 3.0, 0.2, 0.5), DesignConstraintError);
    CHECK_THROWS_AS(gains_from_b(0.2, 0.2, 0.5), DesignConstraintError);
    CHECK_NOTHROW(gains_from_b(2.0 / 3.0 + 1e-9, 0.2, 0.5));
    CHECK_THROWS_AS(gains_from_b(4.0, -0.1, 0.5), InvalidParameter);
    CHECK_THROWS_AS(gains_from_b(4.0, 0.2, 0.0), InvalidParameter);
    CHECK_THROWS_AS(gains_from_b(4.0, 0.2, -0.5), InvalidParameter);
    CHECK_THROWS_AS(gains_from_b(std::nan(""), 0.2, 0.5), InvalidParameter);
    CHECK_NOTHROW(gains_from_b(4.0, 0.0, 0.5));  // consensus channel off
}

TEST_CASE("disturbance is one continuous sine cycle") {
    DisturbanceSpec d;
    d.amplitude = 10.0;
    d.angular_frequency = 1.0;
    d.start_time = 60.0;
    CHECK(d.duration() == 2.0 * std::numbers::pi);
    CHECK(d.value(59.999) == 0.0);
    CHECK(d.value(60.0) == 0.0);  // sin(0), continuous onset
    CHECK(d.value(60.0 + std::numbers::pi / 2.0) == Catch::Approx(10.0));
    CHECK(d.value(60.0 + 1.5 * std::numbers::pi) == Catch::Approx(-10.0));
    CHECK(d.value(60.0 + d.duration()) == 0.0);  // window is half-open
    CHECK(d.value(1000.0) == 0.0);

    DisturbanceSpec off;
    off.amplitude = 0.0;
    CHECK(off.value(0.0) == 0.0);
}

TEST_CASE("platoon config validation rejects each bad field") {
    PlatoonConfig good;
    good.n = 7;
    good.r = 3;
    CHECK_NOTHROW(good.validate());

    auto expect_throw = [](auto mutate) {
        PlatoonConfig c;
        c.n = 7;
        c.r = 3;
        mutate(c);
        CHECK_THROWS_AS(c.validate(), InvalidParameter);
    };
    expect_throw([](PlatoonConfig& c) { c.n = 0; });
    expect_throw([](PlatoonConfig& c) { c.tau = 0.0; });
    expect_throw([](PlatoonConfig& c) { c.h = -0.1; });
    expect_throw([](PlatoonConfig& c) { c.standstill_gap = -1.0; });
    expect_throw([](PlatoonConfig& c) { c.r = 0; });
    expect_throw([](PlatoonConfig& c) { c.r = 8; });
    expect_throw([](PlatoonConfig& c) { c.v0 = std::nan(""); });
    expect_throw([](PlatoonConfig& c) { c.init_spacing = 0.0; });
    expect_throw([](PlatoonConfig& c) { c.disturbance.angular_frequency = 0.0; });
    expect_throw([](PlatoonConfig& c) { c.disturbance.start_time = -1.0; });
}

TEST_CASE("desired_gap accumulates headway terms over the skipped vehicles") {
    const std::array<double, 3> speeds{20.0, 21.0, 22.0};
    CHECK(desired_gap(3, 1, 0.6, 5.0, speeds) == Catch::Approx(17.0));
    CHECK(desired_gap(3, 2, 0.6, 5.0, speeds) == Catch::Approx(34.6));
    CHECK(desired_gap(3, 3, 0.6, 5.0, speeds) == Catch::Approx(52.8));

    // at zero speed only the standstill part remains
    const std::array<double, 2> rest{0.0, 0.0};
    CHECK(desired_gap(2, 2, 0.6, 5.0, rest) == 10.0);

    CHECK_THROWS_AS(desired_gap(3, 0, 0.6, 5.0, speeds), InvalidParameter);
    CHECK_THROWS_AS(desired_gap(3, 4, 0.6, 5.0, speeds), InvalidParameter);
    CHECK_THROWS_AS(desired_gap(0, 1, 0.6, 5.0, speeds), InvalidParameter);
    const std::array<double, 1> too_short{20.0};
    CHECK_THROWS_AS(desired_gap(2, 2, 0.6, 5.0, too_short), InvalidParameter);
}
