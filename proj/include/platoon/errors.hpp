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

#include <stdexcept>
#include <string>

namespace platoon {

// Bad physical or numerical parameter (config value, malformed input, window
// outside a trace, ...).
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A requested gain set violates a hard feasibility constraint of the design.
class DesignConstraintError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Neighbor lists handed to an operation do not match the communication graph.
class TopologyMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Integration produced a non-finite or runaway state.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double t)
        : std::runtime_error(what), first_bad_time(t) {}
    double first_bad_time;
};

// Frequency-response evaluation landed too close to a pole.
class PoleProximityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Evaluation point is a zero of a decomposition denominator.
class SingularPointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Requested quantity is undefined for the given input (e.g. ordering a
// non-converged run).
class NotApplicableError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace platoon
