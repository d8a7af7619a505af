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
#include <complex>
#include <cstddef>
#include <vector>

namespace platoon::detail {

// Polynomials are coefficient vectors in ascending powers: {c0, c1, c2, ...}.
using Poly = std::vector<double>;

inline Poly pmul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

inline Poly padd(const Poly& a, const Poly& b) {
    Poly out(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

inline Poly psub(const Poly& a, const Poly& b) {
    Poly out(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
    return out;
}

inline std::complex<double> peval(const Poly& p, std::complex<double> s) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * s + p[i];
    return acc;
}

}  // namespace platoon::detail
