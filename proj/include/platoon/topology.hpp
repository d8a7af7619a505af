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
#include <cstddef>
#include <vector>

#include "platoon/errors.hpp"

namespace platoon {

// Directed information-flow graph of a multiple-predecessor-following
// platoon. Vehicle i listens to its r_i = min(i, r) immediate predecessors;
// the first r followers therefore hear the leader directly, everyone else
// hears only other followers. Information flows strictly front to back.
struct Topology {
    int n = 0;  // follower count
    int r = 0;  // nominal predecessor count
    // adjacency[i][j] == 1 iff vehicle i receives from vehicle j (row 0 is
    // all zeros: the leader receives nothing); (n+1) x (n+1), 0/1 entries.
    std::vector<std::vector<int>> adjacency;
    // Follower block of the graph Laplacian: l_ii = r_i, l_ij = -a_ij for
    // j < i. Lower triangular, so its eigenvalues are the diagonal {r_i}.
    std::vector<std::vector<double>> laplacian_l1;
    std::vector<int> predecessor_counts;  // r_i for i = 1..n

    int r_of(int i) const { return predecessor_counts[static_cast<std::size_t>(i) - 1]; }
    bool leader_link(int i) const {
        return adjacency[static_cast<std::size_t>(i)][0] != 0;
    }
};

inline Topology build_mpf(int n, int r) {
    if (n < 1) throw InvalidParameter("build_mpf: need n >= 1");
    if (r < 1 || r > n) throw InvalidParameter("build_mpf: need 1 <= r <= n");
    Topology t;
    t.n = n;
    t.r = r;
    const auto sz = static_cast<std::size_t>(n) + 1;
    t.adjacency.assign(sz, std::vector<int>(sz, 0));
    t.predecessor_counts.resize(static_cast<std::size_t>(n));
    t.laplacian_l1.assign(static_cast<std::size_t>(n),
                          std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 1; i <= n; ++i) {
        const int ri = std::min(i, r);
        t.predecessor_counts[static_cast<std::size_t>(i) - 1] = ri;
        for (int l = 1; l <= ri; ++l)
            t.adjacency[static_cast<std::size_t>(i)][static_cast<std::size_t>(i - l)] = 1;
        t.laplacian_l1[static_cast<std::size_t>(i) - 1][static_cast<std::size_t>(i) - 1] = ri;
        for (int j = 1; j < i; ++j)
            if (t.adjacency[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != 0)
                t.laplacian_l1[static_cast<std::size_t>(i) - 1][static_cast<std::size_t>(j) - 1] =
                    -1.0;
    }
    return t;
}

}  // namespace platoon
