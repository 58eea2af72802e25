#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include "dagas/lattice.hpp"

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

namespace oracle {

// Counts animals with source exactly `s` by listing every vertex subset of
// the ball of radius k_max - |S| that contains S and keeping the ones whose
// cells are all reachable from S inside the subset.
inline std::vector<std::uint64_t> subset_counts(const dagas::Lattice &lattice, const std::vector<dagas::Vertex> &s,
                                                int k_max)
{
    const int s0 = static_cast<int>(s.size());
    const dagas::Ball b = dagas::ball({lattice, s}, k_max - s0);
    const int extra = static_cast<int>(b.vertices.size()) - s0;
    std::vector<std::uint64_t> counts(k_max - s0 + 1, 0);
    std::vector<int> pick;
    std::vector<char> in(b.vertices.size(), 0);
    for (int id = 0; id < s0; ++id) {
        in[id] = 1;
    }
    auto reachable = [&](std::size_t size) {
        std::vector<char> seen(b.vertices.size(), 0);
        std::vector<int> stack;
        for (int id = 0; id < s0; ++id) {
            seen[id] = 1;
            stack.push_back(id);
        }
        std::size_t hit = s0;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int c : b.children[v]) {
                if (in[c] && !seen[c]) {
                    seen[c] = 1;
                    ++hit;
                    stack.push_back(c);
                }
            }
        }
        return hit == size;
    };
    // Plain combinations of the non-source ball vertices, by size.
    auto rec = [&](auto &&self, int next, int left) -> void {
        if (left == 0) {
            if (reachable(s.size() + pick.size())) {
                ++counts[pick.size()];
            }
            return;
        }
        for (int v = next; v < extra; ++v) {
            pick.push_back(s0 + v);
            in[s0 + v] = 1;
            self(self, v + 1, left - 1);
            in[s0 + v] = 0;
            pick.pop_back();
        }
    };
    for (int added = 0; added <= k_max - s0; ++added) {
        rec(rec, 0, added);
    }
    return counts;
}

inline std::uint64_t binomial(unsigned n, unsigned k)
{
    std::uint64_t r = 1;
    for (unsigned i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

} // namespace oracle
