// hierarchy.hpp — multi-index bookkeeping for the auxiliary-density-operator
// tower: graded-lexicographic enumeration and raise/lower neighbor tables.

#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace qtherm::heom {

struct HierarchyIndex {
    std::vector<int> counts;  // n_k per exponential, length = number of bath terms

    int depth() const {
        int d = 0;
        for (int n : counts) d += n;
        return d;
    }

    bool operator==(const HierarchyIndex& other) const { return counts == other.counts; }
};

struct IndexHash {
    std::size_t operator()(const std::vector<int>& v) const {
        std::size_t h = v.size();
        for (int x : v) {
            h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }
};

// Number of multi-indices of length m with sum ≤ L, i.e. C(m + L, L).
inline std::uint64_t hierarchy_count(int n_exponentials, int depth) {
    std::uint64_t count = 1;
    for (int i = 1; i <= depth; ++i) {
        count = count * static_cast<std::uint64_t>(n_exponentials + i) /
                static_cast<std::uint64_t>(i);
        if (count > (1ULL << 40)) {
            break;  // far beyond any usable cap; avoid overflow
        }
    }
    return count;
}

// All multi-indices with Σ n_k ≤ depth in graded-lexicographic order
// (by depth, then lexicographic on the counts vector).
inline std::vector<HierarchyIndex> enumerate_hierarchy(int n_exponentials, int depth,
                                                       std::uint64_t max_indices = 200000) {
    if (n_exponentials < 1) {
        throw std::invalid_argument("enumerate_hierarchy: need at least one exponential");
    }
    if (depth < 0) {
        throw std::invalid_argument("enumerate_hierarchy: depth must be >= 0");
    }
    const std::uint64_t count = hierarchy_count(n_exponentials, depth);
    if (count > max_indices) {
        throw std::runtime_error("enumerate_hierarchy: hierarchy size " + std::to_string(count) +
                                 " exceeds cap " + std::to_string(max_indices) +
                                 "; reduce depth or n_matsubara");
    }

    std::vector<HierarchyIndex> indices;
    indices.reserve(count);
    std::vector<int> current(static_cast<std::size_t>(n_exponentials), 0);
    for (int grade = 0; grade <= depth; ++grade) {
        // emit all vectors with sum == grade, lexicographically
        std::function<void(int, int)> emit = [&](int pos, int remaining) {
            if (pos == n_exponentials - 1) {
                current[static_cast<std::size_t>(pos)] = remaining;
                indices.push_back(HierarchyIndex{current});
                return;
            }
            for (int n = 0; n <= remaining; ++n) {
                current[static_cast<std::size_t>(pos)] = n;
                emit(pos + 1, remaining - n);
            }
        };
        emit(0, grade);
    }
    return indices;
}

// Flat index lookup plus precomputed n ± e_k neighbors (-1 when absent).
struct HierarchyTable {
    std::vector<HierarchyIndex> indices;
    std::vector<std::vector<int>> raise_index;  // [flat][k] -> flat index of n + e_k
    std::vector<std::vector<int>> lower_index;  // [flat][k] -> flat index of n - e_k
    int n_exponentials{0};
    int depth{0};

    HierarchyTable() = default;

    HierarchyTable(int n_exponentials_, int depth_, std::uint64_t max_indices = 200000)
        : n_exponentials(n_exponentials_), depth(depth_) {
        indices = enumerate_hierarchy(n_exponentials, depth, max_indices);

        std::unordered_map<std::vector<int>, int, IndexHash> position;
        position.reserve(indices.size() * 2);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            position.emplace(indices[i].counts, static_cast<int>(i));
        }

        raise_index.assign(indices.size(), std::vector<int>(n_exponentials, -1));
        lower_index.assign(indices.size(), std::vector<int>(n_exponentials, -1));
        std::vector<int> probe;
        for (std::size_t i = 0; i < indices.size(); ++i) {
            for (int k = 0; k < n_exponentials; ++k) {
                probe = indices[i].counts;
                probe[static_cast<std::size_t>(k)] += 1;
                if (auto it = position.find(probe); it != position.end()) {
                    raise_index[i][static_cast<std::size_t>(k)] = it->second;
                }
                if (indices[i].counts[static_cast<std::size_t>(k)] > 0) {
                    probe[static_cast<std::size_t>(k)] -= 2;
                    lower_index[i][static_cast<std::size_t>(k)] = position.at(probe);
                }
            }
        }
    }

    std::size_t size() const { return indices.size(); }
};

}  // namespace qtherm::heom
