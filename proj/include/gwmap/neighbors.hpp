#ifndef GWMAP_NEIGHBORS_HPP
#define GWMAP_NEIGHBORS_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "points.hpp"

/**
 * @file neighbors.hpp
 *
 * @brief Selection of the point pairs whose distances the loss tries to preserve.
 */

namespace gwmap {

/**
 * @brief One unordered pair of point indices (`first < second`) with its original-space distance.
 */
struct IndexPair {
    std::uint32_t first;
    std::uint32_t second;
    double target;

    bool operator==(const IndexPair&) const = default;
};

/**
 * @brief Unordered, duplicate-free pairs, sorted lexicographically by index.
 */
struct PairSet {
    std::vector<IndexPair> pairs;

    std::size_t size() const { return pairs.size(); }
    bool empty() const { return pairs.empty(); }

    bool operator==(const PairSet&) const = default;
};

/**
 * Full symmetric Euclidean distance matrix of `points`, row-major n x n.
 */
template<class Space>
std::vector<double> pairwise_distances(const Points<Space>& points) {
    const std::size_t n = points.size();
    std::vector<double> out(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = euclidean(points.row(i), points.row(j));
            out[i * n + j] = d;
            out[j * n + i] = d;
        }
    }
    return out;
}

/**
 * Overload for a plain list of vectors; all of them must share a dimension.
 */
inline std::vector<double> pairwise_distances(const std::vector<std::vector<double> >& points) {
    return pairwise_distances(Dataset::from_rows(points));
}

/**
 * @cond
 */
namespace detail {

inline void check_pairable(const Dataset& data) {
    if (data.size() < 2) {
        throw DataError("need at least 2 points, got " + std::to_string(data.size()));
    }
    if (data.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw DataError("too many points for 32-bit pair indices");
    }
}

}
/**
 * @endcond
 */

/**
 * All n(n-1)/2 unordered pairs of `data`.
 */
inline PairSet all_pairs(const Dataset& data) {
    detail::check_pairable(data);
    const std::size_t n = data.size();
    PairSet out;
    out.pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            out.pairs.push_back({ static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), euclidean(data.row(i), data.row(j)) });
        }
    }
    return out;
}

/**
 * For each point, its `k` nearest neighbors (exact search, ties to the lower index).
 *
 * @return `n` lists of `k` neighbor indices, each ordered from nearest to farthest.
 */
inline std::vector<std::vector<std::size_t> > nearest_neighbors(const Dataset& data, std::size_t k) {
    const std::size_t n = data.size();
    if (k < 1 || k + 1 > n) {
        throw ConfigError("k must lie in [1, n - 1] = [1, " + std::to_string(n ? n - 1 : 0) + "], got " + std::to_string(k));
    }

    const auto dist = pairwise_distances(data);
    std::vector<std::vector<std::size_t> > out(n);
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < n; ++i) {
        order.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                order.push_back(j);
            }
        }
        const double* row = dist.data() + i * n;
        auto closer = [&](std::size_t a, std::size_t b) {
            return row[a] < row[b] || (row[a] == row[b] && a < b);
        };
        std::partial_sort(order.begin(), order.begin() + k, order.end(), closer);
        out[i].assign(order.begin(), order.begin() + k);
    }
    return out;
}

/**
 * Pairs `(i, j)` where j is among the k nearest neighbors of i, or vice versa,
 * collapsed to unordered pairs. The loss normalizes by the deduplicated count.
 */
inline PairSet knn_pairs(const Dataset& data, std::size_t k) {
    detail::check_pairable(data);
    const auto neighbors = nearest_neighbors(data, k);
    const std::size_t n = data.size();

    std::vector<std::pair<std::uint32_t, std::uint32_t> > keys;
    keys.reserve(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto j : neighbors[i]) {
            keys.emplace_back(static_cast<std::uint32_t>(std::min(i, j)), static_cast<std::uint32_t>(std::max(i, j)));
        }
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    PairSet out;
    out.pairs.reserve(keys.size());
    for (const auto& [i, j] : keys) {
        out.pairs.push_back({ i, j, euclidean(data.row(i), data.row(j)) });
    }
    return out;
}

}

#endif
