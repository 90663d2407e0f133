#ifndef GWMAP_POINTS_HPP
#define GWMAP_POINTS_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

/**
 * @file points.hpp
 *
 * @brief Row-major point collections for the input and the reduced space.
 */

namespace gwmap {

/**
 * @brief A dense collection of `size()` points, each with `dim()` coordinates, stored row-major.
 *
 * @tparam Space Tag type that keeps input-space and reduced-space collections from being mixed up.
 */
template<class Space>
class Points {
public:
    Points() = default;

    /**
     * @param num_points Number of points.
     * @param dim Dimension of each point.
     * @param values Row-major coordinates, of length `num_points * dim`.
     */
    Points(std::size_t num_points, std::size_t dim, std::vector<double> values) :
        my_size(num_points), my_dim(dim), my_values(std::move(values))
    {
        if (my_values.size() != my_size * my_dim) {
            throw ShapeError("expected " + std::to_string(my_size * my_dim) + " coordinates, got " + std::to_string(my_values.size()));
        }
        for (std::size_t i = 0; i < my_values.size(); ++i) {
            if (!std::isfinite(my_values[i])) {
                throw DataError("non-finite coordinate in point " + std::to_string(i / (my_dim ? my_dim : 1)));
            }
        }
    }

    /// Zero-filled collection.
    Points(std::size_t num_points, std::size_t dim) :
        my_size(num_points), my_dim(dim), my_values(num_points * dim) {}

    static Points from_rows(const std::vector<std::vector<double> >& rows) {
        if (rows.empty()) {
            return Points();
        }
        const std::size_t dim = rows.front().size();
        std::vector<double> values;
        values.reserve(rows.size() * dim);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != dim) {
                throw ShapeError("row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) + " values, expected " + std::to_string(dim));
            }
            values.insert(values.end(), rows[i].begin(), rows[i].end());
        }
        return Points(rows.size(), dim, std::move(values));
    }

    std::size_t size() const { return my_size; }
    std::size_t dim() const { return my_dim; }
    bool empty() const { return my_size == 0; }

    std::span<const double> row(std::size_t i) const {
        return { my_values.data() + i * my_dim, my_dim };
    }
    std::span<double> row(std::size_t i) {
        return { my_values.data() + i * my_dim, my_dim };
    }

    const std::vector<double>& values() const { return my_values; }

    bool operator==(const Points&) const = default;

private:
    std::size_t my_size = 0;
    std::size_t my_dim = 0;
    std::vector<double> my_values;
};

struct InputSpace {};
struct ReducedSpace {};

/// Points in the original d1-dimensional space.
using Dataset = Points<InputSpace>;

/// Images of a dataset under the learned map, row-aligned with their source.
using Embedding = Points<ReducedSpace>;

/// Euclidean distance between two equally sized coordinate spans.
inline double euclidean(std::span<const double> a, std::span<const double> b) {
    double sum = 0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

}

#endif
