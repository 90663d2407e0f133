#ifndef GWMAP_MODEL_HPP
#define GWMAP_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "points.hpp"

/**
 * @file model.hpp
 *
 * @brief Parameters and forward evaluation of the Gaussian-weighted blend of linear maps.
 *
 * For an input point x the map returns
 *
 *     f(x) = sum_i w_i(x) M_i x,   w_i(x) = g_i(x) / (sum_j g_j(x) + epsilon),
 *     g_i(x) = exp(-||x - mu_i||^2 / sigma_i^2).
 *
 * Far from every center all activations can underflow to zero, in which case
 * the weights are all zero and f(x) = 0. That is accepted behavior, not an error.
 */

namespace gwmap {

/// Default normalization constant added to the activation sum.
inline constexpr double default_epsilon = 1e-8;

/**
 * @brief The learned model: m Gaussian centers with widths, and one d2 x d1 matrix per center.
 *
 * Matrices are stored row-major and back to back, so `matrices[i * d2 * d1 + k * d1 + j]`
 * is row k (output dimension) and column j (input dimension) of M_i.
 * Centers are stored the same way, `centers[i * d1 + j]`.
 */
struct ModelParams {
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;
    double epsilon = default_epsilon;
    std::vector<double> centers;
    std::vector<double> sigmas;
    std::vector<double> matrices;

    std::size_t num_units() const { return sigmas.size(); }
    std::size_t matrix_size() const { return input_dim * output_dim; }

    std::span<const double> center(std::size_t i) const {
        return { centers.data() + i * input_dim, input_dim };
    }
    std::span<double> center(std::size_t i) {
        return { centers.data() + i * input_dim, input_dim };
    }

    std::span<const double> matrix(std::size_t i) const {
        return { matrices.data() + i * matrix_size(), matrix_size() };
    }
    std::span<double> matrix(std::size_t i) {
        return { matrices.data() + i * matrix_size(), matrix_size() };
    }

    /**
     * Checks the structural invariants, throwing a `ShapeError` or `ConfigError` on failure:
     * at least one unit, `1 <= output_dim < input_dim`, consistent array lengths,
     * positive finite widths and a positive epsilon.
     */
    void validate() const {
        if (input_dim < 1) {
            throw ShapeError("input_dim must be at least 1");
        }
        if (output_dim < 1 || output_dim >= input_dim) {
            throw ShapeError("output_dim must satisfy 1 <= output_dim < input_dim");
        }
        const std::size_t m = sigmas.size();
        if (m < 1) {
            throw ShapeError("model needs at least one unit");
        }
        if (centers.size() != m * input_dim) {
            throw ShapeError("centers: expected " + std::to_string(m) + " x " + std::to_string(input_dim) + " values");
        }
        if (matrices.size() != m * matrix_size()) {
            throw ShapeError("matrices: expected " + std::to_string(m) + " x " + std::to_string(output_dim) + " x " + std::to_string(input_dim) + " values");
        }
        for (std::size_t i = 0; i < m; ++i) {
            if (!(sigmas[i] > 0) || !std::isfinite(sigmas[i])) {
                throw ConfigError("sigmas[" + std::to_string(i) + "] must be positive and finite");
            }
        }
        if (!(epsilon > 0) || !std::isfinite(epsilon)) {
            throw ConfigError("epsilon must be positive and finite");
        }
    }

    bool operator==(const ModelParams&) const = default;
};

/**
 * @cond
 */
namespace detail {

inline void check_dim(std::size_t got, std::size_t expected, const char* what) {
    if (got != expected) {
        throw ShapeError(std::string(what) + " has dimension " + std::to_string(got) + ", expected " + std::to_string(expected));
    }
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double sum = 0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        sum += diff * diff;
    }
    return sum;
}

// out = M x for a row-major rows x cols matrix.
inline void matvec(std::span<const double> matrix, std::size_t rows, std::size_t cols, std::span<const double> x, double* out) {
    for (std::size_t k = 0; k < rows; ++k) {
        const double* row = matrix.data() + k * cols;
        double sum = 0;
        for (std::size_t j = 0; j < cols; ++j) {
            sum += row[j] * x[j];
        }
        out[k] = sum;
    }
}

}
/**
 * @endcond
 */

/**
 * Unnormalized Gaussian responses of every unit at `x`, each in [0, 1].
 */
inline std::vector<double> gaussian_activations(const ModelParams& model, std::span<const double> x) {
    detail::check_dim(x.size(), model.input_dim, "point");
    const std::size_t m = model.num_units();
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double s = model.sigmas[i];
        out[i] = std::exp(-detail::squared_distance(x, model.center(i)) / (s * s));
    }
    return out;
}

/**
 * Activations divided by their sum plus epsilon.
 * The result sums to slightly less than 1, and to exactly 0 if every activation underflows.
 */
inline std::vector<double> normalized_weights(const ModelParams& model, std::span<const double> x) {
    auto weights = gaussian_activations(model, x);
    double total = 0;
    for (double g : weights) {
        total += g;
    }
    const double denom = total + model.epsilon;
    for (auto& w : weights) {
        w /= denom;
    }
    return weights;
}

/**
 * Writes `f(x)` into `out`, which must have length `output_dim`.
 */
inline void transform_point(const ModelParams& model, std::span<const double> x, std::span<double> out) {
    detail::check_dim(out.size(), model.output_dim, "output buffer");
    const auto weights = normalized_weights(model, x);
    const std::size_t d2 = model.output_dim;
    std::vector<double> image(d2);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        detail::matvec(model.matrix(i), d2, model.input_dim, x, image.data());
        for (std::size_t k = 0; k < d2; ++k) {
            out[k] += weights[i] * image[k];
        }
    }
}

inline std::vector<double> transform_point(const ModelParams& model, std::span<const double> x) {
    std::vector<double> out(model.output_dim);
    transform_point(model, x, out);
    return out;
}

/**
 * Maps every row of `data`. Row i of the result is exactly `transform_point(model, data.row(i))`.
 */
inline Embedding transform_batch(const ModelParams& model, const Dataset& data) {
    if (!data.empty()) {
        detail::check_dim(data.dim(), model.input_dim, "dataset");
    }
    Embedding out(data.size(), model.output_dim);
    for (std::size_t p = 0; p < data.size(); ++p) {
        transform_point(model, data.row(p), out.row(p));
    }
    return out;
}

/**
 * Weighted sum of the transformation matrices, `sum_i weights[i] * M_i`, as a row-major d2 x d1 matrix.
 */
inline std::vector<double> aggregate_matrix(const ModelParams& model, std::span<const double> weights) {
    detail::check_dim(weights.size(), model.num_units(), "weight vector");
    std::vector<double> out(model.matrix_size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const auto mat = model.matrix(i);
        for (std::size_t e = 0; e < out.size(); ++e) {
            out[e] += weights[i] * mat[e];
        }
    }
    return out;
}

}

#endif
