#ifndef GWMAP_INTERPRET_HPP
#define GWMAP_INTERPRET_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "model.hpp"
#include "points.hpp"

/**
 * @file interpret.hpp
 *
 * @brief Diagnostics for a trained model: distance distortion, per-dimension influence,
 * influence skewness and local expansion/contraction, plus their evaluation on a mesh grid.
 *
 * Reduced-space quantities need unit weights at a point p of the embedding. These are
 * Gaussian responses of p to the projected centers f(mu_i), using the unchanged widths
 * and the usual normalization.
 */

namespace gwmap {

/**
 * Normalized L1 distortion of pairwise distances,
 * `sum |d_ij - e_ij| / sum d_ij` over all unordered pairs. Zero for an isometric embedding.
 *
 * @throws DataError if the lengths differ or all points coincide.
 */
inline double reconstruction_error(const Dataset& data, const Embedding& embedding) {
    if (data.size() != embedding.size()) {
        throw ShapeError("dataset has " + std::to_string(data.size()) + " points but embedding has " + std::to_string(embedding.size()));
    }
    double distortion = 0, total = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = i + 1; j < data.size(); ++j) {
            const double orig = euclidean(data.row(i), data.row(j));
            distortion += std::abs(orig - euclidean(embedding.row(i), embedding.row(j)));
            total += orig;
        }
    }
    if (!(total > 0)) {
        throw DataError("reconstruction error is undefined when all points coincide");
    }
    return distortion / total;
}

/**
 * Per-input-dimension shares summing to 1. Entry j says how much of the absolute
 * matrix mass acts on input dimension j.
 */
using InfluenceProfile = std::vector<double>;

/**
 * Column L1 shares of every matrix: entry `[i * d1 + j]` is the absolute mass of
 * column j of M_i divided by the absolute mass of all of M_i.
 *
 * @throws DegenerateMatrixError if some M_i is entirely zero.
 */
inline std::vector<double> column_shares(const ModelParams& model) {
    const std::size_t m = model.num_units(), d1 = model.input_dim, d2 = model.output_dim;
    std::vector<double> out(m * d1);
    for (std::size_t i = 0; i < m; ++i) {
        const auto mat = model.matrix(i);
        double total = 0;
        for (std::size_t j = 0; j < d1; ++j) {
            double col = 0;
            for (std::size_t k = 0; k < d2; ++k) {
                col += std::abs(mat[k * d1 + j]);
            }
            out[i * d1 + j] = col;
            total += col;
        }
        if (!(total > 0)) {
            throw DegenerateMatrixError("matrices[" + std::to_string(i) + "] is all zero; its influence is undefined");
        }
        for (std::size_t j = 0; j < d1; ++j) {
            out[i * d1 + j] /= total;
        }
    }
    return out;
}

/**
 * @cond
 */
namespace detail {

inline InfluenceProfile blend_shares(std::span<const double> shares, std::size_t d1, std::span<const double> weights) {
    InfluenceProfile out(d1);
    double total = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        total += weights[i];
        for (std::size_t j = 0; j < d1; ++j) {
            out[j] += weights[i] * shares[i * d1 + j];
        }
    }
    if (!(total > 0)) {
        throw ConfigError("influence weights must have a positive sum");
    }
    for (auto& v : out) {
        v /= total;
    }
    return out;
}

// Softmax of -||p - c_i||^2 / sigma_i^2, shifted so the largest term is 1.
// Used when every unshifted activation underflows.
inline std::vector<double> shifted_responses(std::span<const double> sqdist, std::span<const double> sigmas) {
    std::vector<double> expo(sqdist.size());
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sqdist.size(); ++i) {
        expo[i] = sqdist[i] / (sigmas[i] * sigmas[i]);
        smallest = std::min(smallest, expo[i]);
    }
    double total = 0;
    for (auto& e : expo) {
        e = std::exp(smallest - e);
        total += e;
    }
    for (auto& e : expo) {
        e /= total;
    }
    return expo;
}

}
/**
 * @endcond
 */

/**
 * Influence profile of the matrices blended with `weights`:
 * `sum_i weights[i] * shares_i / sum_i weights[i]`.
 * With all-equal weights this is exactly `global_influence()`.
 */
inline InfluenceProfile blend_influence(const ModelParams& model, std::span<const double> weights) {
    detail::check_dim(weights.size(), model.num_units(), "weight vector");
    return detail::blend_shares(column_shares(model), model.input_dim, weights);
}

/**
 * Mean column share over all transformations.
 */
inline InfluenceProfile global_influence(const ModelParams& model) {
    const std::vector<double> ones(model.num_units(), 1.0);
    return blend_influence(model, ones);
}

/**
 * Spectral norm (largest singular value) of a row-major `rows x cols` matrix.
 */
inline double spectral_norm(std::span<const double> matrix, std::size_t rows, std::size_t cols) {
    if (matrix.size() != rows * cols) {
        throw ShapeError("matrix has " + std::to_string(matrix.size()) + " entries, expected " + std::to_string(rows * cols));
    }
    if (rows == 0 || cols == 0) {
        return 0;
    }
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMajor> mapped(matrix.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mapped);
    return svd.singularValues()(0);
}

/**
 * @brief Precomputed reduced-space view of a model, for evaluating many points.
 *
 * Holds the projected centers f(mu_i) and, once needed, the column shares.
 * The free functions below build one of these per call.
 */
class ReducedSpaceAnalyzer {
public:
    explicit ReducedSpaceAnalyzer(const ModelParams& model) : my_model(&model) {
        model.validate();
        const std::size_t m = model.num_units();
        my_projected = Embedding(m, model.output_dim);
        for (std::size_t i = 0; i < m; ++i) {
            transform_point(model, model.center(i), my_projected.row(i));
        }
    }

    const Embedding& projected_centers() const { return my_projected; }

    /// Normalized Gaussian weights of `p` against the projected centers.
    std::vector<double> weights(std::span<const double> p) const {
        detail::check_dim(p.size(), my_model->output_dim, "reduced-space point");
        const std::size_t m = my_model->num_units();
        std::vector<double> out(m);
        double total = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double s = my_model->sigmas[i];
            out[i] = std::exp(-detail::squared_distance(p, my_projected.row(i)) / (s * s));
            total += out[i];
        }
        const double denom = total + my_model->epsilon;
        for (auto& w : out) {
            w /= denom;
        }
        return out;
    }

    /**
     * Weight-blended column shares at `p`. If every weight underflows, the limit of the
     * normalized weights is used instead, which concentrates on the relatively closest unit.
     */
    InfluenceProfile influence(std::span<const double> p) const {
        auto w = weights(p);
        if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0; })) {
            const std::size_t m = my_model->num_units();
            std::vector<double> sqdist(m);
            for (std::size_t i = 0; i < m; ++i) {
                sqdist[i] = detail::squared_distance(p, my_projected.row(i));
            }
            w = detail::shifted_responses(sqdist, my_model->sigmas);
        }
        return detail::blend_shares(shares(), my_model->input_dim, w);
    }

    /// Population variance of the entries of `influence(p)`.
    double influence_variance(std::span<const double> p) const {
        const auto profile = influence(p);
        const double mean = std::accumulate(profile.begin(), profile.end(), 0.0) / static_cast<double>(profile.size());
        double sum = 0;
        for (double v : profile) {
            sum += (v - mean) * (v - mean);
        }
        return sum / static_cast<double>(profile.size());
    }

    /// Spectral norm of the weight-blended matrix at `p`.
    double norm(std::span<const double> p) const {
        const auto blended = aggregate_matrix(*my_model, weights(p));
        return spectral_norm(blended, my_model->output_dim, my_model->input_dim);
    }

private:
    const std::vector<double>& shares() const {
        if (my_shares.empty()) {
            my_shares = column_shares(*my_model);
        }
        return my_shares;
    }

    const ModelParams* my_model;
    Embedding my_projected;
    mutable std::vector<double> my_shares;
};

inline std::vector<double> reduced_space_weights(const ModelParams& model, std::span<const double> p) {
    return ReducedSpaceAnalyzer(model).weights(p);
}

inline InfluenceProfile local_influence(const ModelParams& model, std::span<const double> p) {
    return ReducedSpaceAnalyzer(model).influence(p);
}

inline double influence_variance(const ModelParams& model, std::span<const double> p) {
    return ReducedSpaceAnalyzer(model).influence_variance(p);
}

/// Values above 1 mean local distances are stretched at `p`, below 1 that they shrink.
inline double local_norm(const ModelParams& model, std::span<const double> p) {
    return ReducedSpaceAnalyzer(model).norm(p);
}

/**
 * @brief Axis-aligned 2D mesh, row-major from the minimum corner (x varies fastest).
 */
struct Grid {
    std::vector<double> min;
    std::vector<double> max;
    std::size_t resolution = 0;
    Embedding points;
};

inline constexpr std::size_t default_grid_resolution = 100;
inline constexpr double default_grid_margin = 0.05;

/**
 * `resolution x resolution` points spanning the bounding box of `embedding`,
 * widened by `margin_fraction` of the box extent on each side.
 * An axis with zero extent is widened by 0.5 on each side instead.
 */
inline Grid make_grid(const Embedding& embedding, std::size_t resolution = default_grid_resolution, double margin_fraction = default_grid_margin) {
    if (embedding.dim() != 2) {
        throw ConfigError("grid evaluation needs a 2D embedding, got dimension " + std::to_string(embedding.dim()));
    }
    if (embedding.empty()) {
        throw DataError("cannot build a grid around an empty embedding");
    }
    if (resolution < 2) {
        throw ConfigError("grid resolution must be at least 2");
    }
    if (!(margin_fraction >= 0) || !std::isfinite(margin_fraction)) {
        throw ConfigError("grid margin must be a nonnegative finite fraction");
    }

    Grid grid;
    grid.resolution = resolution;
    grid.min.assign(2, std::numeric_limits<double>::infinity());
    grid.max.assign(2, -std::numeric_limits<double>::infinity());
    for (std::size_t p = 0; p < embedding.size(); ++p) {
        const auto row = embedding.row(p);
        for (std::size_t a = 0; a < 2; ++a) {
            grid.min[a] = std::min(grid.min[a], row[a]);
            grid.max[a] = std::max(grid.max[a], row[a]);
        }
    }
    for (std::size_t a = 0; a < 2; ++a) {
        const double extent = grid.max[a] - grid.min[a];
        const double pad = extent > 0 ? margin_fraction * extent : 0.5;
        grid.min[a] -= pad;
        grid.max[a] += pad;
    }

    grid.points = Embedding(resolution * resolution, 2);
    const double denom = static_cast<double>(resolution - 1);
    for (std::size_t r = 0; r < resolution; ++r) {
        const double py = grid.min[1] + (grid.max[1] - grid.min[1]) * static_cast<double>(r) / denom;
        for (std::size_t c = 0; c < resolution; ++c) {
            auto pt = grid.points.row(r * resolution + c);
            pt[0] = grid.min[0] + (grid.max[0] - grid.min[0]) * static_cast<double>(c) / denom;
            pt[1] = py;
        }
    }
    return grid;
}

/**
 * @brief Which quantity a grid report evaluates.
 */
struct FieldSelector {
    enum class Kind { influence_dim, influence, variance, norm };

    Kind kind = Kind::norm;

    /// Input dimension for `influence_dim`.
    std::size_t dimension = 0;

    static FieldSelector influence_of(std::size_t j) { return { Kind::influence_dim, j }; }
    static FieldSelector full_influence() { return { Kind::influence, 0 }; }
    static FieldSelector variance() { return { Kind::variance, 0 }; }
    static FieldSelector norm() { return { Kind::norm, 0 }; }

    /**
     * Parses `variance`, `norm`, `influence` (whole profile) or `influence:J`.
     */
    static FieldSelector parse(const std::string& text) {
        if (text == "variance") {
            return variance();
        }
        if (text == "norm") {
            return norm();
        }
        if (text == "influence") {
            return full_influence();
        }
        const std::string prefix = "influence:";
        if (text.rfind(prefix, 0) == 0) {
            const std::string digits = text.substr(prefix.size());
            if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); })) {
                return influence_of(std::stoul(digits));
            }
        }
        throw ConfigError("unknown field '" + text + "', expected influence:J, influence, variance or norm");
    }

    std::string name() const {
        switch (kind) {
            case Kind::influence_dim: return "influence:" + std::to_string(dimension);
            case Kind::influence: return "influence";
            case Kind::variance: return "variance";
            case Kind::norm: return "norm";
        }
        return "";
    }
};

/**
 * @brief A field evaluated over a mesh grid.
 *
 * `values` holds `value_width` numbers per grid point, in grid order:
 * 1 for scalar fields, d1 for the full influence profile.
 */
struct GridReport {
    Grid grid;
    FieldSelector field;
    std::size_t value_width = 1;
    std::vector<double> values;

    std::size_t size() const { return grid.points.size(); }

    std::span<const double> value(std::size_t cell) const {
        return { values.data() + cell * value_width, value_width };
    }
};

/**
 * Evaluates `field` at every point of `make_grid(embedding, resolution, margin)`.
 */
inline GridReport grid_report(const ModelParams& model, const Embedding& embedding, FieldSelector field,
                              std::size_t resolution = default_grid_resolution, double margin = default_grid_margin)
{
    if (field.kind == FieldSelector::Kind::influence_dim && field.dimension >= model.input_dim) {
        throw ConfigError("influence dimension " + std::to_string(field.dimension) + " out of range for input dimension " + std::to_string(model.input_dim));
    }
    detail::check_dim(embedding.dim(), model.output_dim, "embedding");

    GridReport report;
    report.grid = make_grid(embedding, resolution, margin);
    report.field = field;
    report.value_width = field.kind == FieldSelector::Kind::influence ? model.input_dim : 1;

    const ReducedSpaceAnalyzer analyzer(model);
    const auto& points = report.grid.points;
    report.values.reserve(points.size() * report.value_width);
    for (std::size_t c = 0; c < points.size(); ++c) {
        const auto p = points.row(c);
        switch (field.kind) {
            case FieldSelector::Kind::influence_dim:
                report.values.push_back(analyzer.influence(p)[field.dimension]);
                break;
            case FieldSelector::Kind::influence: {
                const auto profile = analyzer.influence(p);
                report.values.insert(report.values.end(), profile.begin(), profile.end());
                break;
            }
            case FieldSelector::Kind::variance:
                report.values.push_back(analyzer.influence_variance(p));
                break;
            case FieldSelector::Kind::norm:
                report.values.push_back(analyzer.norm(p));
                break;
        }
    }
    return report;
}

}

#endif
