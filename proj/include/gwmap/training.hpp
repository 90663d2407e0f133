#ifndef GWMAP_TRAINING_HPP
#define GWMAP_TRAINING_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "neighbors.hpp"
#include "points.hpp"
#include "random.hpp"

/**
 * @file training.hpp
 *
 * @brief Stress loss, its analytic gradients, Adam, and the full-batch training loop.
 */

namespace gwmap {

/**
 * @brief Settings for `fit()`.
 */
struct TrainConfig {
    /// Number of Gaussian units (m). Must not exceed the number of points.
    std::size_t num_units = 100;

    /// Dimension of the reduced space (d2). Must be smaller than the data dimension.
    std::size_t output_dim = 2;

    /// If set, only pairs among each point's k nearest neighbors enter the loss. Otherwise all pairs.
    std::optional<std::size_t> k_neighbors;

    std::size_t max_epochs = 2000;

    /// Training stops after this many consecutive epochs without sufficient improvement.
    std::size_t patience = 100;

    /// An epoch counts as an improvement if it lowers the best loss by more than this fraction of it.
    double min_improvement = 1e-6;

    double learning_rate = 1e-2;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    /// Centers stay at their sampled positions unless this is set.
    bool optimize_centers = false;

    std::uint64_t seed = default_seed;

    /// Widths are clamped to at least this value after every update.
    double sigma_floor = 1e-3;

    /// Half-width of the uniform matrix initialization. Defaults to 1/sqrt(d1).
    std::optional<double> matrix_init_scale;

    double epsilon = default_epsilon;

    void validate() const {
        if (num_units < 1) {
            throw ConfigError("num_units must be at least 1");
        }
        if (output_dim < 1) {
            throw ConfigError("output_dim must be at least 1");
        }
        if (patience < 1) {
            throw ConfigError("patience must be at least 1");
        }
        if (!(min_improvement >= 0)) {
            throw ConfigError("min_improvement must be nonnegative");
        }
        if (!(learning_rate > 0)) {
            throw ConfigError("learning_rate must be positive");
        }
        if (!(adam_beta1 >= 0 && adam_beta1 < 1) || !(adam_beta2 >= 0 && adam_beta2 < 1)) {
            throw ConfigError("Adam betas must lie in [0, 1)");
        }
        if (!(adam_eps > 0)) {
            throw ConfigError("adam_eps must be positive");
        }
        if (!(sigma_floor > 0)) {
            throw ConfigError("sigma_floor must be positive");
        }
        if (matrix_init_scale && !(*matrix_init_scale > 0)) {
            throw ConfigError("matrix_init_scale must be positive");
        }
        if (!(epsilon > 0)) {
            throw ConfigError("epsilon must be positive");
        }
    }
};

enum class StopReason { max_epochs, patience };

inline const char* to_string(StopReason reason) {
    return reason == StopReason::patience ? "patience" : "max-epochs";
}

/**
 * @brief Outcome of `fit()`.
 *
 * `loss_history[e]` is the loss of the parameters at the start of epoch e.
 * `best_loss` is its minimum, attained by the returned model.
 * With zero epochs the history is empty and both `final_loss` and `best_loss`
 * hold the loss of the initial model.
 */
struct TrainReport {
    std::vector<double> loss_history;
    std::size_t epochs_run = 0;
    StopReason stop_reason = StopReason::max_epochs;
    double final_loss = 0;
    double best_loss = 0;
    std::size_t best_epoch = 0;
};

/**
 * @brief Loss derivatives, laid out exactly like the corresponding `ModelParams` arrays.
 *
 * `centers` is empty unless center optimization was requested.
 */
struct Gradients {
    std::vector<double> matrices;
    std::vector<double> sigmas;
    std::vector<double> centers;
};

/**
 * Embedded distances below this are treated as coincident images, whose distance term contributes no gradient.
 */
inline constexpr double coincident_distance = 1e-12;

/**
 * Samples m distinct data rows as centers, sets every width to 1 and draws
 * matrix entries uniformly from [-a, a]. Deterministic for a fixed seed.
 */
inline ModelParams init_model(const Dataset& data, const TrainConfig& config) {
    config.validate();
    const std::size_t n = data.size();
    const std::size_t d1 = data.dim();
    const std::size_t d2 = config.output_dim;
    const std::size_t m = config.num_units;
    if (d2 >= d1) {
        throw ConfigError("output_dim (" + std::to_string(d2) + ") must be smaller than the data dimension (" + std::to_string(d1) + ")");
    }
    if (m > n) {
        throw ConfigError("num_units (" + std::to_string(m) + ") exceeds the number of points (" + std::to_string(n) + ")");
    }

    Rng rng(config.seed);
    ModelParams model;
    model.input_dim = d1;
    model.output_dim = d2;
    model.epsilon = config.epsilon;
    model.sigmas.assign(m, 1.0);

    const auto chosen = sample_without_replacement(rng, n, m);
    model.centers.reserve(m * d1);
    for (auto idx : chosen) {
        const auto row = data.row(idx);
        model.centers.insert(model.centers.end(), row.begin(), row.end());
    }

    const double scale = config.matrix_init_scale.value_or(1.0 / std::sqrt(static_cast<double>(d1)));
    model.matrices.resize(m * d1 * d2);
    for (auto& entry : model.matrices) {
        entry = uniform(rng, -scale, scale);
    }

    model.validate();
    return model;
}

/**
 * @cond
 */
namespace detail {

inline void check_pairs(const ModelParams& model, const Dataset& data, const PairSet& pairs) {
    if (pairs.empty()) {
        throw ConfigError("pair set is empty");
    }
    detail::check_dim(data.dim(), model.input_dim, "dataset");
    for (const auto& p : pairs.pairs) {
        if (p.first >= data.size() || p.second >= data.size()) {
            throw ConfigError("pair index out of range for the dataset");
        }
    }
}

inline double stress(const Embedding& embedding, const PairSet& pairs) {
    double sum = 0;
    for (const auto& p : pairs.pairs) {
        const double diff = p.target - euclidean(embedding.row(p.first), embedding.row(p.second));
        sum += diff * diff;
    }
    return sum / static_cast<double>(pairs.size());
}

// Loss, and its gradient with respect to every embedded coordinate.
inline double stress_with_output_gradient(const Embedding& embedding, const PairSet& pairs, Embedding& grad) {
    const std::size_t d2 = embedding.dim();
    const double scale = 1.0 / static_cast<double>(pairs.size());
    double sum = 0;
    for (const auto& p : pairs.pairs) {
        const auto yi = embedding.row(p.first);
        const auto yj = embedding.row(p.second);
        const double dist = euclidean(yi, yj);
        const double diff = p.target - dist;
        sum += diff * diff;
        if (dist < coincident_distance) {
            continue;
        }
        // d/d(dist) of (target - dist)^2 / N, times d(dist)/d(yi) = (yi - yj) / dist.
        const double coef = -2.0 * diff * scale / dist;
        auto gi = grad.row(p.first);
        auto gj = grad.row(p.second);
        for (std::size_t k = 0; k < d2; ++k) {
            const double g = coef * (yi[k] - yj[k]);
            gi[k] += g;
            gj[k] -= g;
        }
    }
    return sum * scale;
}

inline double loss_and_gradients(const ModelParams& model, const Dataset& data, const PairSet& pairs, bool with_centers, Gradients& out) {
    const std::size_t m = model.num_units();
    const std::size_t d1 = model.input_dim;
    const std::size_t d2 = model.output_dim;

    const auto embedding = transform_batch(model, data);
    Embedding out_grad(data.size(), d2);
    const double value = stress_with_output_gradient(embedding, pairs, out_grad);

    out.matrices.assign(model.matrices.size(), 0.0);
    out.sigmas.assign(m, 0.0);
    if (with_centers) {
        out.centers.assign(model.centers.size(), 0.0);
    } else {
        out.centers.clear();
    }

    std::vector<double> act(m), sqdist(m), images(m * d2);
    for (std::size_t p = 0; p < data.size(); ++p) {
        const auto x = data.row(p);
        const auto y = embedding.row(p);
        const auto gy = out_grad.row(p);

        double total = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double s = model.sigmas[i];
            sqdist[i] = squared_distance(x, model.center(i));
            act[i] = std::exp(-sqdist[i] / (s * s));
            total += act[i];
        }
        const double denom = total + model.epsilon;

        for (std::size_t i = 0; i < m; ++i) {
            const double w = act[i] / denom;
            auto gm = std::span<double>(out.matrices.data() + i * d1 * d2, d1 * d2);
            for (std::size_t k = 0; k < d2; ++k) {
                const double wg = w * gy[k];
                for (std::size_t j = 0; j < d1; ++j) {
                    gm[k * d1 + j] += wg * x[j];
                }
            }

            if (act[i] == 0) {
                continue;
            }

            // y = sum_i g_i z_i / (S + eps), so dy/dg_i = (z_i - y) / (S + eps).
            matvec(model.matrix(i), d2, d1, x, images.data() + i * d2);
            double dact = 0;
            for (std::size_t k = 0; k < d2; ++k) {
                dact += gy[k] * (images[i * d2 + k] - y[k]);
            }
            dact /= denom;

            const double s = model.sigmas[i];
            out.sigmas[i] += dact * act[i] * 2.0 * sqdist[i] / (s * s * s);
            if (with_centers) {
                const double coef = dact * act[i] * 2.0 / (s * s);
                const auto mu = model.center(i);
                for (std::size_t j = 0; j < d1; ++j) {
                    out.centers[i * d1 + j] += coef * (x[j] - mu[j]);
                }
            }
        }
    }

    return value;
}

}
/**
 * @endcond
 */

/**
 * Mean squared difference between original and embedded distances over `pairs`.
 */
inline double loss(const ModelParams& model, const Dataset& data, const PairSet& pairs) {
    detail::check_pairs(model, data, pairs);
    return detail::stress(transform_batch(model, data), pairs);
}

/**
 * Exact derivatives of `loss()` with respect to the matrices, the widths and,
 * when `config.optimize_centers` is set, the centers.
 * Pairs whose images coincide contribute nothing through their embedded distance.
 */
inline Gradients gradients(const ModelParams& model, const Dataset& data, const PairSet& pairs, const TrainConfig& config) {
    detail::check_pairs(model, data, pairs);
    Gradients out;
    detail::loss_and_gradients(model, data, pairs, config.optimize_centers, out);
    return out;
}

/**
 * @brief First and second moment estimates for Adam, one entry per trainable parameter.
 */
struct AdamState {
    std::size_t step = 0;
    std::vector<double> matrices_m, matrices_v;
    std::vector<double> sigmas_m, sigmas_v;
    std::vector<double> centers_m, centers_v;

    AdamState() = default;

    explicit AdamState(const ModelParams& model, bool with_centers) :
        matrices_m(model.matrices.size()), matrices_v(model.matrices.size()),
        sigmas_m(model.sigmas.size()), sigmas_v(model.sigmas.size())
    {
        if (with_centers) {
            centers_m.resize(model.centers.size());
            centers_v.resize(model.centers.size());
        }
    }
};

/**
 * @cond
 */
namespace detail {

inline void adam_update(std::vector<double>& params, const std::vector<double>& grads, std::vector<double>& first, std::vector<double>& second,
                        const TrainConfig& config, double correction1, double correction2)
{
    if (grads.size() != params.size() || first.size() != params.size() || second.size() != params.size()) {
        throw ShapeError("Adam state does not match the parameter layout");
    }
    const double b1 = config.adam_beta1, b2 = config.adam_beta2;
    for (std::size_t e = 0; e < params.size(); ++e) {
        const double g = grads[e];
        first[e] = b1 * first[e] + (1 - b1) * g;
        second[e] = b2 * second[e] + (1 - b2) * g * g;
        const double mhat = first[e] / correction1;
        const double vhat = second[e] / correction2;
        params[e] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_eps);
    }
}

}
/**
 * @endcond
 */

/**
 * One bias-corrected Adam update of every trainable parameter.
 * Centers are only touched if `grads.centers` is non-empty.
 * Widths are clamped to `config.sigma_floor` afterwards.
 */
inline void adam_step(AdamState& state, ModelParams& model, const Gradients& grads, const TrainConfig& config) {
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1 - std::pow(config.adam_beta1, t);
    const double correction2 = 1 - std::pow(config.adam_beta2, t);

    detail::adam_update(model.matrices, grads.matrices, state.matrices_m, state.matrices_v, config, correction1, correction2);
    detail::adam_update(model.sigmas, grads.sigmas, state.sigmas_m, state.sigmas_v, config, correction1, correction2);
    if (!grads.centers.empty()) {
        detail::adam_update(model.centers, grads.centers, state.centers_m, state.centers_v, config, correction1, correction2);
    }

    for (auto& s : model.sigmas) {
        if (s < config.sigma_floor) {
            s = config.sigma_floor;
        }
    }
}

/**
 * Builds the pair set that `fit()` would use for this configuration.
 */
inline PairSet training_pairs(const Dataset& data, const TrainConfig& config) {
    return config.k_neighbors ? knn_pairs(data, *config.k_neighbors) : all_pairs(data);
}

/**
 * Trains a model on `data` with full-batch Adam.
 *
 * Each epoch evaluates the loss and gradients at the current parameters and then takes one step.
 * Training ends after `max_epochs` epochs, or earlier once `patience` consecutive epochs have
 * failed to improve the best loss by a relative `min_improvement`.
 *
 * @return The parameters with the lowest loss seen, and the training report.
 * @throws NumericalError if the loss becomes non-finite.
 */
inline std::pair<ModelParams, TrainReport> fit(const Dataset& data, const TrainConfig& config) {
    config.validate();
    detail::check_pairable(data);
    auto model = init_model(data, config);
    const auto pairs = training_pairs(data, config);

    TrainReport report;
    ModelParams best = model;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t stale = 0;

    AdamState state(model, config.optimize_centers);
    Gradients grads;

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        const double value = detail::loss_and_gradients(model, data, pairs, config.optimize_centers, grads);
        if (!std::isfinite(value)) {
            throw NumericalError("non-finite loss at epoch " + std::to_string(epoch));
        }
        report.loss_history.push_back(value);

        if (value < best_loss * (1 - config.min_improvement)) {
            stale = 0;
        } else {
            ++stale;
        }
        if (value < best_loss) {
            best_loss = value;
            best = model;
            report.best_epoch = epoch;
        }

        if (stale >= config.patience) {
            report.stop_reason = StopReason::patience;
            break;
        }
        adam_step(state, model, grads, config);
    }

    report.epochs_run = report.loss_history.size();
    if (report.loss_history.empty()) {
        best_loss = loss(best, data, pairs);
        report.final_loss = best_loss;
    } else {
        report.final_loss = report.loss_history.back();
    }
    report.best_loss = best_loss;
    return { std::move(best), std::move(report) };
}

}

#endif
