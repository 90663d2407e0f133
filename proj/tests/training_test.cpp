#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "gwmap/interpret.hpp"
#include "gwmap/training.hpp"
#include "test_utils.hpp"

using namespace gwmap;

namespace {

// 2D points lifted into 3D with a constant third coordinate.
Dataset planar_data(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    std::vector<double> values;
    for (std::size_t p = 0; p < n; ++p) {
        values.push_back(coord(rng));
        values.push_back(coord(rng));
        values.push_back(0.5);
    }
    return Dataset(n, 3, values);
}

// Exact projection onto the first two coordinates: one unit, enormous width, negligible epsilon.
ModelParams exact_projection() {
    auto model = testutil::truncated_identity_model(3, 2, 1e8);
    model.epsilon = 1e-300;
    return model;
}

TrainConfig small_config() {
    TrainConfig config;
    config.num_units = 3;
    config.output_dim = 2;
    config.max_epochs = 50;
    config.seed = 42;
    return config;
}

}

TEST(InitModel, WidthsAreOneAndCentersAreRows) {
    std::mt19937_64 rng(1);
    const auto data = testutil::random_dataset(rng, 20, 4);
    auto config = small_config();
    config.num_units = 5;
    const auto model = init_model(data, config);

    EXPECT_EQ(model.sigmas, std::vector<double>(5, 1.0));
    EXPECT_EQ(model.epsilon, 1e-8);
    for (std::size_t i = 0; i < 5; ++i) {
        bool found = false;
        for (std::size_t p = 0; p < data.size() && !found; ++p) {
            found = std::equal(model.center(i).begin(), model.center(i).end(), data.row(p).begin());
        }
        EXPECT_TRUE(found) << "center " << i;
    }
    const double bound = 1 / std::sqrt(4.0);
    for (double e : model.matrices) {
        EXPECT_GE(e, -bound);
        EXPECT_LT(e, bound);
    }

    config.matrix_init_scale = 0.01;
    for (double e : init_model(data, config).matrices) {
        EXPECT_LE(std::abs(e), 0.01);
    }
}

TEST(InitModel, DeterministicAndExhaustive) {
    std::mt19937_64 rng(2);
    const auto data = testutil::random_dataset(rng, 6, 3);
    auto config = small_config();
    EXPECT_EQ(init_model(data, config), init_model(data, config));

    config.num_units = 6;
    const auto model = init_model(data, config);
    std::vector<std::vector<double> > centers, rows;
    for (std::size_t i = 0; i < 6; ++i) {
        centers.emplace_back(model.center(i).begin(), model.center(i).end());
        rows.emplace_back(data.row(i).begin(), data.row(i).end());
    }
    std::sort(centers.begin(), centers.end());
    std::sort(rows.begin(), rows.end());
    EXPECT_EQ(centers, rows);
}

TEST(InitModel, ConfigurationErrors) {
    std::mt19937_64 rng(3);
    const auto data = testutil::random_dataset(rng, 4, 3);
    auto config = small_config();
    config.num_units = 5;
    EXPECT_THROW(init_model(data, config), ConfigError);
    config.num_units = 2;
    config.output_dim = 3;
    EXPECT_THROW(init_model(data, config), ConfigError);
}

TEST(Loss, HandValues) {
    const auto data = planar_data(10, 1);
    const auto pairs = all_pairs(data);
    EXPECT_EQ(loss(exact_projection(), data, pairs), 0.0);

    auto collapsed = exact_projection();
    std::fill(collapsed.matrices.begin(), collapsed.matrices.end(), 0.0);
    double expected = 0;
    for (const auto& p : pairs.pairs) {
        expected += p.target * p.target;
    }
    EXPECT_NEAR(loss(collapsed, data, pairs), expected / pairs.size(), 1e-14);

    // Original distance 3, embedded distance 1.
    const Dataset two(2, 3, { 0, 0, 0, 3, 0, 0 });
    auto shrink = exact_projection();
    shrink.matrices = { 1.0 / 3, 0, 0, 0, 1.0 / 3, 0 };
    EXPECT_NEAR(loss(shrink, two, all_pairs(two)), 4.0, 1e-12);

    EXPECT_THROW(loss(shrink, two, PairSet{}), ConfigError);
}

TEST(Loss, MatchesReferenceImplementation) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const auto data = testutil::random_dataset(rng, 12, 4);
        const auto model = testutil::random_model(rng, 3, 4, 2);
        const auto pairs = all_pairs(data);
        EXPECT_NEAR(loss(model, data, pairs), testutil::reference_loss(model, data, pairs), 1e-12);
    }
}

TEST(Loss, FullKnnEqualsAllPairs) {
    std::mt19937_64 rng(5);
    for (std::size_t n = 2; n <= 20; ++n) {
        const auto data = testutil::random_dataset(rng, n, 3);
        const auto model = testutil::random_model(rng, 2, 3, 2);
        EXPECT_EQ(loss(model, data, knn_pairs(data, n - 1)), loss(model, data, all_pairs(data)));
    }
}

TEST(Loss, EmbeddedDistancesInvariantUnderRotation) {
    std::mt19937_64 rng(6);
    const auto data = testutil::random_dataset(rng, 15, 3);
    const auto model = testutil::random_model(rng, 3, 3, 2);
    const auto pairs = all_pairs(data);
    const auto embedding = transform_batch(model, data);

    const double angle = 0.7;
    Embedding rotated(embedding.size(), 2);
    for (std::size_t p = 0; p < embedding.size(); ++p) {
        const auto y = embedding.row(p);
        rotated.row(p)[0] = std::cos(angle) * y[0] - std::sin(angle) * y[1] + 3.0;
        rotated.row(p)[1] = std::sin(angle) * y[0] + std::cos(angle) * y[1] - 1.0;
    }
    for (const auto& p : pairs.pairs) {
        EXPECT_NEAR(euclidean(embedding.row(p.first), embedding.row(p.second)), euclidean(rotated.row(p.first), rotated.row(p.second)), 1e-12);
    }
    EXPECT_NEAR(detail::stress(embedding, pairs), detail::stress(rotated, pairs), 1e-12);
}

TEST(Gradients, ZeroAtExactOptimum) {
    const auto data = planar_data(10, 2);
    TrainConfig config;
    config.optimize_centers = true;
    const auto grads = gradients(exact_projection(), data, all_pairs(data), config);
    for (double g : grads.matrices) {
        EXPECT_EQ(g, 0.0);
    }
    for (double g : grads.sigmas) {
        EXPECT_EQ(g, 0.0);
    }
    for (double g : grads.centers) {
        EXPECT_EQ(g, 0.0);
    }
}

TEST(Gradients, MatchFiniteDifferences) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto result = testutil::check_random_instance(rng, trial % 2 == 1);
        EXPECT_EQ(result.failures, 0u) << "trial " << trial << ": " << result.first_failure;
        EXPECT_GT(result.checked, 0u);
    }
}

TEST(Gradients, CentersOnlyWhenRequested) {
    std::mt19937_64 rng(8);
    const auto data = testutil::random_dataset(rng, 6, 3);
    const auto model = testutil::random_model(rng, 2, 3, 2);
    TrainConfig config;
    EXPECT_TRUE(gradients(model, data, all_pairs(data), config).centers.empty());
    config.optimize_centers = true;
    EXPECT_EQ(gradients(model, data, all_pairs(data), config).centers.size(), model.centers.size());
}

TEST(Gradients, DuplicatePointsStayFinite) {
    const Dataset data(3, 3, { 1, 2, 3, 1, 2, 3, 0, 1, 0 });
    std::mt19937_64 rng(9);
    const auto model = testutil::random_model(rng, 2, 3, 2);
    TrainConfig config;
    config.optimize_centers = true;
    const auto grads = gradients(model, data, all_pairs(data), config);
    for (const auto* block : { &grads.matrices, &grads.sigmas, &grads.centers }) {
        for (double g : *block) {
            EXPECT_TRUE(std::isfinite(g));
        }
    }
}

TEST(AdamStep, ZeroGradientLeavesParameters) {
    std::mt19937_64 rng(10);
    auto model = testutil::random_model(rng, 3, 3, 2);
    const auto before = model;
    TrainConfig config;
    AdamState state(model, false);
    Gradients zero{ std::vector<double>(model.matrices.size()), std::vector<double>(model.sigmas.size()), {} };
    adam_step(state, model, zero, config);
    EXPECT_EQ(model, before);
}

TEST(AdamStep, FirstStepMovesByLearningRate) {
    std::mt19937_64 rng(11);
    auto model = testutil::random_model(rng, 2, 3, 2);
    const auto before = model;
    TrainConfig config;
    config.learning_rate = 0.05;
    config.optimize_centers = true;
    AdamState state(model, true);

    Gradients grads;
    std::normal_distribution<double> normal(0.0, 3.0);
    for (auto [grad, param] : { std::make_pair(&grads.matrices, &model.matrices), std::make_pair(&grads.sigmas, &model.sigmas),
                                std::make_pair(&grads.centers, &model.centers) }) {
        grad->resize(param->size());
        for (auto& g : *grad) {
            g = normal(rng);
        }
    }
    adam_step(state, model, grads, config);

    // After one step, m_hat = g and v_hat = g^2, so the update is lr * g / (|g| + eps).
    auto check = [&](const std::vector<double>& after, const std::vector<double>& start, const std::vector<double>& g) {
        for (std::size_t e = 0; e < g.size(); ++e) {
            const double sign = g[e] > 0 ? 1.0 : -1.0;
            EXPECT_NEAR(start[e] - after[e], config.learning_rate * sign, 1e-8);
        }
    };
    check(model.matrices, before.matrices, grads.matrices);
    check(model.centers, before.centers, grads.centers);
    for (std::size_t i = 0; i < model.sigmas.size(); ++i) {
        const double expected = std::max(config.sigma_floor, before.sigmas[i] - config.learning_rate * (grads.sigmas[i] > 0 ? 1 : -1));
        EXPECT_NEAR(model.sigmas[i], expected, 1e-8);
    }
}

TEST(AdamStep, WidthsClampedToFloor) {
    auto model = testutil::truncated_identity_model(3, 2, 0.0015);
    TrainConfig config;
    config.learning_rate = 0.1;
    AdamState state(model, false);
    Gradients grads{ std::vector<double>(6), { 5.0 }, {} };
    adam_step(state, model, grads, config);
    EXPECT_EQ(model.sigmas[0], config.sigma_floor);
}

TEST(Fit, ZeroEpochsReturnsInitialModel) {
    const auto data = planar_data(12, 3);
    auto config = small_config();
    config.max_epochs = 0;
    const auto [model, report] = fit(data, config);
    EXPECT_EQ(model, init_model(data, config));
    EXPECT_TRUE(report.loss_history.empty());
    EXPECT_EQ(report.epochs_run, 0u);
    EXPECT_EQ(report.stop_reason, StopReason::max_epochs);
    EXPECT_EQ(report.final_loss, loss(model, data, all_pairs(data)));
}

TEST(Fit, RecoversPlanarData) {
    const auto data = planar_data(60, 4);
    TrainConfig config;
    config.num_units = 5;
    config.max_epochs = 2000;
    config.seed = 1;
    const auto [model, report] = fit(data, config);
    EXPECT_LT(report.best_loss, 1e-3);
    EXPECT_LT(reconstruction_error(data, transform_batch(model, data)), 0.05);
}

TEST(Fit, DeterministicForFixedSeed) {
    const auto data = planar_data(30, 5);
    const auto config = small_config();
    const auto first = fit(data, config);
    const auto second = fit(data, config);
    EXPECT_EQ(first.second.loss_history, second.second.loss_history);
    EXPECT_EQ(first.first, second.first);
}

TEST(Fit, FixedCentersStayPut) {
    const auto data = planar_data(30, 6);
    auto config = small_config();
    const auto initial = init_model(data, config);
    EXPECT_EQ(fit(data, config).first.centers, initial.centers);

    config.optimize_centers = true;
    EXPECT_NE(fit(data, config).first.centers, initial.centers);
}

TEST(Fit, ReturnsBestModel) {
    std::mt19937_64 rng(12);
    const auto data = testutil::random_dataset(rng, 25, 4);
    auto config = small_config();
    config.max_epochs = 200;
    config.learning_rate = 0.2;
    const auto [model, report] = fit(data, config);

    ASSERT_EQ(report.loss_history.size(), report.epochs_run);
    EXPECT_EQ(report.final_loss, report.loss_history.back());
    const double minimum = *std::min_element(report.loss_history.begin(), report.loss_history.end());
    EXPECT_EQ(report.best_loss, minimum);
    EXPECT_EQ(report.loss_history[report.best_epoch], minimum);
    EXPECT_NEAR(loss(model, data, all_pairs(data)), minimum, 1e-12);
}

TEST(Fit, PatienceStopsStalledRun) {
    const auto data = planar_data(20, 7);
    auto config = small_config();
    config.max_epochs = 1000;
    config.patience = 5;
    config.learning_rate = 1e-14;
    const auto [model, report] = fit(data, config);
    EXPECT_EQ(report.stop_reason, StopReason::patience);
    // The first epoch always improves on the initial infinity, then five stale epochs follow.
    EXPECT_EQ(report.epochs_run, 6u);
}

TEST(Fit, KnnPairsAreUsed) {
    const auto data = planar_data(30, 8);
    auto config = small_config();
    config.k_neighbors = 5;
    const auto [model, report] = fit(data, config);
    EXPECT_NEAR(report.loss_history.front(), loss(init_model(data, config), data, knn_pairs(data, 5)), 1e-15);

    config.k_neighbors = 30;
    EXPECT_THROW(fit(data, config), ConfigError);
}

TEST(Fit, RejectsTooFewPoints) {
    EXPECT_THROW(fit(Dataset(1, 3, { 1, 2, 3 }), small_config()), DataError);
}
