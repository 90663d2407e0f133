#ifndef GWMAP_CLI_HPP
#define GWMAP_CLI_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "errors.hpp"
#include "interpret.hpp"
#include "io.hpp"
#include "model.hpp"
#include "training.hpp"

/**
 * @file cli.hpp
 *
 * @brief The `gwmap` command line: fit, transform, inspect, generate and error.
 */

namespace gwmap {

/// Process exit codes of `cli_main()`.
enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_data = 2,
    exit_numerical = 3,
};

/**
 * @cond
 */
namespace detail {

struct FitOptions {
    std::string input, out_model, out_embedding, out_report;
    TrainConfig config;
    std::size_t k = 0;
};

struct TransformOptions {
    std::string model, input, out;
};

struct InspectOptions {
    std::string model, embedding, field, out, svg;
    std::size_t resolution = default_grid_resolution;
    double margin = default_grid_margin;
};

struct GenerateOptions {
    std::string shape = "s-curve", out, out_color;
    std::size_t n = 1000;
    std::uint64_t seed = default_seed;
    double noise = 0;
};

struct ErrorOptions {
    std::string input, embedding;
};

inline std::string default_report_path(const std::string& model_path) {
    std::filesystem::path p(model_path);
    p.replace_extension(".report.json");
    return p.string();
}

inline void run_fit(const FitOptions& opts, std::ostream& out) {
    const auto data = read_csv(opts.input);
    auto config = opts.config;
    if (opts.k > 0) {
        config.k_neighbors = opts.k;
    }
    const auto [model, report] = fit(data, config);
    const auto embedding = transform_batch(model, data);
    const double error = reconstruction_error(data, embedding);

    write_model(model, opts.out_model);
    write_embedding_csv(embedding, opts.out_embedding);

    const std::string report_path = opts.out_report.empty() ? default_report_path(opts.out_model) : opts.out_report;
    auto report_file = detail::open_output(report_path);
    report_file << report_to_json(report, error).dump(2) << '\n';
    detail::finish_output(report_file, report_path);

    char line[128];
    std::snprintf(line, sizeof(line), "epochs %zu (%s), best loss %.6g, reconstruction error %.6f\n",
                  report.epochs_run, to_string(report.stop_reason), report.best_loss, error);
    out << line;
}

inline void run_transform(const TransformOptions& opts) {
    const auto model = read_model(opts.model);
    const auto data = read_csv(opts.input);
    write_embedding_csv(transform_batch(model, data), opts.out);
}

inline void run_inspect(const InspectOptions& opts) {
    const auto model = read_model(opts.model);
    const auto points = read_csv(opts.embedding);
    const Embedding embedding(points.size(), points.dim(), points.values());
    const auto report = grid_report(model, embedding, FieldSelector::parse(opts.field), opts.resolution, opts.margin);
    write_grid_csv(report, opts.out);
    if (!opts.svg.empty()) {
        write_svg_heatmap(report, embedding, opts.svg);
    }
}

inline void run_generate(const GenerateOptions& opts) {
    if (opts.shape != "s-curve") {
        throw ConfigError("unknown shape '" + opts.shape + "'");
    }
    const auto curve = generate_s_curve(opts.n, opts.seed, opts.noise);
    write_points_csv(curve.data, opts.out);
    if (!opts.out_color.empty()) {
        auto color = open_output(opts.out_color);
        for (double t : curve.color) {
            color << format_double(t) << '\n';
        }
        finish_output(color, opts.out_color);
    }
}

inline void run_error(const ErrorOptions& opts, std::ostream& out) {
    const auto data = read_csv(opts.input);
    const auto points = read_csv(opts.embedding);
    const Embedding embedding(points.size(), points.dim(), points.values());
    char line[64];
    std::snprintf(line, sizeof(line), "%.6f\n", reconstruction_error(data, embedding));
    out << line;
}

}
/**
 * @endcond
 */

/**
 * Runs the command line with the given arguments, writing results to `out` and diagnostics to `err`.
 *
 * @return One of `ExitCode`: 0 on success, 1 for usage or configuration errors,
 * 2 for unreadable or invalid data and model files, 3 if training diverged.
 */
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Interpretable dimensionality reduction with Gaussian-weighted linear maps", "gwmap"};
    app.require_subcommand(1);

    detail::FitOptions fit_opts;
    auto* fit_cmd = app.add_subcommand("fit", "Train a model and embed the training data");
    fit_cmd->add_option("--input", fit_opts.input, "Training data CSV")->required();
    fit_cmd->add_option("--out-model", fit_opts.out_model, "Model JSON to write")->required();
    fit_cmd->add_option("--out-embedding", fit_opts.out_embedding, "Embedding CSV to write")->required();
    fit_cmd->add_option("--out-report", fit_opts.out_report, "Run report JSON (default: <model>.report.json)");
    fit_cmd->add_option("--units", fit_opts.config.num_units, "Number of Gaussian units")->capture_default_str();
    fit_cmd->add_option("--dim", fit_opts.config.output_dim, "Output dimension")->capture_default_str();
    fit_cmd->add_option("--epochs", fit_opts.config.max_epochs, "Maximum number of epochs")->capture_default_str();
    fit_cmd->add_option("--patience", fit_opts.config.patience, "Epochs without improvement before stopping")->capture_default_str();
    fit_cmd->add_option("--min-improvement", fit_opts.config.min_improvement, "Relative loss decrease that counts as improvement")->capture_default_str();
    fit_cmd->add_option("--k", fit_opts.k, "Restrict the loss to k nearest neighbors (0: all pairs)")->capture_default_str();
    fit_cmd->add_option("--seed", fit_opts.config.seed, "Random seed")->capture_default_str();
    fit_cmd->add_option("--lr", fit_opts.config.learning_rate, "Adam learning rate")->capture_default_str();
    fit_cmd->add_option("--sigma-floor", fit_opts.config.sigma_floor, "Lower bound on Gaussian widths")->capture_default_str();
    fit_cmd->add_flag("--optimize-centers", fit_opts.config.optimize_centers, "Also train the Gaussian centers");

    detail::TransformOptions transform_opts;
    auto* transform_cmd = app.add_subcommand("transform", "Embed new points with a trained model");
    transform_cmd->add_option("--model", transform_opts.model, "Model JSON")->required();
    transform_cmd->add_option("--input", transform_opts.input, "Points CSV")->required();
    transform_cmd->add_option("--out", transform_opts.out, "Embedding CSV to write")->required();

    detail::InspectOptions inspect_opts;
    auto* inspect_cmd = app.add_subcommand("inspect", "Evaluate an interpretability field over a grid");
    inspect_cmd->add_option("--model", inspect_opts.model, "Model JSON")->required();
    inspect_cmd->add_option("--embedding", inspect_opts.embedding, "Embedding CSV")->required();
    inspect_cmd->add_option("--field", inspect_opts.field, "influence:J, influence, variance or norm")->required();
    inspect_cmd->add_option("--resolution", inspect_opts.resolution, "Grid points per axis")->capture_default_str();
    inspect_cmd->add_option("--margin", inspect_opts.margin, "Grid margin as a fraction of the extent")->capture_default_str();
    inspect_cmd->add_option("--out", inspect_opts.out, "Grid CSV to write")->required();
    inspect_cmd->add_option("--svg", inspect_opts.svg, "Optional SVG heat map to write");

    detail::GenerateOptions generate_opts;
    auto* generate_cmd = app.add_subcommand("generate", "Write a synthetic dataset");
    generate_cmd->add_option("--shape", generate_opts.shape, "Dataset shape")->check(CLI::IsMember({ "s-curve" }))->capture_default_str();
    generate_cmd->add_option("--n", generate_opts.n, "Number of points")->capture_default_str();
    generate_cmd->add_option("--seed", generate_opts.seed, "Random seed")->capture_default_str();
    generate_cmd->add_option("--noise", generate_opts.noise, "Standard deviation of added Gaussian noise")->capture_default_str();
    generate_cmd->add_option("--out", generate_opts.out, "Data CSV to write")->required();
    generate_cmd->add_option("--out-color", generate_opts.out_color, "Optional CSV of curve parameters");

    detail::ErrorOptions error_opts;
    auto* error_cmd = app.add_subcommand("error", "Print the reconstruction error of an embedding");
    error_cmd->add_option("--input", error_opts.input, "Original data CSV")->required();
    error_cmd->add_option("--embedding", error_opts.embedding, "Embedding CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return exit_usage;
    }

    try {
        if (*fit_cmd) {
            detail::run_fit(fit_opts, out);
        } else if (*transform_cmd) {
            detail::run_transform(transform_opts);
        } else if (*inspect_cmd) {
            detail::run_inspect(inspect_opts);
        } else if (*generate_cmd) {
            detail::run_generate(generate_opts);
        } else if (*error_cmd) {
            detail::run_error(error_opts, out);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_data;
    }
    return exit_ok;
}

}

#endif
