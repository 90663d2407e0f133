#ifndef GWMAP_IO_HPP
#define GWMAP_IO_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"

#include "errors.hpp"
#include "interpret.hpp"
#include "model.hpp"
#include "points.hpp"
#include "random.hpp"
#include "training.hpp"

/**
 * @file io.hpp
 *
 * @brief File formats: numeric CSV, model JSON, grid CSV, SVG heat maps, and the S-curve generator.
 *
 * Every number is written in the shortest decimal form that parses back to the same double,
 * so text round-trips are lossless and output is byte-stable across runs.
 */

namespace gwmap {

/**
 * Shortest round-trip decimal representation of `value`.
 */
inline std::string format_double(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

/**
 * @cond
 */
namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

inline bool parse_number(std::string_view field, double& out) {
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
    }
    if (field.empty()) {
        return false;
    }
    const auto result = std::from_chars(field.data(), field.data() + field.size(), out);
    return result.ec == std::errc() && result.ptr == field.data() + field.size();
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open '" + path + "' for writing");
    }
    return out;
}

inline void finish_output(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) {
        throw Error("failed while writing '" + path + "'");
    }
}

}
/**
 * @endcond
 */

/**
 * Parses comma-separated numeric rows. A first row that is not entirely numeric is taken as a header.
 * Blank lines are ignored.
 *
 * @param source Name used in error messages.
 * @throws ParseError naming the 1-based row and column of the problem.
 */
inline Dataset parse_csv(std::istream& input, const std::string& source = "<input>") {
    std::vector<double> values;
    std::size_t width = 0, rows = 0, line_number = 0;
    bool first_content = true;
    std::string line;

    while (std::getline(input, line)) {
        ++line_number;
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto fields = detail::split_commas(line);

        if (first_content) {
            first_content = false;
            // "nan" and "inf" parse as numbers, so such a row is data and gets rejected below.
            const bool header = std::any_of(fields.begin(), fields.end(), [](std::string_view f) {
                double dummy;
                return !detail::parse_number(f, dummy);
            });
            if (header) {
                continue;
            }
        }

        if (rows == 0) {
            width = fields.size();
        } else if (fields.size() != width) {
            throw ParseError(source + ": row " + std::to_string(line_number) + " has " + std::to_string(fields.size()) + " columns, expected " + std::to_string(width));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            double v;
            if (!detail::parse_number(fields[c], v)) {
                throw ParseError(source + ": row " + std::to_string(line_number) + ", column " + std::to_string(c + 1) + ": '" + std::string(fields[c]) + "' is not a number");
            }
            if (!std::isfinite(v)) {
                throw ParseError(source + ": row " + std::to_string(line_number) + ", column " + std::to_string(c + 1) + ": non-finite value");
            }
            values.push_back(v);
        }
        ++rows;
    }

    return Dataset(rows, width, std::move(values));
}

inline Dataset read_csv(const std::string& path) {
    std::ifstream input(path, std::ios::binary);
    if (!input) {
        throw DataError("cannot open '" + path + "'");
    }
    return parse_csv(input, path);
}

/**
 * Headerless CSV, one row per point.
 */
template<class Space>
void write_points_csv(std::ostream& out, const Points<Space>& points) {
    for (std::size_t p = 0; p < points.size(); ++p) {
        const auto row = points.row(p);
        for (std::size_t d = 0; d < row.size(); ++d) {
            if (d) {
                out << ',';
            }
            out << format_double(row[d]);
        }
        out << '\n';
    }
}

template<class Space>
void write_points_csv(const Points<Space>& points, const std::string& path) {
    auto out = detail::open_output(path);
    write_points_csv(out, points);
    detail::finish_output(out, path);
}

inline void write_embedding_csv(const Embedding& embedding, const std::string& path) {
    write_points_csv(embedding, path);
}

/**
 * Model as JSON: `input_dim`, `output_dim`, `epsilon`, `centers` (m arrays of d1),
 * `sigmas` (m values) and `matrices` (m arrays of d2 rows of d1 values).
 */
inline nlohmann::json model_to_json(const ModelParams& model) {
    model.validate();
    const std::size_t m = model.num_units(), d1 = model.input_dim, d2 = model.output_dim;
    nlohmann::json doc;
    doc["input_dim"] = d1;
    doc["output_dim"] = d2;
    doc["epsilon"] = model.epsilon;

    auto centers = nlohmann::json::array();
    auto matrices = nlohmann::json::array();
    for (std::size_t i = 0; i < m; ++i) {
        const auto c = model.center(i);
        centers.push_back(std::vector<double>(c.begin(), c.end()));
        const auto mat = model.matrix(i);
        auto rows = nlohmann::json::array();
        for (std::size_t k = 0; k < d2; ++k) {
            rows.push_back(std::vector<double>(mat.begin() + k * d1, mat.begin() + (k + 1) * d1));
        }
        matrices.push_back(std::move(rows));
    }
    doc["centers"] = std::move(centers);
    doc["sigmas"] = model.sigmas;
    doc["matrices"] = std::move(matrices);
    return doc;
}

/**
 * @cond
 */
namespace detail {

inline const nlohmann::json& require(const nlohmann::json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key)) {
        throw ParseError(std::string("model: missing field \"") + key + "\"");
    }
    return doc.at(key);
}

inline std::size_t require_dim(const nlohmann::json& doc, const char* key) {
    const auto& v = require(doc, key);
    if (!v.is_number_unsigned() || v.get<std::size_t>() < 1) {
        throw ParseError(std::string("model: \"") + key + "\" must be a positive integer");
    }
    return v.get<std::size_t>();
}

inline void read_vector(const nlohmann::json& v, std::size_t expected, const std::string& path, std::vector<double>& out) {
    if (!v.is_array() || v.size() != expected) {
        throw ParseError("model: " + path + " must be an array of " + std::to_string(expected) + " numbers");
    }
    for (std::size_t e = 0; e < expected; ++e) {
        if (!v[e].is_number()) {
            throw ParseError("model: " + path + "[" + std::to_string(e) + "] is not a number");
        }
        out.push_back(v[e].get<double>());
    }
}

}
/**
 * @endcond
 */

/**
 * Inverse of `model_to_json()`.
 *
 * @throws ParseError naming the offending field path, e.g. `matrices[3]`.
 */
inline ModelParams model_from_json(const nlohmann::json& doc) {
    ModelParams model;
    model.input_dim = detail::require_dim(doc, "input_dim");
    model.output_dim = detail::require_dim(doc, "output_dim");
    const auto& eps = detail::require(doc, "epsilon");
    if (!eps.is_number()) {
        throw ParseError("model: \"epsilon\" must be a number");
    }
    model.epsilon = eps.get<double>();

    const auto& sigmas = detail::require(doc, "sigmas");
    if (!sigmas.is_array()) {
        throw ParseError("model: \"sigmas\" must be an array");
    }
    const std::size_t m = sigmas.size();
    detail::read_vector(sigmas, m, "sigmas", model.sigmas);

    const auto& centers = detail::require(doc, "centers");
    if (!centers.is_array() || centers.size() != m) {
        throw ParseError("model: \"centers\" must hold one entry per sigma (" + std::to_string(m) + ")");
    }
    for (std::size_t i = 0; i < m; ++i) {
        detail::read_vector(centers[i], model.input_dim, "centers[" + std::to_string(i) + "]", model.centers);
    }

    const auto& matrices = detail::require(doc, "matrices");
    if (!matrices.is_array() || matrices.size() != m) {
        throw ParseError("model: \"matrices\" must hold one entry per sigma (" + std::to_string(m) + ")");
    }
    for (std::size_t i = 0; i < m; ++i) {
        const std::string path = "matrices[" + std::to_string(i) + "]";
        const auto& rows = matrices[i];
        if (!rows.is_array() || rows.size() != model.output_dim) {
            throw ParseError("model: " + path + " must have " + std::to_string(model.output_dim) + " rows of " + std::to_string(model.input_dim) + " values");
        }
        for (std::size_t k = 0; k < model.output_dim; ++k) {
            detail::read_vector(rows[k], model.input_dim, path + "[" + std::to_string(k) + "]", model.matrices);
        }
    }

    try {
        model.validate();
    } catch (const Error& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
    return model;
}

inline void write_model(const ModelParams& model, const std::string& path) {
    auto out = detail::open_output(path);
    out << model_to_json(model).dump(2) << '\n';
    detail::finish_output(out, path);
}

inline ModelParams read_model(const std::string& path) {
    std::ifstream input(path, std::ios::binary);
    if (!input) {
        throw DataError("cannot open '" + path + "'");
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(input);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return model_from_json(doc);
}

/**
 * Loss history, stop reason and final reconstruction error of a training run, as JSON.
 */
inline nlohmann::json report_to_json(const TrainReport& report, double reconstruction) {
    nlohmann::json doc;
    doc["epochs_run"] = report.epochs_run;
    doc["stop_reason"] = to_string(report.stop_reason);
    doc["final_loss"] = report.final_loss;
    doc["best_loss"] = report.best_loss;
    doc["best_epoch"] = report.best_epoch;
    doc["reconstruction_error"] = reconstruction;
    doc["loss_history"] = report.loss_history;
    return doc;
}

/**
 * @brief Synthetic S-shaped surface in 3D, with the curve parameter of each point.
 */
struct SCurve {
    Dataset data;
    std::vector<double> color;
};

/**
 * Point of the noiseless S-curve at curve parameter `t` and height fraction `u` in [0, 1].
 */
inline std::array<double, 3> s_curve_point(double t, double u) {
    const double sign = t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0);
    return { std::sin(t), 2 * u, sign * (std::cos(t) - 1) };
}

/**
 * Samples `n` points of the S-curve: t uniform in [-3pi/2, 3pi/2], x = sin t,
 * y = 2u with u uniform in [0, 1], z = sign(t)(cos t - 1), then adds `noise`
 * times a standard normal to every coordinate. The color of each point is t.
 */
inline SCurve generate_s_curve(std::size_t n, std::uint64_t seed = default_seed, double noise = 0.0) {
    if (n < 1) {
        throw ConfigError("S-curve needs at least one point");
    }
    if (!(noise >= 0) || !std::isfinite(noise)) {
        throw ConfigError("noise must be nonnegative and finite");
    }
    Rng rng(seed);
    std::vector<double> values(n * 3);
    std::vector<double> color(n);
    for (std::size_t p = 0; p < n; ++p) {
        const double t = 3 * std::numbers::pi * (uniform01(rng) - 0.5);
        const auto point = s_curve_point(t, uniform01(rng));
        std::copy(point.begin(), point.end(), values.begin() + p * 3);
        color[p] = t;
    }
    if (noise > 0) {
        for (std::size_t e = 0; e < values.size(); e += 2) {
            const auto [a, b] = standard_normal_pair(rng);
            values[e] += noise * a;
            if (e + 1 < values.size()) {
                values[e + 1] += noise * b;
            }
        }
    }
    return { Dataset(n, 3, std::move(values)), std::move(color) };
}

/**
 * Grid report as CSV. Scalar fields have the header `px,py,value`;
 * the full influence profile has `px,py,w0,...,w{d1-1}`.
 */
inline void write_grid_csv(std::ostream& out, const GridReport& report) {
    out << "px,py";
    if (report.value_width == 1) {
        out << ",value";
    } else {
        for (std::size_t j = 0; j < report.value_width; ++j) {
            out << ",w" << j;
        }
    }
    out << '\n';
    for (std::size_t c = 0; c < report.size(); ++c) {
        const auto p = report.grid.points.row(c);
        out << format_double(p[0]) << ',' << format_double(p[1]);
        for (double v : report.value(c)) {
            out << ',' << format_double(v);
        }
        out << '\n';
    }
}

inline void write_grid_csv(const GridReport& report, const std::string& path) {
    auto out = detail::open_output(path);
    write_grid_csv(out, report);
    detail::finish_output(out, path);
}

/**
 * @brief Endpoints of the heat-map color ramp. Colors are interpolated linearly
 * in RGB from `low` at the field minimum to `high` at the field maximum.
 */
struct ColorRamp {
    int low[3] = { 49, 54, 149 };
    int high[3] = { 215, 48, 39 };

    std::string at(double t) const {
        t = std::clamp(t, 0.0, 1.0);
        char buffer[8];
        int rgb[3];
        for (int c = 0; c < 3; ++c) {
            rgb[c] = static_cast<int>(std::lround(low[c] + t * (high[c] - low[c])));
        }
        std::snprintf(buffer, sizeof(buffer), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
        return buffer;
    }
};

/**
 * Renders a scalar grid report as an SVG heat map: one rectangle per cell, the
 * embedding drawn as circles on top, and a legend with the field minimum and maximum.
 */
inline void write_svg_heatmap(std::ostream& out, const GridReport& report, const Embedding& embedding, const ColorRamp& ramp = {}) {
    if (report.value_width != 1) {
        throw ConfigError("SVG heat maps need a scalar field, not '" + report.field.name() + "'");
    }
    if (report.grid.resolution < 2) {
        throw ConfigError("SVG heat maps need a grid with resolution of at least 2");
    }

    constexpr double plot = 600, pad = 20, legend = 40;
    const std::size_t res = report.grid.resolution;
    const auto& lo = report.grid.min;
    const auto& hi = report.grid.max;
    const double cell_w = plot / static_cast<double>(res);
    const double cell_h = plot / static_cast<double>(res);
    // Grid point (0, 0) sits at the center of the bottom-left cell.
    auto to_x = [&](double x) { return pad + cell_w / 2 + (x - lo[0]) / (hi[0] - lo[0]) * (plot - cell_w); };
    auto to_y = [&](double y) { return pad + plot - cell_h / 2 - (y - lo[1]) / (hi[1] - lo[1]) * (plot - cell_h); };

    const auto [min_it, max_it] = std::minmax_element(report.values.begin(), report.values.end());
    const double vmin = *min_it, vmax = *max_it;
    const double range = vmax - vmin;

    char buf[256];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.3f", v);
        return std::string(buf);
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(plot + 2 * pad) << "\" height=\"" << num(plot + 2 * pad + legend) << "\">\n";
    out << "<g id=\"field\" shape-rendering=\"crispEdges\">\n";
    for (std::size_t r = 0; r < res; ++r) {
        for (std::size_t c = 0; c < res; ++c) {
            const double v = report.values[r * res + c];
            const double t = range > 0 ? (v - vmin) / range : 0.0;
            const double x = pad + static_cast<double>(c) * cell_w;
            const double y = pad + plot - static_cast<double>(r + 1) * cell_h;
            out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(cell_w) << "\" height=\"" << num(cell_h)
                << "\" fill=\"" << ramp.at(t) << "\"/>\n";
        }
    }
    out << "</g>\n<g id=\"points\" fill=\"#ffffff\" stroke=\"#000000\" stroke-width=\"0.5\">\n";
    for (std::size_t p = 0; p < embedding.size(); ++p) {
        const auto pt = embedding.row(p);
        out << "<circle cx=\"" << num(to_x(pt[0])) << "\" cy=\"" << num(to_y(pt[1])) << "\" r=\"2\"/>\n";
    }
    out << "</g>\n";

    const double ly = pad + plot + 25;
    std::snprintf(buf, sizeof(buf), "%.4g", vmin);
    const std::string min_text = buf;
    std::snprintf(buf, sizeof(buf), "%.4g", vmax);
    const std::string max_text = buf;
    out << "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<text x=\"" << num(pad) << "\" y=\"" << num(ly) << "\">" << report.field.name() << "</text>\n";
    out << "<text x=\"" << num(pad + 150) << "\" y=\"" << num(ly) << "\" fill=\"" << ramp.at(0) << "\">min " << min_text << "</text>\n";
    out << "<text x=\"" << num(pad + 300) << "\" y=\"" << num(ly) << "\" fill=\"" << ramp.at(1) << "\">max " << max_text << "</text>\n";
    out << "</g>\n</svg>\n";
}

inline void write_svg_heatmap(const GridReport& report, const Embedding& embedding, const std::string& path) {
    auto out = detail::open_output(path);
    write_svg_heatmap(out, report, embedding);
    detail::finish_output(out, path);
}

}

#endif
