/*
 * Copyright 2026 The OPE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include "ope/simulator.hpp"

#include <cmath>
#include <numbers>

#include "ope/csv.hpp"
#include "ope/errors.hpp"

namespace ope {

void ToyWaveParams::validate() const {
    if (!(damping > 0.0)) throw InvalidArgument("toy damping must be positive");
    if (!(base_period > 0.0)) throw InvalidArgument("toy base period must be positive");
}

Eigen::VectorXd toy_simulate(const Eigen::Ref<const Eigen::VectorXd>& point, const Eigen::VectorXd& times,
                             const ToyWaveParams& params) {
    params.validate();
    if (point.size() != 3) throw InvalidArgument("toy simulator takes (x0, u0, c)");
    const double x0 = point(0), u0 = point(1), c = point(2);
    const double amplitude = params.amplitude_u0 * u0 * (1.0 + params.amplitude_x0 * (-x0) / 2.0);
    const double period = params.base_period + params.period_sensitivity * c;
    if (!(period > 0.0)) throw InvalidArgument("toy period must be positive at this input");
    Eigen::VectorXd out(times.size());
    for (Eigen::Index j = 0; j < times.size(); ++j) {
        const double t = times(j);
        if (t < 0.0) throw InvalidArgument("toy simulator times must be non-negative");
        out(j) = amplitude * (1.0 - std::exp(-t)) * std::exp(-params.damping * t) *
                 std::sin(2.0 * std::numbers::pi * t / period);
    }
    return out;
}

TrainingSet simulate_training(const Design& design, const Eigen::VectorXd& times, const ToyWaveParams& params) {
    TrainingSet train;
    train.design = design;
    train.times = times;
    train.outputs.resize(design.points.rows(), times.size());
    for (Eigen::Index i = 0; i < design.points.rows(); ++i)
        train.outputs.row(i) = toy_simulate(design.points.row(i).transpose(), times, params).transpose();
    return train;
}

Eigen::VectorXd time_grid(double t_min, double t_max, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
    if (!(t_max > t_min)) throw InvalidArgument("time grid needs t_max > t_min");
    const auto steps = static_cast<Eigen::Index>(std::llround((t_max - t_min) / dt));
    Eigen::VectorXd t(steps + 1);
    // j * span / steps instead of j * dt: 3 * 0.2 is 0.6000000000000001 but 3 * 35 / 175 rounds to 0.6.
    const double span = static_cast<double>(steps) * dt;
    t(0) = t_min;
    for (Eigen::Index j = 1; j <= steps; ++j) t(j) = t_min + static_cast<double>(j) * span / static_cast<double>(steps);
    return t;
}

namespace {

std::string time_label(double t) {
    std::string s = io::format_double(t);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return "t=" + s;
}

} // namespace

std::string training_csv(const TrainingSet& train) {
    std::string out;
    const auto& names = train.design.space.names();
    for (std::size_t d = 0; d < names.size(); ++d) out += (d ? "," : "") + names[d];
    for (Eigen::Index j = 0; j < train.times.size(); ++j) out += ',' + time_label(train.times(j));
    out += '\n';
    for (Eigen::Index i = 0; i < train.outputs.rows(); ++i) {
        for (Eigen::Index d = 0; d < train.design.points.cols(); ++d)
            out += (d ? "," : "") + io::format_double(train.design.points(i, d));
        for (Eigen::Index j = 0; j < train.outputs.cols(); ++j) out += ',' + io::format_double(train.outputs(i, j));
        out += '\n';
    }
    return out;
}

void write_training_csv(const std::filesystem::path& path, const TrainingSet& train) {
    io::write_file_atomic(path, training_csv(train));
}

TrainingSet parse_training_csv(const std::string& text, const DesignSpace& space, const std::string& source) {
    const auto table = io::parse_csv(text);
    const std::size_t k = space.dims();
    if (table.header.size() < k + 1) throw DataError(source + ": header needs the input names followed by t=<time> columns");
    for (std::size_t d = 0; d < k; ++d)
        if (table.header[d] != space.names()[d])
            throw DataError(source + ": header column " + std::to_string(d + 1) + " is '" + table.header[d] +
                            "', expected '" + space.names()[d] + "'");
    const std::size_t q = table.header.size() - k;
    Eigen::VectorXd times(static_cast<Eigen::Index>(q));
    for (std::size_t j = 0; j < q; ++j) {
        const std::string& h = table.header[k + j];
        const auto v = h.rfind("t=", 0) == 0 ? io::parse_double(std::string_view(h).substr(2)) : std::nullopt;
        if (!v || !std::isfinite(*v)) throw DataError(source + ": malformed time header '" + h + "'");
        times(static_cast<Eigen::Index>(j)) = *v;
        if (j > 0 && !(*v > times(static_cast<Eigen::Index>(j - 1))))
            throw DataError(source + ": time grid is not strictly increasing at '" + h + "'");
    }
    if (table.rows.empty()) throw DataError(source + ": no data rows");

    const auto n = static_cast<Eigen::Index>(table.rows.size());
    Eigen::MatrixXd pts(n, static_cast<Eigen::Index>(k));
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(q));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        const std::string where = source + ": row " + std::to_string(i) + " (line " +
                                  std::to_string(table.line_numbers[static_cast<std::size_t>(i)]) + ")";
        if (row.size() != table.header.size())
            throw DataError(where + " has " + std::to_string(row.size()) + " cells, expected " +
                            std::to_string(table.header.size()));
        for (std::size_t c = 0; c < row.size(); ++c) {
            const auto v = io::parse_double(row[c]);
            if (!v || !std::isfinite(*v))
                throw DataError(where + ", column " + table.header[c] + ": non-finite or malformed value '" + row[c] + "'");
            if (c < k)
                pts(i, static_cast<Eigen::Index>(c)) = *v;
            else
                out(i, static_cast<Eigen::Index>(c - k)) = *v;
        }
        if (!space.contains(pts.row(i))) throw DataError(where + ": input point lies outside the design space");
    }
    TrainingSet train;
    train.design = Design::from_physical(std::move(pts), space);
    train.times = std::move(times);
    train.outputs = std::move(out);
    train.validate();
    return train;
}

TrainingSet ingest_runs(const std::filesystem::path& path, const DesignSpace& space) {
    return parse_training_csv(io::read_file(path), space, path.string());
}

void DimensionalScaling::validate() const {
    if (!(length > 0.0) || !(slope > 0.0) || !(thickness > 0.0) || !(width > 0.0) || !(gravity > 0.0))
        throw InvalidArgument("dimensional scaling values must all be positive");
}

NondimensionalQuantities nondimensionalize(const WaveQuantities& dim, const DimensionalScaling& s) {
    s.validate();
    NondimensionalQuantities out;
    out.x = dim.x / s.length;
    out.y = dim.y / s.length;
    out.t = std::sqrt(s.gravity * s.slope / s.length) * dim.t;
    out.zeta = dim.zeta / s.thickness;
    out.u0 = dim.u0 / std::sqrt(s.length * s.gravity * s.slope);
    out.c = s.length / s.width;
    return out;
}

WaveQuantities dimensionalize(const WaveQuantities& nd, const DimensionalScaling& s) {
    s.validate();
    WaveQuantities out;
    out.x = nd.x * s.length;
    out.y = nd.y * s.length;
    out.t = nd.t / std::sqrt(s.gravity * s.slope / s.length);
    out.zeta = nd.zeta * s.thickness;
    out.u0 = nd.u0 * std::sqrt(s.length * s.gravity * s.slope);
    return out;
}

} // namespace ope
