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

#include "ope/model_io.hpp"

#include "ope/csv.hpp"
#include "ope/errors.hpp"

namespace ope {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size())
        throw DataError("matrix entry has " + std::to_string(data.size()) + " values for shape " + std::to_string(rows) +
                        "x" + std::to_string(cols));
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[static_cast<std::size_t>(i * cols + c)];
    return m;
}

namespace {

Eigen::VectorXd vector_from_json(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

} // namespace

json model_to_json(const OpeModel& model, const json& metadata) {
    const auto& space = model.design().space;
    json bounds = json::array();
    for (const auto& b : space.bounds()) bounds.push_back({b.lower, b.upper});
    const auto& post = model.posterior();
    json j;
    j["format"] = "ope-model";
    j["version"] = 1;
    j["bases"] = {{"names", space.names()}, {"bounds", bounds}, {"frequencies", model.bases().output.frequencies()}};
    j["kernel"] = {{"input_lengths", model.kernel().input_lengths},
                   {"time_length", model.kernel().time_length},
                   {"exponent", model.kernel().exponent}};
    j["jitter"] = model.jitter();
    j["prior"] = {{"mean", to_std(model.prior().mean)},
                  {"scale", matrix_to_json(model.prior().scale)},
                  {"a", model.prior().a},
                  {"d", model.prior().d}};
    j["training"] = {{"design", matrix_to_json(model.design().points)},
                     {"times", to_std(model.times())},
                     {"fingerprint", post.fingerprint}};
    j["posterior"] = {{"mean", to_std(post.mean)},
                      {"scale", matrix_to_json(post.scale)},
                      {"a", post.a},
                      {"d", post.d},
                      {"residual_weights", matrix_to_json(post.residual_weights)}};
    j["metadata"] = metadata;
    return j;
}

OpeModel model_from_json(const json& j) {
    try {
        if (j.value("format", std::string{}) != "ope-model") throw DataError("not an ope-model file");
        const auto& jb = j.at("bases");
        std::vector<Interval> bounds;
        for (const auto& b : jb.at("bounds")) bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
        DesignSpace space(bounds, jb.at("names").get<std::vector<std::string>>());
        EmulatorBases bases{InputBasis(space), OutputBasis(jb.at("frequencies").get<std::vector<double>>())};

        KernelSpec kernel;
        kernel.input_lengths = j.at("kernel").at("input_lengths").get<std::vector<double>>();
        kernel.time_length = j.at("kernel").at("time_length").get<double>();
        kernel.exponent = j.at("kernel").at("exponent").get<double>();

        NigPrior prior;
        prior.mean = vector_from_json(j.at("prior").at("mean"));
        prior.scale = matrix_from_json(j.at("prior").at("scale"));
        prior.a = j.at("prior").at("a").get<double>();
        prior.d = j.at("prior").at("d").get<double>();

        OpeModel::State state;
        state.mean = vector_from_json(j.at("posterior").at("mean"));
        state.scale = matrix_from_json(j.at("posterior").at("scale"));
        state.a = j.at("posterior").at("a").get<double>();
        state.d = j.at("posterior").at("d").get<double>();
        state.residual_weights = matrix_from_json(j.at("posterior").at("residual_weights"));
        state.fingerprint = j.at("training").value("fingerprint", std::string{});

        Design design = Design::from_physical(matrix_from_json(j.at("training").at("design")), space);
        Eigen::VectorXd times = vector_from_json(j.at("training").at("times"));
        return OpeModel::from_state(prior, bases, kernel, std::move(design), std::move(times), j.at("jitter").get<double>(),
                                    std::move(state));
    } catch (const json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const OpeModel& model, const json& metadata) {
    io::write_file_atomic(path, model_to_json(model, metadata).dump(1) + "\n");
}

OpeModel load_model(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return model_from_json(j);
}

} // namespace ope
