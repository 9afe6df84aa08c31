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

#pragma once

#include <filesystem>

#include <json.hpp>

#include "ope/emulator.hpp"

namespace ope {

/// Fitted model as JSON. Matrices are {"rows", "cols", "data"} with data
/// row-major; every double is written in shortest round-trip form. The
/// `metadata` object is stored verbatim under "metadata".
nlohmann::json model_to_json(const OpeModel& model, const nlohmann::json& metadata = nlohmann::json::object());

/// Throws DataError when fields are missing or inconsistent.
OpeModel model_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const OpeModel& model,
                const nlohmann::json& metadata = nlohmann::json::object());
OpeModel load_model(const std::filesystem::path& path);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

} // namespace ope
