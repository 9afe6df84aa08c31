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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ope/analysis.hpp"
#include "ope/design.hpp"
#include "ope/simulator.hpp"

namespace ope {

struct DesignSection {
    std::size_t n = 40;
    std::uint64_t seed = 1;
    std::size_t candidates = 100;
    DesignSpace space = DesignSpace::landslide();
};

struct TimeGridSection {
    double t_min = 0.0;
    double t_max = 35.0;
    double dt = 0.2;

    Eigen::VectorXd grid() const { return time_grid(t_min, t_max, dt); }
};

struct KernelSection {
    double exponent = 1.5;
    double jitter = 1e-8;
    /// Fixed (l_1..l_k, l_t); when absent the lengths are fitted by marginal likelihood.
    std::optional<std::vector<double>> lengths;
    std::vector<Interval> length_bounds; // empty: defaults from the domain
    std::size_t restarts = 5;
    std::uint64_t seed = 3;
    std::size_t max_iterations = 200;
};

struct PriorSection {
    double a = 3.0;
    std::optional<double> sigma2; // absent: estimate
    std::optional<double> d;      // absent: estimate
    double split = 0.5;
};

struct ValidationSection {
    double level = 0.95;
    bool reoptimize = false;
};

struct SweepSection {
    std::string dimension;
    std::size_t resolution = 50;
    std::vector<double> fixed; // one value per input; the swept one is ignored
    DesignSpace box;
};

struct AnalysisSection {
    std::vector<SweepSection> sweeps;
    BetaInputSpec beta = BetaInputSpec::landslide();
    std::size_t mc_samples = 1000;
    std::uint64_t seed = 2;
    std::size_t bins = 30;
    bool pessimistic = false;
    double level = 0.95;
};

struct PathsSection {
    std::filesystem::path design = "out/design.csv";
    std::filesystem::path training = "out/training.csv";
    std::filesystem::path model = "out/model.json";
    std::filesystem::path reports = "out/reports";
};

/// Every knob of the pipeline. Defaults reproduce the landslide setup:
/// 40-point maximin design over x0 in [-3,1], u0 in [1,2], c in [0.5,3];
/// t in [0, 35] with dt = 0.2; frequencies 1/6..1/2; p = 3/2; a = 3.
struct RunConfig {
    DesignSection design;
    TimeGridSection time;
    std::vector<double> frequencies{1.0 / 6.0, 1.0 / 5.0, 1.0 / 4.0, 1.0 / 3.0, 1.0 / 2.0};
    KernelSection kernel;
    PriorSection prior;
    ToyWaveParams simulator;
    ValidationSection validation;
    AnalysisSection analysis;
    PathsSection paths;

    /// Sweeps over each input across x0 in [-2,0], u0 in [1,2], c in [0.5,2.5], others at the box midpoint.
    static std::vector<SweepSection> default_sweeps(const DesignSpace& space);

    /// Throws ConfigError on unknown keys, wrong types or inconsistent sections.
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    /// FNV-1a of the canonical JSON dump.
    std::string hash() const;
    void validate() const;

    EmulatorBases bases() const;
    SweepSpec sweep_spec(const SweepSection& s) const;
};

} // namespace ope
