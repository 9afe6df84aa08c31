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

#include <optional>
#include <vector>

#include "ope/emulator.hpp"
#include "ope/likelihood.hpp"

namespace ope {

struct FitSettings {
    double a = 3.0;
    std::optional<double> sigma2; // absent: moment estimate
    std::optional<double> d;      // absent: moment estimate
    double split = 0.5;
    double exponent = 1.5;
    double jitter = kDefaultJitter;
    /// (l_1..l_k, l_t); absent means maximize the marginal likelihood.
    std::optional<std::vector<double>> lengths;
    OptimizerOptions optimizer;
};

struct FitOutcome {
    OpeModel model;
    HyperparamEstimate hyper;
    std::optional<OptimizationResult> optimization;
};

/// Prior hyperparameters, then correlation lengths, then the conjugate update.
FitOutcome fit_emulator(const TrainingSet& train, const EmulatorBases& bases, const FitSettings& settings);

} // namespace ope
