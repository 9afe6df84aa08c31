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
#include <string>

#include <Eigen/Dense>

#include "ope/design.hpp"
#include "ope/emulator.hpp"

namespace ope {

/// Closed-form stand-in wave simulator over inputs (x0, u0, c):
///   zeta(t) = amplitude_u0 u0 (1 + amplitude_x0 (-x0) / 2) (1 - e^-t) e^(-damping t)
///             * sin(2 pi t / (base_period + period_sensitivity c)).
/// Larger u0 and more negative x0 raise the amplitude; larger c lengthens the period.
struct ToyWaveParams {
    double damping = 0.05;
    double base_period = 3.0;
    double period_sensitivity = 0.8;
    double amplitude_u0 = 1.0;
    double amplitude_x0 = 0.3;

    void validate() const;
};

Eigen::VectorXd toy_simulate(const Eigen::Ref<const Eigen::VectorXd>& point, const Eigen::VectorXd& times,
                             const ToyWaveParams& params = {});

/// Runs the toy simulator at every design point.
TrainingSet simulate_training(const Design& design, const Eigen::VectorXd& times, const ToyWaveParams& params = {});

/// t_min, t_min + dt, ..., t_max (count rounded from the span / dt).
Eigen::VectorXd time_grid(double t_min, double t_max, double dt);

/// Training CSV: header "<input names>,t=<time>,...", one row per design point.
std::string training_csv(const TrainingSet& train);
void write_training_csv(const std::filesystem::path& path, const TrainingSet& train);
TrainingSet parse_training_csv(const std::string& text, const DesignSpace& space, const std::string& source = "input");
/// Reads and validates a training file; the header's input names must match `space`.
TrainingSet ingest_runs(const std::filesystem::path& path, const DesignSpace& space);

struct DimensionalScaling {
    double length = 1.0;    // landslide characteristic horizontal length (m)
    double slope = 0.1;     // beach slope
    double thickness = 1.0; // landslide maximum vertical thickness (m)
    double width = 1.0;     // landslide characteristic width (m)
    double gravity = 9.81;  // m / s^2

    void validate() const;
};

struct WaveQuantities {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;
    double u0 = 0.0;
    double zeta = 0.0;
};

struct NondimensionalQuantities : WaveQuantities {
    double c = 0.0; // spread ratio length / width
};

/// x = x'/L, y = y'/L, t = sqrt(g s / L) t', zeta = zeta'/eta, u0 = u0' / sqrt(L g s), c = L / width.
NondimensionalQuantities nondimensionalize(const WaveQuantities& dimensional, const DimensionalScaling& scaling);
WaveQuantities dimensionalize(const WaveQuantities& nondimensional, const DimensionalScaling& scaling);

} // namespace ope
