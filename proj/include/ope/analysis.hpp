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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ope/emulator.hpp"

namespace ope {

struct ElevationOptions {
    /// Use the upper credible bound instead of the predictive location.
    bool pessimistic = false;
    double level = 0.95;
};

/// Largest predictive location over time (or upper bound when pessimistic).
double max_elevation(const PredictiveSeries& series, const ElevationOptions& options = {});

/// One-at-a-time sweep of input `dimension` across `box`, the other inputs held at `fixed`.
struct SweepSpec {
    std::size_t dimension = 0;
    std::size_t resolution = 50;
    Eigen::VectorXd fixed; // full input point; the swept coordinate is ignored
    DesignSpace box;

    /// Throws InvalidArgument unless box lies inside `domain`, resolution >= 2 and fixed lies in box.
    void validate(const DesignSpace& domain) const;
};

struct SweepPoint {
    double value = 0.0;
    double max_elevation = 0.0;
    double mcil = 0.0;
    double mean_scale = 0.0;
};

struct SweepCurve {
    std::size_t dimension = 0;
    std::vector<SweepPoint> points;
    std::size_t evaluations = 0;
};

SweepCurve sensitivity_sweep(const OpeModel& model, const SweepSpec& spec, const ElevationOptions& options = {},
                             unsigned threads = 1);

std::string sweep_csv(const SweepCurve& curve);

struct BetaMarginal {
    double alpha = 1.0;
    double beta = 1.0;
    double lower = 0.0;
    double upper = 1.0;
};

struct BetaInputSpec {
    std::vector<BetaMarginal> marginals;

    void validate() const;
    /// x0 ~ Be(5,2) on [-2,0], u0 ~ Be(2,5) on [1,2], c ~ Be(2,5) on [0.5,2.5].
    static BetaInputSpec landslide();
};

/// n x k draws. Dimension d uses its own stream Rng(mix_seed(seed, d)) and
/// inverse-CDF sampling, so adding or reordering dimensions leaves the others unchanged.
Eigen::MatrixXd sample_beta(const BetaInputSpec& spec, std::size_t n, std::uint64_t seed);

/// Sample quantile with linear interpolation between order statistics
/// (h = (n - 1) p, the "type 7" rule).
double quantile_type7(std::vector<double> values, double p);

struct QuantileSummary {
    std::string statistic;
    std::vector<double> levels; // percent
    std::vector<double> values;
    std::size_t sample_count = 0;
    std::uint64_t seed = 0;
};

QuantileSummary summarize_quantiles(const std::string& statistic, const std::vector<double>& values,
                                    std::uint64_t seed, std::vector<double> levels = {1, 5, 50, 95, 99});

struct Histogram {
    std::vector<double> edges; // bins + 1
    std::vector<std::size_t> counts;
};

/// Equal-width bins over [min, max]; the last bin is closed.
Histogram histogram(const std::vector<double>& values, std::size_t bins);

struct UqOptions {
    ElevationOptions elevation;
    std::size_t bins = 30;
    unsigned threads = 1;
};

struct UqResult {
    Eigen::MatrixXd inputs;
    std::vector<double> max_elevation;
    std::vector<double> mcil;
    QuantileSummary max_elevation_quantiles;
    QuantileSummary mcil_quantiles;
    Histogram max_elevation_histogram;
    Histogram mcil_histogram;
    std::vector<std::string> warnings;
};

/// Propagates Beta-distributed inputs through the emulator on its training grid.
UqResult uq_monte_carlo(const OpeModel& model, const BetaInputSpec& spec, std::size_t n, std::uint64_t seed,
                        const UqOptions& options = {});

/// level,value rows, one per percentile.
std::string quantiles_csv(const QuantileSummary& table);
std::string histogram_csv(const Histogram& h);

} // namespace ope
