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

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ope/emulator.hpp"
#include "ope/likelihood.hpp"

namespace ope {

/// Root mean square difference. Throws InvalidArgument on length mismatch or empty input.
double rmse(const Eigen::VectorXd& observed, const Eigen::VectorXd& predicted);

/// For every point, the mean Euclidean distance to the other n - 1 points.
/// Pass physical coordinates for the usual MED, unit coordinates for design work.
Eigen::VectorXd mean_euclidean_distance(const Eigen::MatrixXd& points);

/// Mean width of the credible band over time.
double mcil(const PredictiveSeries& series, double level = 0.95);

/// Fraction of observations inside the credible band.
double coverage(const Eigen::VectorXd& observed, const PredictiveSeries& series, double level = 0.95);

/// Pearson correlation; NaN when either side has zero variance.
double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct LooDiagnostic {
    std::size_t index = 0;
    bool ok = false;
    std::string error;
    Eigen::VectorXd observed;
    PredictiveSeries prediction;
    double rmse = 0.0;
    double mcil = 0.0;
    double coverage = 0.0;
};

struct DiagnosticsReport {
    double level = 0.95;
    std::vector<LooDiagnostic> folds;
    Eigen::VectorXd med; // physical units
    double correlation_med_rmse = 0.0;
    double correlation_med_mcil = 0.0;
    double pooled_coverage = 0.0; // over every (fold, time) of completed folds
    std::size_t completed = 0;
};

struct LooOptions {
    double level = 0.95;
    unsigned threads = 1;
    /// Re-estimate correlation lengths on every fold instead of keeping the full-data values.
    bool reoptimize = false;
    OptimizerOptions optimizer;
};

/// Leave-one-out: n refits on n - 1 points, each predicting the held-out
/// point over the full training grid. Fold failures are recorded, not thrown.
DiagnosticsReport loo(const TrainingSet& train, const EmulatorBases& bases, const KernelSpec& kernel,
                      const NigPrior& prior, double jitter = kDefaultJitter, const LooOptions& options = {});

/// time,observed,location,lo<L>,hi<L> rows for one fold, L the level in percent.
std::string loo_fold_csv(const LooDiagnostic& fold, double level);

} // namespace ope
