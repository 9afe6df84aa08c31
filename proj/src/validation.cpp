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

#include "ope/validation.hpp"

#include <cmath>
#include <limits>

#include "ope/csv.hpp"
#include "ope/errors.hpp"
#include "ope/parallel.hpp"

namespace ope {

double rmse(const Eigen::VectorXd& observed, const Eigen::VectorXd& predicted) {
    if (observed.size() != predicted.size())
        throw InvalidArgument("rmse: series lengths differ (" + std::to_string(observed.size()) + " vs " +
                              std::to_string(predicted.size()) + ")");
    if (observed.size() == 0) throw InvalidArgument("rmse: empty series");
    return std::sqrt((predicted - observed).squaredNorm() / static_cast<double>(observed.size()));
}

Eigen::VectorXd mean_euclidean_distance(const Eigen::MatrixXd& points) {
    const Eigen::Index n = points.rows();
    if (n < 2) throw InvalidArgument("mean Euclidean distance needs at least two points");
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dist = (points.row(i) - points.row(j)).norm();
            sum(i) += dist;
            sum(j) += dist;
        }
    return sum / static_cast<double>(n - 1);
}

double mcil(const PredictiveSeries& series, double level) {
    const auto band = credible_interval(series, level);
    if (band.upper.size() == 0) return 0.0;
    return (band.upper - band.lower).mean();
}

double coverage(const Eigen::VectorXd& observed, const PredictiveSeries& series, double level) {
    if (observed.size() != series.location.size()) throw InvalidArgument("coverage: series lengths differ");
    if (observed.size() == 0) return 0.0;
    const auto band = credible_interval(series, level);
    Eigen::Index inside = 0;
    for (Eigen::Index j = 0; j < observed.size(); ++j)
        if (observed(j) >= band.lower(j) && observed(j) <= band.upper(j)) ++inside;
    return static_cast<double>(inside) / static_cast<double>(observed.size());
}

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("pearson: need two equal-length series");
    const Eigen::ArrayXd dx = x.array() - x.mean();
    const Eigen::ArrayXd dy = y.array() - y.mean();
    const double denom = std::sqrt((dx * dx).sum() * (dy * dy).sum());
    if (!(denom > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return (dx * dy).sum() / denom;
}

DiagnosticsReport loo(const TrainingSet& train, const EmulatorBases& bases, const KernelSpec& kernel,
                      const NigPrior& prior, double jitter, const LooOptions& options) {
    train.validate();
    const std::size_t n = train.n();
    if (n < 3) throw InvalidArgument("leave-one-out needs at least three design points");

    DiagnosticsReport report;
    report.level = options.level;
    report.folds.resize(n);
    report.med = mean_euclidean_distance(train.design.points);

    parallel_for(n, options.threads, [&](std::size_t i) {
        LooDiagnostic& fold = report.folds[i];
        fold.index = i;
        fold.observed = train.outputs.row(static_cast<Eigen::Index>(i)).transpose();
        try {
            const TrainingSet rest = train.without(i);
            KernelSpec fold_kernel = kernel;
            if (options.reoptimize) {
                OptimizerOptions opt = options.optimizer;
                opt.exponent = kernel.exponent;
                opt.initial_lengths = kernel.input_lengths;
                opt.initial_lengths->push_back(kernel.time_length);
                opt.threads = 1;
                fold_kernel = optimize_correlation_lengths(rest, bases, prior.scale(0, 0), jitter, opt).best.kernel;
            }
            const OpeModel model = OpeModel::fit(prior, bases, fold_kernel, rest, jitter);
            fold.prediction = model.predict(train.design.points.row(static_cast<Eigen::Index>(i)).transpose());
            fold.rmse = rmse(fold.observed, fold.prediction.location);
            fold.mcil = mcil(fold.prediction, options.level);
            fold.coverage = coverage(fold.observed, fold.prediction, options.level);
            fold.ok = true;
        } catch (const Error& e) {
            fold.error = e.what();
        }
    });

    std::vector<Eigen::Index> good;
    double inside = 0.0;
    double total = 0.0;
    for (const auto& fold : report.folds) {
        if (!fold.ok) continue;
        good.push_back(static_cast<Eigen::Index>(fold.index));
        inside += fold.coverage * static_cast<double>(fold.observed.size());
        total += static_cast<double>(fold.observed.size());
    }
    report.completed = good.size();
    report.pooled_coverage = total > 0.0 ? inside / total : 0.0;
    if (good.size() >= 2) {
        Eigen::VectorXd med(static_cast<Eigen::Index>(good.size())), rm(med.size()), ci(med.size());
        for (Eigen::Index g = 0; g < med.size(); ++g) {
            const auto& fold = report.folds[static_cast<std::size_t>(good[static_cast<std::size_t>(g)])];
            med(g) = report.med(good[static_cast<std::size_t>(g)]);
            rm(g) = fold.rmse;
            ci(g) = fold.mcil;
        }
        report.correlation_med_rmse = pearson(med, rm);
        report.correlation_med_mcil = pearson(med, ci);
    } else {
        report.correlation_med_rmse = report.correlation_med_mcil = std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

std::string loo_fold_csv(const LooDiagnostic& fold, double level) {
    const std::string pct = std::to_string(static_cast<int>(std::lround(level * 100.0)));
    std::string out = "time,observed,location,lo" + pct + ",hi" + pct + "\n";
    if (!fold.ok) return out;
    const auto band = credible_interval(fold.prediction, level);
    for (Eigen::Index j = 0; j < fold.observed.size(); ++j) {
        out += io::format_double(fold.prediction.times(j)) + ',' + io::format_double(fold.observed(j)) + ',' +
               io::format_double(fold.prediction.location(j)) + ',' + io::format_double(band.lower(j)) + ',' +
               io::format_double(band.upper(j)) + '\n';
    }
    return out;
}

} // namespace ope
