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

#include "ope/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/beta.hpp>

#include "ope/csv.hpp"
#include "ope/errors.hpp"
#include "ope/parallel.hpp"
#include "ope/rng.hpp"
#include "ope/validation.hpp"

namespace ope {

double max_elevation(const PredictiveSeries& series, const ElevationOptions& options) {
    if (series.location.size() == 0) throw InvalidArgument("max elevation of an empty series");
    if (!options.pessimistic) return series.location.maxCoeff();
    return credible_interval(series, options.level).upper.maxCoeff();
}

void SweepSpec::validate(const DesignSpace& domain) const {
    if (resolution < 2) throw InvalidArgument("sweep resolution must be >= 2");
    if (dimension >= domain.dims()) throw InvalidArgument("sweep dimension out of range");
    if (!domain.contains(box)) throw InvalidArgument("sweep box must lie inside the design space");
    if (static_cast<std::size_t>(fixed.size()) != domain.dims())
        throw InvalidArgument("sweep fixed point has the wrong number of coordinates");
    for (std::size_t d = 0; d < domain.dims(); ++d) {
        if (d == dimension) continue;
        if (!box.bound(d).contains(fixed(static_cast<Eigen::Index>(d))))
            throw InvalidArgument("sweep fixed value for '" + domain.names()[d] + "' lies outside the sweep box");
    }
}

SweepCurve sensitivity_sweep(const OpeModel& model, const SweepSpec& spec, const ElevationOptions& options,
                             unsigned threads) {
    spec.validate(model.design().space);
    SweepCurve curve;
    curve.dimension = spec.dimension;
    curve.points.resize(spec.resolution);
    const Interval range = spec.box.bound(spec.dimension);
    parallel_for(spec.resolution, threads, [&](std::size_t i) {
        Eigen::VectorXd point = spec.fixed;
        const double frac = static_cast<double>(i) / static_cast<double>(spec.resolution - 1);
        const double value = i + 1 == spec.resolution ? range.upper : range.lower + frac * range.width();
        point(static_cast<Eigen::Index>(spec.dimension)) = value;
        const PredictiveSeries series = model.predict(point);
        SweepPoint& p = curve.points[i];
        p.value = value;
        p.max_elevation = max_elevation(series, options);
        p.mcil = mcil(series, options.level);
        p.mean_scale = series.scale.mean();
    });
    curve.evaluations = spec.resolution;
    return curve;
}

std::string sweep_csv(const SweepCurve& curve) {
    std::string out = "value,max_elev,mcil\n";
    for (const auto& p : curve.points)
        out += io::format_double(p.value) + ',' + io::format_double(p.max_elevation) + ',' + io::format_double(p.mcil) + '\n';
    return out;
}

void BetaInputSpec::validate() const {
    if (marginals.empty()) throw InvalidArgument("Beta input spec needs at least one dimension");
    for (std::size_t d = 0; d < marginals.size(); ++d) {
        const auto& m = marginals[d];
        if (!(m.alpha > 0.0) || !(m.beta > 0.0))
            throw InvalidArgument("Beta parameters for dimension " + std::to_string(d) + " must be positive");
        if (!(m.lower < m.upper))
            throw InvalidArgument("Beta support for dimension " + std::to_string(d) + " needs lower < upper");
    }
}

BetaInputSpec BetaInputSpec::landslide() {
    return BetaInputSpec{{{5.0, 2.0, -2.0, 0.0}, {2.0, 5.0, 1.0, 2.0}, {2.0, 5.0, 0.5, 2.5}}};
}

Eigen::MatrixXd sample_beta(const BetaInputSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    if (n < 1) throw InvalidArgument("Beta sampling needs n >= 1");
    const auto k = static_cast<Eigen::Index>(spec.marginals.size());
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), k);
    for (Eigen::Index d = 0; d < k; ++d) {
        const auto& m = spec.marginals[static_cast<std::size_t>(d)];
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(d)));
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            const double u = rng.uniform_open();
            out(i, d) = m.lower + (m.upper - m.lower) * boost::math::ibeta_inv(m.alpha, m.beta, u);
        }
    }
    return out;
}

double quantile_type7(std::vector<double> values, double p) {
    if (values.empty()) throw InvalidArgument("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile probability must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = static_cast<double>(values.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

QuantileSummary summarize_quantiles(const std::string& statistic, const std::vector<double>& values,
                                    std::uint64_t seed, std::vector<double> levels) {
    QuantileSummary s;
    s.statistic = statistic;
    s.sample_count = values.size();
    s.seed = seed;
    std::sort(levels.begin(), levels.end());
    s.levels = levels;
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    for (double level : levels) s.values.push_back(quantile_type7(sorted, level / 100.0));
    return s;
}

Histogram histogram(const std::vector<double>& values, std::size_t bins) {
    if (bins < 1) throw InvalidArgument("histogram needs at least one bin");
    Histogram h;
    h.counts.assign(bins, 0);
    if (values.empty()) {
        h.edges.assign(bins + 1, 0.0);
        return h;
    }
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    double lo = *mn;
    double hi = *mx;
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(b == bins ? hi : lo + width * static_cast<double>(b));
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - lo) / width);
        h.counts[std::min(b, bins - 1)]++;
    }
    return h;
}

UqResult uq_monte_carlo(const OpeModel& model, const BetaInputSpec& spec, std::size_t n, std::uint64_t seed,
                        const UqOptions& options) {
    spec.validate();
    if (spec.marginals.size() != model.design().space.dims())
        throw InvalidArgument("Beta input spec and model disagree on the number of inputs");
    UqResult r;
    if (n < 100) r.warnings.push_back("fewer than 100 Monte Carlo samples; extreme quantiles are unstable");
    r.inputs = sample_beta(spec, n, seed);
    r.max_elevation.resize(n);
    r.mcil.resize(n);
    parallel_for(n, options.threads, [&](std::size_t i) {
        const PredictiveSeries series = model.predict(r.inputs.row(static_cast<Eigen::Index>(i)).transpose());
        r.max_elevation[i] = max_elevation(series, options.elevation);
        r.mcil[i] = mcil(series, options.elevation.level);
    });
    r.max_elevation_quantiles = summarize_quantiles("max_elevation", r.max_elevation, seed);
    r.mcil_quantiles = summarize_quantiles("mean_ci_length", r.mcil, seed);
    r.max_elevation_histogram = histogram(r.max_elevation, options.bins);
    r.mcil_histogram = histogram(r.mcil, options.bins);
    return r;
}

std::string quantiles_csv(const QuantileSummary& table) {
    std::string out = "level," + table.statistic + "\n";
    for (std::size_t i = 0; i < table.levels.size(); ++i)
        out += io::format_double(table.levels[i]) + ',' + io::format_double(table.values[i]) + '\n';
    return out;
}

std::string histogram_csv(const Histogram& h) {
    std::string out = "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < h.counts.size(); ++b)
        out += io::format_double(h.edges[b]) + ',' + io::format_double(h.edges[b + 1]) + ',' +
               std::to_string(h.counts[b]) + '\n';
    return out;
}

} // namespace ope
