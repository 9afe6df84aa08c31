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

#include "ope/pipeline.hpp"

#include "ope/errors.hpp"

namespace ope {

FitOutcome fit_emulator(const TrainingSet& train, const EmulatorBases& bases, const FitSettings& settings) {
    train.validate();
    HyperparamEstimate hyper;
    if (!settings.sigma2 || !settings.d) {
        hyper = estimate_hyperparams(train, bases, settings.a, settings.split);
    } else {
        hyper.a = settings.a;
        hyper.provenance = Provenance::UserOverride;
    }
    if (settings.sigma2) hyper.sigma2 = *settings.sigma2;
    if (settings.d) hyper.d = *settings.d;
    if (settings.sigma2 || settings.d) hyper.provenance = Provenance::UserOverride;

    KernelSpec kernel;
    kernel.exponent = settings.exponent;
    std::optional<OptimizationResult> opt;
    if (settings.lengths) {
        const auto& l = *settings.lengths;
        if (l.size() != train.design.space.dims() + 1)
            throw InvalidArgument("fixed lengths must list every input plus the time length");
        kernel.input_lengths.assign(l.begin(), l.end() - 1);
        kernel.time_length = l.back();
    } else {
        OptimizerOptions o = settings.optimizer;
        o.exponent = settings.exponent;
        opt = optimize_correlation_lengths(train, bases, hyper.sigma2, settings.jitter, o);
        kernel = opt->best.kernel;
    }
    kernel.validate();
    auto model = OpeModel::fit(hyper.prior(bases.size()), bases, kernel, train, settings.jitter);
    return {std::move(model), hyper, std::move(opt)};
}

} // namespace ope
