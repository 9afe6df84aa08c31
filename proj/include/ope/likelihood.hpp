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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ope/emulator.hpp"

namespace ope {

/// Correlation lengths and tau at one point of the log marginal likelihood
/// surface. The gradient is ordered (l_1, ..., l_k, l_t, tau).
struct MarginalLikelihoodState {
    KernelSpec kernel;
    double tau = 1.0;
    double value = 0.0;
    Eigen::VectorXd gradient;
};

/// Log density of y ~ N(0, C), C = tau (Kr (x) Ks + sigma2 Q Q^T), including
/// the -(nq/2) log(2 pi) constant. Uses Woodbury and the matrix determinant
/// lemma on the rank-nu regression term, so nothing of size nq x nq is formed.
double log_marginal_likelihood(const TrainingSet& train, const EmulatorBases& bases, const KernelSpec& kernel,
                               double tau, double sigma2, double jitter = kDefaultJitter);

/// Value plus analytic gradient with respect to every correlation length and tau.
MarginalLikelihoodState log_marginal_likelihood_with_gradient(const TrainingSet& train, const EmulatorBases& bases,
                                                              const KernelSpec& kernel, double tau, double sigma2,
                                                              double jitter = kDefaultJitter);

struct OptimizerOptions {
    /// Per-length bounds, ordered (l_1, ..., l_k, l_t). Empty means
    /// [1e-2, 1e2] times the input domain widths and the time span.
    std::vector<Interval> length_bounds;
    std::optional<Interval> tau_bounds;
    /// Start of restart 0; later restarts come from a Latin hypercube over log bounds.
    std::optional<std::vector<double>> initial_lengths;
    std::optional<double> initial_tau;
    std::size_t restarts = 5;
    std::uint64_t seed = 0;
    std::size_t max_iterations = 200;
    double gradient_tolerance = 1e-6; // projected gradient inf-norm in search coordinates
    double relative_tolerance = 1e-12;
    bool log_space = true;
    double exponent = 1.5; // kernel power p, held fixed
    unsigned threads = 1;
};

struct OptimizerTraceRow {
    std::size_t restart = 0;
    std::size_t iteration = 0;
    double value = 0.0;
    double gradient_norm = 0.0;
    std::vector<double> lengths;
    double tau = 0.0;
};

struct RestartOutcome {
    bool ok = false;
    bool converged = false;
    std::string message;
    MarginalLikelihoodState state;
    std::size_t iterations = 0;
};

struct OptimizationResult {
    MarginalLikelihoodState best;
    std::size_t best_restart = 0;
    std::vector<RestartOutcome> restarts;
    std::vector<OptimizerTraceRow> trace;
};

/// Multi-start projected BFGS ascent with backtracking line search.
/// Deterministic for fixed inputs and seed; ties in the best value go to the
/// lowest restart index. Throws OptimizationFailure when no restart can even be evaluated.
OptimizationResult optimize_correlation_lengths(const TrainingSet& train, const EmulatorBases& bases, double sigma2,
                                                double jitter, const OptimizerOptions& options);

std::vector<Interval> default_length_bounds(const TrainingSet& train);

std::string trace_csv(const std::vector<OptimizerTraceRow>& trace);

enum class Provenance { Estimated, UserOverride };

struct HyperparamEstimate {
    double sigma2 = 1.0;
    double a = 3.0;
    double d = 1.0;
    Provenance provenance = Provenance::Estimated;
    double pooled_mean = 0.0;
    double pooled_variance = 0.0;
    double mean_regressor_norm2 = 0.0;

    NigPrior prior(std::size_t nu) const { return NigPrior::isotropic(nu, sigma2, a, d); }
};

/// Moment-matched NIG hyperparameters. With v the pooled variance of the
/// outputs, E[tau] = d / (a - 2) and g2 the mean squared norm of the
/// regressor rows over the training inputs and times:
///   d      = (1 - split) v (a - 2)        so the residual carries (1 - split) v,
///   sigma2 = split / ((1 - split) g2)     so the regression term carries split v.
/// Throws InvalidArgument for a <= 2 or split outside (0, 1) and DataError for constant outputs.
HyperparamEstimate estimate_hyperparams(const TrainingSet& train, const EmulatorBases& bases, double a = 3.0,
                                        double split = 0.5);

} // namespace ope
