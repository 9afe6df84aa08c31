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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dense_oracle.hpp"
#include "ope/errors.hpp"
#include "ope/likelihood.hpp"
#include "ope/simulator.hpp"

using namespace ope;
using ope::testing::DenseProblem;

TEST(Likelihood, MatchesDense) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 12; ++trial) {
        const Eigen::Index n = 1 + trial % 4, q = 1 + (trial * 2) % 5;
        const DenseProblem pb = ope::testing::random_problem(rng, n, q);
        const double tau = 0.2 + 2.0 * unit(rng), sigma2 = 0.1 + unit(rng);
        const auto train = ope::testing::to_training(pb);
        const auto bases = ope::testing::to_bases(pb);
        const auto kernel = ope::testing::to_kernel(pb);
        const double want = ope::testing::dense_log_likelihood(pb, tau, sigma2);
        EXPECT_NEAR(log_marginal_likelihood(train, bases, kernel, tau, sigma2), want, 1e-8 * std::abs(want)) << trial;
        const auto st = log_marginal_likelihood_with_gradient(train, bases, kernel, tau, sigma2);
        EXPECT_NEAR(st.value, want, 1e-8 * std::abs(want));
        const Eigen::VectorXd g = ope::testing::dense_gradient(pb, tau, sigma2);
        EXPECT_LE(ope::testing::max_relative_error(st.gradient, g), 1e-8) << trial;
    }
}

TEST(Likelihood, ZeroDataIsNormalizer) {
    std::mt19937_64 rng(3);
    DenseProblem pb = ope::testing::random_problem(rng, 3, 4);
    pb.outputs.setZero();
    const auto sys = ope::testing::dense_system(pb);
    const double tau = 1.7, sigma2 = 0.4;
    const Eigen::MatrixXd c = tau * (sys.K + sigma2 * sys.Q * sys.Q.transpose());
    const Eigen::LLT<Eigen::MatrixXd> llt(c);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double want = -0.5 * logdet - 6.0 * std::log(2.0 * M_PI);
    EXPECT_NEAR(log_marginal_likelihood(ope::testing::to_training(pb), ope::testing::to_bases(pb),
                                        ope::testing::to_kernel(pb), tau, sigma2),
                want, 1e-9 * std::abs(want));
}

TEST(Likelihood, DivergesAsTauShrinks) {
    std::mt19937_64 rng(4);
    const DenseProblem pb = ope::testing::random_problem(rng, 3, 4);
    const auto train = ope::testing::to_training(pb);
    const auto bases = ope::testing::to_bases(pb);
    const auto kernel = ope::testing::to_kernel(pb);
    double prev = log_marginal_likelihood(train, bases, kernel, 1e-2, 0.5);
    for (double tau : {1e-3, 1e-4, 1e-5, 1e-6}) {
        const double v = log_marginal_likelihood(train, bases, kernel, tau, 0.5);
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_LT(prev, -1e4);
}

TEST(Likelihood, GradientMatchesCentralDifferences) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
        const DenseProblem pb = ope::testing::random_problem(rng, 2 + trial % 3, 3 + trial % 3);
        const double tau = 0.3 + unit(rng), sigma2 = 0.2 + unit(rng);
        const auto train = ope::testing::to_training(pb);
        const auto bases = ope::testing::to_bases(pb);
        const KernelSpec kernel = ope::testing::to_kernel(pb);
        const auto st = log_marginal_likelihood_with_gradient(train, bases, kernel, tau, sigma2);
        for (Eigen::Index c = 0; c < 5; ++c) {
            auto eval = [&](double scale) {
                KernelSpec k = kernel;
                double t = tau;
                if (c < 3) k.input_lengths[static_cast<std::size_t>(c)] *= scale;
                else if (c == 3) k.time_length *= scale;
                else t *= scale;
                return log_marginal_likelihood(train, bases, k, t, sigma2);
            };
            const double h = 1e-5;
            const double base = c < 3 ? kernel.input_lengths[static_cast<std::size_t>(c)] : c == 3 ? kernel.time_length : tau;
            const double fd = (eval(1 + h) - eval(1 - h)) / (2 * h * base);
            EXPECT_NEAR(st.gradient(c), fd, 1e-5 * std::max(std::abs(fd), 1e-3)) << "trial " << trial << " comp " << c;
        }
    }
}

namespace {

TrainingSet small_toy(std::size_t n, std::uint64_t seed) {
    const auto space = DesignSpace::landslide();
    return simulate_training(maximin_lhd(n, space, seed, 5).design, time_grid(0.0, 6.0, 0.5));
}

} // namespace

TEST(Optimizer, DeterministicAndAscends) {
    const TrainingSet train = small_toy(8, 1);
    const EmulatorBases bases{InputBasis(train.design.space), OutputBasis()};
    OptimizerOptions o;
    o.restarts = 3;
    o.seed = 9;
    o.max_iterations = 60;
    const auto r1 = optimize_correlation_lengths(train, bases, 0.5, 1e-8, o);
    const auto r2 = optimize_correlation_lengths(train, bases, 0.5, 1e-8, o);
    EXPECT_EQ(r1.best.kernel.input_lengths, r2.best.kernel.input_lengths);
    EXPECT_EQ(r1.best.kernel.time_length, r2.best.kernel.time_length);
    EXPECT_EQ(r1.best.tau, r2.best.tau);
    for (const auto& rr : r1.restarts) EXPECT_LE(rr.state.value, r1.best.value);

    // Best value along each restart's accepted iterations never decreases.
    for (std::size_t i = 1; i < r1.trace.size(); ++i)
        if (r1.trace[i].restart == r1.trace[i - 1].restart) EXPECT_GE(r1.trace[i].value, r1.trace[i - 1].value);

    const auto bounds = default_length_bounds(train);
    for (std::size_t d = 0; d < 3; ++d) {
        EXPECT_GE(r1.best.kernel.input_lengths[d], bounds[d].lower * (1 - 1e-12));
        EXPECT_LE(r1.best.kernel.input_lengths[d], bounds[d].upper * (1 + 1e-12));
    }
}

TEST(Optimizer, RestartFromOptimumDoesNotDecrease) {
    const TrainingSet train = small_toy(8, 2);
    const EmulatorBases bases{InputBasis(train.design.space), OutputBasis()};
    OptimizerOptions o;
    o.restarts = 2;
    o.max_iterations = 80;
    const auto first = optimize_correlation_lengths(train, bases, 0.5, 1e-8, o);
    OptimizerOptions again;
    again.restarts = 1;
    std::vector<double> init = first.best.kernel.input_lengths;
    init.push_back(first.best.kernel.time_length);
    again.initial_lengths = init;
    again.initial_tau = first.best.tau;
    const auto second = optimize_correlation_lengths(train, bases, 0.5, 1e-8, again);
    EXPECT_GE(second.best.value, first.best.value);
}

TEST(Optimizer, StationaryPointHasSmallGradient) {
    const TrainingSet train = small_toy(6, 4);
    const EmulatorBases bases{InputBasis(train.design.space), OutputBasis()};
    OptimizerOptions o;
    o.restarts = 2;
    o.max_iterations = 400;
    const auto r = optimize_correlation_lengths(train, bases, 0.5, 1e-8, o);
    const auto& best = r.restarts[r.best_restart];
    if (!best.converged) GTEST_SKIP() << "best restart hit the iteration cap: " << best.message;
    const auto bounds = default_length_bounds(train);
    // Interior components of the log-space gradient vanish at a converged point.
    for (std::size_t d = 0; d < 3; ++d) {
        const double l = best.state.kernel.input_lengths[d];
        if (l > bounds[d].lower * 1.001 && l < bounds[d].upper * 0.999)
            EXPECT_LE(std::abs(best.state.gradient(static_cast<Eigen::Index>(d)) * l), 1e-4);
    }
}

TEST(Optimizer, RejectsBadBounds) {
    const TrainingSet train = small_toy(5, 1);
    const EmulatorBases bases{InputBasis(train.design.space), OutputBasis()};
    OptimizerOptions o;
    o.length_bounds = {{1.0, 2.0}};
    EXPECT_THROW(optimize_correlation_lengths(train, bases, 0.5, 1e-8, o), InvalidArgument);
    o.length_bounds.clear();
    o.restarts = 0;
    EXPECT_THROW(optimize_correlation_lengths(train, bases, 0.5, 1e-8, o), InvalidArgument);
}

TEST(Hyperparams, MomentMatching) {
    const TrainingSet train = small_toy(10, 3);
    const EmulatorBases bases{InputBasis(train.design.space), OutputBasis()};
    const auto h = estimate_hyperparams(train, bases, 3.0, 0.5);
    EXPECT_EQ(h.a, 3.0);
    EXPECT_NEAR(h.d, 0.5 * h.pooled_variance, 1e-15);
    EXPECT_NEAR(h.sigma2 * h.mean_regressor_norm2, 1.0, 1e-12);
    EXPECT_THROW(estimate_hyperparams(train, bases, 2.0, 0.5), InvalidArgument);
    EXPECT_THROW(estimate_hyperparams(train, bases, 3.0, 1.0), InvalidArgument);
    TrainingSet flat = train;
    flat.outputs.setZero();
    EXPECT_THROW(estimate_hyperparams(flat, bases, 3.0, 0.5), DataError);
}

TEST(Hyperparams, PriorPredictiveVarianceNearPooled) {
    // Unit-variance synthetic outputs; the prior predictive variance
    // E[tau] (1 + sigma2 |g(r,t)|^2) is averaged over random points of the domain.
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto space = DesignSpace::landslide();
    TrainingSet train = simulate_training(lhd(10, space, 8), time_grid(0.0, 35.0, 0.2));
    for (Eigen::Index i = 0; i < train.outputs.size(); ++i) train.outputs.data()[i] = z(rng);
    const EmulatorBases bases{InputBasis(space), OutputBasis()};
    const auto h = estimate_hyperparams(train, bases, 3.0, 0.5);
    EXPECT_NEAR(h.pooled_variance, 1.0, 0.1);
    const double mean_tau = h.d / (h.a - 2.0);
    double acc = 0.0;
    const int draws = 2000;
    for (int s = 0; s < draws; ++s) {
        Eigen::Vector3d r;
        for (int d = 0; d < 3; ++d) r(d) = space.to_physical(static_cast<std::size_t>(d), unit(rng));
        const double t = 35.0 * unit(rng);
        const double g2 = bases.input.eval(r).squaredNorm() * bases.output.eval(t).squaredNorm();
        acc += mean_tau * (1.0 + h.sigma2 * g2);
    }
    const double v = acc / draws;
    EXPECT_GE(v, 0.5 * h.pooled_variance);
    EXPECT_LE(v, 2.0 * h.pooled_variance);
}
