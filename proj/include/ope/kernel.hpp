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

#include <vector>

#include <Eigen/Dense>

#include "ope/linalg.hpp"

namespace ope {

/// Separable power-exponential residual correlation
///   k((r,t),(r',t')) = prod_d exp(-(|r_d - r'_d| / l_d)^p) * exp(-(|t - t'| / l_t)^p).
struct KernelSpec {
    std::vector<double> input_lengths; // one per input dimension, physical units
    double time_length = 1.0;
    double exponent = 1.5;

    /// Throws InvalidArgument for non-positive lengths or p outside (0, 2].
    void validate() const;
    std::size_t input_dims() const { return input_lengths.size(); }
};

double power_exponential(double delta, double length, double exponent);

double kr(const Eigen::Ref<const Eigen::VectorXd>& r, const Eigen::Ref<const Eigen::VectorXd>& r2,
          const KernelSpec& spec);
double ks(double t, double t2, const KernelSpec& spec);

/// Unjittered correlation matrices.
Eigen::MatrixXd input_correlation(const Eigen::MatrixXd& points, const KernelSpec& spec);
Eigen::MatrixXd input_cross_correlation(const Eigen::MatrixXd& points, const Eigen::MatrixXd& others,
                                        const KernelSpec& spec);
Eigen::MatrixXd time_correlation(const Eigen::VectorXd& times, const KernelSpec& spec);
Eigen::MatrixXd time_cross_correlation(const Eigen::VectorXd& times, const Eigen::VectorXd& others,
                                       const KernelSpec& spec);

/// d Kr / d l_d, elementwise Kr * p (|delta_d| / l_d)^p / l_d.
Eigen::MatrixXd input_correlation_derivative(const Eigen::MatrixXd& points, const KernelSpec& spec,
                                             std::size_t dim);
Eigen::MatrixXd time_correlation_derivative(const Eigen::VectorXd& times, const KernelSpec& spec);

/// Jittered input and output correlation matrices with their Cholesky factors.
struct KernelMatrices {
    Eigen::MatrixXd Kr; // n x n, Kr + jitter I
    Eigen::MatrixXd Ks; // q x q, Ks + jitter I
    double jitter = 0.0;
    Cholesky chol_r;
    Cholesky chol_s;
};

inline constexpr double kDefaultJitter = 1e-8;

/// Throws NumericalDegeneracy naming the matrix that failed to factorize.
KernelMatrices kernel_matrices(const Eigen::MatrixXd& points, const Eigen::VectorXd& times,
                               const KernelSpec& spec, double jitter = kDefaultJitter);

} // namespace ope
