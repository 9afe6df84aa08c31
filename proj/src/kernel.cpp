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

#include "ope/kernel.hpp"

#include <cmath>
#include <sstream>

#include "ope/errors.hpp"

namespace ope {

void KernelSpec::validate() const {
    if (input_lengths.empty()) throw InvalidArgument("kernel needs at least one input correlation length");
    for (std::size_t d = 0; d < input_lengths.size(); ++d)
        if (!(input_lengths[d] > 0.0))
            throw InvalidArgument("input correlation length " + std::to_string(d) + " must be positive");
    if (!(time_length > 0.0)) throw InvalidArgument("time correlation length must be positive");
    if (!(exponent > 0.0 && exponent <= 2.0))
        throw InvalidArgument("power-exponential exponent must lie in (0, 2]");
}

double power_exponential(double delta, double length, double exponent) {
    if (!(length > 0.0)) throw InvalidArgument("correlation length must be positive");
    if (delta == 0.0) return 1.0;
    return std::exp(-std::pow(std::abs(delta) / length, exponent));
}

double kr(const Eigen::Ref<const Eigen::VectorXd>& r, const Eigen::Ref<const Eigen::VectorXd>& r2,
          const KernelSpec& spec) {
    spec.validate();
    if (r.size() != r2.size() || static_cast<std::size_t>(r.size()) != spec.input_dims())
        throw InvalidArgument("input points and kernel dimensions disagree");
    double exponent_sum = 0.0;
    for (Eigen::Index d = 0; d < r.size(); ++d)
        exponent_sum += std::pow(std::abs(r(d) - r2(d)) / spec.input_lengths[static_cast<std::size_t>(d)], spec.exponent);
    return std::exp(-exponent_sum);
}

double ks(double t, double t2, const KernelSpec& spec) {
    spec.validate();
    return power_exponential(t - t2, spec.time_length, spec.exponent);
}

Eigen::MatrixXd input_cross_correlation(const Eigen::MatrixXd& points, const Eigen::MatrixXd& others,
                                        const KernelSpec& spec) {
    spec.validate();
    if (static_cast<std::size_t>(points.cols()) != spec.input_dims() || others.cols() != points.cols())
        throw InvalidArgument("input points and kernel dimensions disagree");
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(points.rows(), others.rows());
    for (Eigen::Index d = 0; d < points.cols(); ++d) {
        const double len = spec.input_lengths[static_cast<std::size_t>(d)];
        for (Eigen::Index j = 0; j < others.rows(); ++j)
            for (Eigen::Index i = 0; i < points.rows(); ++i)
                acc(i, j) += std::pow(std::abs(points(i, d) - others(j, d)) / len, spec.exponent);
    }
    return (-acc.array()).exp().matrix();
}

Eigen::MatrixXd input_correlation(const Eigen::MatrixXd& points, const KernelSpec& spec) {
    Eigen::MatrixXd k = input_cross_correlation(points, points, spec);
    // Exact symmetry and unit diagonal regardless of pow() rounding.
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        k(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < k.cols(); ++j) k(j, i) = k(i, j);
    }
    return k;
}

Eigen::MatrixXd time_cross_correlation(const Eigen::VectorXd& times, const Eigen::VectorXd& others,
                                       const KernelSpec& spec) {
    spec.validate();
    Eigen::MatrixXd k(times.size(), others.size());
    for (Eigen::Index j = 0; j < others.size(); ++j)
        for (Eigen::Index i = 0; i < times.size(); ++i)
            k(i, j) = power_exponential(times(i) - others(j), spec.time_length, spec.exponent);
    return k;
}

Eigen::MatrixXd time_correlation(const Eigen::VectorXd& times, const KernelSpec& spec) {
    Eigen::MatrixXd k = time_cross_correlation(times, times, spec);
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        k(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < k.cols(); ++j) k(j, i) = k(i, j);
    }
    return k;
}

Eigen::MatrixXd input_correlation_derivative(const Eigen::MatrixXd& points, const KernelSpec& spec,
                                             std::size_t dim) {
    if (dim >= spec.input_dims()) throw InvalidArgument("kernel derivative dimension out of range");
    const Eigen::MatrixXd k = input_correlation(points, spec);
    const double len = spec.input_lengths[dim];
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd out(k.rows(), k.cols());
    for (Eigen::Index j = 0; j < k.cols(); ++j)
        for (Eigen::Index i = 0; i < k.rows(); ++i) {
            const double s = std::pow(std::abs(points(i, d) - points(j, d)) / len, spec.exponent);
            out(i, j) = k(i, j) * spec.exponent * s / len;
        }
    return out;
}

Eigen::MatrixXd time_correlation_derivative(const Eigen::VectorXd& times, const KernelSpec& spec) {
    const Eigen::MatrixXd k = time_correlation(times, spec);
    const double len = spec.time_length;
    Eigen::MatrixXd out(k.rows(), k.cols());
    for (Eigen::Index j = 0; j < k.cols(); ++j)
        for (Eigen::Index i = 0; i < k.rows(); ++i) {
            const double s = std::pow(std::abs(times(i) - times(j)) / len, spec.exponent);
            out(i, j) = k(i, j) * spec.exponent * s / len;
        }
    return out;
}

KernelMatrices kernel_matrices(const Eigen::MatrixXd& points, const Eigen::VectorXd& times,
                               const KernelSpec& spec, double jitter) {
    if (!(jitter >= 0.0)) throw InvalidArgument("jitter must be non-negative");
    KernelMatrices km;
    km.jitter = jitter;
    km.Kr = input_correlation(points, spec);
    km.Kr.diagonal().array() += jitter;
    km.Ks = time_correlation(times, spec);
    km.Ks.diagonal().array() += jitter;
    km.chol_r = Cholesky(km.Kr, "input correlation matrix Kr");
    km.chol_s = Cholesky(km.Ks, "output correlation matrix Ks");
    return km;
}

} // namespace ope
