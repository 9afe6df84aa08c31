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

#include "ope/design.hpp"

namespace ope {

/// Input regressors: a constant plus, for every input dimension with
/// u = (x - lower) / (upper - lower),
///   p1(u) = sqrt(3) u,   p2(u) = sqrt(5) (4u^2 - 3u).
/// Each pair satisfies <p1,p1> = <p2,p2> = 1, <p1,p2> = 0 under the uniform
/// weight on [0,1]. The pairs are not orthogonal to the constant.
class InputBasis {
public:
    InputBasis() = default;
    explicit InputBasis(DesignSpace space) : m_space(std::move(space)) {}

    std::size_t size() const { return 1 + 2 * m_space.dims(); }
    const DesignSpace& space() const { return m_space; }

    /// Order: [1, p1(u_1), p2(u_1), p1(u_2), p2(u_2), ...].
    Eigen::VectorXd eval(const Eigen::Ref<const Eigen::VectorXd>& point) const;
    /// True when the point lies outside the space; eval still applies the same polynomials.
    bool extrapolates(const Eigen::Ref<const Eigen::VectorXd>& point) const;

private:
    DesignSpace m_space;
};

/// Output regressors: [1, sin(2 pi f_1 t), cos(2 pi f_1 t), ...].
class OutputBasis {
public:
    /// Frequencies 1/6, 1/5, 1/4, 1/3, 1/2.
    OutputBasis();
    /// Frequencies must be positive and distinct.
    explicit OutputBasis(std::vector<double> frequencies);

    std::size_t size() const { return 1 + 2 * m_frequencies.size(); }
    const std::vector<double>& frequencies() const { return m_frequencies; }
    Eigen::VectorXd eval(double t) const;

private:
    std::vector<double> m_frequencies;
};

struct RegressorMatrixPair {
    Eigen::MatrixXd Gr; // n x nu_r
    Eigen::MatrixXd Gs; // q x nu_s

    std::size_t size() const { return static_cast<std::size_t>(Gr.cols() * Gs.cols()); }
    /// Gr (x) Gs, (n q) x (nu_r nu_s). For tests and small problems only.
    Eigen::MatrixXd materialize() const;
};

RegressorMatrixPair regressor_matrices(const Eigen::MatrixXd& points, const Eigen::VectorXd& times,
                                       const InputBasis& ib, const OutputBasis& ob);

} // namespace ope
