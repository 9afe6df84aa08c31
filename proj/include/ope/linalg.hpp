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

#include <Eigen/Dense>

namespace ope {

/// Kronecker product A (x) B; row (i, j) of the result is i * B.rows() + j.
Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
Eigen::VectorXd kron(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Lower Cholesky factor of a symmetric positive definite matrix.
/// Throws NumericalDegeneracy mentioning `what` on failure.
class Cholesky {
public:
    Cholesky() = default;
    Cholesky(const Eigen::MatrixXd& a, const std::string& what);

    template <class Rhs>
    typename Rhs::PlainObject solve(const Eigen::MatrixBase<Rhs>& b) const {
        return m_llt.solve(b);
    }
    /// b * A^{-1} for a row-oriented right-hand side.
    Eigen::MatrixXd solve_right(const Eigen::MatrixXd& b) const { return m_llt.solve(b.transpose()).transpose(); }
    Eigen::MatrixXd inverse() const;
    double log_det() const;
    Eigen::Index size() const { return m_llt.rows(); }
    const Eigen::LLT<Eigen::MatrixXd>& llt() const { return m_llt; }

private:
    Eigen::LLT<Eigen::MatrixXd> m_llt;
};

} // namespace ope
