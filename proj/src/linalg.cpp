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

#include "ope/linalg.hpp"

#include "ope/errors.hpp"

namespace ope {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Eigen::VectorXd kron(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    Eigen::VectorXd out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

Cholesky::Cholesky(const Eigen::MatrixXd& a, const std::string& what) : m_llt(a) {
    if (m_llt.info() != Eigen::Success || !m_llt.matrixLLT().diagonal().allFinite() ||
        (m_llt.matrixLLT().diagonal().array() <= 0.0).any())
        throw NumericalDegeneracy("Cholesky factorization of " + what + " failed (matrix not positive definite)");
}

Eigen::MatrixXd Cholesky::inverse() const {
    return m_llt.solve(Eigen::MatrixXd::Identity(m_llt.rows(), m_llt.cols()));
}

double Cholesky::log_det() const {
    return 2.0 * m_llt.matrixLLT().diagonal().array().log().sum();
}

} // namespace ope
