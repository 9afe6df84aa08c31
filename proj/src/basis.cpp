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

#include "ope/basis.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "ope/errors.hpp"
#include "ope/linalg.hpp"

namespace ope {

Eigen::VectorXd InputBasis::eval(const Eigen::Ref<const Eigen::VectorXd>& point) const {
    const std::size_t k = m_space.dims();
    if (static_cast<std::size_t>(point.size()) != k)
        throw InvalidArgument("input point has " + std::to_string(point.size()) + " coordinates, basis expects " +
                              std::to_string(k));
    static const double sqrt3 = std::sqrt(3.0);
    static const double sqrt5 = std::sqrt(5.0);
    Eigen::VectorXd g(static_cast<Eigen::Index>(size()));
    g(0) = 1.0;
    for (std::size_t d = 0; d < k; ++d) {
        const double u = m_space.to_unit(d, point(static_cast<Eigen::Index>(d)));
        g(static_cast<Eigen::Index>(1 + 2 * d)) = sqrt3 * u;
        g(static_cast<Eigen::Index>(2 + 2 * d)) = sqrt5 * (4.0 * u * u - 3.0 * u);
    }
    return g;
}

bool InputBasis::extrapolates(const Eigen::Ref<const Eigen::VectorXd>& point) const {
    return !m_space.contains(point.transpose());
}

OutputBasis::OutputBasis() : OutputBasis({1.0 / 6.0, 1.0 / 5.0, 1.0 / 4.0, 1.0 / 3.0, 1.0 / 2.0}) {}

OutputBasis::OutputBasis(std::vector<double> frequencies) : m_frequencies(std::move(frequencies)) {
    std::set<double> seen;
    for (double f : m_frequencies) {
        if (!(f > 0.0) || !std::isfinite(f)) throw InvalidArgument("output basis frequencies must be positive");
        if (!seen.insert(f).second) throw InvalidArgument("output basis frequencies must be distinct");
    }
}

Eigen::VectorXd OutputBasis::eval(double t) const {
    Eigen::VectorXd g(static_cast<Eigen::Index>(size()));
    g(0) = 1.0;
    for (std::size_t i = 0; i < m_frequencies.size(); ++i) {
        const double arg = 2.0 * std::numbers::pi * m_frequencies[i] * t;
        g(static_cast<Eigen::Index>(1 + 2 * i)) = std::sin(arg);
        g(static_cast<Eigen::Index>(2 + 2 * i)) = std::cos(arg);
    }
    return g;
}

Eigen::MatrixXd RegressorMatrixPair::materialize() const { return kron(Gr, Gs); }

RegressorMatrixPair regressor_matrices(const Eigen::MatrixXd& points, const Eigen::VectorXd& times,
                                       const InputBasis& ib, const OutputBasis& ob) {
    if (points.rows() == 0) throw InvalidArgument("regressor matrices need at least one design point");
    if (times.size() == 0) throw InvalidArgument("regressor matrices need at least one time");
    RegressorMatrixPair out;
    out.Gr.resize(points.rows(), static_cast<Eigen::Index>(ib.size()));
    for (Eigen::Index i = 0; i < points.rows(); ++i) out.Gr.row(i) = ib.eval(points.row(i).transpose()).transpose();
    out.Gs.resize(times.size(), static_cast<Eigen::Index>(ob.size()));
    for (Eigen::Index j = 0; j < times.size(); ++j) out.Gs.row(j) = ob.eval(times(j)).transpose();
    return out;
}

} // namespace ope
