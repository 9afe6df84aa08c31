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
#include <string>

#include <Eigen/Dense>

#include "ope/basis.hpp"
#include "ope/design.hpp"
#include "ope/kernel.hpp"

namespace ope {

/// Design inputs, output time grid and the n x q matrix of simulator outputs.
struct TrainingSet {
    Design design;
    Eigen::VectorXd times;   // q, strictly increasing
    Eigen::MatrixXd outputs; // n x q

    std::size_t n() const { return static_cast<std::size_t>(outputs.rows()); }
    std::size_t q() const { return static_cast<std::size_t>(outputs.cols()); }

    /// Throws DataError on shape mismatch, non-finite outputs or a non-increasing grid.
    void validate() const;
    /// FNV-1a over the raw bytes of inputs, times and outputs.
    std::string fingerprint() const;
    /// Copy without design row `index`.
    TrainingSet without(std::size_t index) const;
};

struct EmulatorBases {
    InputBasis input;
    OutputBasis output;

    std::size_t size() const { return input.size() * output.size(); }
};

/// Normal inverse gamma prior {beta, tau}:
///   beta | tau ~ N(mean, tau V),  density of tau proportional to tau^-(a/2+1) exp(-d / (2 tau)).
/// With this parameterization `a` counts degrees of freedom directly.
struct NigPrior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd scale; // V
    double a = 3.0;
    double d = 1.0;

    /// mean = 0, V = sigma2 I.
    static NigPrior isotropic(std::size_t nu, double sigma2, double a, double d);
    void validate(std::size_t nu) const;
};

/// Per-time Student-t marginals: location + scale * T(dof).
struct PredictiveSeries {
    Eigen::VectorXd times;
    Eigen::VectorXd location;
    Eigen::VectorXd scale;
    double dof = 0.0;
    bool extrapolation = false;
    std::size_t clamped_variances = 0; // negative variances from round-off set to zero
    double min_raw_variance = 0.0;     // smallest scale^2 before clamping
};

/// Fitted outer product emulator. Immutable after construction.
///
/// Training outputs are stacked row-major, design index outermost, so
/// y[i*q + j] = F(i, j) and the full regression and correlation matrices are
/// Q = Gr (x) Gs and K = Kr (x) Ks. Neither is formed: every K^-1 product
/// goes through the per-factor Cholesky factors using
/// (A (x) B) vec(X) = vec(A X B^T).
class OpeModel {
public:
    struct State {
        Eigen::VectorXd mean;  // m*, length nu, index jr * nu_s + js
        Eigen::MatrixXd scale; // V*
        double a = 0.0;        // a + n q
        double d = 0.0;
        Eigen::MatrixXd residual_weights; // Kr^-1 (F - Gr M* Gs^T) Ks^-1, n x q
        std::string fingerprint;
    };

    /// Conjugate posterior update. Throws InvalidArgument on dimension
    /// mismatch and NumericalDegeneracy when a correlation matrix does not factorize.
    static OpeModel fit(const NigPrior& prior, const EmulatorBases& bases, const KernelSpec& kernel,
                        const TrainingSet& train, double jitter = kDefaultJitter);

    /// Rebuilds a model from stored posterior state (model import).
    static OpeModel from_state(const NigPrior& prior, const EmulatorBases& bases, const KernelSpec& kernel,
                               Design design, Eigen::VectorXd times, double jitter, State state);

    PredictiveSeries predict(const Eigen::Ref<const Eigen::VectorXd>& point, const Eigen::VectorXd& times) const;
    PredictiveSeries predict(const Eigen::Ref<const Eigen::VectorXd>& point) const { return predict(point, m_times); }

    const EmulatorBases& bases() const { return m_bases; }
    const KernelSpec& kernel() const { return m_kernel; }
    const NigPrior& prior() const { return m_prior; }
    double jitter() const { return m_jitter; }
    const Design& design() const { return m_design; }
    const Eigen::VectorXd& times() const { return m_times; }
    const State& posterior() const { return m_state; }
    /// m* reshaped to nu_r x nu_s.
    Eigen::MatrixXd coefficient_matrix() const;

private:
    OpeModel() = default;
    void prepare();

    EmulatorBases m_bases;
    KernelSpec m_kernel;
    NigPrior m_prior;
    double m_jitter = kDefaultJitter;
    Design m_design;
    Eigen::VectorXd m_times;
    State m_state;

    // Derived from the above by prepare().
    Eigen::MatrixXd m_Gr;
    Eigen::MatrixXd m_Gs;
    KernelMatrices m_km;
    Eigen::MatrixXd m_coef;  // M*, nu_r x nu_s
    Eigen::MatrixXd m_GrKinv; // Gr^T Kr^-1, nu_r x n
    Eigen::MatrixXd m_GsKinv; // Gs^T Ks^-1, nu_s x q
};

struct CredibleBand {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

/// Upper (1 + level) / 2 quantile of the standard Student-t; normal when dof is infinite.
double student_t_quantile(double dof, double probability);

/// location -/+ t_{dof,(1+level)/2} * scale. Throws InvalidArgument unless 0 < level < 1.
CredibleBand credible_interval(const PredictiveSeries& series, double level);

} // namespace ope
