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

// Dense reference computations for the structured emulator. Everything here
// is written from the model definition: kernels are evaluated with four
// arguments, regressors from their printed formulas, and every inverse
// goes through a dense (nq x nq) Cholesky factorization. None of it calls
// into the Kronecker-structured code paths it is used to check.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ope/emulator.hpp"
#include "ope/likelihood.hpp"

namespace ope::testing {

struct DenseProblem {
    Eigen::MatrixXd points; // n x k
    Eigen::VectorXd times;
    Eigen::MatrixXd outputs; // n x q
    std::vector<Interval> bounds;
    std::vector<double> frequencies;
    std::vector<double> lengths; // k inputs then time
    double exponent = 1.5;
    double jitter = 1e-8;
};

inline double pe(double delta, double length, double p) { return std::exp(-std::pow(std::abs(delta) / length, p)); }

/// Full residual correlation of (r, t) and (r2, t2), one product per argument pair.
inline double kernel4(const Eigen::VectorXd& r, double t, const Eigen::VectorXd& r2, double t2,
                      const std::vector<double>& lengths, double p) {
    double v = 1.0;
    for (Eigen::Index d = 0; d < r.size(); ++d) v *= pe(r(d) - r2(d), lengths[static_cast<std::size_t>(d)], p);
    return v * pe(t - t2, lengths.back(), p);
}

inline Eigen::VectorXd input_regressors(const Eigen::VectorXd& r, const std::vector<Interval>& bounds) {
    Eigen::VectorXd g(1 + 2 * r.size());
    g(0) = 1.0;
    for (Eigen::Index d = 0; d < r.size(); ++d) {
        const auto& b = bounds[static_cast<std::size_t>(d)];
        const double u = (r(d) - b.lower) / (b.upper - b.lower);
        g(1 + 2 * d) = std::sqrt(3.0) * u;
        g(2 + 2 * d) = -3.0 * std::sqrt(5.0) * u + 4.0 * std::sqrt(5.0) * u * u;
    }
    return g;
}

inline Eigen::VectorXd output_regressors(double t, const std::vector<double>& freqs) {
    Eigen::VectorXd g(1 + 2 * static_cast<Eigen::Index>(freqs.size()));
    g(0) = 1.0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        g(static_cast<Eigen::Index>(1 + 2 * i)) = std::sin(2.0 * std::numbers::pi * freqs[i] * t);
        g(static_cast<Eigen::Index>(2 + 2 * i)) = std::cos(2.0 * std::numbers::pi * freqs[i] * t);
    }
    return g;
}

/// Regressor vector of the joint basis at (r, t): entry a * nu_s + b = g_a(r) h_b(t).
inline Eigen::VectorXd joint_regressors(const DenseProblem& pb, const Eigen::VectorXd& r, double t) {
    const Eigen::VectorXd gr = input_regressors(r, pb.bounds);
    const Eigen::VectorXd gs = output_regressors(t, pb.frequencies);
    Eigen::VectorXd g(gr.size() * gs.size());
    for (Eigen::Index a = 0; a < gr.size(); ++a)
        for (Eigen::Index b = 0; b < gs.size(); ++b) g(a * gs.size() + b) = gr(a) * gs(b);
    return g;
}

struct DenseSystem {
    Eigen::MatrixXd K; // jittered, nq x nq
    Eigen::MatrixXd Q; // nq x nu
    Eigen::VectorXd y;
};

/// Observation (i, j) sits at row i * q + j. The jittered matrix is
/// (Kr + eps I) (x) (Ks + eps I), written entrywise.
inline DenseSystem dense_system(const DenseProblem& pb) {
    const Eigen::Index n = pb.points.rows(), q = pb.times.size();
    DenseSystem s;
    s.K.resize(n * q, n * q);
    s.Q.resize(n * q, 0);
    s.y.resize(n * q);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < q; ++j) {
            const Eigen::Index row = i * q + j;
            s.y(row) = pb.outputs(i, j);
            const Eigen::VectorXd g = joint_regressors(pb, pb.points.row(i).transpose(), pb.times(j));
            if (s.Q.cols() == 0) s.Q.resize(n * q, g.size());
            s.Q.row(row) = g.transpose();
            for (Eigen::Index k = 0; k < n; ++k)
                for (Eigen::Index l = 0; l < q; ++l) {
                    double kr = 1.0;
                    for (Eigen::Index d = 0; d < pb.points.cols(); ++d)
                        kr *= pe(pb.points(i, d) - pb.points(k, d), pb.lengths[static_cast<std::size_t>(d)], pb.exponent);
                    const double ks = pe(pb.times(j) - pb.times(l), pb.lengths.back(), pb.exponent);
                    s.K(row, k * q + l) = (kr + (i == k ? pb.jitter : 0.0)) * (ks + (j == l ? pb.jitter : 0.0));
                }
        }
    return s;
}

struct DensePosterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd scale;
    double a = 0.0;
    double d = 0.0;
};

inline DensePosterior dense_posterior(const DenseProblem& pb, const Eigen::VectorXd& m, const Eigen::MatrixXd& v,
                                      double a, double d) {
    const DenseSystem s = dense_system(pb);
    const Eigen::LLT<Eigen::MatrixXd> kllt(s.K);
    const Eigen::MatrixXd vinv = v.inverse();
    const Eigen::MatrixXd prec = vinv + s.Q.transpose() * kllt.solve(s.Q);
    DensePosterior post;
    post.scale = prec.inverse();
    post.mean = post.scale * (vinv * m + s.Q.transpose() * kllt.solve(s.y));
    post.a = a + static_cast<double>(s.y.size());
    post.d = d + m.dot(vinv * m) + s.y.dot(kllt.solve(s.y)) - post.mean.dot(prec * post.mean);
    return post;
}

struct DensePrediction {
    Eigen::VectorXd location;
    Eigen::VectorXd variance;
};

inline DensePrediction dense_predict(const DenseProblem& pb, const DensePosterior& post, const Eigen::VectorXd& r,
                                     const Eigen::VectorXd& times) {
    const DenseSystem s = dense_system(pb);
    const Eigen::LLT<Eigen::MatrixXd> kllt(s.K);
    const Eigen::Index n = pb.points.rows(), q = pb.times.size();
    DensePrediction out;
    out.location.resize(times.size());
    out.variance.resize(times.size());
    const Eigen::VectorXd resid = s.y - s.Q * post.mean;
    for (Eigen::Index t = 0; t < times.size(); ++t) {
        Eigen::VectorXd k0(n * q);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < q; ++j)
                k0(i * q + j) = kernel4(r, times(t), pb.points.row(i).transpose(), pb.times(j), pb.lengths, pb.exponent);
        const Eigen::VectorXd g0 = joint_regressors(pb, r, times(t));
        const Eigen::VectorXd kinv_k0 = kllt.solve(k0);
        out.location(t) = g0.dot(post.mean) + kinv_k0.dot(resid);
        const Eigen::VectorXd h = g0 - s.Q.transpose() * kinv_k0;
        out.variance(t) = post.d / post.a * (1.0 - k0.dot(kinv_k0) + h.dot(post.scale * h));
    }
    return out;
}

inline double dense_log_likelihood(const DenseProblem& pb, double tau, double sigma2) {
    const DenseSystem s = dense_system(pb);
    const Eigen::MatrixXd c = tau * (s.K + sigma2 * s.Q * s.Q.transpose());
    const Eigen::LLT<Eigen::MatrixXd> llt(c);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double nq = static_cast<double>(s.y.size());
    return -0.5 * s.y.dot(llt.solve(s.y)) - 0.5 * logdet - 0.5 * nq * std::log(2.0 * std::numbers::pi);
}

/// grad = 1/2 f^T C^-1 dC C^-1 f - 1/2 tr(C^-1 dC), lengths then tau, all dense.
inline Eigen::VectorXd dense_gradient(const DenseProblem& pb, double tau, double sigma2) {
    const DenseSystem s = dense_system(pb);
    const Eigen::Index n = pb.points.rows(), q = pb.times.size(), k = pb.points.cols();
    const Eigen::MatrixXd c = tau * (s.K + sigma2 * s.Q * s.Q.transpose());
    const Eigen::LLT<Eigen::MatrixXd> llt(c);
    const Eigen::MatrixXd cinv = llt.solve(Eigen::MatrixXd::Identity(c.rows(), c.cols()));
    const Eigen::VectorXd alpha = cinv * s.y;
    Eigen::VectorXd grad(k + 2);
    for (Eigen::Index which = 0; which <= k; ++which) {
        Eigen::MatrixXd dc(n * q, n * q);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < q; ++j)
                for (Eigen::Index a = 0; a < n; ++a)
                    for (Eigen::Index b = 0; b < q; ++b) {
                        double kr = 1.0;
                        double dkr = 0.0;
                        std::vector<double> f(static_cast<std::size_t>(k));
                        for (Eigen::Index d = 0; d < k; ++d) {
                            f[static_cast<std::size_t>(d)] =
                                pe(pb.points(i, d) - pb.points(a, d), pb.lengths[static_cast<std::size_t>(d)], pb.exponent);
                            kr *= f[static_cast<std::size_t>(d)];
                        }
                        const double ks = pe(pb.times(j) - pb.times(b), pb.lengths.back(), pb.exponent);
                        const double krj = kr + (i == a ? pb.jitter : 0.0);
                        const double ksj = ks + (j == b ? pb.jitter : 0.0);
                        double value;
                        if (which < k) {
                            const double len = pb.lengths[static_cast<std::size_t>(which)];
                            const double z = std::pow(std::abs(pb.points(i, which) - pb.points(a, which)) / len, pb.exponent);
                            dkr = kr * pb.exponent * z / len;
                            value = dkr * ksj;
                        } else {
                            const double len = pb.lengths.back();
                            const double z = std::pow(std::abs(pb.times(j) - pb.times(b)) / len, pb.exponent);
                            value = krj * ks * pb.exponent * z / len;
                        }
                        dc(i * q + j, a * q + b) = tau * value;
                    }
        grad(which) = 0.5 * alpha.dot(dc * alpha) - 0.5 * (cinv.array() * dc.transpose().array()).sum();
    }
    const Eigen::MatrixXd dtau = c / tau;
    grad(k + 1) = 0.5 * alpha.dot(dtau * alpha) - 0.5 * (cinv.array() * dtau.transpose().array()).sum();
    return grad;
}

/// Random well-conditioned instance on the landslide box.
inline DenseProblem random_problem(std::mt19937_64& rng, Eigen::Index n, Eigen::Index q) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    DenseProblem pb;
    pb.bounds = {{-3.0, 1.0}, {1.0, 2.0}, {0.5, 3.0}};
    pb.frequencies = {1.0 / 6.0, 1.0 / 5.0, 1.0 / 4.0, 1.0 / 3.0, 1.0 / 2.0};
    pb.points.resize(n, 3);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index d = 0; d < 3; ++d) {
            const auto& b = pb.bounds[static_cast<std::size_t>(d)];
            pb.points(i, d) = b.lower + unit(rng) * (b.upper - b.lower);
        }
    pb.times.resize(q);
    double t = unit(rng);
    for (Eigen::Index j = 0; j < q; ++j) {
        pb.times(j) = t;
        t += 0.5 + 2.0 * unit(rng);
    }
    pb.outputs.resize(n, q);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < q; ++j) pb.outputs(i, j) = 2.0 * unit(rng) - 1.0;
    for (std::size_t d = 0; d < 3; ++d) {
        const auto& b = pb.bounds[d];
        pb.lengths.push_back((0.2 + 0.8 * unit(rng)) * (b.upper - b.lower));
    }
    pb.lengths.push_back(0.5 + 2.5 * unit(rng));
    return pb;
}

inline TrainingSet to_training(const DenseProblem& pb) {
    TrainingSet t;
    t.design = Design::from_physical(pb.points, DesignSpace(pb.bounds, {"x0", "u0", "c"}));
    t.times = pb.times;
    t.outputs = pb.outputs;
    return t;
}

inline EmulatorBases to_bases(const DenseProblem& pb) {
    return {InputBasis(DesignSpace(pb.bounds, {"x0", "u0", "c"})), OutputBasis(pb.frequencies)};
}

inline KernelSpec to_kernel(const DenseProblem& pb) {
    KernelSpec k;
    k.input_lengths.assign(pb.lengths.begin(), pb.lengths.end() - 1);
    k.time_length = pb.lengths.back();
    k.exponent = pb.exponent;
    return k;
}

inline double max_relative_error(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
    const double scale = std::max(want.cwiseAbs().maxCoeff(), 1e-300);
    return (got - want).cwiseAbs().maxCoeff() / scale;
}

} // namespace ope::testing
