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

#include "ope/emulator.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "ope/csv.hpp"
#include "ope/errors.hpp"
#include "ope/linalg.hpp"

namespace ope {

namespace {

std::uint64_t hash_doubles(const double* data, std::size_t count, std::uint64_t seed) {
    return io::fnv1a(std::string_view(reinterpret_cast<const char*>(data), count * sizeof(double)), seed);
}

Eigen::VectorXd flatten_row_major(const Eigen::MatrixXd& m) {
    Eigen::VectorXd out(m.size());
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.segment(i * m.cols(), m.cols()) = m.row(i).transpose();
    return out;
}

} // namespace

void TrainingSet::validate() const {
    if (outputs.rows() == 0 || outputs.cols() == 0) throw DataError("training set is empty");
    if (design.points.rows() != outputs.rows())
        throw DataError("training set has " + std::to_string(design.points.rows()) + " design points but " +
                        std::to_string(outputs.rows()) + " output rows");
    if (times.size() != outputs.cols())
        throw DataError("training set has " + std::to_string(times.size()) + " times but " +
                        std::to_string(outputs.cols()) + " output columns");
    for (Eigen::Index j = 1; j < times.size(); ++j)
        if (!(times(j) > times(j - 1))) throw DataError("time grid must be strictly increasing");
    for (Eigen::Index i = 0; i < outputs.rows(); ++i)
        for (Eigen::Index j = 0; j < outputs.cols(); ++j)
            if (!std::isfinite(outputs(i, j)))
                throw DataError("non-finite output at row " + std::to_string(i) + ", t=" + io::format_double(times(j)));
}

std::string TrainingSet::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const Eigen::MatrixXd pts = design.points; // column-major copy, contiguous
    h = hash_doubles(pts.data(), static_cast<std::size_t>(pts.size()), h);
    h = hash_doubles(times.data(), static_cast<std::size_t>(times.size()), h);
    h = hash_doubles(outputs.data(), static_cast<std::size_t>(outputs.size()), h);
    return io::hex64(h);
}

TrainingSet TrainingSet::without(std::size_t index) const {
    const auto n = static_cast<Eigen::Index>(this->n());
    const auto idx = static_cast<Eigen::Index>(index);
    if (idx >= n) throw InvalidArgument("held-out index out of range");
    Eigen::MatrixXd pts(n - 1, design.points.cols());
    Eigen::MatrixXd out(n - 1, outputs.cols());
    for (Eigen::Index i = 0, r = 0; i < n; ++i) {
        if (i == idx) continue;
        pts.row(r) = design.points.row(i);
        out.row(r) = outputs.row(i);
        ++r;
    }
    TrainingSet t;
    t.design = Design::from_physical(std::move(pts), design.space, design.seed);
    t.times = times;
    t.outputs = std::move(out);
    return t;
}

NigPrior NigPrior::isotropic(std::size_t nu, double sigma2, double a, double d) {
    NigPrior p;
    p.mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nu));
    p.scale = sigma2 * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(nu), static_cast<Eigen::Index>(nu));
    p.a = a;
    p.d = d;
    return p;
}

void NigPrior::validate(std::size_t nu) const {
    const auto n = static_cast<Eigen::Index>(nu);
    if (mean.size() != n) throw InvalidArgument("prior mean has length " + std::to_string(mean.size()) +
                                                ", expected " + std::to_string(nu));
    if (scale.rows() != n || scale.cols() != n) throw InvalidArgument("prior scale matrix V has the wrong shape");
    if (!(a > 0.0)) throw InvalidArgument("prior degrees of freedom a must be positive");
    if (!(d > 0.0)) throw InvalidArgument("prior scale d must be positive");
    if (!(scale - scale.transpose()).isZero(1e-12 * std::max(1.0, scale.cwiseAbs().maxCoeff())))
        throw InvalidArgument("prior scale matrix V must be symmetric");
}

OpeModel OpeModel::fit(const NigPrior& prior, const EmulatorBases& bases, const KernelSpec& kernel,
                       const TrainingSet& train, double jitter) {
    train.validate();
    kernel.validate();
    if (kernel.input_dims() != train.design.space.dims() || bases.input.space().dims() != train.design.space.dims())
        throw InvalidArgument("kernel, basis and design disagree on the number of inputs");
    prior.validate(bases.size());

    OpeModel model;
    model.m_bases = bases;
    model.m_kernel = kernel;
    model.m_prior = prior;
    model.m_jitter = jitter;
    model.m_design = train.design;
    model.m_times = train.times;
    model.prepare();

    const Cholesky chol_v(prior.scale, "prior scale matrix V");
    const Eigen::MatrixXd v_inv = chol_v.inverse();

    // Q^T K^-1 Q = (Gr^T Kr^-1 Gr) (x) (Gs^T Ks^-1 Gs)
    const Eigen::MatrixXd ar = model.m_GrKinv * model.m_Gr;
    const Eigen::MatrixXd as = model.m_GsKinv * model.m_Gs;
    Eigen::MatrixXd precision = v_inv + kron(ar, as);
    precision = 0.5 * (precision + precision.transpose());
    const Cholesky chol_post(precision, "posterior precision V*^-1");

    // Q^T K^-1 y = vec(Gr^T Kr^-1 F Ks^-1 Gs)
    const Eigen::MatrixXd proj = model.m_GrKinv * train.outputs * model.m_GsKinv.transpose();
    const Eigen::VectorXd rhs = v_inv * prior.mean + flatten_row_major(proj);

    State& st = model.m_state;
    st.mean = chol_post.solve(rhs);
    st.scale = chol_post.inverse();
    st.scale = 0.5 * (st.scale + st.scale.transpose());
    st.a = prior.a + static_cast<double>(train.n() * train.q());

    model.m_coef = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        st.mean.data(), static_cast<Eigen::Index>(bases.input.size()), static_cast<Eigen::Index>(bases.output.size()));
    const Eigen::MatrixXd residual = train.outputs - model.m_Gr * model.m_coef * model.m_Gs.transpose();
    st.residual_weights = model.m_km.chol_s.solve(model.m_km.chol_r.solve(residual).transpose()).transpose();

    // d* = d + (y - Q m*)^T K^-1 (y - Q m*) + (m* - m)^T V^-1 (m* - m), a sum of non-negative terms.
    const Eigen::VectorXd shift = st.mean - prior.mean;
    st.d = prior.d + (residual.array() * st.residual_weights.array()).sum() + shift.dot(v_inv * shift);
    st.fingerprint = train.fingerprint();
    return model;
}

OpeModel OpeModel::from_state(const NigPrior& prior, const EmulatorBases& bases, const KernelSpec& kernel,
                              Design design, Eigen::VectorXd times, double jitter, State state) {
    kernel.validate();
    prior.validate(bases.size());
    const auto nu = static_cast<Eigen::Index>(bases.size());
    if (state.mean.size() != nu || state.scale.rows() != nu || state.scale.cols() != nu)
        throw DataError("stored posterior has the wrong number of coefficients");
    if (state.residual_weights.rows() != design.points.rows() || state.residual_weights.cols() != times.size())
        throw DataError("stored residual weights do not match the design and time grid");
    if (!(state.a > 0.0) || !(state.d > 0.0)) throw DataError("stored posterior a*, d* must be positive");
    OpeModel model;
    model.m_bases = bases;
    model.m_kernel = kernel;
    model.m_prior = prior;
    model.m_jitter = jitter;
    model.m_design = std::move(design);
    model.m_times = std::move(times);
    model.m_state = std::move(state);
    model.prepare();
    model.m_coef = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        model.m_state.mean.data(), static_cast<Eigen::Index>(bases.input.size()),
        static_cast<Eigen::Index>(bases.output.size()));
    return model;
}

void OpeModel::prepare() {
    const auto reg = regressor_matrices(m_design.points, m_times, m_bases.input, m_bases.output);
    m_Gr = reg.Gr;
    m_Gs = reg.Gs;
    m_km = kernel_matrices(m_design.points, m_times, m_kernel, m_jitter);
    m_GrKinv = m_km.chol_r.solve(m_Gr).transpose();
    m_GsKinv = m_km.chol_s.solve(m_Gs).transpose();
}

Eigen::MatrixXd OpeModel::coefficient_matrix() const { return m_coef; }

PredictiveSeries OpeModel::predict(const Eigen::Ref<const Eigen::VectorXd>& point, const Eigen::VectorXd& times) const {
    if (static_cast<std::size_t>(point.size()) != m_design.space.dims())
        throw InvalidArgument("prediction point has " + std::to_string(point.size()) + " coordinates, model expects " +
                              std::to_string(m_design.space.dims()));
    const Eigen::Index nr = static_cast<Eigen::Index>(m_bases.input.size());
    const Eigen::Index ns = static_cast<Eigen::Index>(m_bases.output.size());
    const Eigen::Index qn = times.size();

    PredictiveSeries out;
    out.times = times;
    out.dof = m_state.a;
    out.extrapolation = m_bases.input.extrapolates(point) ||
                        (qn > 0 && (times.minCoeff() < m_times(0) || times.maxCoeff() > m_times(m_times.size() - 1)));
    if (qn == 0) return out;

    const Eigen::VectorXd gr = m_bases.input.eval(point);
    const Eigen::VectorXd kr_star = input_cross_correlation(m_design.points, point.transpose(), m_kernel).col(0);
    const Eigen::VectorXd wr = m_km.chol_r.solve(kr_star);
    const Eigen::VectorXd pr = m_Gr.transpose() * wr;
    const double kr_quad = kr_star.dot(wr);

    Eigen::MatrixXd gs(ns, qn);
    for (Eigen::Index j = 0; j < qn; ++j) gs.col(j) = m_bases.output.eval(times(j));
    const Eigen::MatrixXd ks_star = time_cross_correlation(m_times, times, m_kernel); // q x q'
    const Eigen::MatrixXd ws = m_km.chol_s.solve(ks_star);
    const Eigen::MatrixXd ps = m_Gs.transpose() * ws; // nu_s x q'
    const Eigen::VectorXd ks_quad = (ks_star.array() * ws.array()).colwise().sum().transpose();

    out.location = (gr.transpose() * m_coef * gs).transpose() +
                   (kr_star.transpose() * m_state.residual_weights * ks_star).transpose();

    // h = g(r,t) - Q^T K^-1 k(r,t); the factors split as gr (x) gs - pr (x) ps.
    Eigen::MatrixXd h(nr * ns, qn);
    for (Eigen::Index i = 0; i < nr; ++i) h.middleRows(i * ns, ns) = gr(i) * gs - pr(i) * ps;
    const Eigen::VectorXd regression_var = (h.array() * (m_state.scale * h).array()).colwise().sum().transpose();

    const double tau_hat = m_state.d / m_state.a;
    out.scale.resize(qn);
    out.min_raw_variance = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < qn; ++j) {
        const double var = tau_hat * (1.0 - kr_quad * ks_quad(j) + regression_var(j));
        out.min_raw_variance = std::min(out.min_raw_variance, var);
        if (var < 0.0) {
            ++out.clamped_variances;
            out.scale(j) = 0.0;
        } else {
            out.scale(j) = std::sqrt(var);
        }
    }
    return out;
}

double student_t_quantile(double dof, double probability) {
    if (!(probability > 0.0 && probability < 1.0)) throw InvalidArgument("quantile probability must lie in (0, 1)");
    if (!(dof > 0.0)) throw InvalidArgument("Student-t degrees of freedom must be positive");
    if (!std::isfinite(dof) || dof > 1e12) return boost::math::quantile(boost::math::normal_distribution<double>(), probability);
    return boost::math::quantile(boost::math::students_t_distribution<double>(dof), probability);
}

CredibleBand credible_interval(const PredictiveSeries& series, double level) {
    if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("credible level must lie in (0, 1)");
    const double half = student_t_quantile(series.dof, 0.5 * (1.0 + level));
    CredibleBand band;
    band.lower = series.location - half * series.scale;
    band.upper = series.location + half * series.scale;
    return band;
}

} // namespace ope
