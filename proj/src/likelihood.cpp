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

#include "ope/likelihood.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ope/csv.hpp"
#include "ope/errors.hpp"
#include "ope/linalg.hpp"
#include "ope/parallel.hpp"

namespace ope {

namespace {

Eigen::MatrixXd reshape_row_major(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(v.data(), rows, cols);
}

Eigen::VectorXd flatten_row_major(const Eigen::MatrixXd& m) {
    Eigen::VectorXd out(m.size());
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.segment(i * m.cols(), m.cols()) = m.row(i).transpose();
    return out;
}

// tr(A (B (x) C)) for symmetric A without forming the Kronecker product
// twice; sizes here are at most nu x nu.
double trace_kron_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& c) {
    return (a.array() * kron(b, c).array()).sum();
}

// Shared pieces of the structured likelihood for fixed lengths.
struct Workspace {
    KernelMatrices km;
    Eigen::MatrixXd Gr, Gs;
    Eigen::MatrixXd GrKinv, GsKinv; // Gr^T Kr^-1, Gs^T Ks^-1
    Eigen::MatrixXd Ar, As;
    Cholesky chol_m;                // sigma^-2 I + Ar (x) As
    Eigen::MatrixXd phi;            // (K + sigma2 Q Q^T)^-1 y as n x q
    double quad = 0.0;              // y^T (K + sigma2 Q Q^T)^-1 y
    double log_det = 0.0;           // log |K + sigma2 Q Q^T|
};

Workspace build_workspace(const TrainingSet& train, const EmulatorBases& bases, const KernelSpec& kernel,
                          double sigma2, double jitter) {
    if (!(sigma2 > 0.0)) throw InvalidArgument("sigma2 must be positive");
    kernel.validate();
    Workspace w;
    const auto reg = regressor_matrices(train.design.points, train.times, bases.input, bases.output);
    w.Gr = reg.Gr;
    w.Gs = reg.Gs;
    w.km = kernel_matrices(train.design.points, train.times, kernel, jitter);
    w.GrKinv = w.km.chol_r.solve(w.Gr).transpose();
    w.GsKinv = w.km.chol_s.solve(w.Gs).transpose();
    w.Ar = w.GrKinv * w.Gr;
    w.As = w.GsKinv * w.Gs;
    const auto nu = static_cast<Eigen::Index>(bases.size());
    Eigen::MatrixXd m = kron(w.Ar, w.As);
    m.diagonal().array() += 1.0 / sigma2;
    m = 0.5 * (m + m.transpose());
    w.chol_m = Cholesky(m, "regression capacitance matrix");

    const Eigen::MatrixXd z = w.km.chol_s.solve(w.km.chol_r.solve(train.outputs).transpose()).transpose();
    const Eigen::VectorXd b = flatten_row_major(w.GrKinv * train.outputs * w.GsKinv.transpose());
    const Eigen::VectorXd mb = w.chol_m.solve(b);
    const Eigen::MatrixXd mb_mat = reshape_row_major(mb, w.Gr.cols(), w.Gs.cols());
    w.phi = z - w.GrKinv.transpose() * mb_mat * w.GsKinv;
    w.quad = (train.outputs.array() * z.array()).sum() - b.dot(mb);
    const double n = static_cast<double>(train.n());
    const double q = static_cast<double>(train.q());
    w.log_det = q * w.km.chol_r.log_det() + n * w.km.chol_s.log_det() + w.chol_m.log_det() +
                static_cast<double>(nu) * std::log(sigma2);
    return w;
}

double value_from(const Workspace& w, double nq, double tau) {
    return -0.5 * w.quad / tau - 0.5 * (nq * std::log(tau) + w.log_det) - 0.5 * nq * std::log(2.0 * std::numbers::pi);
}

} // namespace

double log_marginal_likelihood(const TrainingSet& train, const EmulatorBases& bases, const KernelSpec& kernel,
                               double tau, double sigma2, double jitter) {
    if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
    const Workspace w = build_workspace(train, bases, kernel, sigma2, jitter);
    return value_from(w, static_cast<double>(train.n() * train.q()), tau);
}

MarginalLikelihoodState log_marginal_likelihood_with_gradient(const TrainingSet& train, const EmulatorBases& bases,
                                                              const KernelSpec& kernel, double tau, double sigma2,
                                                              double jitter) {
    if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
    const Workspace w = build_workspace(train, bases, kernel, sigma2, jitter);
    const double n = static_cast<double>(train.n());
    const double q = static_cast<double>(train.q());
    const std::size_t k = kernel.input_dims();

    MarginalLikelihoodState st;
    st.kernel = kernel;
    st.tau = tau;
    st.value = value_from(w, n * q, tau);
    st.gradient.resize(static_cast<Eigen::Index>(k + 2));

    const Eigen::MatrixXd m_inv = w.chol_m.inverse();
    const Eigen::MatrixXd kr_inv = w.km.chol_r.inverse();
    const Eigen::MatrixXd ks_inv = w.km.chol_s.inverse();

    // dC/dl = tau (dKr (x) Ks) for an input length; tau cancels against C^-1 = P / tau.
    const Eigen::MatrixXd phi_ks = w.phi * w.km.Ks;
    for (std::size_t d = 0; d < k; ++d) {
        const Eigen::MatrixXd dkr = input_correlation_derivative(train.design.points, kernel, d);
        const double data_term = (w.phi.array() * (dkr * phi_ks).array()).sum() / tau;
        const Eigen::MatrixXd er = w.GrKinv * dkr * w.GrKinv.transpose();
        const double trace = q * (kr_inv.array() * dkr.array()).sum() - trace_kron_product(m_inv, er, w.As);
        st.gradient(static_cast<Eigen::Index>(d)) = 0.5 * data_term - 0.5 * trace;
    }
    {
        const Eigen::MatrixXd dks = time_correlation_derivative(train.times, kernel);
        const double data_term = (w.phi.array() * (w.km.Kr * w.phi * dks).array()).sum() / tau;
        const Eigen::MatrixXd es = w.GsKinv * dks * w.GsKinv.transpose();
        const double trace = n * (ks_inv.array() * dks.array()).sum() - trace_kron_product(m_inv, w.Ar, es);
        st.gradient(static_cast<Eigen::Index>(k)) = 0.5 * data_term - 0.5 * trace;
    }
    st.gradient(static_cast<Eigen::Index>(k + 1)) = 0.5 * w.quad / (tau * tau) - 0.5 * n * q / tau;
    return st;
}

std::vector<Interval> default_length_bounds(const TrainingSet& train) {
    std::vector<Interval> bounds;
    for (const auto& b : train.design.space.bounds()) bounds.push_back({1e-2 * b.width(), 1e2 * b.width()});
    const double span = train.times.size() > 1 ? train.times(train.times.size() - 1) - train.times(0) : 1.0;
    bounds.push_back({1e-2 * span, 1e2 * span});
    return bounds;
}

namespace {

// Search coordinates theta map to (l_1..l_k, l_t, tau) either through exp()
// (log space) or the identity.
struct SearchProblem {
    const TrainingSet& train;
    const EmulatorBases& bases;
    double sigma2;
    double jitter;
    bool log_space;
    Eigen::VectorXd lo, hi; // box in search coordinates

    Eigen::VectorXd to_params(const Eigen::VectorXd& theta) const {
        return log_space ? Eigen::VectorXd(theta.array().exp()) : theta;
    }

    KernelSpec kernel_for(const Eigen::VectorXd& params) const {
        KernelSpec ks;
        const auto k = params.size() - 2;
        ks.input_lengths.assign(params.data(), params.data() + k);
        ks.time_length = params(k);
        ks.exponent = exponent;
        return ks;
    }

    // Negated likelihood and its gradient in search coordinates; nullopt if
    // the correlation matrices do not factorize at this point.
    std::optional<std::pair<MarginalLikelihoodState, Eigen::VectorXd>> evaluate(const Eigen::VectorXd& theta) const {
        const Eigen::VectorXd params = to_params(theta);
        try {
            auto st = log_marginal_likelihood_with_gradient(train, bases, kernel_for(params), params(params.size() - 1),
                                                            sigma2, jitter);
            if (!std::isfinite(st.value) || !st.gradient.allFinite()) return std::nullopt;
            Eigen::VectorXd g = st.gradient;
            if (log_space) g = g.cwiseProduct(params);
            return std::make_pair(std::move(st), std::move(g));
        } catch (const NumericalDegeneracy&) {
            return std::nullopt;
        }
    }

    Eigen::VectorXd project(const Eigen::VectorXd& theta) const { return theta.cwiseMax(lo).cwiseMin(hi); }

    // Gradient of the ascent objective with components that push against an active bound removed.
    Eigen::VectorXd projected_gradient(const Eigen::VectorXd& theta, const Eigen::VectorXd& g) const {
        Eigen::VectorXd pg = g;
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            if (theta(i) <= lo(i) && g(i) < 0.0) pg(i) = 0.0;
            if (theta(i) >= hi(i) && g(i) > 0.0) pg(i) = 0.0;
        }
        return pg;
    }

    double exponent = 1.5;
};

RestartOutcome run_restart(const SearchProblem& problem, Eigen::VectorXd theta, const OptimizerOptions& options,
                           std::size_t restart, std::vector<OptimizerTraceRow>& trace) {
    RestartOutcome out;
    theta = problem.project(theta);
    auto current = problem.evaluate(theta);
    if (!current) {
        out.message = "restart " + std::to_string(restart) + ": correlation matrices not factorizable at start point";
        return out;
    }
    const auto dim = theta.size();
    Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(dim, dim);
    auto record = [&](std::size_t iter, const MarginalLikelihoodState& st, const Eigen::VectorXd& pg) {
        OptimizerTraceRow row;
        row.restart = restart;
        row.iteration = iter;
        row.value = st.value;
        row.gradient_norm = pg.lpNorm<Eigen::Infinity>();
        row.lengths = st.kernel.input_lengths;
        row.lengths.push_back(st.kernel.time_length);
        row.tau = st.tau;
        trace.push_back(std::move(row));
    };

    Eigen::VectorXd pg = problem.projected_gradient(theta, current->second);
    record(0, current->first, pg);
    std::size_t stalls = 0;
    for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
        out.iterations = iter;
        if (pg.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
            out.converged = true;
            break;
        }
        const Eigen::VectorXd& g = current->second;
        Eigen::VectorXd dir = h_inv * g;
        // Freeze coordinates pinned at a bound.
        for (Eigen::Index i = 0; i < dim; ++i)
            if (pg(i) == 0.0 && g(i) != 0.0) dir(i) = 0.0;
        if (dir.dot(pg) <= 0.0) {
            h_inv.setIdentity();
            dir = pg;
        }
        // Bound the first step so a poorly scaled identity start cannot jump across the box.
        const double max_step = dir.lpNorm<Eigen::Infinity>();
        double alpha = max_step > 2.0 ? 2.0 / max_step : 1.0;

        bool accepted = false;
        Eigen::VectorXd next_theta;
        decltype(current) next;
        for (int ls = 0; ls < 40; ++ls) {
            next_theta = problem.project(theta + alpha * dir);
            next = problem.evaluate(next_theta);
            if (next) {
                const double gain = next->first.value - current->first.value;
                if (gain >= 1e-4 * g.dot(next_theta - theta) && gain >= 0.0) {
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            if (h_inv.isIdentity()) {
                out.converged = true; // no ascent possible along the projected gradient
                break;
            }
            h_inv.setIdentity();
            continue;
        }

        // BFGS update for the minimization of -value.
        const Eigen::VectorXd s = next_theta - theta;
        const Eigen::VectorXd y = -(next->second - current->second);
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(dim, dim);
            h_inv = (ident - rho * s * y.transpose()) * h_inv * (ident - rho * y * s.transpose()) + rho * s * s.transpose();
        }

        const double previous = current->first.value;
        theta = next_theta;
        current = std::move(next);
        pg = problem.projected_gradient(theta, current->second);
        record(iter, current->first, pg);
        if (std::abs(current->first.value - previous) <= options.relative_tolerance * std::max(1.0, std::abs(previous))) {
            if (++stalls >= 3) {
                out.converged = true;
                break;
            }
        } else {
            stalls = 0;
        }
    }
    out.ok = true;
    out.state = current->first;
    if (!out.converged) out.message = "restart " + std::to_string(restart) + ": iteration limit reached";
    return out;
}

} // namespace

OptimizationResult optimize_correlation_lengths(const TrainingSet& train, const EmulatorBases& bases, double sigma2,
                                                double jitter, const OptimizerOptions& options) {
    train.validate();
    if (options.restarts < 1) throw InvalidArgument("optimizer needs at least one restart");
    const std::size_t k = train.design.space.dims();
    std::vector<Interval> bounds = options.length_bounds.empty() ? default_length_bounds(train) : options.length_bounds;
    if (bounds.size() != k + 1) throw InvalidArgument("length bounds must list every input and the time length");
    for (const auto& b : bounds)
        if (!(b.lower > 0.0 && b.lower < b.upper)) throw InvalidArgument("length bounds must be positive and increasing");

    const double variance = [&] {
        const double mean = train.outputs.mean();
        const double v = (train.outputs.array() - mean).square().mean();
        return v > 0.0 ? v : 1.0;
    }();
    const Interval tau_bounds = options.tau_bounds.value_or(Interval{1e-8 * variance, 1e8 * variance});
    if (!(tau_bounds.lower > 0.0 && tau_bounds.lower < tau_bounds.upper))
        throw InvalidArgument("tau bounds must be positive and increasing");
    bounds.push_back(tau_bounds);

    SearchProblem problem{train, bases, sigma2, jitter, options.log_space, {}, {}};
    problem.exponent = options.exponent;
    const auto dim = static_cast<Eigen::Index>(bounds.size());
    problem.lo.resize(dim);
    problem.hi.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const auto& b = bounds[static_cast<std::size_t>(i)];
        problem.lo(i) = options.log_space ? std::log(b.lower) : b.lower;
        problem.hi(i) = options.log_space ? std::log(b.upper) : b.upper;
    }

    // Restart starting points for the lengths: optional user start, then an LHD over log bounds.
    std::vector<Interval> log_bounds;
    for (std::size_t i = 0; i <= k; ++i) log_bounds.push_back({std::log(bounds[i].lower), std::log(bounds[i].upper)});
    const std::size_t lhd_points = std::max<std::size_t>(options.restarts, 2);
    const Design starts = lhd(lhd_points, DesignSpace(log_bounds, {}), options.seed);

    std::vector<Eigen::VectorXd> initial(options.restarts);
    for (std::size_t r = 0; r < options.restarts; ++r) {
        Eigen::VectorXd lengths(static_cast<Eigen::Index>(k + 1));
        if (r == 0 && options.initial_lengths) {
            if (options.initial_lengths->size() != k + 1) throw InvalidArgument("initial lengths must list every input and time");
            for (std::size_t i = 0; i <= k; ++i) lengths(static_cast<Eigen::Index>(i)) = (*options.initial_lengths)[i];
        } else {
            lengths = starts.points.row(static_cast<Eigen::Index>(r)).transpose().array().exp();
        }
        double tau = 0.0;
        if (r == 0 && options.initial_tau) {
            tau = *options.initial_tau;
        } else {
            // Profile value of tau at the starting lengths.
            KernelSpec ks;
            ks.input_lengths.assign(lengths.data(), lengths.data() + k);
            ks.time_length = lengths(static_cast<Eigen::Index>(k));
            ks.exponent = options.exponent;
            try {
                const Workspace w = build_workspace(train, bases, ks, sigma2, jitter);
                tau = w.quad / static_cast<double>(train.n() * train.q());
            } catch (const NumericalDegeneracy&) {
                tau = variance;
            }
            if (!(tau > 0.0) || !std::isfinite(tau)) tau = variance;
        }
        Eigen::VectorXd params(dim);
        params.head(static_cast<Eigen::Index>(k + 1)) = lengths;
        params(dim - 1) = std::clamp(tau, tau_bounds.lower, tau_bounds.upper);
        initial[r] = options.log_space ? Eigen::VectorXd(params.array().log()) : params;
    }

    OptimizationResult result;
    result.restarts.resize(options.restarts);
    std::vector<std::vector<OptimizerTraceRow>> traces(options.restarts);
    parallel_for(options.restarts, options.threads, [&](std::size_t r) {
        result.restarts[r] = run_restart(problem, initial[r], options, r, traces[r]);
    });
    for (auto& t : traces) result.trace.insert(result.trace.end(), t.begin(), t.end());

    bool any = false;
    for (std::size_t r = 0; r < options.restarts; ++r) {
        const auto& o = result.restarts[r];
        if (!o.ok) continue;
        if (!any || o.state.value > result.best.value) {
            result.best = o.state;
            result.best_restart = r;
            any = true;
        }
    }
    if (!any) {
        std::ostringstream msg;
        msg << "marginal likelihood optimization failed for all " << options.restarts << " restarts:";
        for (const auto& o : result.restarts) msg << "\n  " << o.message;
        throw OptimizationFailure(msg.str());
    }
    return result;
}

std::string trace_csv(const std::vector<OptimizerTraceRow>& trace) {
    std::string out = "restart,iteration,log_likelihood,gradient_norm";
    const std::size_t nl = trace.empty() ? 0 : trace.front().lengths.size();
    for (std::size_t i = 0; i + 1 < nl; ++i) out += ",length_" + std::to_string(i);
    if (nl) out += ",length_t";
    out += ",tau\n";
    for (const auto& row : trace) {
        out += std::to_string(row.restart) + ',' + std::to_string(row.iteration) + ',' + io::format_double(row.value) +
               ',' + io::format_double(row.gradient_norm);
        for (double l : row.lengths) out += ',' + io::format_double(l);
        out += ',' + io::format_double(row.tau) + '\n';
    }
    return out;
}

HyperparamEstimate estimate_hyperparams(const TrainingSet& train, const EmulatorBases& bases, double a, double split) {
    train.validate();
    if (!(a > 2.0)) throw InvalidArgument("hyperparameter estimation needs a > 2 (prior variance undefined otherwise)");
    if (!(split > 0.0 && split < 1.0)) throw InvalidArgument("variance split must lie in (0, 1)");
    HyperparamEstimate est;
    est.a = a;
    est.pooled_mean = train.outputs.mean();
    est.pooled_variance = (train.outputs.array() - est.pooled_mean).square().mean();
    if (!(est.pooled_variance > 0.0)) throw DataError("training outputs are constant; cannot estimate prior variance");
    const auto reg = regressor_matrices(train.design.points, train.times, bases.input, bases.output);
    est.mean_regressor_norm2 = reg.Gr.rowwise().squaredNorm().mean() * reg.Gs.rowwise().squaredNorm().mean();
    est.d = (1.0 - split) * est.pooled_variance * (a - 2.0);
    est.sigma2 = split / ((1.0 - split) * est.mean_regressor_norm2);
    est.provenance = Provenance::Estimated;
    return est;
}

} // namespace ope
