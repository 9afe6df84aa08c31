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

// ope: command-line driver for the emulator pipeline.
//
//   design -> simulate -> fit -> validate / predict / sweep / uq
//
// Every artifact is written through a temp file and rename. JSON reports
// carry a "run" block (tool version, command, config hash, seeds); CSV files
// get the same block in a "<file>.meta.json" sidecar so the CSV stays plain.
// The only file with wall-clock content is <reports>/ope.log.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ope/analysis.hpp"
#include "ope/config.hpp"
#include "ope/csv.hpp"
#include "ope/errors.hpp"
#include "ope/model_io.hpp"
#include "ope/pipeline.hpp"
#include "ope/simulator.hpp"
#include "ope/validation.hpp"

#ifndef OPE_VERSION
#define OPE_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ope;

namespace {

struct Context {
    RunConfig config;
    std::string command;
    unsigned threads = 1;
    bool trace = false;
};

json run_block(const Context& ctx) {
    return {{"tool", "ope"},
            {"version", OPE_VERSION},
            {"command", ctx.command},
            {"config_hash", ctx.config.hash()},
            {"seeds",
             {{"design", ctx.config.design.seed}, {"optimizer", ctx.config.kernel.seed}, {"analysis", ctx.config.analysis.seed}}}};
}

void ensure_parent(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_text(const fs::path& p, const std::string& text) {
    ensure_parent(p);
    io::write_file_atomic(p, text);
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

void write_csv(const Context& ctx, const fs::path& p, const std::string& csv, json extra = json::object()) {
    write_text(p, csv);
    json meta = {{"file", p.filename().string()}, {"fnv1a", io::hex64(io::fnv1a(csv))}, {"run", run_block(ctx)}};
    for (auto& [k, v] : extra.items()) meta[k] = v;
    write_json(fs::path(p.string() + ".meta.json"), meta);
}

void trace(const Context& ctx, const std::string& msg) {
    if (ctx.trace) std::cerr << "[ope] " << msg << "\n";
}

std::string csv_row(std::initializer_list<double> values) {
    std::string s;
    for (double v : values) {
        if (!s.empty()) s += ',';
        s += io::format_double(v);
    }
    return s;
}

TrainingSet load_training(const Context& ctx) {
    const auto& p = ctx.config.paths.training;
    if (!fs::exists(p)) throw DataError("training file " + p.string() + " not found; run `ope simulate` first");
    return ingest_runs(p, ctx.config.design.space);
}

OpeModel load_fitted(const Context& ctx) {
    const auto& p = ctx.config.paths.model;
    if (!fs::exists(p)) throw DataError("model file " + p.string() + " not found; run `ope fit` first");
    return load_model(p);
}

OptimizerOptions optimizer_options(const Context& ctx) {
    const auto& k = ctx.config.kernel;
    OptimizerOptions o;
    o.length_bounds = k.length_bounds;
    o.restarts = k.restarts;
    o.seed = k.seed;
    o.max_iterations = k.max_iterations;
    o.exponent = k.exponent;
    o.threads = ctx.threads;
    return o;
}

void cmd_design(const Context& ctx) {
    const auto& d = ctx.config.design;
    const auto r = maximin_lhd(d.n, d.space, d.seed, d.candidates);
    write_csv(ctx, ctx.config.paths.design, design_csv(r.design), {{"min_distance_unit", r.min_distance}});
    write_json(ctx.config.paths.reports / "design.json",
               {{"run", run_block(ctx)},
                {"n", d.n},
                {"candidates", d.candidates},
                {"best_candidate", r.best_candidate},
                {"best_candidate_min_distance", r.best_candidate_distance},
                {"swaps", r.swaps},
                {"min_distance_unit", r.min_distance},
                {"min_distance_physical", min_pairwise_distance(r.design.points)}});
    std::cout << "design: " << d.n << " points, min unit distance " << io::format_double(r.min_distance) << " -> "
              << ctx.config.paths.design.string() << "\n";
}

void cmd_simulate(const Context& ctx) {
    const auto& p = ctx.config.paths.design;
    if (!fs::exists(p)) throw DataError("design file " + p.string() + " not found; run `ope design` first");
    const Design design = read_design_csv(p, ctx.config.design.space);
    const TrainingSet train = simulate_training(design, ctx.config.time.grid(), ctx.config.simulator);
    write_csv(ctx, ctx.config.paths.training, training_csv(train),
              {{"simulator", "toy"}, {"n", train.n()}, {"q", train.q()}});
    std::cout << "simulate: " << train.n() << " runs x " << train.q() << " times -> "
              << ctx.config.paths.training.string() << "\n";
}

void cmd_fit(const Context& ctx) {
    const auto& c = ctx.config;
    const TrainingSet train = load_training(ctx);
    FitSettings s;
    s.a = c.prior.a;
    s.sigma2 = c.prior.sigma2;
    s.d = c.prior.d;
    s.split = c.prior.split;
    s.exponent = c.kernel.exponent;
    s.jitter = c.kernel.jitter;
    s.lengths = c.kernel.lengths;
    s.optimizer = optimizer_options(ctx);
    const auto t0 = std::chrono::steady_clock::now();
    const FitOutcome out = fit_emulator(train, c.bases(), s);
    trace(ctx, "fit took " + std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s");

    json meta = {{"run", run_block(ctx)},
                 {"hyperparameters",
                  {{"a", out.hyper.a},
                   {"sigma2", out.hyper.sigma2},
                   {"d", out.hyper.d},
                   {"provenance", out.hyper.provenance == Provenance::Estimated ? "estimated" : "user"},
                   {"pooled_variance", out.hyper.pooled_variance}}}};
    if (out.optimization) {
        const auto& o = *out.optimization;
        json restarts = json::array();
        for (const auto& r : o.restarts)
            restarts.push_back({{"ok", r.ok}, {"converged", r.converged}, {"iterations", r.iterations},
                                {"log_likelihood", r.state.value}, {"message", r.message}});
        meta["optimization"] = {{"best_restart", o.best_restart}, {"log_likelihood", o.best.value},
                                {"tau", o.best.tau}, {"restarts", restarts}};
        if (ctx.trace) write_csv(ctx, c.paths.reports / "optimizer_trace.csv", trace_csv(o.trace));
    } else {
        meta["optimization"] = nullptr;
    }
    save_model(c.paths.model, out.model, meta);
    const auto& k = out.model.kernel();
    std::cout << "fit: lengths (";
    for (double l : k.input_lengths) std::cout << io::format_double(l) << ", ";
    std::cout << io::format_double(k.time_length) << "), sigma2 " << io::format_double(out.hyper.sigma2) << ", d "
              << io::format_double(out.hyper.d) << " -> " << c.paths.model.string() << "\n";
}

void cmd_validate(const Context& ctx) {
    const auto& c = ctx.config;
    const OpeModel model = load_fitted(ctx);
    const TrainingSet train = load_training(ctx);
    if (train.fingerprint() != model.posterior().fingerprint)
        throw DataError("training file does not match the data the model was fitted on; rerun `ope fit`");
    LooOptions o;
    o.level = c.validation.level;
    o.threads = ctx.threads;
    o.reoptimize = c.validation.reoptimize;
    o.optimizer = optimizer_options(ctx);
    const auto rep = loo(train, model.bases(), model.kernel(), model.prior(), model.jitter(), o);

    std::string summary = "index,med,rmse,mcil,coverage,ok\n";
    json folds = json::array();
    for (const auto& f : rep.folds) {
        summary += std::to_string(f.index) + "," + csv_row({rep.med(static_cast<Eigen::Index>(f.index)), f.rmse, f.mcil, f.coverage}) +
                   "," + (f.ok ? "1" : "0") + "\n";
        if (f.ok) {
            char name[32];
            std::snprintf(name, sizeof name, "fold_%02zu.csv", f.index);
            write_csv(ctx, c.paths.reports / "loo" / name, loo_fold_csv(f, rep.level), {{"fold", f.index}});
        } else {
            folds.push_back({{"index", f.index}, {"error", f.error}});
        }
    }
    write_csv(ctx, c.paths.reports / "loo_summary.csv", summary);
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    write_json(c.paths.reports / "loo.json", {{"run", run_block(ctx)},
                                              {"level", rep.level},
                                              {"folds", rep.folds.size()},
                                              {"completed", rep.completed},
                                              {"pooled_coverage", rep.pooled_coverage},
                                              {"correlation_med_rmse", num(rep.correlation_med_rmse)},
                                              {"correlation_med_mcil", num(rep.correlation_med_mcil)},
                                              {"failed_folds", folds}});
    std::cout << "validate: " << rep.completed << "/" << rep.folds.size() << " folds, pooled coverage "
              << io::format_double(rep.pooled_coverage) << "\n";
    if (rep.completed != rep.folds.size()) throw NumericalDegeneracy("some leave-one-out folds failed; see loo.json");
}

Eigen::VectorXd parse_point(const std::string& text, std::size_t k) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto d = io::parse_double(item);
        if (!d || !std::isfinite(*d)) throw InvalidArgument("--point: cannot parse '" + item + "' as a number");
        v.push_back(*d);
    }
    if (v.size() != k) throw InvalidArgument("--point needs " + std::to_string(k) + " comma-separated values");
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void cmd_predict(const Context& ctx, const std::string& point_text, const std::string& out_path) {
    const auto& c = ctx.config;
    const OpeModel model = load_fitted(ctx);
    const Eigen::VectorXd r = parse_point(point_text, model.design().space.dims());
    const auto s = model.predict(r);
    const auto band = credible_interval(s, c.analysis.level);
    const std::string pct = io::format_double(100.0 * c.analysis.level);
    std::string csv = "time,location,scale,lo" + pct + ",hi" + pct + "\n";
    for (Eigen::Index j = 0; j < s.times.size(); ++j)
        csv += csv_row({s.times(j), s.location(j), s.scale(j), band.lower(j), band.upper(j)}) + "\n";
    const fs::path out = out_path.empty() ? c.paths.reports / "predict.csv" : fs::path(out_path);
    write_csv(ctx, out, csv,
              {{"point", std::vector<double>(r.data(), r.data() + r.size())},
               {"dof", s.dof},
               {"extrapolation", s.extrapolation},
               {"clamped_variances", s.clamped_variances}});
    if (s.extrapolation) std::cerr << "ope: warning: prediction point lies outside the training domain\n";
    std::cout << "predict: " << s.times.size() << " times, max location "
              << io::format_double(s.location.maxCoeff()) << " -> " << out.string() << "\n";
}

void cmd_sweep(const Context& ctx) {
    const auto& c = ctx.config;
    const OpeModel model = load_fitted(ctx);
    const ElevationOptions eo{c.analysis.pessimistic, c.analysis.level};
    json curves = json::array();
    for (const auto& sec : c.analysis.sweeps) {
        const auto curve = sensitivity_sweep(model, c.sweep_spec(sec), eo, ctx.threads);
        const fs::path p = c.paths.reports / ("sweep_" + sec.dimension + ".csv");
        write_csv(ctx, p, sweep_csv(curve), {{"dimension", sec.dimension}, {"fixed", sec.fixed}});
        curves.push_back({{"dimension", sec.dimension}, {"resolution", sec.resolution},
                          {"evaluations", curve.evaluations}, {"file", p.filename().string()}});
        std::cout << "sweep " << sec.dimension << ": " << curve.evaluations << " evaluations -> " << p.string() << "\n";
    }
    write_json(c.paths.reports / "sweeps.json", {{"run", run_block(ctx)}, {"pessimistic", eo.pessimistic}, {"curves", curves}});
}

json quantile_json(const QuantileSummary& q) {
    json rows = json::array();
    for (std::size_t i = 0; i < q.levels.size(); ++i) rows.push_back({{"level", q.levels[i]}, {"value", q.values[i]}});
    return {{"statistic", q.statistic}, {"samples", q.sample_count}, {"quantiles", rows}};
}

void cmd_uq(const Context& ctx, std::size_t samples_override) {
    const auto& c = ctx.config;
    const OpeModel model = load_fitted(ctx);
    const std::size_t n = samples_override ? samples_override : c.analysis.mc_samples;
    UqOptions o;
    o.elevation = {c.analysis.pessimistic, c.analysis.level};
    o.bins = c.analysis.bins;
    o.threads = ctx.threads;
    const auto r = uq_monte_carlo(model, c.analysis.beta, n, c.analysis.seed, o);
    for (const auto& w : r.warnings) std::cerr << "ope: warning: " << w << "\n";
    const auto& rep = c.paths.reports;
    write_csv(ctx, rep / "uq_max_elev_quantiles.csv", quantiles_csv(r.max_elevation_quantiles), {{"samples", n}});
    write_csv(ctx, rep / "uq_mcil_quantiles.csv", quantiles_csv(r.mcil_quantiles), {{"samples", n}});
    write_csv(ctx, rep / "uq_max_elev_hist.csv", histogram_csv(r.max_elevation_histogram));
    write_csv(ctx, rep / "uq_mcil_hist.csv", histogram_csv(r.mcil_histogram));
    std::string samples;
    for (const auto& name : model.design().space.names()) samples += name + ",";
    samples += "max_elev,mcil\n";
    for (Eigen::Index i = 0; i < r.inputs.rows(); ++i) {
        for (Eigen::Index d = 0; d < r.inputs.cols(); ++d) samples += io::format_double(r.inputs(i, d)) + ",";
        samples += csv_row({r.max_elevation[static_cast<std::size_t>(i)], r.mcil[static_cast<std::size_t>(i)]}) + "\n";
    }
    write_csv(ctx, rep / "uq_samples.csv", samples);
    write_json(rep / "uq.json", {{"run", run_block(ctx)},
                                 {"samples", n},
                                 {"max_elevation", quantile_json(r.max_elevation_quantiles)},
                                 {"mcil", quantile_json(r.mcil_quantiles)},
                                 {"warnings", r.warnings}});
    std::cout << "uq: " << n << " samples, median max elevation "
              << io::format_double(r.max_elevation_quantiles.values[2]) << "\n";
}

void append_log(const Context& ctx, int status, double seconds) {
    try {
        fs::create_directories(ctx.config.paths.reports);
        std::ofstream log(ctx.config.paths.reports / "ope.log", std::ios::app);
        const std::time_t now = std::time(nullptr);
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        log << stamp << " " << ctx.command << " status=" << status << " seconds=" << seconds
            << " config=" << ctx.config.hash() << "\n";
    } catch (...) {
        // The log is best effort; never turn a successful run into a failure.
    }
}

int exit_code(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::Config:
    case ErrorKind::InvalidArgument: return 2;
    case ErrorKind::Data: return 3;
    case ErrorKind::NumericalDegeneracy:
    case ErrorKind::OptimizationFailure: return 4;
    }
    return 1;
}

const char* kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::Config: return "config";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Data: return "data";
    case ErrorKind::NumericalDegeneracy: return "numerical";
    case ErrorKind::OptimizationFailure: return "optimization";
    }
    return "error";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Outer product emulator pipeline"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    bool trace_flag = false;
    app.add_option("--config", config_path, "run configuration (JSON)");
    app.add_option("--seed", seed, "override every seed in the configuration");
    app.add_option("--threads", threads, "worker threads (0 = hardware concurrency)");
    app.add_flag("--trace", trace_flag, "progress on stderr and optimizer trace CSV");
    app.set_version_flag("--version", OPE_VERSION);

    auto* design = app.add_subcommand("design", "maximin Latin hypercube design");
    auto* simulate = app.add_subcommand("simulate", "run the toy simulator on the design");
    auto* fit = app.add_subcommand("fit", "fit hyperparameters and the posterior emulator");
    auto* validate = app.add_subcommand("validate", "leave-one-out diagnostics");
    auto* predict = app.add_subcommand("predict", "predictive series at one input point");
    std::string point, out;
    predict->add_option("--point", point, "comma-separated input values, e.g. -1,1.5,1.5")->required();
    predict->add_option("--out", out, "output CSV (default <reports>/predict.csv)");
    auto* sweep = app.add_subcommand("sweep", "one-at-a-time sensitivity sweeps");
    auto* uq = app.add_subcommand("uq", "Monte Carlo propagation of Beta input uncertainty");
    std::size_t samples = 0;
    uq->add_option("--samples", samples, "number of Monte Carlo samples (default from config)");
    auto* all = app.add_subcommand("all", "design, simulate, fit, validate, sweep and uq in sequence");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    Context ctx;
    ctx.trace = trace_flag;
    ctx.threads = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    ctx.command = app.get_subcommands().front()->get_name();
    const auto t0 = std::chrono::steady_clock::now();
    int status = 0;
    try {
        ctx.config = config_path.empty() ? RunConfig::from_json(json::object()) : RunConfig::load(config_path);
        if (seed) {
            ctx.config.design.seed = *seed;
            ctx.config.kernel.seed = *seed;
            ctx.config.analysis.seed = *seed;
        }
        if (*design) cmd_design(ctx);
        else if (*simulate) cmd_simulate(ctx);
        else if (*fit) cmd_fit(ctx);
        else if (*validate) cmd_validate(ctx);
        else if (*predict) cmd_predict(ctx, point, out);
        else if (*sweep) cmd_sweep(ctx);
        else if (*uq) cmd_uq(ctx, samples);
        else if (*all) {
            cmd_design(ctx);
            cmd_simulate(ctx);
            cmd_fit(ctx);
            cmd_validate(ctx);
            cmd_sweep(ctx);
            cmd_uq(ctx, 0);
        }
    } catch (const Error& e) {
        std::cerr << "ope: " << kind_name(e.kind()) << " error: " << e.what() << "\n";
        status = exit_code(e);
    } catch (const fs::filesystem_error& e) {
        std::cerr << "ope: data error: " << e.what() << "\n";
        status = 3;
    } catch (const std::exception& e) {
        std::cerr << "ope: error: " << e.what() << "\n";
        status = 1;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    trace(ctx, ctx.command + " finished in " + std::to_string(secs) + " s");
    if (status != 2) append_log(ctx, status, secs);
    return status;
}
