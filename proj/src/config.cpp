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

#include "ope/config.hpp"

#include <set>

#include "ope/csv.hpp"
#include "ope/errors.hpp"

namespace ope {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& section, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError("config section '" + section + "' must be an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in config section '" + section + "'");
}

template <class T>
T get(const json& j, const std::string& key, const std::string& section, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(section + "." + key + ": " + e.what());
    }
}

std::vector<Interval> parse_bounds(const json& j, const std::string& where) {
    std::vector<Interval> out;
    if (!j.is_array()) throw ConfigError(where + " must be an array of [lower, upper] pairs");
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
            throw ConfigError(where + " must be an array of [lower, upper] pairs");
        out.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
    return out;
}

json bounds_json(const std::vector<Interval>& bounds) {
    json out = json::array();
    for (const auto& b : bounds) out.push_back({b.lower, b.upper});
    return out;
}

DesignSpace make_space(std::vector<Interval> bounds, std::vector<std::string> names, const std::string& where) {
    try {
        return DesignSpace(std::move(bounds), std::move(names));
    } catch (const InvalidArgument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

std::optional<double> estimate_or_number(const json& j, const std::string& key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    const auto& v = j.at(key);
    if (v.is_string() && v.get<std::string>() == "estimate") return std::nullopt;
    if (v.is_number()) return v.get<double>();
    throw ConfigError("prior." + key + " must be a number or \"estimate\"");
}

} // namespace

std::vector<SweepSection> RunConfig::default_sweeps(const DesignSpace& space) {
    if (space.names() != std::vector<std::string>{"x0", "u0", "c"}) return {};
    const DesignSpace box({{-2.0, 0.0}, {1.0, 2.0}, {0.5, 2.5}}, space.names());
    std::vector<SweepSection> out;
    for (const auto& name : space.names()) {
        SweepSection s;
        s.dimension = name;
        s.resolution = 50;
        s.fixed = {-1.0, 1.5, 1.5};
        s.box = box;
        out.push_back(s);
    }
    return out;
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    c.analysis.sweeps = default_sweeps(c.design.space);
    if (j.is_null()) return c;
    check_keys(j, "<root>", {"design", "time_grid", "basis", "kernel", "prior", "simulator", "validation", "analysis", "paths"});

    if (j.contains("design")) {
        const auto& s = j.at("design");
        check_keys(s, "design", {"n", "seed", "candidates", "names", "bounds"});
        c.design.n = get<std::size_t>(s, "n", "design", c.design.n);
        c.design.seed = get<std::uint64_t>(s, "seed", "design", c.design.seed);
        c.design.candidates = get<std::size_t>(s, "candidates", "design", c.design.candidates);
        auto names = get<std::vector<std::string>>(s, "names", "design", c.design.space.names());
        auto bounds = s.contains("bounds") ? parse_bounds(s.at("bounds"), "design.bounds") : c.design.space.bounds();
        if (names.size() != bounds.size())
            throw ConfigError("design.names and design.bounds list different numbers of dimensions");
        c.design.space = make_space(std::move(bounds), std::move(names), "design.bounds");
        c.analysis.sweeps = default_sweeps(c.design.space);
    }
    if (j.contains("time_grid")) {
        const auto& s = j.at("time_grid");
        check_keys(s, "time_grid", {"t_min", "t_max", "dt"});
        c.time.t_min = get<double>(s, "t_min", "time_grid", c.time.t_min);
        c.time.t_max = get<double>(s, "t_max", "time_grid", c.time.t_max);
        c.time.dt = get<double>(s, "dt", "time_grid", c.time.dt);
    }
    if (j.contains("basis")) {
        const auto& s = j.at("basis");
        check_keys(s, "basis", {"frequencies", "bounds"});
        c.frequencies = get<std::vector<double>>(s, "frequencies", "basis", c.frequencies);
        if (s.contains("bounds")) {
            const auto b = parse_bounds(s.at("bounds"), "basis.bounds");
            const auto& db = c.design.space.bounds();
            bool same = b.size() == db.size();
            for (std::size_t d = 0; same && d < b.size(); ++d)
                same = b[d].lower == db[d].lower && b[d].upper == db[d].upper;
            if (!same) throw ConfigError("basis.bounds must match design.bounds");
        }
    }
    if (j.contains("kernel")) {
        const auto& s = j.at("kernel");
        check_keys(s, "kernel", {"exponent", "jitter", "lengths", "length_bounds", "restarts", "seed", "max_iterations"});
        c.kernel.exponent = get<double>(s, "exponent", "kernel", c.kernel.exponent);
        c.kernel.jitter = get<double>(s, "jitter", "kernel", c.kernel.jitter);
        if (s.contains("lengths") && !s.at("lengths").is_null())
            c.kernel.lengths = get<std::vector<double>>(s, "lengths", "kernel", {});
        if (s.contains("length_bounds") && !s.at("length_bounds").is_null())
            c.kernel.length_bounds = parse_bounds(s.at("length_bounds"), "kernel.length_bounds");
        c.kernel.restarts = get<std::size_t>(s, "restarts", "kernel", c.kernel.restarts);
        c.kernel.seed = get<std::uint64_t>(s, "seed", "kernel", c.kernel.seed);
        c.kernel.max_iterations = get<std::size_t>(s, "max_iterations", "kernel", c.kernel.max_iterations);
    }
    if (j.contains("prior")) {
        const auto& s = j.at("prior");
        check_keys(s, "prior", {"a", "sigma2", "d", "split"});
        c.prior.a = get<double>(s, "a", "prior", c.prior.a);
        c.prior.sigma2 = estimate_or_number(s, "sigma2");
        c.prior.d = estimate_or_number(s, "d");
        c.prior.split = get<double>(s, "split", "prior", c.prior.split);
    }
    if (j.contains("simulator")) {
        const auto& s = j.at("simulator");
        check_keys(s, "simulator", {"damping", "base_period", "period_sensitivity", "amplitude_u0", "amplitude_x0"});
        c.simulator.damping = get<double>(s, "damping", "simulator", c.simulator.damping);
        c.simulator.base_period = get<double>(s, "base_period", "simulator", c.simulator.base_period);
        c.simulator.period_sensitivity = get<double>(s, "period_sensitivity", "simulator", c.simulator.period_sensitivity);
        c.simulator.amplitude_u0 = get<double>(s, "amplitude_u0", "simulator", c.simulator.amplitude_u0);
        c.simulator.amplitude_x0 = get<double>(s, "amplitude_x0", "simulator", c.simulator.amplitude_x0);
    }
    if (j.contains("validation")) {
        const auto& s = j.at("validation");
        check_keys(s, "validation", {"level", "reoptimize"});
        c.validation.level = get<double>(s, "level", "validation", c.validation.level);
        c.validation.reoptimize = get<bool>(s, "reoptimize", "validation", c.validation.reoptimize);
    }
    if (j.contains("analysis")) {
        const auto& s = j.at("analysis");
        check_keys(s, "analysis", {"sweeps", "beta", "mc_samples", "seed", "bins", "pessimistic", "level"});
        if (s.contains("sweeps")) {
            c.analysis.sweeps.clear();
            for (const auto& sw : s.at("sweeps")) {
                check_keys(sw, "analysis.sweeps[]", {"dimension", "resolution", "fixed", "box"});
                SweepSection sec;
                sec.dimension = get<std::string>(sw, "dimension", "analysis.sweeps[]", "");
                sec.resolution = get<std::size_t>(sw, "resolution", "analysis.sweeps[]", sec.resolution);
                sec.fixed = get<std::vector<double>>(sw, "fixed", "analysis.sweeps[]", {});
                const auto box = sw.contains("box") ? parse_bounds(sw.at("box"), "analysis.sweeps[].box")
                                                    : c.design.space.bounds();
                sec.box = make_space(box, c.design.space.names(), "analysis.sweeps[].box");
                if (sec.fixed.empty())
                    for (const auto& b : sec.box.bounds()) sec.fixed.push_back(0.5 * (b.lower + b.upper));
                c.analysis.sweeps.push_back(std::move(sec));
            }
        }
        if (s.contains("beta")) {
            c.analysis.beta.marginals.clear();
            for (const auto& m : s.at("beta")) {
                check_keys(m, "analysis.beta[]", {"alpha", "beta", "lower", "upper"});
                c.analysis.beta.marginals.push_back({get<double>(m, "alpha", "analysis.beta[]", 1.0),
                                                     get<double>(m, "beta", "analysis.beta[]", 1.0),
                                                     get<double>(m, "lower", "analysis.beta[]", 0.0),
                                                     get<double>(m, "upper", "analysis.beta[]", 1.0)});
            }
        }
        c.analysis.mc_samples = get<std::size_t>(s, "mc_samples", "analysis", c.analysis.mc_samples);
        c.analysis.seed = get<std::uint64_t>(s, "seed", "analysis", c.analysis.seed);
        c.analysis.bins = get<std::size_t>(s, "bins", "analysis", c.analysis.bins);
        c.analysis.pessimistic = get<bool>(s, "pessimistic", "analysis", c.analysis.pessimistic);
        c.analysis.level = get<double>(s, "level", "analysis", c.analysis.level);
    }
    if (j.contains("paths")) {
        const auto& s = j.at("paths");
        check_keys(s, "paths", {"design", "training", "model", "reports"});
        c.paths.design = get<std::string>(s, "design", "paths", c.paths.design.string());
        c.paths.training = get<std::string>(s, "training", "paths", c.paths.training.string());
        c.paths.model = get<std::string>(s, "model", "paths", c.paths.model.string());
        c.paths.reports = get<std::string>(s, "reports", "paths", c.paths.reports.string());
    }
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    return from_json(j);
}

void RunConfig::validate() const {
    const std::size_t k = design.space.dims();
    if (design.n < 2) throw ConfigError("design.n must be >= 2");
    if (design.candidates < 1) throw ConfigError("design.candidates must be >= 1");
    if (!(time.dt > 0.0) || !(time.t_max > time.t_min) || time.t_min < 0.0)
        throw ConfigError("time_grid needs 0 <= t_min < t_max and dt > 0");
    try {
        OutputBasis check(frequencies);
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("basis.frequencies: ") + e.what());
    }
    if (!(kernel.exponent > 0.0 && kernel.exponent <= 2.0)) throw ConfigError("kernel.exponent must lie in (0, 2]");
    if (!(kernel.jitter >= 0.0)) throw ConfigError("kernel.jitter must be non-negative");
    if (kernel.lengths) {
        if (kernel.lengths->size() != k + 1) throw ConfigError("kernel.lengths must list one length per input plus time");
        for (double l : *kernel.lengths)
            if (!(l > 0.0)) throw ConfigError("kernel.lengths must be positive");
    }
    if (!kernel.length_bounds.empty() && kernel.length_bounds.size() != k + 1)
        throw ConfigError("kernel.length_bounds must list one pair per input plus time");
    for (const auto& b : kernel.length_bounds)
        if (!(b.lower > 0.0 && b.lower < b.upper)) throw ConfigError("kernel.length_bounds need 0 < lower < upper");
    if (kernel.restarts < 1) throw ConfigError("kernel.restarts must be >= 1");
    if (!(prior.a > 0.0)) throw ConfigError("prior.a must be positive");
    if (prior.sigma2 && !(*prior.sigma2 > 0.0)) throw ConfigError("prior.sigma2 must be positive");
    if (prior.d && !(*prior.d > 0.0)) throw ConfigError("prior.d must be positive");
    if (!(prior.split > 0.0 && prior.split < 1.0)) throw ConfigError("prior.split must lie in (0, 1)");
    if ((!prior.sigma2 || !prior.d) && !(prior.a > 2.0))
        throw ConfigError("estimating prior.sigma2 or prior.d requires prior.a > 2");
    if (!(validation.level > 0.0 && validation.level < 1.0)) throw ConfigError("validation.level must lie in (0, 1)");
    if (!(analysis.level > 0.0 && analysis.level < 1.0)) throw ConfigError("analysis.level must lie in (0, 1)");
    if (analysis.mc_samples < 1) throw ConfigError("analysis.mc_samples must be >= 1");
    if (analysis.bins < 1) throw ConfigError("analysis.bins must be >= 1");
    if (analysis.beta.marginals.size() != k) throw ConfigError("analysis.beta must list one marginal per input");
    try {
        analysis.beta.validate();
        for (const auto& s : analysis.sweeps) sweep_spec(s).validate(design.space);
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("analysis: ") + e.what());
    }
}

SweepSpec RunConfig::sweep_spec(const SweepSection& s) const {
    const auto& names = design.space.names();
    const auto it = std::find(names.begin(), names.end(), s.dimension);
    if (it == names.end()) throw ConfigError("sweep dimension '" + s.dimension + "' is not an input name");
    if (s.fixed.size() != names.size()) throw ConfigError("sweep fixed values must list every input");
    SweepSpec spec;
    spec.dimension = static_cast<std::size_t>(it - names.begin());
    spec.resolution = s.resolution;
    spec.fixed = Eigen::Map<const Eigen::VectorXd>(s.fixed.data(), static_cast<Eigen::Index>(s.fixed.size()));
    spec.box = s.box;
    return spec;
}

EmulatorBases RunConfig::bases() const { return {InputBasis(design.space), OutputBasis(frequencies)}; }

json RunConfig::to_json() const {
    json j;
    j["design"] = {{"n", design.n},
                   {"seed", design.seed},
                   {"candidates", design.candidates},
                   {"names", design.space.names()},
                   {"bounds", bounds_json(design.space.bounds())}};
    j["time_grid"] = {{"t_min", time.t_min}, {"t_max", time.t_max}, {"dt", time.dt}};
    j["basis"] = {{"frequencies", frequencies}};
    j["kernel"] = {{"exponent", kernel.exponent},
                   {"jitter", kernel.jitter},
                   {"lengths", kernel.lengths ? json(*kernel.lengths) : json(nullptr)},
                   {"length_bounds", kernel.length_bounds.empty() ? json(nullptr) : bounds_json(kernel.length_bounds)},
                   {"restarts", kernel.restarts},
                   {"seed", kernel.seed},
                   {"max_iterations", kernel.max_iterations}};
    j["prior"] = {{"a", prior.a},
                  {"sigma2", prior.sigma2 ? json(*prior.sigma2) : json("estimate")},
                  {"d", prior.d ? json(*prior.d) : json("estimate")},
                  {"split", prior.split}};
    j["simulator"] = {{"damping", simulator.damping},
                      {"base_period", simulator.base_period},
                      {"period_sensitivity", simulator.period_sensitivity},
                      {"amplitude_u0", simulator.amplitude_u0},
                      {"amplitude_x0", simulator.amplitude_x0}};
    j["validation"] = {{"level", validation.level}, {"reoptimize", validation.reoptimize}};
    json sweeps = json::array();
    for (const auto& s : analysis.sweeps)
        sweeps.push_back({{"dimension", s.dimension},
                          {"resolution", s.resolution},
                          {"fixed", s.fixed},
                          {"box", bounds_json(s.box.bounds())}});
    json beta = json::array();
    for (const auto& m : analysis.beta.marginals)
        beta.push_back({{"alpha", m.alpha}, {"beta", m.beta}, {"lower", m.lower}, {"upper", m.upper}});
    j["analysis"] = {{"sweeps", sweeps},
                     {"beta", beta},
                     {"mc_samples", analysis.mc_samples},
                     {"seed", analysis.seed},
                     {"bins", analysis.bins},
                     {"pessimistic", analysis.pessimistic},
                     {"level", analysis.level}};
    j["paths"] = {{"design", paths.design.generic_string()},
                  {"training", paths.training.generic_string()},
                  {"model", paths.model.generic_string()},
                  {"reports", paths.reports.generic_string()}};
    return j;
}

std::string RunConfig::hash() const { return io::hex64(io::fnv1a(to_json().dump())); }

} // namespace ope
