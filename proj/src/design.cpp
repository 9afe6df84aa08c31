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

#include "ope/design.hpp"

#include <cmath>
#include <limits>
#include <tuple>
#include <numeric>
#include <sstream>

#include "ope/csv.hpp"
#include "ope/errors.hpp"
#include "ope/rng.hpp"

namespace ope {

DesignSpace::DesignSpace(std::vector<Interval> bounds, std::vector<std::string> names)
    : m_bounds(std::move(bounds)), m_names(std::move(names)) {
    if (m_bounds.empty()) throw InvalidArgument("design space needs at least one dimension");
    if (m_names.empty()) {
        for (std::size_t d = 0; d < m_bounds.size(); ++d) m_names.push_back("x" + std::to_string(d + 1));
    }
    if (m_names.size() != m_bounds.size())
        throw InvalidArgument("design space has " + std::to_string(m_bounds.size()) + " bounds but " +
                              std::to_string(m_names.size()) + " names");
    for (std::size_t d = 0; d < m_bounds.size(); ++d) {
        const auto& b = m_bounds[d];
        if (!(b.lower < b.upper) || !std::isfinite(b.lower) || !std::isfinite(b.upper)) {
            std::ostringstream msg;
            msg << "dimension '" << m_names[d] << "': lower bound " << b.lower
                << " must be below upper bound " << b.upper;
            throw InvalidArgument(msg.str());
        }
    }
}

DesignSpace DesignSpace::landslide() {
    return DesignSpace({{-3.0, 1.0}, {1.0, 2.0}, {0.5, 3.0}}, {"x0", "u0", "c"});
}

DesignSpace DesignSpace::unit_cube(std::size_t k) {
    return DesignSpace(std::vector<Interval>(k, Interval{0.0, 1.0}), {});
}

double DesignSpace::to_unit(std::size_t d, double value) const {
    const auto& b = m_bounds[d];
    return (value - b.lower) / b.width();
}

double DesignSpace::to_physical(std::size_t d, double unit) const {
    const auto& b = m_bounds[d];
    return b.lower + unit * b.width();
}

Eigen::MatrixXd DesignSpace::to_unit(const Eigen::MatrixXd& points) const {
    Eigen::MatrixXd out(points.rows(), points.cols());
    for (Eigen::Index j = 0; j < points.cols(); ++j)
        for (Eigen::Index i = 0; i < points.rows(); ++i)
            out(i, j) = to_unit(static_cast<std::size_t>(j), points(i, j));
    return out;
}

Eigen::MatrixXd DesignSpace::to_physical(const Eigen::MatrixXd& unit_points) const {
    Eigen::MatrixXd out(unit_points.rows(), unit_points.cols());
    for (Eigen::Index j = 0; j < unit_points.cols(); ++j)
        for (Eigen::Index i = 0; i < unit_points.rows(); ++i)
            out(i, j) = to_physical(static_cast<std::size_t>(j), unit_points(i, j));
    return out;
}

bool DesignSpace::contains(const Eigen::Ref<const Eigen::RowVectorXd>& point) const {
    if (static_cast<std::size_t>(point.size()) != dims()) return false;
    for (std::size_t d = 0; d < dims(); ++d)
        if (!m_bounds[d].contains(point(static_cast<Eigen::Index>(d)))) return false;
    return true;
}

bool DesignSpace::contains(const DesignSpace& inner) const {
    if (inner.dims() != dims()) return false;
    for (std::size_t d = 0; d < dims(); ++d)
        if (inner.m_bounds[d].lower < m_bounds[d].lower || inner.m_bounds[d].upper > m_bounds[d].upper)
            return false;
    return true;
}

Design Design::from_physical(Eigen::MatrixXd points, DesignSpace space, std::uint64_t seed) {
    if (static_cast<std::size_t>(points.cols()) != space.dims())
        throw InvalidArgument("design has " + std::to_string(points.cols()) + " columns, space has " +
                              std::to_string(space.dims()) + " dimensions");
    Design d;
    d.unit_points = space.to_unit(points);
    d.points = std::move(points);
    d.space = std::move(space);
    d.seed = seed;
    return d;
}

Design lhd(std::size_t n, const DesignSpace& space, std::uint64_t seed) {
    if (n < 2) throw InvalidArgument("Latin hypercube needs n >= 2, got " + std::to_string(n));
    const std::size_t k = space.dims();
    Rng rng(seed);
    Eigen::MatrixXd unit(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    std::vector<std::size_t> perm(n);
    for (std::size_t d = 0; d < k; ++d) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = rng.uniform01();
            unit(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
                (static_cast<double>(perm[i]) + v) / static_cast<double>(n);
        }
    }
    Design out;
    out.points = space.to_physical(unit);
    out.unit_points = std::move(unit);
    out.space = space;
    out.seed = seed;
    return out;
}

double min_pairwise_distance(const Eigen::MatrixXd& points) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        for (Eigen::Index j = i + 1; j < points.rows(); ++j)
            best = std::min(best, (points.row(i) - points.row(j)).squaredNorm());
    return std::sqrt(best);
}

namespace {

// Squared-distance matrix kept in sync with the unit points during swaps.
class SwapSearch {
public:
    explicit SwapSearch(Eigen::MatrixXd unit) : m_unit(std::move(unit)) {
        const Eigen::Index n = m_unit.rows();
        m_dist2.resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i) refresh_row(i);
    }

    std::size_t climb() {
        std::size_t swaps = 0;
        const Eigen::Index n = m_unit.rows();
        const Eigen::Index k = m_unit.cols();
        for (;;) {
            const auto [a, b, current] = closest_pair();
            bool improved = false;
            for (Eigen::Index r : {a, b}) {
                for (Eigen::Index j = 0; j < n && !improved; ++j) {
                    if (j == r) continue;
                    for (Eigen::Index d = 0; d < k && !improved; ++d) {
                        swap_entry(r, j, d);
                        if (std::get<2>(closest_pair()) > current) {
                            improved = true;
                            ++swaps;
                        } else {
                            swap_entry(r, j, d);
                        }
                    }
                }
                if (improved) break;
            }
            if (!improved) return swaps;
        }
    }

    const Eigen::MatrixXd& unit() const { return m_unit; }

private:
    void refresh_row(Eigen::Index i) {
        for (Eigen::Index j = 0; j < m_unit.rows(); ++j) {
            const double d2 = i == j ? 0.0 : (m_unit.row(i) - m_unit.row(j)).squaredNorm();
            m_dist2(i, j) = d2;
            m_dist2(j, i) = d2;
        }
    }

    void swap_entry(Eigen::Index r, Eigen::Index j, Eigen::Index d) {
        std::swap(m_unit(r, d), m_unit(j, d));
        refresh_row(r);
        refresh_row(j);
    }

    std::tuple<Eigen::Index, Eigen::Index, double> closest_pair() const {
        Eigen::Index a = 0, b = 1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < m_unit.rows(); ++i)
            for (Eigen::Index j = i + 1; j < m_unit.rows(); ++j)
                if (m_dist2(i, j) < best) {
                    best = m_dist2(i, j);
                    a = i;
                    b = j;
                }
        return {a, b, best};
    }

    Eigen::MatrixXd m_unit;
    Eigen::MatrixXd m_dist2;
};

} // namespace

MaximinResult maximin_lhd(std::size_t n, const DesignSpace& space, std::uint64_t seed,
                          std::size_t candidates) {
    if (candidates < 1) throw InvalidArgument("maximin LHD needs at least one candidate");
    MaximinResult result;
    result.design = lhd(n, space, seed);
    result.best_candidate_distance = min_pairwise_distance(result.design.unit_points);
    for (std::size_t c = 1; c < candidates; ++c) {
        Design cand = lhd(n, space, mix_seed(seed, c));
        const double dist = min_pairwise_distance(cand.unit_points);
        if (dist > result.best_candidate_distance) {
            result.best_candidate_distance = dist;
            result.best_candidate = c;
            result.design = std::move(cand);
        }
    }
    result.design.seed = seed;
    result.min_distance = result.best_candidate_distance;
    if (candidates > 1) {
        SwapSearch search(result.design.unit_points);
        result.swaps = search.climb();
        if (result.swaps > 0) {
            result.design.unit_points = search.unit();
            result.design.points = space.to_physical(result.design.unit_points);
            result.min_distance = min_pairwise_distance(result.design.unit_points);
        }
    }
    return result;
}

Design regular_grid(const std::vector<std::size_t>& levels, const DesignSpace& space) {
    if (levels.size() != space.dims())
        throw InvalidArgument("grid needs one level count per dimension");
    std::size_t n = 1;
    for (std::size_t d = 0; d < levels.size(); ++d) {
        if (levels[d] < 2)
            throw InvalidArgument("grid level count for '" + space.names()[d] + "' must be >= 2");
        n *= levels[d];
    }
    const std::size_t k = space.dims();
    Eigen::MatrixXd unit(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t rem = i;
        for (std::size_t d = k; d-- > 0;) {
            const std::size_t idx = rem % levels[d];
            rem /= levels[d];
            unit(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
                static_cast<double>(idx) / static_cast<double>(levels[d] - 1);
        }
    }
    Design out;
    out.points = space.to_physical(unit);
    // Endpoints exactly, free of affine round-off.
    for (std::size_t d = 0; d < k; ++d)
        for (std::size_t i = 0; i < n; ++i) {
            const double u = unit(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d));
            if (u == 0.0) out.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = space.bound(d).lower;
            if (u == 1.0) out.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = space.bound(d).upper;
        }
    out.unit_points = std::move(unit);
    out.space = space;
    return out;
}

std::string design_csv(const Design& design) {
    std::string out;
    const auto& names = design.space.names();
    for (std::size_t d = 0; d < names.size(); ++d) {
        if (d) out += ',';
        out += names[d];
    }
    out += '\n';
    for (Eigen::Index i = 0; i < design.points.rows(); ++i) {
        for (Eigen::Index d = 0; d < design.points.cols(); ++d) {
            if (d) out += ',';
            out += io::format_double(design.points(i, d));
        }
        out += '\n';
    }
    return out;
}

void write_design_csv(const std::filesystem::path& path, const Design& design) {
    io::write_file_atomic(path, design_csv(design));
}

Design read_design_csv(const std::filesystem::path& path, const DesignSpace& space) {
    const auto table = io::read_csv(path);
    if (table.header != space.names()) throw DataError(path.string() + ": design header does not match dimension names");
    if (table.rows.empty()) throw DataError(path.string() + ": design has no points");
    const auto k = static_cast<Eigen::Index>(space.dims());
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(table.rows.size()), k);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (row.size() != space.dims())
            throw DataError(path.string() + ": line " + std::to_string(table.line_numbers[i]) + " has " +
                            std::to_string(row.size()) + " cells, expected " + std::to_string(space.dims()));
        for (Eigen::Index d = 0; d < k; ++d) {
            const auto v = io::parse_double(row[static_cast<std::size_t>(d)]);
            if (!v || !std::isfinite(*v))
                throw DataError(path.string() + ": line " + std::to_string(table.line_numbers[i]) +
                                ", column '" + space.names()[static_cast<std::size_t>(d)] + "': bad value '" +
                                row[static_cast<std::size_t>(d)] + "'");
            pts(static_cast<Eigen::Index>(i), d) = *v;
        }
    }
    return Design::from_physical(std::move(pts), space);
}

} // namespace ope
