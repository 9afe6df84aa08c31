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
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ope {

struct Interval {
    double lower = 0.0;
    double upper = 1.0;

    double width() const { return upper - lower; }
    bool contains(double v) const { return v >= lower && v <= upper; }
};

/// Axis-aligned box of simulator inputs.
class DesignSpace {
public:
    DesignSpace() = default;
    /// Throws InvalidArgument naming the first dimension with lower >= upper.
    DesignSpace(std::vector<Interval> bounds, std::vector<std::string> names);

    /// x0 in [-3, 1], u0 in [1, 2], c in [0.5, 3].
    static DesignSpace landslide();
    static DesignSpace unit_cube(std::size_t k);

    std::size_t dims() const { return m_bounds.size(); }
    const std::vector<Interval>& bounds() const { return m_bounds; }
    const Interval& bound(std::size_t d) const { return m_bounds.at(d); }
    const std::vector<std::string>& names() const { return m_names; }

    double to_unit(std::size_t d, double value) const;
    double to_physical(std::size_t d, double unit) const;
    Eigen::MatrixXd to_unit(const Eigen::MatrixXd& points) const;
    Eigen::MatrixXd to_physical(const Eigen::MatrixXd& unit_points) const;
    bool contains(const Eigen::Ref<const Eigen::RowVectorXd>& point) const;
    bool contains(const DesignSpace& inner) const;

private:
    std::vector<Interval> m_bounds;
    std::vector<std::string> m_names;
};

/// n points in a DesignSpace, kept in both physical and unit-cube coordinates.
struct Design {
    Eigen::MatrixXd points;      // n x k, physical units
    Eigen::MatrixXd unit_points; // n x k, in [0,1]^k
    DesignSpace space;
    std::uint64_t seed = 0;

    std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
    static Design from_physical(Eigen::MatrixXd points, DesignSpace space, std::uint64_t seed = 0);
};

/// Random Latin hypercube. Column d is drawn as a Fisher-Yates permutation
/// p of 0..n-1 followed by n uniforms v_i; unit value i is (p_i + v_i) / n.
/// Columns are drawn in order from one Rng(seed) stream.
Design lhd(std::size_t n, const DesignSpace& space, std::uint64_t seed);

struct MaximinResult {
    Design design;
    double min_distance = 0.0;        // unit scale
    double best_candidate_distance = 0.0;
    std::size_t best_candidate = 0;
    std::size_t swaps = 0;
};

/// Best of `candidates` random LHDs by minimum pairwise unit-scale distance,
/// then coordinate-swap hill climbing on the closest pair. Candidate 0 uses
/// `seed` itself, candidate j > 0 uses mix_seed(seed, j); ties go to the lowest
/// index. With a single candidate the plain LHD is returned unchanged.
MaximinResult maximin_lhd(std::size_t n, const DesignSpace& space, std::uint64_t seed,
                          std::size_t candidates);

/// Full factorial grid with levels[d] equally spaced values per dimension,
/// endpoints included. The last dimension varies fastest.
Design regular_grid(const std::vector<std::size_t>& levels, const DesignSpace& space);

double min_pairwise_distance(const Eigen::MatrixXd& points);

void write_design_csv(const std::filesystem::path& path, const Design& design);
std::string design_csv(const Design& design);
/// Reads a design CSV whose header must equal space.names().
Design read_design_csv(const std::filesystem::path& path, const DesignSpace& space);

} // namespace ope
