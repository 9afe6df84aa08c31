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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <boost/math/quadrature/gauss.hpp>
#include <gtest/gtest.h>

#include "ope/basis.hpp"
#include "ope/design.hpp"
#include "ope/errors.hpp"
#include "ope/kernel.hpp"
#include "ope/rng.hpp"

using namespace ope;

namespace {

void expect_stratified(const Design& d) {
    const auto n = static_cast<Eigen::Index>(d.size());
    for (Eigen::Index c = 0; c < d.unit_points.cols(); ++c) {
        std::vector<long> strata;
        for (Eigen::Index i = 0; i < n; ++i) strata.push_back(static_cast<long>(std::floor(d.unit_points(i, c) * n)));
        std::sort(strata.begin(), strata.end());
        for (long i = 0; i < n; ++i) ASSERT_EQ(strata[static_cast<std::size_t>(i)], i) << "column " << c;
    }
}

} // namespace

TEST(Rng, UniformRangeAndDeterminism) {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform01();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        ASSERT_EQ(u, b.uniform01());
    }
    Rng c(1);
    for (int i = 0; i < 1000; ++i) ASSERT_LT(c.below(7), 7u);
    EXPECT_NE(mix_seed(5, 0), mix_seed(5, 1));
}

TEST(DesignSpace, RejectsInvertedBoundsByName) {
    try {
        DesignSpace({{0.0, 1.0}, {2.0, 2.0}}, {"a", "speed"});
        FAIL() << "expected InvalidArgument";
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("speed"), std::string::npos);
    }
}

TEST(DesignSpace, UnitRoundTrip) {
    const auto space = DesignSpace::landslide();
    const Design d = lhd(25, space, 9);
    const Eigen::MatrixXd back = space.to_unit(space.to_physical(d.unit_points));
    EXPECT_LE((back - d.unit_points).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((space.to_physical(d.unit_points) - d.points).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Lhd, TwoPointsOneDimension) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Design d = lhd(2, DesignSpace::unit_cube(1), seed);
        const double lo = std::min(d.unit_points(0, 0), d.unit_points(1, 0));
        const double hi = std::max(d.unit_points(0, 0), d.unit_points(1, 0));
        EXPECT_LT(lo, 0.5);
        EXPECT_GE(hi, 0.5);
        EXPECT_LT(hi, 1.0);
    }
}

TEST(Lhd, FortyPointsStratifiedInLandslideBox) {
    const auto space = DesignSpace::landslide();
    const Design d = lhd(40, space, 1);
    ASSERT_EQ(d.points.rows(), 40);
    ASSERT_EQ(d.points.cols(), 3);
    expect_stratified(d);
    for (Eigen::Index i = 0; i < 40; ++i) EXPECT_TRUE(space.contains(d.points.row(i)));
}

TEST(Lhd, DeterministicUnderSeed) {
    const auto space = DesignSpace::unit_cube(2);
    EXPECT_EQ(lhd(5, space, 77).points, lhd(5, space, 77).points);
    EXPECT_NE(lhd(5, space, 77).points, lhd(5, space, 78).points);
}

TEST(Lhd, RejectsEmpty) { EXPECT_THROW(lhd(0, DesignSpace::unit_cube(2), 1), InvalidArgument); }

TEST(Maximin, SingleCandidateIsPlainLhd) {
    const auto space = DesignSpace::landslide();
    const auto r = maximin_lhd(10, space, 123, 1);
    EXPECT_EQ(r.design.points, lhd(10, space, 123).points);
    EXPECT_EQ(r.swaps, 0u);
}

TEST(Maximin, TwoPointsSeparated) {
    const auto r = maximin_lhd(2, DesignSpace::unit_cube(1), 4, 20);
    EXPECT_GE(r.min_distance, 0.5);
}

TEST(Maximin, DominatesEveryCandidate) {
    const auto space = DesignSpace::landslide();
    const std::uint64_t seed = 11;
    const auto r = maximin_lhd(40, space, seed, 30);
    double best = min_pairwise_distance(lhd(40, space, seed).unit_points);
    for (std::size_t j = 1; j < 30; ++j)
        best = std::max(best, min_pairwise_distance(lhd(40, space, mix_seed(seed, j)).unit_points));
    EXPECT_GE(r.min_distance, best);
    EXPECT_DOUBLE_EQ(r.best_candidate_distance, best);
    EXPECT_DOUBLE_EQ(r.min_distance, min_pairwise_distance(r.design.unit_points));
    expect_stratified(r.design);
}

TEST(Maximin, Deterministic) {
    const auto space = DesignSpace::landslide();
    EXPECT_EQ(maximin_lhd(12, space, 5, 8).design.points, maximin_lhd(12, space, 5, 8).design.points);
}

TEST(RegularGrid, Corners) {
    const Design d = regular_grid({2, 2, 2}, DesignSpace::unit_cube(3));
    ASSERT_EQ(d.size(), 8u);
    std::set<std::vector<double>> seen;
    for (Eigen::Index i = 0; i < 8; ++i) {
        for (Eigen::Index c = 0; c < 3; ++c) EXPECT_TRUE(d.points(i, c) == 0.0 || d.points(i, c) == 1.0);
        seen.insert({d.points(i, 0), d.points(i, 1), d.points(i, 2)});
    }
    EXPECT_EQ(seen.size(), 8u);
}

TEST(RegularGrid, CollapsingProjections) {
    const Design d = regular_grid({3, 3, 3}, DesignSpace::landslide());
    ASSERT_EQ(d.size(), 27u);
    for (Eigen::Index c = 0; c < 3; ++c) {
        std::set<double> v(d.points.col(c).data(), d.points.col(c).data() + 27);
        EXPECT_EQ(v.size(), 3u);
    }
}

TEST(RegularGrid, EndpointsAndErrors) {
    const Design d = regular_grid({2}, DesignSpace({{-3.0, 1.0}}, {"x0"}));
    EXPECT_EQ(d.points(0, 0), -3.0);
    EXPECT_EQ(d.points(1, 0), 1.0);
    EXPECT_THROW(regular_grid({1, 3}, DesignSpace::unit_cube(2)), InvalidArgument);
    EXPECT_THROW(regular_grid({3}, DesignSpace::unit_cube(2)), InvalidArgument);
}

TEST(DesignCsv, RoundTrip) {
    const auto space = DesignSpace::landslide();
    const Design d = lhd(7, space, 3);
    const auto path = std::filesystem::temp_directory_path() / "ope_design_roundtrip.csv";
    write_design_csv(path, d);
    const Design back = read_design_csv(path, space);
    EXPECT_EQ(back.points, d.points);
    std::filesystem::remove(path);
}

TEST(InputBasis, EndpointValues) {
    const InputBasis ib(DesignSpace::landslide());
    ASSERT_EQ(ib.size(), 7u);
    Eigen::Vector3d lo(-3.0, 1.0, 0.5), hi(1.0, 2.0, 3.0);
    const Eigen::VectorXd g0 = ib.eval(lo), g1 = ib.eval(hi);
    EXPECT_EQ(g0(0), 1.0);
    for (int i = 1; i < 7; ++i) EXPECT_EQ(g0(i), 0.0);
    for (int d = 0; d < 3; ++d) {
        EXPECT_NEAR(g1(1 + 2 * d), std::sqrt(3.0), 1e-15);
        EXPECT_NEAR(g1(2 + 2 * d), std::sqrt(5.0), 1e-15);
    }
    EXPECT_FALSE(ib.extrapolates(lo));
    EXPECT_TRUE(ib.extrapolates(Eigen::Vector3d(1.5, 1.5, 1.0)));
}

TEST(InputBasis, PairsOrthonormalNotOrthogonalToConstant) {
    using boost::math::quadrature::gauss;
    const InputBasis ib(DesignSpace::unit_cube(1));
    auto p = [&](double u, int j) { return ib.eval(Eigen::VectorXd::Constant(1, u))(j); };
    const double n1 = gauss<double, 20>::integrate([&](double u) { return p(u, 1) * p(u, 1); }, 0.0, 1.0);
    const double n2 = gauss<double, 20>::integrate([&](double u) { return p(u, 2) * p(u, 2); }, 0.0, 1.0);
    const double x12 = gauss<double, 20>::integrate([&](double u) { return p(u, 1) * p(u, 2); }, 0.0, 1.0);
    const double c1 = gauss<double, 20>::integrate([&](double u) { return p(u, 1); }, 0.0, 1.0);
    EXPECT_NEAR(n1, 1.0, 1e-12);
    EXPECT_NEAR(n2, 1.0, 1e-12);
    EXPECT_NEAR(x12, 0.0, 1e-12);
    EXPECT_NEAR(c1, std::sqrt(3.0) / 2.0, 1e-12);
}

TEST(OutputBasis, KnownValues) {
    const OutputBasis ob;
    ASSERT_EQ(ob.size(), 11u);
    const Eigen::VectorXd g0 = ob.eval(0.0);
    for (int i = 0; i < 11; ++i) EXPECT_EQ(g0(i), (i % 2 == 0) ? 1.0 : 0.0);
    const Eigen::VectorXd g6 = ob.eval(6.0);
    EXPECT_NEAR(g6(1), 0.0, 1e-14);
    EXPECT_NEAR(g6(2), 1.0, 1e-14);
    EXPECT_NEAR(ob.eval(1.5)(1), 1.0, 1e-15);
    for (double t = 0.0; t < 40.0; t += 0.37) EXPECT_LE(ob.eval(t).tail(10).cwiseAbs().maxCoeff(), 1.0);
    EXPECT_THROW(OutputBasis({0.5, 0.5}), InvalidArgument);
    EXPECT_THROW(OutputBasis({-0.5}), InvalidArgument);
}

TEST(RegressorMatrices, ShapesAndKroneckerRows) {
    const auto space = DesignSpace::landslide();
    const InputBasis ib(space);
    const OutputBasis ob;
    const Design d = lhd(40, space, 2);
    Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(176, 0.0, 35.0);
    const auto g = regressor_matrices(d.points, times, ib, ob);
    EXPECT_EQ(g.Gr.rows(), 40);
    EXPECT_EQ(g.Gr.cols(), 7);
    EXPECT_EQ(g.Gs.rows(), 176);
    EXPECT_EQ(g.Gs.cols(), 11);
    EXPECT_EQ(g.size(), 77u);
    EXPECT_TRUE((g.Gr.col(0).array() == 1.0).all());

    const Design small = lhd(3, space, 4);
    const Eigen::Vector4d t4(0.0, 0.7, 1.9, 3.3);
    const auto gs = regressor_matrices(small.points, t4, ib, ob);
    const Eigen::MatrixXd q = gs.materialize();
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 4; ++j) {
            const Eigen::VectorXd gr = ib.eval(small.points.row(i).transpose());
            const Eigen::VectorXd gt = ob.eval(t4(j));
            for (Eigen::Index a = 0; a < 7; ++a)
                for (Eigen::Index b = 0; b < 11; ++b) ASSERT_EQ(q(i * 4 + j, a * 11 + b), gr(a) * gt(b));
        }
}

TEST(RegressorMatrices, LowerCornerAtTimeZero) {
    const auto space = DesignSpace::landslide();
    Eigen::MatrixXd p(1, 3);
    p << -3.0, 1.0, 0.5;
    const auto g = regressor_matrices(p, Eigen::VectorXd::Zero(1), InputBasis(space), OutputBasis());
    const Eigen::MatrixXd q = g.materialize();
    ASSERT_EQ(q.rows(), 1);
    ASSERT_EQ(q.cols(), 77);
    for (Eigen::Index c = 0; c < 77; ++c) EXPECT_EQ(q(0, c), (c < 11 && c % 2 == 0) ? 1.0 : 0.0) << c;
    EXPECT_THROW(regressor_matrices(Eigen::MatrixXd(0, 3), Eigen::VectorXd::Zero(1), InputBasis(space), OutputBasis()),
                 InvalidArgument);
    EXPECT_THROW(regressor_matrices(p, Eigen::VectorXd(0), InputBasis(space), OutputBasis()), InvalidArgument);
}

TEST(Kernel, KnownValues) {
    KernelSpec k{{0.7, 0.2, 0.5}, 1.3, 1.5};
    const Eigen::Vector3d r(0.1, 1.2, 1.0);
    EXPECT_EQ(kr(r, r, k), 1.0);
    EXPECT_NEAR(kr(r, r + Eigen::Vector3d(0.7, 0.0, 0.0), k), 0.36787944117144233, 1e-15);
    EXPECT_EQ(ks(2.0, 2.0, k), 1.0);
    EXPECT_NEAR(ks(2.0, 3.3, k), 0.36787944117144233, 1e-15);
    EXPECT_NEAR(ks(0.0, 2.6, k), 0.059105746561956225, 1e-15);
    KernelSpec wide{{1e12, 1e12, 1e12}, 1.0, 1.5};
    EXPECT_NEAR(kr(r, r + Eigen::Vector3d(1.0, 1.0, 1.0), wide), 1.0, 1e-12);
}

TEST(Kernel, MonotoneInDistance) {
    KernelSpec k{{0.5}, 1.0, 1.5};
    double prev = 1.0;
    for (int i = 1; i < 50; ++i) {
        const double v = kr(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 0.05 * i), k);
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(Kernel, ValidateRejects) {
    EXPECT_THROW((KernelSpec{{-1.0}, 1.0, 1.5}.validate()), InvalidArgument);
    EXPECT_THROW((KernelSpec{{1.0}, 0.0, 1.5}.validate()), InvalidArgument);
    EXPECT_THROW((KernelSpec{{1.0}, 1.0, 2.5}.validate()), InvalidArgument);
    EXPECT_NO_THROW((KernelSpec{{1.0}, 1.0, 2.0}.validate()));
}

TEST(KernelMatrices, SingletonAndSymmetry) {
    KernelSpec k{{0.7, 0.2, 0.5}, 1.3, 1.5};
    Eigen::MatrixXd one(1, 3);
    one << 0.0, 1.5, 1.0;
    const auto km = kernel_matrices(one, Eigen::VectorXd::Zero(1), k, 1e-8);
    EXPECT_EQ(km.Kr(0, 0), 1.0 + 1e-8);

    Eigen::MatrixXd three(3, 3);
    three << -1.0, 1.5, 1.0, 0.0, 1.5, 1.0, 1.0, 1.5, 1.0;
    const Eigen::MatrixXd raw = input_correlation(three, k);
    EXPECT_LE((raw - raw.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(raw(i, i), 1.0);
    EXPECT_EQ(raw(0, 1), raw(1, 2));
}

TEST(KernelMatrices, DuplicatePointsFailWithoutJitter) {
    KernelSpec k{{0.7, 0.2, 0.5}, 1.3, 1.5};
    Eigen::MatrixXd dup(2, 3);
    dup << 0.0, 1.5, 1.0, 0.0, 1.5, 1.0;
    try {
        kernel_matrices(dup, Eigen::Vector2d(0.0, 1.0), k, 0.0);
        FAIL() << "expected NumericalDegeneracy";
    } catch (const NumericalDegeneracy& e) {
        EXPECT_NE(std::string(e.what()).find("Kr"), std::string::npos);
    }
    EXPECT_NO_THROW(kernel_matrices(dup, Eigen::Vector2d(0.0, 1.0), k, 1e-8));
}

TEST(KernelMatrices, DerivativeMatchesFiniteDifference) {
    KernelSpec k{{0.7, 0.4, 0.9}, 1.3, 1.5};
    const Design d = lhd(5, DesignSpace::landslide(), 8);
    for (std::size_t dim = 0; dim < 3; ++dim) {
        const double h = 1e-6 * k.input_lengths[dim];
        KernelSpec kp = k, km = k;
        kp.input_lengths[dim] += h;
        km.input_lengths[dim] -= h;
        const Eigen::MatrixXd fd = (input_correlation(d.points, kp) - input_correlation(d.points, km)) / (2 * h);
        EXPECT_LE((fd - input_correlation_derivative(d.points, k, dim)).cwiseAbs().maxCoeff(), 1e-7);
    }
    const Eigen::Vector4d t(0.0, 0.4, 1.1, 2.5);
    KernelSpec kp = k, km = k;
    kp.time_length += 1e-6;
    km.time_length -= 1e-6;
    const Eigen::MatrixXd fd = (time_correlation(t, kp) - time_correlation(t, km)) / 2e-6;
    EXPECT_LE((fd - time_correlation_derivative(t, k)).cwiseAbs().maxCoeff(), 1e-7);
}
