#include <gtest/gtest.h>

#include "oracles.hpp"
#include "xlmimo/spectral.hpp"
#include "xlmimo/synth.hpp"

#include <cmath>
#include <random>

using namespace xlmimo;

namespace {

IfMatrix single_target(double omega_theta, double omega_r, double alpha, int m, int n) {
    Scenario s;
    s.params = RadarParams::make(77e9, alpha, 50e-6, m, n);
    s.targets = {Target::at_normalized(omega_theta, omega_r)};
    return alpha == 0.0 ? synth_narrowband(s) : synth_wideband(s);
}

double frac(double x) { return x - std::floor(x); }

}  // namespace

TEST(Dirichlet, PeakAtZero) {
    EXPECT_NEAR(std::abs(dirichlet<double>(8, 0.0)), std::sqrt(8.0), 1e-15);
    EXPECT_NEAR(dirichlet<double>(8, 3.0).real(), std::sqrt(8.0), 1e-15);
}

TEST(Dirichlet, VanishesOnNonzeroBins) {
    for (int k = 1; k < 8; ++k) EXPECT_LT(std::abs(dirichlet<double>(8, k / 8.0)), 1e-12);
}

TEST(Dirichlet, MatchesBruteForceSum) {
    EXPECT_LT(std::abs(dirichlet<double>(4, 0.1) - oracle::dirichlet_sum(4, 0.1)), 1e-14);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> x(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const int L = 1 + static_cast<int>(rng() % 40);
        const double v = x(rng);
        EXPECT_LT(std::abs(dirichlet<double>(L, v) - oracle::dirichlet_sum(L, v)), 1e-11);
    }
}

TEST(Dirichlet, BoundedBySqrtL) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> x(0.001, 0.999);
    for (int i = 0; i < 500; ++i) {
        const int L = 2 + static_cast<int>(rng() % 64);
        EXPECT_LT(std::abs(dirichlet<double>(L, x(rng))), std::sqrt(static_cast<double>(L)));
    }
    EXPECT_THROW(dirichlet<double>(0, 0.1), std::invalid_argument);
}

TEST(DftAxis, OnGridToneLandsInOneBin) {
    const int L = 16;
    const int k = 5;
    CMatrix y(L, 1);
    for (int l = 0; l < L; ++l) y(l, 0) = oracle::cis(static_cast<double>(k * l) / L);
    const CMatrix f = dft_axis(y, Axis::Antenna);
    for (int q = 0; q < L; ++q) EXPECT_NEAR(std::abs(f(q, 0)), q == k ? std::sqrt(16.0) : 0.0, 1e-10);

    const CMatrix row = y.transpose();
    const CMatrix g = dft_axis(row, Axis::Time);
    EXPECT_NEAR(std::abs(g(0, k)), 4.0, 1e-10);
}

TEST(DftAxis, ZeroStaysZero) {
    EXPECT_EQ(dft_axis(CMatrix::Zero(6, 5), Axis::Antenna).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(dft_2d(CMatrix::Zero(6, 5)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(DftAxis, MatchesDirectTransform) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    CMatrix y(7, 5);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = {g(rng), g(rng)};
    const CMatrix by_col = dft_axis(y, Axis::Antenna);
    for (Eigen::Index c = 0; c < 5; ++c) {
        std::vector<oracle::cd> col(7);
        for (int r = 0; r < 7; ++r) col[r] = y(r, c);
        const auto ref = oracle::dft(col);
        for (int r = 0; r < 7; ++r) EXPECT_LT(std::abs(by_col(r, c) - ref[r]), 1e-12);
    }
}

TEST(DftAxis, Parseval) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    CMatrix y(8, 8);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = {g(rng), g(rng)};
    EXPECT_NEAR(dft_axis(y, Axis::Antenna).norm(), y.norm(), 1e-12 * y.norm());
    EXPECT_NEAR(dft_axis(y, Axis::Time).norm(), y.norm(), 1e-12 * y.norm());
    EXPECT_NEAR(dft_2d(y).norm(), y.norm(), 1e-12 * y.norm());
}

TEST(DftAxis, SynthesisUndoesAnalysis) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    for (int L : {3, 8, 31, 64}) {
        CMatrix y(L, 4);
        for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = {g(rng), g(rng)};
        const CMatrix back = dft_axis(dft_axis(y, Axis::Antenna), Axis::Antenna, DftDirection::Synthesis);
        EXPECT_LT((back - y).norm(), 1e-9 * y.norm());
    }
}

TEST(AngleTimeMap, NarrowbandTraceIsFlat) {
    const auto map = angle_time_map(single_target(0.3, 0.2, 0.0, 64, 64).data);
    EXPECT_EQ(map.row_axis, MapAxis::AngleBin);
    EXPECT_EQ(map.col_axis, MapAxis::TimeIndex);
    const auto peaks = column_peaks(map.data);
    for (auto p : peaks) EXPECT_EQ(p, peaks.front());
}

TEST(AngleTimeMap, BoresightTraceAtBinZero) {
    const auto map = angle_time_map(single_target(0.0, 0.4, 0.3, 64, 64).data);
    for (auto p : column_peaks(map.data)) EXPECT_EQ(p, 0);
}

TEST(AngleTimeMap, BeamSquintDriftAcrossChirp) {
    const auto map = angle_time_map(single_target(0.4, 0.2, 0.2, 256, 256).data);
    const auto peaks = column_peaks(map.data);
    const double expected = 256 * 0.2 * 0.4 * 255.0 / 256.0;
    EXPECT_NEAR(static_cast<double>(peaks.back() - peaks.front()), expected, 1.0);
}

TEST(RangeAntennaMap, NarrowbandTraceIsFlat) {
    const auto map = range_antenna_map(single_target(0.3, 0.2, 0.0, 64, 64).data);
    EXPECT_EQ(map.row_axis, MapAxis::AntennaIndex);
    EXPECT_EQ(map.col_axis, MapAxis::RangeBin);
    const auto peaks = row_peaks(map.data);
    for (auto q : peaks) EXPECT_EQ(q, peaks.front());
}

TEST(RangeAntennaMap, MigrationAcrossAperture) {
    const auto map = range_antenna_map(single_target(0.5, 0.3, 0.2, 256, 256).data);
    const auto peaks = row_peaks(map.data);
    EXPECT_NEAR(static_cast<double>(peaks.back() - peaks.front()), 0.2 * 0.5 * 255, 1.0);
}

TEST(RangeAntennaMap, BoresightHasNoMigration) {
    const auto map = range_antenna_map(single_target(0.0, 0.3, 0.3, 128, 128).data);
    const auto peaks = row_peaks(map.data);
    for (auto q : peaks) EXPECT_EQ(q, peaks.front());
}

TEST(DistortionLaws, PeakTracesFollowSquintAndMigration) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> alpha(0.05, 0.3);
    std::uniform_real_distribution<double> theta(0.05, 0.5);
    std::uniform_real_distribution<double> range(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int M = 64 << (trial % 3);
        const int N = 64 << ((trial + 1) % 3);
        const double a = alpha(rng), w = theta(rng), r = range(rng);
        const auto y = single_target(w, r, a, M, N).data;
        const auto p = column_peaks(angle_time_map(y).data);
        for (int n = 0; n < N; ++n)
            EXPECT_LE(circular_distance(static_cast<double>(p[n]) / M, frac(w * (1.0 + a * n / N))), 1.0 / M);
        const auto q = row_peaks(range_antenna_map(y).data);
        for (int m = 0; m < M; ++m)
            EXPECT_LE(circular_distance(static_cast<double>(q[m]) / N, frac(r + a * w * m / N)), 1.0 / N);
    }
}

TEST(RangeAngleMap, OnGridNarrowbandConcentrates) {
    const auto map = range_angle_map(single_target(10.0 / 32, 7.0 / 32, 0.0, 32, 32).data);
    const double total = map.data.squaredNorm();
    EXPECT_GE(map.data(10, 7) * map.data(10, 7), 0.99 * total);
    EXPECT_EQ((map.data.array() >= 0.99 * map.data.maxCoeff()).count(), 1);
}

TEST(RangeAngleMap, WidebandSpreadIsBalanced) {
    for (double w : {0.3, 0.4, 0.5}) {
        const auto map = range_angle_map(single_target(w, 0.25, 0.2, 256, 256).data);
        const auto e = half_power_extent(map);
        ASSERT_GT(e.rows, 1);
        ASSERT_GT(e.cols, 1);
        const double ratio = static_cast<double>(e.rows) / static_cast<double>(e.cols);
        EXPECT_GT(ratio, 0.8);
        EXPECT_LT(ratio, 1.25);
    }
}

TEST(RangeAngleMap, ZeroInZeroOut) {
    const auto map = range_angle_map(CMatrix::Zero(8, 8));
    EXPECT_EQ(map.data.maxCoeff(), 0.0);
    const auto e = half_power_extent(map);
    EXPECT_EQ(e.rows, 0);
}

TEST(Peaks, LowestIndexWinsTies) {
    RMatrix m = RMatrix::Zero(4, 3);
    m(1, 0) = 2.0;
    m(3, 0) = 2.0;
    m(2, 2) = 1.0;
    const auto cp = column_peaks(m);
    EXPECT_EQ(cp[0], 1);
    EXPECT_EQ(cp[1], 0);
    EXPECT_EQ(cp[2], 2);
    const auto rp = row_peaks(m);
    EXPECT_EQ(rp[0], 0);
    EXPECT_EQ(rp[2], 2);
}

TEST(MapView, ParsesNames) {
    EXPECT_EQ(parse_map_view("range_angle"), MapView::RangeAngle);
    EXPECT_EQ(parse_map_view("angle_time"), MapView::AngleTime);
    EXPECT_EQ(parse_map_view("range_antenna"), MapView::RangeAntenna);
    EXPECT_THROW(parse_map_view("doppler"), std::invalid_argument);
    const auto y = single_target(0.1, 0.1, 0.0, 8, 8).data;
    EXPECT_EQ(make_map(y, MapView::AngleTime).col_axis, MapAxis::TimeIndex);
}

TEST(Templates, FloatScalarWorks) {
    EXPECT_NEAR(std::abs(dirichlet<float>(8, 0.0f)), std::sqrt(8.0f), 1e-6f);
    const CMatrixX<float> f = dft_matrix<float>(4);
    EXPECT_NEAR((f.adjoint() * f - CMatrixX<float>::Identity(4, 4)).norm(), 0.0f, 1e-6f);
}
