// Sanity checks on the reference implementations themselves, against values
// worked out by hand.

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

using phenonote::Kernel;
using phenonote::KernelType;
using phenonote::Matrix;

TEST(OracleTest, EigenOfTwoByTwo) {
    const auto e = oracle::householder_ql(Matrix::from_rows({{2, 1}, {1, 2}}));
    ASSERT_EQ(e.values.size(), 2u);
    EXPECT_NEAR(e.values[0], 3.0, 1e-14);
    EXPECT_NEAR(e.values[1], 1.0, 1e-14);
    EXPECT_NEAR(std::abs(e.vectors[0][0]), std::sqrt(0.5), 1e-14);
    EXPECT_NEAR(e.vectors[0][0], e.vectors[0][1], 1e-14);
}

TEST(OracleTest, EigenReconstructsMatrix) {
    const Matrix a = Matrix::from_rows({{4, 1, -2, 2}, {1, 2, 0, 1}, {-2, 0, 3, -2}, {2, 1, -2, -1}});
    const auto e = oracle::householder_ql(a);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 4; ++k) {
                s += e.values[k] * e.vectors[k][i] * e.vectors[k][j];
            }
            EXPECT_NEAR(s, a(i, j), 1e-12);
        }
    }
}

TEST(OracleTest, ScanPrefersLongestAndNeedsBoundaries) {
    const std::vector<std::string> terms{"heart failure", "heart", "copd"};
    EXPECT_EQ(oracle::scan("congestive heart failure", terms), (std::vector<std::uint32_t>{0}));
    EXPECT_EQ(oracle::scan("copdx heart", terms), (std::vector<std::uint32_t>{1}));
    EXPECT_TRUE(oracle::scan("", terms).empty());
}

TEST(OracleTest, KnnForcedVote) {
    const Matrix pts = Matrix::from_rows({{0.1}, {0.2}, {0.3}, {9.0}});
    const std::vector<int> labels{0, 1, 1, 0};
    const std::vector<double> q{0.0};
    EXPECT_EQ(oracle::knn(pts, labels, q, 3, 2), 1);
    EXPECT_EQ(oracle::knn(pts, labels, q, 1, 2), 0);
}

TEST(OracleTest, GridDualOfSymmetricPair) {
    // x = +-1, linear kernel: objective 2a - 2a^2, maximized at a = 1/2.
    const Matrix x = Matrix::from_rows({{1.0}, {-1.0}});
    const std::vector<int> y{1, -1};
    const auto r = oracle::grid_dual(x, y, 1.0, Kernel{KernelType::Linear, 1.0});
    EXPECT_NEAR(r.objective, 0.5, 1e-9);
    EXPECT_NEAR(r.alpha[0], 0.5, 1e-6);
    EXPECT_NEAR(oracle::kkt_violation(x, y, r.alpha, 0.0, 1.0, Kernel{KernelType::Linear, 1.0}), 0.0, 1e-5);
}

TEST(OracleTest, PooledF1HandCount) {
    const std::vector<int> pred{0, 0, 1, 1};
    const std::vector<int> gold{0, 1, 1, 1};
    EXPECT_DOUBLE_EQ(oracle::pooled_f1(pred, gold, 2), 0.75);
}

TEST(OracleTest, RelativeErrorUsesFloor) {
    EXPECT_DOUBLE_EQ(oracle::max_relative_error({0.0}, {0.0}), 0.0);
    EXPECT_NEAR(oracle::max_relative_error({1.0}, {1.001}), 0.001 / 1.001, 1e-15);
}
