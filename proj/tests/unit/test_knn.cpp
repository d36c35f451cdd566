#include <gtest/gtest.h>

#include <numeric>

#include "oracles.hpp"
#include "phenonote/error.hpp"
#include "phenonote/knn.hpp"
#include "test_util.hpp"

using namespace phenonote;

namespace {

std::vector<int> random_labels(std::size_t n, std::size_t classes, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> out(n);
    for (int& l : out) {
        l = static_cast<int>(rng.index(classes));
    }
    return out;
}

}  // namespace

TEST(KnnTest, ExactMatchWithKOne) {
    const auto pts = testutil::random_matrix(10, 3, 1);
    const auto labels = random_labels(10, 3, 2);
    const KnnModel m(1, pts, labels, 3);
    EXPECT_EQ(m.predict(pts.row(5)), labels[5]);
}

TEST(KnnTest, ForcedVote) {
    const KnnModel m(3, Matrix::from_rows({{0.1}, {0.2}, {0.3}, {9.0}}), {0, 1, 1, 0});
    EXPECT_EQ(m.predict(std::vector<double>{0.0}), 1);
}

TEST(KnnTest, DistanceTieGoesToLowerIndex) {
    const KnnModel m(1, Matrix::from_rows({{1.0}, {-1.0}}), {1, 0});
    EXPECT_EQ(m.neighbors(std::vector<double>{0.0}), (std::vector<std::size_t>{0}));
    EXPECT_EQ(m.predict(std::vector<double>{0.0}), 1);
}

TEST(KnnTest, VoteTieGoesToLargerClassThenLowerIndex) {
    // Class 1 has more training points overall.
    const KnnModel a(2, Matrix::from_rows({{0.0}, {1.0}, {50.0}, {60.0}}), {0, 1, 1, 1});
    EXPECT_EQ(a.predict(std::vector<double>{0.5}), 1);
    const KnnModel b(2, Matrix::from_rows({{0.0}, {1.0}, {50.0}, {60.0}}), {1, 0, 0, 1});
    EXPECT_EQ(b.predict(std::vector<double>{0.5}), 0);
}

TEST(KnnTest, ConstructionErrors) {
    const auto pts = testutil::random_matrix(5, 2, 3);
    EXPECT_THROW(KnnModel(6, pts, {0, 1, 0, 1, 0}), DataError);
    EXPECT_THROW(KnnModel(0, pts, {0, 1, 0, 1, 0}), DataError);
    EXPECT_THROW(KnnModel(1, pts, {0, 1, 0}), DataError);
    EXPECT_THROW(KnnModel(1, pts, {0, 1, 0, 1, 2}, 2), DataError);
    const KnnModel ok(1, pts, {0, 1, 0, 1, 0});
    EXPECT_THROW(ok.predict(std::vector<double>{1.0}), DataError);
}

TEST(KnnTest, MatchesBruteForceOracle) {
    const auto pts = testutil::random_matrix(200, 7, 40);
    const auto labels = random_labels(200, 3, 41);
    const auto queries = testutil::random_matrix(50, 7, 42);
    for (std::size_t k : {1u, 5u, 27u}) {
        const KnnModel m(k, pts, labels, 3);
        for (std::size_t q = 0; q < 50; ++q) {
            ASSERT_EQ(m.predict(queries.row(q)), oracle::knn(pts, labels, queries.row(q), k, 3)) << k << "/" << q;
        }
    }
}

TEST(KnnTest, PermutationAndTranslationInvariance) {
    const auto pts = testutil::random_matrix(60, 4, 50);
    const auto labels = random_labels(60, 2, 51);
    const auto queries = testutil::random_matrix(20, 4, 52);
    const KnnModel base(7, pts, labels, 2);

    std::vector<std::size_t> perm(60);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(53);
    rng.shuffle(perm);
    Matrix pp(60, 4);
    Matrix shifted(60, 4);
    std::vector<int> pl(60);
    const double offset[] = {3.0, -2.0, 10.0, 0.5};
    for (std::size_t i = 0; i < 60; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            pp(i, j) = pts(perm[i], j);
            shifted(i, j) = pts(i, j) + offset[j];
        }
        pl[i] = labels[perm[i]];
    }
    const KnnModel permuted(7, pp, pl, 2);
    const KnnModel moved(7, shifted, labels, 2);
    for (std::size_t q = 0; q < 20; ++q) {
        std::vector<double> mq(queries.row(q).begin(), queries.row(q).end());
        for (std::size_t j = 0; j < 4; ++j) {
            mq[j] += offset[j];
        }
        EXPECT_EQ(permuted.predict(queries.row(q)), base.predict(queries.row(q)));
        EXPECT_EQ(moved.predict(mq), base.predict(queries.row(q)));
    }
}

TEST(KnnTest, JsonRoundTrip) {
    const KnnModel m(3, testutil::random_matrix(8, 2, 60), random_labels(8, 2, 61), 2);
    const auto back = knn_from_json(knn_to_json(m));
    EXPECT_EQ(back.k(), 3u);
    EXPECT_EQ(back.points(), m.points());
    EXPECT_EQ(back.labels(), m.labels());
    EXPECT_EQ(back.n_classes(), 2u);
}
