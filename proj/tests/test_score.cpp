#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "minegap/score.hpp"

using namespace minegap;

namespace {

EmbeddingVector basis(std::size_t d, std::size_t i) {
    EmbeddingVector v(d, 0.0);
    v[i] = 1.0;
    return v;
}

SimilarityMatrix matrix(std::size_t n, const std::vector<double>& entries) {
    return SimilarityMatrix(n, entries);
}

}  // namespace

TEST_CASE("cosine similarity on unit vectors") {
    CHECK(cosine_similarity(basis(3, 0), basis(3, 0)) == doctest::Approx(1.0));
    CHECK(cosine_similarity(basis(3, 0), basis(3, 1)) == doctest::Approx(0.0));
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(cosine_similarity({r, r}, {1.0, 0.0}) == doctest::Approx(0.70710678).epsilon(1e-8));
}

TEST_CASE("cosine similarity error paths") {
    CHECK_THROWS_AS(cosine_similarity({1.0, 0.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(cosine_similarity({0.0, 0.0}, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("cosine similarity symmetric and scale invariant") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int i = 0; i < 200; ++i) {
        EmbeddingVector u(8), v(8);
        for (auto& x : u) x = g(rng);
        for (auto& x : v) x = g(rng);
        const double c = cosine_similarity(u, v);
        CHECK(cosine_similarity(v, u) == doctest::Approx(c).epsilon(1e-12));
        EmbeddingVector u2 = u;
        for (auto& x : u2) x *= 3.7;
        CHECK(cosine_similarity(u2, v) == doctest::Approx(c).epsilon(1e-9));
        CHECK(c >= -1.0);
        CHECK(c <= 1.0);
    }
}

TEST_CASE("percentile index anchors") {
    CHECK(percentile_index(15, 25) == 4);
    CHECK(percentile_index(15, 0) == 1);
    CHECK(percentile_index(4, 25) == 1);
    CHECK(percentile_index(5, 20) == 1);
    CHECK(percentile_index(1, 100) == 1);
    CHECK(percentile_index(15, 100) == 15);
    CHECK_THROWS_AS(percentile_index(15, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(percentile_index(15, 100.5), std::invalid_argument);
    CHECK_THROWS_AS(percentile_index(0, 25), std::invalid_argument);
}

TEST_CASE("kth_smallest basics") {
    CHECK(kth_smallest({3, 1, 2}, 2) == 2);
    CHECK(kth_smallest({3, 1, 2}, 1) == 1);
    CHECK(kth_smallest({5, 5, 1}, 2) == 5);
    CHECK_THROWS_AS(kth_smallest({}, 1), std::invalid_argument);
    CHECK_THROWS_AS(kth_smallest({1.0}, 2), std::invalid_argument);
}

TEST_CASE("kth_smallest equals full-sort oracle") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> values(1 + rng() % 50);
        for (auto& v : values) v = static_cast<double>(rng() % 100) / 10.0;
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t k = 1 + rng() % values.size();
        CHECK(kth_smallest(values, k) == sorted[k - 1]);
    }
}

TEST_CASE("similarity matrix validation") {
    CHECK_THROWS(matrix(2, {1, 0, 0}));            // wrong count
    CHECK_THROWS(matrix(1, {1.5}));                // out of range
    CHECK_NOTHROW(matrix(1, {1.0 + 5e-7}));        // within float drift tolerance
}

TEST_CASE("build_similarity_matrix small cases") {
    const auto e1 = basis(3, 0), e2 = basis(3, 1);
    const SimilarityMatrix id2 = build_similarity_matrix({e1, e2}, {e1, e2});
    CHECK(id2.at(0, 0) == doctest::Approx(1.0));
    CHECK(id2.at(0, 1) == doctest::Approx(0.0));
    CHECK(id2.at(1, 1) == doctest::Approx(1.0));

    const SimilarityMatrix one = build_similarity_matrix({e1}, {e1});
    CHECK(one.at(0, 0) == doctest::Approx(1.0));

    const SimilarityMatrix dup = build_similarity_matrix({e1, e2}, {e1, e1});
    CHECK(dup.at(0, 0) == doctest::Approx(1.0));
    CHECK(dup.at(0, 1) == doctest::Approx(1.0));
    CHECK(dup.at(1, 0) == doctest::Approx(0.0));
    CHECK(dup.at(1, 1) == doctest::Approx(0.0));

    CHECK_THROWS(build_similarity_matrix({e1}, {e1, e2}));
}

TEST_CASE("bias score hand-computed cases") {
    const BiasBreakdown all_ones = bias_score(matrix(3, std::vector<double>(9, 1.0)), 25);
    CHECK(all_ones.bias == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> id4(16, 0.0);
    for (int i = 0; i < 4; ++i) id4[i * 4 + i] = 1.0;
    const BiasBreakdown identity = bias_score(matrix(4, id4), 25);
    CHECK(identity.bias == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(identity.k == 1);

    std::vector<double> hot(16, 0.0);
    for (int j = 0; j < 4; ++j) hot[j] = 1.0;  // row 0 all ones
    const BiasBreakdown hotrow = bias_score(matrix(4, hot), 25);
    CHECK(hotrow.bias == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(hotrow.missed_concepts_score == doctest::Approx(0.0));
    CHECK(hotrow.least_aligned_score == doctest::Approx(1.0));
    REQUIRE(hotrow.missed_variation_indices.size() == 1);
    CHECK(hotrow.missed_variation_indices[0] == 1);  // tie broken by lowest index
}

TEST_CASE("bias score rejects a degenerate matrix") {
    CHECK_THROWS_AS(bias_score(matrix(2, {0, 0, 0, 0}), 25), std::domain_error);
    CHECK_THROWS_AS(bias_score(matrix(2, {0.5, -0.5, -0.5, 0.5}), 25), std::domain_error);
}

TEST_CASE("bias breakdown identity holds exactly") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + rng() % 10;
        std::vector<double> entries(n * n);
        for (auto& v : entries) v = 0.01 + 0.99 * static_cast<double>(rng() % 1000) / 1000.0;
        const BiasBreakdown b = bias_score(matrix(n, entries), 25);
        const double recomposed =
            0.5 * (b.missed_concepts_score + b.least_aligned_score) / b.mean_similarity;
        CHECK(std::abs(b.bias - recomposed) < 1e-12);
        CHECK(b.missed_variation_indices.size() == b.k);
        CHECK(b.least_aligned_image_indices.size() == b.k);
    }
}

TEST_CASE("bias score properties: permutation, scale, alpha monotonicity") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + rng() % 18;
        std::vector<double> entries(n * n);
        for (auto& v : entries) v = 0.001 + 0.999 * static_cast<double>(rng() % 10000) / 10000.0;
        const SimilarityMatrix S = matrix(n, entries);
        const double base = bias_score(S, 25).bias;

        // Row and column permutation.
        std::vector<std::size_t> rp(n), cp(n);
        for (std::size_t i = 0; i < n; ++i) rp[i] = cp[i] = i;
        std::shuffle(rp.begin(), rp.end(), rng);
        std::shuffle(cp.begin(), cp.end(), rng);
        std::vector<double> permuted(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                permuted[rp[i] * n + cp[j]] = S.at(i, j);
        CHECK(std::abs(bias_score(matrix(n, permuted), 25).bias - base) < 1e-9);

        // Positive scaling.
        std::vector<double> scaled(entries);
        for (auto& v : scaled) v *= 0.5;
        CHECK(std::abs(bias_score(matrix(n, scaled), 25).bias - base) < 1e-9);

        // Alpha monotonicity.
        double prev = -1e300;
        for (double alpha : {0.0, 10.0, 25.0, 50.0, 75.0, 100.0}) {
            const double cur = bias_score(S, alpha).bias;
            CHECK(cur >= prev);
            prev = cur;
        }
    }
}

TEST_CASE("constant positive matrix scores exactly 1") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng() % 12;
        const double v = 0.05 + 0.9 * static_cast<double>(rng() % 100) / 100.0;
        const double alpha = static_cast<double>(rng() % 101);
        CHECK(bias_score(matrix(n, std::vector<double>(n * n, v)), alpha).bias ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("mse objective") {
    CHECK(mse_objective({1, 2, 3}, {1, 2, 3}) == doctest::Approx(0.0));
    CHECK(mse_objective({0, 0, 0, 0}, {1, 1, 1, 1}) == doctest::Approx(1.0));
    CHECK(mse_objective({0, 0}, {3, 4}) == doctest::Approx(12.5));
    CHECK_THROWS_AS(mse_objective({1, 2}, {1, 2, 3}), std::invalid_argument);
}
