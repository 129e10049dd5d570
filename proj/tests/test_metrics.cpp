#include <random>

#include <doctest.h>

#include "mixclust/metrics.hpp"
#include "oracles.hpp"

using namespace mixclust;

TEST_CASE("contingency tabulates label pairs") {
    auto t = contingency(std::vector<int>{1, 1, 2, 2}, std::vector<int>{1, 1, 2, 2});
    CHECK(t.counts == std::vector<std::vector<std::int64_t>>{{2, 0}, {0, 2}});
    t = contingency(std::vector<int>{1, 1, 1, 1}, std::vector<int>{1, 2, 1, 2});
    CHECK(t.counts == std::vector<std::vector<std::int64_t>>{{2, 2}});
    t = contingency(std::vector<int>{1, 1, 1, 2, 2, 2}, std::vector<int>{1, 1, 2, 2, 3, 3});
    CHECK(t.counts == std::vector<std::vector<std::int64_t>>{{2, 1, 0}, {0, 1, 2}});
    CHECK(t.row_sums == std::vector<std::int64_t>{3, 3});
    CHECK(t.col_sums == std::vector<std::int64_t>{2, 2, 2});
    CHECK(t.total == 6);
    CHECK_THROWS_AS(contingency(std::vector<int>{1, 2}, std::vector<int>{1}), ValidationError);
}

TEST_CASE("ari examples") {
    CHECK(ari(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 0, 1, 1}) == 1.0);
    CHECK(ari(std::vector<int>{1, 1, 2, 2}, std::vector<int>{2, 2, 1, 1}) == 1.0);
    CHECK(ari(std::vector<int>{1, 1, 1, 2, 2, 2}, std::vector<int>{1, 1, 2, 2, 3, 3}) == doctest::Approx(0.2424).epsilon(1e-4));
    CHECK_THROWS_AS(ari(std::vector<int>{1}, std::vector<int>{1}), DegenerateDataError);
    CHECK_THROWS_AS(ari(std::vector<int>{1, 2}, std::vector<int>{1}), ValidationError);
}

TEST_CASE("degenerate partitions") {
    std::vector<int> one{0, 0, 0, 0};
    std::vector<int> split{0, 1, 0, 1};
    CHECK(ari(one, one) == 1.0);
    CHECK(ami(one, one) == 1.0);
    CHECK(ami(one, split) == 0.0);
    CHECK(ami(split, one) == 0.0);
    std::vector<int> singletons{0, 1, 2, 3};
    CHECK(ari(singletons, std::vector<int>{5, 6, 7, 8}) == 1.0);
    CHECK(ami(singletons, std::vector<int>{5, 6, 7, 8}) == 1.0);
}

TEST_CASE("ami examples") {
    CHECK(ami(std::vector<int>{0, 0, 1, 1, 2}, std::vector<int>{0, 0, 1, 1, 2}) == doctest::Approx(1.0));
    std::vector<int> a{1, 1, 1, 2, 2, 2}, b{1, 1, 2, 2, 3, 3};
    CHECK(ami(a, b) == doctest::Approx(oracle::ami(a, b)).epsilon(1e-12));
    auto t = contingency(a, b);
    CHECK(expected_mutual_information(t) == doctest::Approx(oracle::expected_mutual_information(a, b)).epsilon(1e-12));
    CHECK(mutual_information(t) == doctest::Approx(oracle::mutual_information(a, b)).epsilon(1e-12));
}

TEST_CASE("ami normaliser variants are ordered") {
    std::vector<int> a{0, 0, 0, 1, 1, 1, 2, 2}, b{0, 0, 1, 1, 1, 2, 2, 2};
    const double mx = ami(a, b, AmiNormalizer::max);
    const double ar = ami(a, b, AmiNormalizer::arithmetic);
    const double mn = ami(a, b, AmiNormalizer::min);
    const double ge = ami(a, b, AmiNormalizer::geometric);
    CHECK(mx <= ar + 1e-12);
    CHECK(ge <= ar + 1e-12);
    CHECK(ar <= mn + 1e-12);
}

TEST_CASE("oracle agreement on random small partitions") {
    std::mt19937_64 rng(12345);
    std::uniform_int_distribution<std::size_t> size(2, 8);
    std::uniform_int_distribution<int> clusters(1, 4);
    for (int t = 0; t < 200; ++t) {
        const auto n = size(rng);
        auto a = oracle::random_labels(n, clusters(rng), rng);
        auto b = oracle::random_labels(n, clusters(rng), rng);
        CAPTURE(t);
        CHECK(std::abs(ari(a, b) - oracle::ari(a, b)) <= 1e-12);
        CHECK(std::abs(ami(a, b) - oracle::ami(a, b)) <= 1e-12);
    }
}

TEST_CASE("symmetry and relabelling invariance") {
    std::mt19937_64 rng(77);
    for (int t = 0; t < 100; ++t) {
        auto a = oracle::random_labels(40, 4, rng);
        auto b = oracle::random_labels(40, 3, rng);
        auto relabelled = a;
        for (int& l : relabelled) l = 100 - l;
        CHECK(ari(a, b) == doctest::Approx(ari(b, a)).epsilon(1e-12));
        CHECK(ami(a, b) == doctest::Approx(ami(b, a)).epsilon(1e-12));
        CHECK(ari(relabelled, b) == doctest::Approx(ari(a, b)).epsilon(1e-12));
        CHECK(ami(relabelled, b) == doctest::Approx(ami(a, b)).epsilon(1e-12));
        CHECK(ari(a, b) <= 1.0);
        CHECK(ari(a, b) >= -1.0);
        CHECK(ami(a, b) <= 1.0 + 1e-12);
    }
}

TEST_CASE("ari of independent partitions averages near zero") {
    std::mt19937_64 rng(2024);
    double total = 0.0;
    for (int t = 0; t < 1000; ++t) total += ari(oracle::random_labels(100, 3, rng), oracle::random_labels(100, 3, rng));
    CHECK(std::abs(total / 1000.0) < 0.02);
}

TEST_CASE("expected mutual information at larger n stays finite and below the entropies") {
    std::mt19937_64 rng(5);
    auto a = oracle::random_labels(2000, 10, rng);
    auto b = oracle::random_labels(2000, 7, rng);
    auto t = contingency(a, b);
    const double emi = expected_mutual_information(t);
    CHECK(std::isfinite(emi));
    CHECK(emi > 0.0);
    CHECK(emi < entropy(t.col_sums, t.total));
    CHECK(std::abs(ami(a, b)) < 0.01);
}
