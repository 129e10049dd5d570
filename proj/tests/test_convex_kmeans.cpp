#include <doctest.h>

#include "mixclust/distance_methods.hpp"
#include "mixclust/metrics.hpp"
#include "mixclust/simgen.hpp"
#include "support.hpp"

using namespace mixclust;
using mixclust::testing::make_dataset;

TEST_CASE("weight grid") {
    auto g = convex_kmeans_grid(20);
    REQUIRE(g.size() == 20);
    CHECK(g.front() == doctest::Approx(1.0 / 21.0));
    CHECK(g.back() == doctest::Approx(20.0 / 21.0));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] - g[i - 1] == doctest::Approx(1.0 / 21.0));
    CHECK_THROWS_AS(convex_kmeans_grid(1), ConfigError);
}

TEST_CASE("levels equal to clusters leave no admissible weight") {
    // Four level combinations, one per cluster, with continuous values fixed per combination.
    std::vector<double> v;
    std::vector<int> a, b;
    for (int rep = 0; rep < 5; ++rep)
        for (int c = 0; c < 4; ++c) {
            v.push_back(10.0 * c);
            a.push_back(c / 2);
            b.push_back(c % 2);
        }
    auto d = make_dataset({v}, {a, b});
    ConvexKmConfig c;
    c.k = 4;
    c.grid_size = 5;
    c.n_init = 5;
    auto path = convex_kmeans_path(d, c);
    for (const auto& pt : path) CHECK_FALSE(pt.admissible);
    CHECK_THROWS_AS(convex_kmeans_fit(d, c), DegenerateDataError);
}

TEST_CASE("distortion never increases for a fixed weight") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        M1Config m;
        m.k = 3;
        m.cluster_size = 50;
        m.overlap = 0.6;
        m.seed = seed;
        auto g = gen_m1(m);
        ConvexKmConfig c;
        c.k = 3;
        c.grid_size = 4;
        c.n_init = 1;
        c.seed = seed;
        for (const auto& pt : convex_kmeans_path(g.data, c)) {
            const auto& t = pt.fit.trace;
            for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] <= t[i - 1] + 1e-9 * std::abs(t[i - 1]));
            if (pt.admissible) {
                CHECK(pt.w_con > 0.0);
                CHECK(pt.q == doctest::Approx((pt.w_con / pt.b_con) * (pt.w_cat / pt.b_cat)));
            }
        }
    }
}

TEST_CASE("convex k-means picks the admissible minimum of Q") {
    auto g = mixclust::testing::two_groups(80, 2, 5.0, 0.9, 6);
    ConvexKmConfig c;
    c.k = 2;
    c.grid_size = 6;
    c.seed = 2;
    auto path = convex_kmeans_path(g.data, c);
    const ConvexKmGridPoint* best = nullptr;
    double best_ari = -1.0;
    for (const auto& pt : path) {
        if (pt.admissible && (!best || pt.q < best->q)) best = &pt;
        best_ari = std::max(best_ari, ari(g.truth, pt.fit.partition.labels));
    }
    REQUIRE(best);
    auto f = convex_kmeans_fit(g.data, c);
    CHECK(f.details.at("q") == doctest::Approx(best->q));
    CHECK(f.details.at("alpha_cont") == doctest::Approx(best->alpha_cont));
    CHECK(f.partition.labels == best->fit.partition.labels);
    CHECK(best_ari > 0.95);
    const double a = f.details.at("alpha_cont");
    CHECK(a > 0.0);
    CHECK(a < 1.0);
}

TEST_CASE("convex k-means input checks") {
    auto only_cont = make_dataset({{1.0, 2.0, 3.0}}, {});
    ConvexKmConfig c;
    CHECK_THROWS_AS(convex_kmeans_fit(only_cont, c), ConfigError);
    auto mixed = make_dataset({{1.0, 2.0, 3.0}}, {{0, 1, 1}});
    c.k = 5;
    CHECK_THROWS_AS(convex_kmeans_fit(mixed, c), ConfigError);
}
