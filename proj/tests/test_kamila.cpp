#include <cmath>
#include <numbers>

#include <doctest.h>

#include "mixclust/distance_methods.hpp"
#include "mixclust/kamila.hpp"
#include "mixclust/metrics.hpp"
#include "support.hpp"

using namespace mixclust;
using mixclust::testing::make_dataset;

TEST_CASE("silverman bandwidth") {
    std::vector<double> s{1.0, 2.0, 3.0};
    // sd 1, IQR 2.5 - 1.5 = 1
    CHECK(RadialDensity::silverman_bandwidth(s) == doctest::Approx(0.9 * (1.0 / 1.34) * std::pow(3.0, -0.2)));
    std::vector<double> flat_iqr{0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 5.0};
    const double h = RadialDensity::silverman_bandwidth(flat_iqr);
    CHECK(h > 0.0);
    std::vector<double> constant{2.0, 2.0, 2.0};
    CHECK(RadialDensity::silverman_bandwidth(constant) == RadialDensity::kBandwidthFloor);
}

TEST_CASE("radial density matches a direct Gaussian kernel sum") {
    std::vector<double> r{0.2, 0.5, 0.9, 1.4, 2.0};
    auto kde = radial_kde(r, 1);
    const double h = kde.bandwidth();
    for (double x : {0.0, 0.7, 1.3, 3.0}) {
        double s = 0.0;
        for (double ri : r) s += std::exp(-0.5 * std::pow((x - ri) / h, 2)) / (h * std::sqrt(2.0 * std::numbers::pi));
        CHECK(kde.radial_density(x) == doctest::Approx(s / 5.0).epsilon(1e-12));
        CHECK(kde.radial_density_interpolated(x) == doctest::Approx(s / 5.0).epsilon(1e-3));
    }
    CHECK_THROWS_AS(radial_kde(std::vector<double>{1.0}, 1), DegenerateDataError);
    CHECK_THROWS_AS(radial_kde(r, 0), ConfigError);
    CHECK_THROWS_AS(radial_kde(std::vector<double>{1.0, -1.0}, 1), ValidationError);
}

TEST_CASE("density of a point mass sample peaks at that point") {
    std::vector<double> r(50, 1.5);
    r.push_back(1.49);
    auto kde = radial_kde(r, 1);
    CHECK(kde.radial_density(1.5) > kde.radial_density(1.2));
    CHECK(kde.radial_density(1.5) > kde.radial_density(1.8));
}

TEST_CASE("spherical correction") {
    std::vector<double> r{0.5, 1.0, 1.0, 1.5, 2.0, 2.5};
    auto one = radial_kde(r, 1);
    auto three = radial_kde(r, 3);
    for (double d : {0.5, 1.0, 2.0}) {
        CHECK(one.log_spherical_density(d) == doctest::Approx(std::log(one.radial_density_interpolated(d))));
        CHECK(three.log_spherical_density(d) == doctest::Approx(one.log_spherical_density(d) - 2.0 * std::log(d)));
    }
    // Equal radial density, farther point has lower spherical density in 3-D.
    CHECK(three.log_spherical_density(2.0) < three.log_spherical_density(1.0) + std::log(one.radial_density_interpolated(2.0)) -
                                                 std::log(one.radial_density_interpolated(1.0)));
}

TEST_CASE("kamila recovers separated groups") {
    auto g = mixclust::testing::two_groups(100, 2, 5.0, 0.9, 3);
    KamilaConfig c;
    c.k = 2;
    c.seed = 5;
    auto f = kamila_fit(g.data, c);
    CHECK(ari(g.truth, f.partition.labels) > 0.95);
    REQUIRE(f.prototypes.size() == 2);
    for (const auto& p : f.prototypes) {
        REQUIRE(p.level_freqs.size() == 1);
        double s = 0.0;
        for (double v : p.level_freqs[0]) s += v;
        CHECK(s == doctest::Approx(1.0));
    }
    CHECK(f.objective == doctest::Approx(f.trace.back()));
    CHECK(f.converged);
}

TEST_CASE("kamila agrees with k-means when the categorical column is constant") {
    auto g = mixclust::testing::two_groups(100, 3, 4.0, 1.0, 9);
    std::vector<std::vector<double>> cont(3);
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < g.data.rows(); ++i) cont[j].push_back(g.data.value(i, j));
    auto d = make_dataset(cont, {std::vector<int>(g.data.rows(), 0)});
    KamilaConfig c;
    c.k = 2;
    c.seed = 1;
    auto f = kamila_fit(d, c);
    KProtoConfig kc;
    kc.k = 2;
    kc.gamma = 0.0;
    kc.seed = 1;
    auto km = kprototypes_fit(d, kc);
    const auto& a = f.partition.labels;
    const auto& b = km.partition.labels;
    std::size_t same = 0, flipped = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same += a[i] == b[i];
        flipped += a[i] != b[i];
    }
    CHECK(static_cast<double>(std::max(same, flipped)) / static_cast<double>(a.size()) >= 0.95);
}

TEST_CASE("kamila is insensitive to level names") {
    auto g = mixclust::testing::two_groups(80, 2, 5.0, 0.85, 12);
    std::vector<std::vector<double>> cont(2);
    std::vector<int> codes, swapped;
    for (std::size_t i = 0; i < g.data.rows(); ++i) {
        for (std::size_t j = 0; j < 2; ++j) cont[j].push_back(g.data.value(i, j));
        codes.push_back(g.data.code(i, 2));
        swapped.push_back(1 - g.data.code(i, 2));
    }
    KamilaConfig c;
    c.k = 2;
    auto a = kamila_fit(make_dataset(cont, {codes}), c);
    auto b = kamila_fit(make_dataset(cont, {swapped}), c);
    CHECK(ari(a.partition.labels, b.partition.labels) == 1.0);
    CHECK(a.objective == doctest::Approx(b.objective));
}

TEST_CASE("kamila input checks") {
    KamilaConfig c;
    CHECK_THROWS_AS(kamila_fit(make_dataset({}, {{0, 1, 0}}), c), ConfigError);
    c.k = 4;
    CHECK_THROWS_AS(kamila_fit(make_dataset({{0.0, 1.0, 2.0}}, {{0, 1, 0}}), c), ConfigError);
    c.k = 2;
    c.smoothing = -1.0;
    CHECK_THROWS_AS(kamila_fit(make_dataset({{0.0, 1.0, 2.0}}, {{0, 1, 0}}), c), ConfigError);
}
