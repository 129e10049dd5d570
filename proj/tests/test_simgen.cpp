#include <cmath>
#include <map>
#include <set>

#include <doctest.h>

#include "expdiff_check.hpp"
#include "mixclust/simgen.hpp"

using namespace mixclust;

namespace {

double cell(const MixedDataset& d, std::size_t i, std::size_t j) {
    return d.column(j).is_categorical() ? static_cast<double>(d.code(i, j)) : d.value(i, j);
}

bool same_data(const MixedDataset& a, const MixedDataset& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (cell(a, i, j) != cell(b, i, j)) return false;
    return true;
}

// Full node rows (C, X1..X6) for an M3 sample.
std::vector<double> m3_row(const GeneratedData& g, std::size_t i) {
    std::vector<double> row{static_cast<double>(g.truth.labels[i])};
    for (std::size_t j = 0; j < g.data.cols(); ++j)
        row.push_back(cell(g.data, i, j));
    return row;
}

// Checks the per-configuration means of a continuous node against its regressions.
void check_conditional_means(const ClgNetwork& net, std::size_t node, const std::vector<std::vector<double>>& rows) {
    std::map<std::size_t, std::pair<double, double>> acc;  // configuration -> (sum, count)
    for (const auto& r : rows) {
        auto& a = acc[net.configuration(node, r)];
        a.first += r[node];
        a.second += 1.0;
    }
    for (const auto& [c, a] : acc) {
        if (a.second < 20) continue;
        const auto& reg = net.nodes[node].regressions[c];
        CAPTURE(node);
        CAPTURE(c);
        CHECK(std::abs(a.first / a.second - reg.intercept) <= 3.0 * std::sqrt(reg.variance / a.second));
    }
}

}  // namespace

TEST_CASE("m1 layout and determinism") {
    M1Config c;
    c.k = 3;
    c.overlap = 0.2;
    c.dimension = 4;
    CHECK(m1_continuous_means(c, 0) == std::vector<double>{0.0, 10.0});
    CHECK(m1_continuous_means(c, 1)[0] == doctest::Approx(4.0));
    CHECK(m1_continuous_means(c, 2)[1] == doctest::Approx(18.0));
    c.overlap = 1.0;
    CHECK(m1_continuous_means(c, 2) == m1_continuous_means(c, 0));
    std::vector<double> latent{-0.7, -0.2};
    CHECK(latent_to_level(latent) == 0);
    std::vector<double> second{-0.7, 0.2};
    CHECK(latent_to_level(second) == 2);

    M1Config d;
    d.cluster_size = 50;
    d.seed = 9;
    auto a = gen_m1(d);
    auto b = gen_m1(d);
    CHECK(same_data(a.data, b.data));
    CHECK(a.truth.labels == b.truth.labels);
    CHECK(validate(a.data).empty());
    d.seed = 10;
    CHECK_FALSE(same_data(a.data, gen_m1(d).data));
}

TEST_CASE("m1 cluster means and modal levels") {
    M1Config c;
    c.k = 3;
    c.cluster_size = 3000;
    c.overlap = 0.6;
    c.seed = 1;
    auto g = gen_m1(c);
    const int r = c.continuous_count();
    for (int k = 0; k < c.k; ++k) {
        const auto means = m1_continuous_means(c, k);
        std::vector<double> sum(static_cast<std::size_t>(r), 0.0);
        std::vector<std::vector<int>> counts(static_cast<std::size_t>(c.categorical_count()), std::vector<int>(static_cast<std::size_t>(c.levels), 0));
        double n = 0.0;
        for (std::size_t i = 0; i < g.data.rows(); ++i) {
            if (g.truth.labels[i] != k) continue;
            n += 1.0;
            for (int j = 0; j < r; ++j) sum[static_cast<std::size_t>(j)] += g.data.value(i, static_cast<std::size_t>(j));
            for (int j = 0; j < c.categorical_count(); ++j) ++counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(g.data.code(i, static_cast<std::size_t>(r + j)))];
        }
        CHECK(n == 3000.0);
        for (int j = 0; j < r; ++j) CHECK(std::abs(sum[static_cast<std::size_t>(j)] / n - means[static_cast<std::size_t>(j)]) <= 3.0 / std::sqrt(n));
        for (const auto& col : counts)
            CHECK(static_cast<int>(std::max_element(col.begin(), col.end()) - col.begin()) == m1_preferred_level(c, k));
    }
}

TEST_CASE("exponential-difference density") {
    ExpDiffParams l{1.3, 0.05, 20.0, 1.0};
    const double x0 = std::log(20.0 / 1.3) / 0.95;
    CHECK(x0 == doctest::Approx(2.874).epsilon(1e-3));
    CHECK(expdiff_support(l).first == doctest::Approx(x0));
    auto s = sample_expdiff(l, 20000, 3);
    CHECK(s.values.size() == 20000);
    for (double v : s.values) CHECK(v >= x0 - 1e-12);
    CHECK(s.acceptance_rate > 0.0);
    CHECK(s.acceptance_rate <= 1.0);

    auto chi = oracle::expdiff_chi_square(l, s.values, 30);
    CHECK(expdiff_normalizer(l) == doctest::Approx(chi.normalizer).epsilon(1e-8));
    CHECK(chi.p_value > 0.001);

    ExpDiffParams e{1.0, 1.0, 0.0, 1.0};
    auto plain = sample_expdiff(e, 40000, 5);
    double mean = 0.0;
    for (double v : plain.values) mean += v;
    mean /= 40000.0;
    CHECK(std::abs(mean - 1.0) <= 3.0 / std::sqrt(40000.0));
    CHECK(plain.acceptance_rate == 1.0);

    CHECK_THROWS_AS(check_expdiff({1.0, 1.0, 2.0, 0.5}), DegenerateDataError);
    CHECK_THROWS_AS(check_expdiff({-1.0, 1.0, 2.0, 0.5}), ConfigError);
}

TEST_CASE("m2 columns and frequencies") {
    auto c = M2Config::defaults(2);
    c.dimension = 6;
    CHECK(c.continuous_count() == 2);
    CHECK(c.binary_count() == 2);
    CHECK(c.nominal_count() == 2);
    CHECK(c.clusters[0].bernoulli == 0.64);

    c.n = 20000;
    c.seed = 4;
    auto g = gen_m2(c);
    CHECK(validate(g.data).empty());
    for (int k = 0; k < 2; ++k) {
        const auto& cl = c.clusters[static_cast<std::size_t>(k)];
        double n = 0.0, ones = 0.0;
        std::vector<double> levels(kM2NominalLevels, 0.0);
        for (std::size_t i = 0; i < g.data.rows(); ++i) {
            if (g.truth.labels[i] != k) continue;
            n += 1.0;
            ones += g.data.code(i, 2);
            levels[static_cast<std::size_t>(g.data.code(i, 4))] += 1.0;
        }
        CHECK(n == 10000.0);
        CHECK(std::abs(ones / n - cl.bernoulli) <= 3.0 * std::sqrt(cl.bernoulli * (1 - cl.bernoulli) / n));
        for (std::size_t l = 0; l < levels.size(); ++l) {
            const double p = cl.nominal[l];
            CHECK(std::abs(levels[l] / n - p) <= 3.0 * std::sqrt(p * (1 - p) / n) + 1e-12);
        }
    }

    std::vector<double> pi{0.2, 0.8};
    CHECK(largest_remainder_sizes(pi, 300) == std::vector<std::size_t>{60, 240});
    std::vector<double> thirds{1.0 / 3, 1.0 / 3, 1.0 / 3};
    CHECK(largest_remainder_sizes(thirds, 100) == std::vector<std::size_t>{34, 33, 33});

    auto bad = M2Config::defaults(2);
    bad.clusters[0].nominal.push_back(0.0);
    CHECK_THROWS_AS(gen_m2(bad), ConfigError);
    auto three = M2Config::defaults(3);
    for (const auto& cl : three.clusters) CHECK(cl.nominal.size() == kM2NominalLevels);
    CHECK_THROWS_AS(M2Config::defaults(4), ConfigError);
}

TEST_CASE("m3 network layout and conditional means") {
    std::mt19937_64 rng(0);
    auto net = m3_network(2, rng);
    std::vector<double> x3, x6;
    for (const auto& r : net.nodes[3].regressions) x3.push_back(r.intercept);
    for (const auto& r : net.nodes[6].regressions) x6.push_back(r.intercept);
    CHECK(x3 == std::vector<double>{0.5, 1.0, 1.5, 2.0, 2.5, 3.0});
    CHECK(x6 == std::vector<double>{9.0, 10.0});
    for (std::size_t j : {3, 4, 6})
        for (const auto& r : net.nodes[j].regressions) {
            const double sd = std::sqrt(r.variance);
            CHECK(sd >= 0.5 - 1e-9);
            CHECK(sd <= 1.5 + 1e-9);
        }

    MbnSimConfig c;
    c.n = 6000;
    c.seed = 13;
    auto g = gen_m3(c);
    CHECK(validate(g.data).empty());
    std::mt19937_64 again(c.seed);
    auto used = m3_network(c.k, again);
    std::vector<std::vector<double>> rows;
    double first = 0.0;
    for (std::size_t i = 0; i < g.data.rows(); ++i) {
        rows.push_back(m3_row(g, i));
        first += g.truth.labels[i] == 0;
    }
    CHECK(std::abs(first / 6000.0 - 0.5) <= 3.0 * std::sqrt(2.0 / 6000.0) / 2.0);
    for (std::size_t node : {3, 4, 6}) check_conditional_means(used, node, rows);
}

TEST_CASE("m4 component layout and conditional means") {
    std::mt19937_64 rng(0);
    auto nets = m4_networks(2, rng);
    std::vector<double> x3;
    for (const auto& r : nets[0].nodes[2].regressions) x3.push_back(r.intercept);
    CHECK(x3 == std::vector<double>{2.0, 3.0, 4.0});
    CHECK(nets[1].nodes[5].regressions[0].intercept == 13.0);
    CHECK(nets[1].nodes[3].regressions[0].intercept == 9.0);

    MbnSimConfig c;
    c.n = 8000;
    c.seed = 21;
    auto g = gen_m4(c);
    CHECK(validate(g.data).empty());
    std::mt19937_64 again(c.seed);
    auto used = m4_networks(c.k, again);
    for (int k = 0; k < 2; ++k) {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < g.data.rows(); ++i) {
            if (g.truth.labels[i] != k) continue;
            std::vector<double> row;
            for (std::size_t j = 0; j < g.data.cols(); ++j)
                row.push_back(cell(g.data, i, j));
            rows.push_back(std::move(row));
        }
        CHECK(std::abs(static_cast<double>(rows.size()) - 4000.0) <= 3.0 * std::sqrt(8000.0 * 0.25));
        for (std::size_t node : {2, 3, 5}) check_conditional_means(used[static_cast<std::size_t>(k)], node, rows);
    }
    MbnSimConfig bad;
    bad.k = 1;
    CHECK_THROWS_AS(gen_m4(bad), ConfigError);
}
