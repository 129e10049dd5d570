#include <cmath>
#include <numbers>
#include <numeric>

#include <doctest.h>

#include "mixclust/lcm.hpp"
#include "mixclust/metrics.hpp"
#include "mixclust/simgen.hpp"
#include "support.hpp"

using namespace mixclust;
using mixclust::testing::make_dataset;

namespace {

double normal_pdf(double x, double mean, double var) {
    return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

LcmParams two_class_params() {
    LcmParams p;
    p.mixing = {0.3, 0.7};
    p.means.resize(2, 1);
    p.means << 0.0, 2.0;
    p.variances.resize(2, 1);
    p.variances << 1.0, 0.5;
    p.theta = {{{0.8, 0.2}}, {{0.25, 0.75}}};
    return p;
}

}  // namespace

TEST_CASE("single class log-likelihood examples") {
    LcmParams p;
    p.mixing = {1.0};
    p.means.resize(1, 0);
    p.variances.resize(1, 0);
    p.theta = {{{0.9, 0.1}}};
    auto d = make_dataset({}, {{0, 0, 0, 0}});
    CHECK(lcm_loglik(d, p) == doctest::Approx(4.0 * std::log(0.9)));

    LcmParams q;
    q.mixing = {1.0};
    q.means = Eigen::MatrixXd::Zero(1, 1);
    q.variances = Eigen::MatrixXd::Ones(1, 1);
    q.theta = {{}};
    auto c = make_dataset({{0.0}}, {});
    CHECK(lcm_loglik(c, q) == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)));
}

TEST_CASE("log-likelihood matches a direct mixture sum") {
    auto d = make_dataset({{-0.5, 1.0, 2.5}}, {{0, 1, 1}});
    auto p = two_class_params();
    double expected = 0.0;
    const double x[3] = {-0.5, 1.0, 2.5};
    const int w[3] = {0, 1, 1};
    for (int i = 0; i < 3; ++i) {
        double s = 0.0;
        for (int c = 0; c < 2; ++c) s += p.mixing[c] * normal_pdf(x[i], p.means(c, 0), p.variances(c, 0)) * p.theta[c][0][w[i]];
        expected += std::log(s);
    }
    CHECK(lcm_loglik(d, p) == doctest::Approx(expected).epsilon(1e-12));
    auto joint = lcm_log_joint(d, p);
    CHECK(joint(0, 1) == doctest::Approx(std::log(0.7 * normal_pdf(-0.5, 2.0, 0.5) * 0.25)));

    auto wrong = p;
    wrong.theta[0].clear();
    CHECK_THROWS_AS(lcm_loglik(d, wrong), ValidationError);
}

TEST_CASE("lcm separates groups driven by one binary column") {
    std::vector<int> w, truth;
    std::vector<double> v;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z(0.0, 1.0);
    std::bernoulli_distribution agree(0.95);
    for (int i = 0; i < 400; ++i) {
        const int g = i % 2;
        truth.push_back(g);
        v.push_back(z(rng) + 3.0 * g);
        w.push_back(agree(rng) ? g : 1 - g);
    }
    auto d = make_dataset({v}, {w});
    LcmConfig c;
    c.k = 2;
    c.seed = 8;
    auto m = lcm_fit_model(d, c);
    CHECK(ari(truth, m.fit.partition.labels) >= 0.7);
    double total = std::accumulate(m.params.mixing.begin(), m.params.mixing.end(), 0.0);
    CHECK(total == doctest::Approx(1.0));
    for (double a : m.params.mixing) CHECK(a > 0.0);
    CHECK(m.fit.details.at("loglik") == doctest::Approx(lcm_loglik(d, m.params)));
    CHECK(m.fit.objective == doctest::Approx(m.fit.details.at("loglik") + lcm_log_prior(m.params, c.smoothing)));
    REQUIRE(m.fit.partition.soft);
    for (Eigen::Index i = 0; i < m.fit.partition.soft->rows(); ++i)
        CHECK(m.fit.partition.soft->row(i).sum() == doctest::Approx(1.0));
}

TEST_CASE("EM objective and log-likelihood never decrease") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        M1Config m;
        m.k = 2;
        m.cluster_size = 80;
        m.overlap = 0.6;
        m.seed = seed;
        auto g = gen_m1(m);
        LcmConfig c;
        c.k = 2;
        c.n_init = 2;
        c.seed = seed;
        auto r = lcm_fit_model(g.data, c);
        CAPTURE(seed);
        REQUIRE(r.loglik_trace.size() == r.fit.trace.size());
        for (std::size_t t = 1; t < r.fit.trace.size(); ++t) {
            CHECK(r.fit.trace[t] >= r.fit.trace[t - 1] - 1e-8 * std::abs(r.fit.trace[t - 1]));
            CHECK(r.loglik_trace[t] >= r.loglik_trace[t - 1] - 1e-8 * std::abs(r.loglik_trace[t - 1]));
        }
        CHECK(r.fit.trace == r.loglik_trace);

        // With smoothing, EM ascends the penalised objective instead.
        c.smoothing = 1.0;
        auto smoothed = lcm_fit_model(g.data, c);
        for (std::size_t t = 1; t < smoothed.fit.trace.size(); ++t)
            CHECK(smoothed.fit.trace[t] >= smoothed.fit.trace[t - 1] - 1e-8 * std::abs(smoothed.fit.trace[t - 1]));
    }
}

TEST_CASE("row order does not change the fitted likelihood") {
    auto g = mixclust::testing::two_groups(60, 2, 4.0, 0.9, 5);
    std::vector<std::size_t> order(g.data.rows());
    std::iota(order.begin(), order.end(), 0);
    std::reverse(order.begin(), order.end());
    auto reversed = g.data.subset(order);
    LcmConfig c;
    c.k = 2;
    auto a = lcm_fit_model(g.data, c);
    auto b = lcm_fit_model(reversed, c);
    CHECK(a.fit.details.at("loglik") == doctest::Approx(b.fit.details.at("loglik")).epsilon(1e-6));
    CHECK(lcm_loglik(reversed, a.params) == doctest::Approx(a.fit.details.at("loglik")).epsilon(1e-12));
}

TEST_CASE("refinement starts from the given parameters") {
    auto d = make_dataset({{-0.5, 1.0, 2.5, 0.1, 1.9, 2.2}}, {{0, 1, 1, 0, 1, 1}});
    auto p = two_class_params();
    LcmConfig c;
    c.k = 2;
    c.max_iter = 1;
    auto r = lcm_refine(d, p, c);
    CHECK(r.fit.details.at("loglik") >= lcm_loglik(d, p) - 1e-9);
    c.k = 3;
    CHECK_THROWS_AS(lcm_refine(d, p, c), ValidationError);
}

TEST_CASE("lcm input checks") {
    auto d = make_dataset({{0.0, 1.0}}, {{0, 1}});
    LcmConfig c;
    c.k = 3;
    CHECK_THROWS_AS(lcm_fit(d, c), ConfigError);
    c.k = 0;
    CHECK_THROWS_AS(lcm_fit(d, c), ConfigError);
    c.k = 2;
    c.smoothing = -1;
    CHECK_THROWS_AS(lcm_fit(d, c), ConfigError);
}
