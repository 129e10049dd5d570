#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "mixclust/core.hpp"
#include "support.hpp"

using namespace mixclust;
using mixclust::testing::make_dataset;

namespace {

MixedDataset four_rows() {
    std::vector<ColumnSchema> schema{ColumnSchema::continuous("x"), ColumnSchema::nominal("c", {"A", "B"}),
                                     ColumnSchema::ordinal("o", {"lo", "mid", "hi"})};
    MixedDataset d(schema, 4);
    const double xs[] = {0.5, 1.5, -2.0, 3.0};
    const char* cs[] = {"A", "B", "B", "A"};
    const char* os[] = {"lo", "hi", "mid", "lo"};
    for (std::size_t i = 0; i < 4; ++i) {
        d.set_value(i, 0, xs[i]);
        d.set_label(i, 1, cs[i]);
        d.set_label(i, 2, os[i]);
    }
    return d;
}

}  // namespace

TEST_CASE("validate accepts a well formed dataset") {
    auto d = four_rows();
    CHECK(validate(d).empty());
    CHECK_NOTHROW(require_valid(d));
}

TEST_CASE("validate reports an undeclared level") {
    auto d = four_rows();
    d.set_label(2, 1, "Z");
    auto v = validate(d);
    REQUIRE(v.size() == 1);
    CHECK(v[0].row == 2);
    CHECK(v[0].column == "c");
    CHECK_THROWS_AS(require_valid(d), ValidationError);
}

TEST_CASE("validate reports non-finite continuous cells") {
    auto d = four_rows();
    d.set_value(1, 0, std::numeric_limits<double>::quiet_NaN());
    auto v = validate(d);
    REQUIRE(v.size() == 1);
    CHECK(v[0].reason == "non-finite");
    CHECK(v[0].row == 1);
}

TEST_CASE("validate checks schema invariants") {
    MixedDataset one_level({ColumnSchema::nominal("c", {"A"})}, 2);
    CHECK_FALSE(validate(one_level).empty());
    MixedDataset dup_levels({ColumnSchema::nominal("c", {"A", "A"})}, 2);
    CHECK_FALSE(validate(dup_levels).empty());
    MixedDataset empty({ColumnSchema::continuous("x")}, 0);
    CHECK_FALSE(validate(empty).empty());
}

TEST_CASE("validate is idempotent") {
    auto d = four_rows();
    d.set_label(0, 1, "Q");
    auto a = validate(d);
    auto b = validate(d);
    REQUIRE(a.size() == b.size());
    CHECK(a[0].reason == b[0].reason);
    CHECK(a[0].row == b[0].row);
}

TEST_CASE("one_hot encodes indicators and passes continuous columns through") {
    MixedDataset d({ColumnSchema::nominal("c", {"A", "B", "C"})}, 1);
    d.set_label(0, 0, "B");
    auto oh = one_hot(d);
    REQUIRE(oh.matrix.cols() == 3);
    CHECK(oh.matrix(0, 0) == 0.0);
    CHECK(oh.matrix(0, 1) == 1.0);
    CHECK(oh.matrix(0, 2) == 0.0);

    auto cont = make_dataset({{1.0, 2.0}, {3.0, 4.0}}, {});
    auto oc = one_hot(cont);
    CHECK(oc.matrix.cols() == 2);
    CHECK(oc.matrix(1, 1) == 4.0);

    auto two_bin = make_dataset({}, {{0, 1, 1}, {1, 1, 0}});
    auto ob = one_hot(two_bin);
    CHECK(ob.matrix.cols() == 4);
    for (Eigen::Index i = 0; i < ob.matrix.rows(); ++i) {
        CHECK(ob.matrix(i, 0) + ob.matrix(i, 1) == 1.0);
        CHECK(ob.matrix(i, 2) + ob.matrix(i, 3) == 1.0);
    }
    CHECK(ob.columns[2].source == 1);
    CHECK(ob.columns[3].level == 1);
}

TEST_CASE("column_stats follows the scale rule") {
    auto d = make_dataset({{0.0, 10.0}, {-0.05, 0.05}, {0.1, 0.1}, {-0.1, -0.1}}, {{0, 0}});
    auto s = column_stats(d);
    CHECK(s[0].mean == doctest::Approx(5.0));
    CHECK(s[0].range == doctest::Approx(10.0));
    CHECK(s[0].scale == doctest::Approx(5.0));
    CHECK(s[0].variance == doctest::Approx(50.0));
    CHECK(s[1].mean == doctest::Approx(0.0));
    CHECK(s[1].scale == 1.0);
    // Boundary: +-0.1 uses the mean itself.
    CHECK(s[2].scale == doctest::Approx(0.1));
    CHECK(s[3].scale == doctest::Approx(-0.1));
    REQUIRE(s[4].frequencies.size() == 2);
    CHECK(s[4].frequencies[0] == 1.0);
    CHECK(s[4].frequencies[1] == 0.0);
}

TEST_CASE("column_stats needs two rows") {
    auto d = make_dataset({{1.0}}, {});
    CHECK_THROWS_AS(column_stats(d), DegenerateDataError);
}

TEST_CASE("scale rule property over random means") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (int t = 0; t < 1000; ++t) {
        double m = u(rng);
        CHECK((pdq_scale(m) == 1.0) == (std::abs(m) < 0.1 || m == 1.0));
    }
}

TEST_CASE("ordinal rank range") {
    auto d = four_rows();
    auto s = column_stats(d);
    CHECK(s[2].rank_range == doctest::Approx(2.0));
}

TEST_CASE("Partition::from_soft takes the lowest index on ties") {
    Eigen::MatrixXd m(3, 3);
    m << 0.2, 0.4, 0.4,  //
        0.5, 0.25, 0.25,  //
        1.0 / 3, 1.0 / 3, 1.0 / 3;
    auto p = Partition::from_soft(m);
    CHECK(p.labels == std::vector<int>{1, 0, 0});
    CHECK(p.k == 3);
    REQUIRE(p.soft);
    CHECK(p.cluster_sizes() == std::vector<std::size_t>{2, 1, 0});
}

TEST_CASE("cluster_prototypes gives means, modes and frequencies") {
    auto d = make_dataset({{1.0, 3.0, 10.0, 12.0}}, {{0, 0, 1, 0}});
    Partition p;
    p.k = 2;
    p.labels = {0, 0, 1, 1};
    auto protos = cluster_prototypes(d, p);
    REQUIRE(protos.size() == 2);
    CHECK(protos[0].continuous_center[0] == doctest::Approx(2.0));
    CHECK(protos[1].continuous_center[0] == doctest::Approx(11.0));
    CHECK(protos[0].categorical_center[0] == 0);
    CHECK(protos[1].categorical_center[0] == 0);  // tie goes to the lowest level
    CHECK(protos[1].level_freqs[0][0] == doctest::Approx(0.5));
    for (const auto& pr : protos)
        for (const auto& f : pr.level_freqs) CHECK(f[0] + f[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("numeric helpers") {
    std::vector<double> v{1.0, 2.0, 3.0};
    CHECK(log_sum_exp(v) == doctest::Approx(std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0))));
    std::vector<double> big{1000.0, 1000.0};
    CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)));
    std::vector<double> sorted{1.0, 2.0, 3.0, 4.0};
    CHECK(quantile_sorted(sorted, 0.25) == doctest::Approx(1.75));
    CHECK(quantile_sorted(sorted, 0.5) == doctest::Approx(2.5));
    std::vector<double> ties{1.0, 3.0, 3.0};
    CHECK(argmax(ties) == 1);
    CHECK(argmin(ties) == 0);
}

TEST_CASE("derive_seed and sample_distinct are deterministic") {
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
    std::mt19937_64 a(9), b(9);
    auto x = sample_distinct(50, 10, a);
    auto y = sample_distinct(50, 10, b);
    CHECK(x == y);
    std::sort(x.begin(), x.end());
    CHECK(std::adjacent_find(x.begin(), x.end()) == x.end());
    CHECK(x.back() < 50);
}

TEST_CASE("subset keeps the requested rows in order") {
    auto d = four_rows();
    std::vector<std::size_t> rows{3, 0};
    auto s = d.subset(rows);
    CHECK(s.rows() == 2);
    CHECK(s.value(0, 0) == 3.0);
    CHECK(s.cell_text(1, 2) == "lo");
}
