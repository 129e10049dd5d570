#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "mixclust/io.hpp"
#include "support.hpp"

using namespace mixclust;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("mixclust_test_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("csv line splitting handles quotes") {
    auto f = io::split_csv_line(R"(a,"b,c","say ""hi""",)");
    REQUIRE(f.size() == 4);
    CHECK(f[0] == "a");
    CHECK(f[1] == "b,c");
    CHECK(f[2] == "say \"hi\"");
    CHECK(f[3].empty());
    CHECK(io::csv_escape("plain") == "plain");
    CHECK(io::csv_escape("a,b") == "\"a,b\"");
    CHECK(io::split_csv_line(io::csv_escape("x\"y"))[0] == "x\"y");
}

TEST_CASE("dataset round trip through csv and schema") {
    std::vector<ColumnSchema> schema{ColumnSchema::continuous("x"), ColumnSchema::nominal("colour", {"red", "green, dark"}),
                                     ColumnSchema::ordinal("size", {"S", "M", "L"})};
    MixedDataset d(schema, 3);
    const double xs[] = {0.1, -2.5e-7, 12345.678901234567};
    for (std::size_t i = 0; i < 3; ++i) {
        d.set_value(i, 0, xs[i]);
        d.set_code(i, 1, static_cast<int>(i % 2));
        d.set_code(i, 2, static_cast<int>(2 - i));
    }
    Partition truth;
    truth.k = 2;
    truth.labels = {1, 0, 1};
    auto dir = scratch("roundtrip");
    io::write_dataset(dir / "d.csv", dir / "s.json", d, &truth);
    auto back = io::read_dataset(dir / "d.csv", dir / "s.json");
    REQUIRE(back.data.rows() == 3);
    REQUIRE(back.data.cols() == 3);
    CHECK(back.data.column(2).kind == ColumnKind::ordinal);
    CHECK(back.data.column(1).levels[1] == "green, dark");
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.data.value(i, 0) == xs[i]);
        CHECK(back.data.code(i, 1) == d.code(i, 1));
        CHECK(back.data.code(i, 2) == d.code(i, 2));
    }
    REQUIRE(back.truth);
    CHECK(back.truth->labels == truth.labels);
    CHECK(back.truth->k == 2);
}

TEST_CASE("labels are 1-based on disk") {
    auto dir = scratch("labels");
    Partition p;
    p.k = 3;
    p.labels = {0, 2, 1};
    io::write_labels(dir / "l.csv", p);
    CHECK(io::read_text(dir / "l.csv") == "__cluster\n1\n3\n2\n");
    auto back = io::read_labels(dir / "l.csv");
    CHECK(back.labels == p.labels);
    CHECK(back.k == 3);
}

TEST_CASE("reader rejects malformed input") {
    auto dir = scratch("bad");
    io::write_text(dir / "s.json", R"({"x": {"kind": "continuous"}, "c": {"kind": "nominal", "levels": ["a", "b"]}})");
    io::write_text(dir / "short.csv", "x,c\n1.0\n");
    CHECK_THROWS_AS(io::read_dataset(dir / "short.csv", dir / "s.json"), ValidationError);
    io::write_text(dir / "nan.csv", "x,c\nabc,a\n");
    CHECK_THROWS_AS(io::read_dataset(dir / "nan.csv", dir / "s.json"), ValidationError);
    io::write_text(dir / "level.csv", "x,c\n1,z\n");
    CHECK_THROWS_AS(io::read_dataset(dir / "level.csv", dir / "s.json"), ValidationError);
    io::write_text(dir / "missing.csv", "x,c,extra\n1,a,2\n");
    CHECK_THROWS_AS(io::read_dataset(dir / "missing.csv", dir / "s.json"), ValidationError);
    io::write_text(dir / "zero.csv", "__cluster\n0\n");
    CHECK_THROWS_AS(io::read_labels(dir / "zero.csv"), ValidationError);
    CHECK_THROWS_AS(io::read_text(dir / "nope.csv"), Error);
}
