#include <cmath>
#include <filesystem>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "stark/io.hpp"

using namespace stark;

TEST_SUITE("io") {

TEST_CASE("doubles round-trip exactly") {
    for (double v : {0.1, -1.0 / 3.0, 6.02214076e23, 2.2250738585072014e-308, 1.0, -0.0, std::numeric_limits<double>::max()})
        CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(2.0) == "2");
}

TEST_CASE("writer and parser") {
    CsvWriter w({"name", "value", "count"});
    w.add("plain").add(1.5).add(3).end_row();
    w.add("with,comma").add(-2.25).add(static_cast<std::size_t>(7)).end_row();
    w.add("say \"hi\"").add(0.0).add(-4L).end_row();
    CHECK(w.str().find("\r") == std::string::npos);
    CHECK(w.str().rfind("\"with,comma\"") != std::string::npos);

    const CsvTable t = parse_csv(w.str());
    CHECK(t.header == std::vector<std::string>{"name", "value", "count"});
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[1][0] == "with,comma");
    CHECK(t.rows[2][0] == "say \"hi\"");
    CHECK(std::stod(t.rows[1][t.column("value")]) == -2.25);
    CHECK(t.rows[2][2] == "-4");
    CHECK_THROWS_AS(t.column("missing"), std::runtime_error);
}

TEST_CASE("parser edge cases") {
    const CsvTable crlf = parse_csv("a,b\r\n1,2\r\n\r\n");
    REQUIRE(crlf.rows.size() == 1);
    CHECK(crlf.rows[0][1] == "2");
    const CsvTable empty_field = parse_csv("a,b\n,x\n");
    CHECK(empty_field.rows[0][0].empty());
    CHECK_THROWS_AS(parse_csv(""), std::runtime_error);
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), std::runtime_error);
}

TEST_CASE("file helpers") {
    const auto p = std::filesystem::temp_directory_path() / "stark_io_test.txt";
    write_text_file(p, "line one\nline two\n");
    CHECK(read_text_file(p) == "line one\nline two\n");
    std::filesystem::remove(p);
    CHECK_THROWS_AS(read_text_file(p), std::runtime_error);
    CHECK_THROWS_AS(write_text_file(p / "no" / "such" / "dir", "x"), std::runtime_error);
}

TEST_CASE("fnv1a digests") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(hex64(fnv1a("foobar")) == "85944171f73967e8");
    CHECK(hex64(0) == "0000000000000000");
}

}  // TEST_SUITE
