#include <catch_amalgamated.hpp>

#include "flpadv/csv.hpp"
#include "flpadv/error.hpp"

using namespace flpadv;

TEST_CASE("quoted fields keep commas and escaped quotes") {
    auto records = csv::parse("a,b\n\"Knez, M. and Gajsek, B.,\",\"say \"\"hi\"\"\"\n");
    REQUIRE(records.size() == 2);
    CHECK(records[1].fields[0] == "Knez, M. and Gajsek, B.,");
    CHECK(records[1].fields[1] == "say \"hi\"");
    CHECK(records[1].line == 2);
}

TEST_CASE("CRLF, BOM and blank lines") {
    auto records = csv::parse("\xEF\xBB\xBFx,y\r\n\r\n1,2\r\n");
    REQUIRE(records.size() == 2);
    CHECK(records[0].fields[0] == "x");
    CHECK(records[1].fields == std::vector<std::string>{"1", "2"});
    CHECK(records[1].line == 3);
}

TEST_CASE("quoted field spanning lines") {
    auto records = csv::parse("a\n\"line1\nline2\"\nnext\n");
    REQUIRE(records.size() == 3);
    CHECK(records[1].fields[0] == "line1\nline2");
    CHECK(records[2].line == 4);
}

TEST_CASE("unterminated quote is a format error") {
    CHECK_THROWS_AS(csv::parse("a,\"b\n"), FormatError);
}

TEST_CASE("escape and parse are inverse") {
    std::vector<std::string> fields = {"plain", "with,comma", "with \"quote\"", "multi\nline", ""};
    auto records = csv::parse(csv::format_record(fields) + "\n");
    REQUIRE(records.size() == 1);
    CHECK(records[0].fields == fields);
    CHECK(csv::escape("plain") == "plain");
}
