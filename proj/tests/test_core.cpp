#include <catch2/catch_amalgamated.hpp>

#include "cadlog/core.hpp"

using namespace cadlog;

TEST_CASE("category codes map per the taxonomy table") {
    REQUIRE(category_of_code(0) == ActionCategory::Door);
    REQUIRE(category_of_code(3) == ActionCategory::Wall);
    REQUIRE(category_of_code(6) == ActionCategory::SolarPanel);
    REQUIRE(category_of_code(9) == ActionCategory::Analysis);
    REQUIRE(category_of_code(12) == ActionCategory::Color);
    REQUIRE(std::string(category_name(ActionCategory::Thermal)) == "Thermal");
}

TEST_CASE("category codes are dense and round-trip") {
    bool seen[kCategoryCount] = {};
    for (int code = 0; code < kCategoryCount; ++code) {
        ActionCategory c = category_of_code(code);
        REQUIRE(code_of(c) == code);
        REQUIRE_FALSE(seen[code]);
        seen[code] = true;
    }
    for (bool s : seen) REQUIRE(s);
}

TEST_CASE("out-of-range category codes are rejected") {
    REQUIRE_THROWS_AS(category_of_code(13), DomainError);
    REQUIRE_THROWS_AS(category_of_code(-1), DomainError);
}

TEST_CASE("iso8601 parsing") {
    REQUIRE(parse_iso8601_ms("1970-01-01T00:00:00Z") == 0);
    REQUIRE(parse_iso8601_ms("1970-01-01T00:00:01.5Z") == 1500);
    REQUIRE(parse_iso8601_ms("2020-10-01T09:00:00.000Z") == 1601542800000LL);
    // zone offsets shift toward UTC
    REQUIRE(parse_iso8601_ms("2020-10-01T09:00:00+01:00") ==
            *parse_iso8601_ms("2020-10-01T08:00:00Z"));
    REQUIRE(parse_iso8601_ms("2020-10-01T09:00:00-05:00") ==
            *parse_iso8601_ms("2020-10-01T14:00:00Z"));
    // missing zone means UTC
    REQUIRE(parse_iso8601_ms("2020-10-01T09:00:00") == 1601542800000LL);

    REQUIRE_FALSE(parse_iso8601_ms("").has_value());
    REQUIRE_FALSE(parse_iso8601_ms("yesterday").has_value());
    REQUIRE_FALSE(parse_iso8601_ms("2020-13-01T00:00:00Z").has_value());
    REQUIRE_FALSE(parse_iso8601_ms("2020-10-01T09:00:00Zjunk").has_value());
}

TEST_CASE("iso8601 format/parse round-trip") {
    for (TimestampMs t : {0LL, 1601542800000LL, 1601542812345LL, 32503680000000LL}) {
        std::string s = format_iso8601_ms(t);
        auto back = parse_iso8601_ms(s);
        REQUIRE(back.has_value());
        REQUIRE(*back == t);
    }
    REQUIRE(format_iso8601_ms(1601542812345LL) == "2020-10-01T09:00:12.345Z");
}
