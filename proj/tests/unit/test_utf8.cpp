#include <doctest.h>

#include "korpusmap/utf8.hpp"

using namespace korpusmap;

TEST_SUITE("utf8") {

TEST_CASE("decode and encode round-trip multi-byte text") {
    const std::string text = "Sąd Najwyższy – 日本 😀";
    const auto cps = utf8::decode(text);
    CHECK(cps.size() == 20);
    CHECK(cps[1] == U'ą');
    CHECK(cps.back() == U'😀');
    CHECK(utf8::encode(cps) == text);
}

TEST_CASE("invalid sequences decode to the replacement character") {
    const auto cps = utf8::decode(std::string("a\xC3") + "b\xFF");
    REQUIRE(cps.size() == 4);
    CHECK(cps[0] == U'a');
    CHECK(cps[1] == U'�');
    CHECK(cps[2] == U'b');
    CHECK(cps[3] == U'�');
}

TEST_CASE("length and prefix count code points, not bytes") {
    CHECK(utf8::length("") == 0);
    CHECK(utf8::length("żółw") == 4);
    CHECK(utf8::prefix("żółw", 2) == "żó");
    CHECK(utf8::prefix("żółw", 10) == "żółw");
    CHECK(utf8::prefix("abc", 0).empty());
}

TEST_CASE("to_lower maps non-ASCII letters") {
    CHECK(utf8::to_lower("ŻÓŁW Sąd") == "żółw sąd");
    CHECK(utf8::to_lower("ΑΒΓ") == "αβγ");
}

TEST_CASE("trim removes surrounding whitespace only") {
    CHECK(utf8::trim("  a b \t\n") == "a b");
    CHECK(utf8::trim(" \t ").empty());
}

}
