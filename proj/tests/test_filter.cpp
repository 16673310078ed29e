#include <string>
#include <vector>

#include "doctest.h"
#include "ordirs/errors.hpp"
#include "ordirs/rs/filter.hpp"

using namespace ordirs;
using rs::FilterPtr;

namespace {

FilterPtr parse(const std::string& s) { return rs::parse_filter(s); }

void check_roundtrip(const std::string& text) {
    FilterPtr first = parse(text);
    std::string printed = rs::print_filter(first);
    FilterPtr second = parse(printed);
    CAPTURE(text);
    CAPTURE(printed);
    CHECK(rs::filter_equal(first, second));
    CHECK(rs::print_filter(second) == printed);
}

}  // namespace

TEST_CASE("parses the nearest-person query filter") {
    FilterPtr f =
        parse(R"(LABEL("person") AND NEAREST_K(1, ANCHOR(LABEL("operating table"))))");
    const auto& conj = std::get<rs::FilterAnd>(f->node);
    REQUIRE(conj.operands.size() == 2);
    CHECK(std::get<rs::FilterLabel>(conj.operands[0]->node).label == "person");
    const auto& sp = std::get<rs::FilterSpatial>(conj.operands[1]->node);
    CHECK(sp.pred.kind == spatial::PredKind::NearestK);
    CHECK(sp.pred.k == 1);
    CHECK(std::get<rs::FilterLabel>(sp.anchor->node).label ==
          "operating table");
    CHECK(rs::filter_anchor_depth(*f) == 1);
    CHECK(rs::filter_has_semantic_atom(*f));
    CHECK(rs::filter_has_spatial_atom(*f));
}

TEST_CASE("parses a negated semantic atom") {
    FilterPtr f = parse(R"(NOT SEM("is wearing a mask"))");
    const auto& neg = std::get<rs::FilterNot>(f->node);
    CHECK(std::get<rs::FilterSem>(neg.operand->node).question ==
          "is wearing a mask");
    CHECK(rs::filter_has_semantic_atom(*f));
    CHECK_FALSE(rs::filter_has_spatial_atom(*f));
}

TEST_CASE("missing k is an arity error at the opening paren") {
    std::string text = R"(NEAREST_K(ANCHOR(LABEL("x"))))";
    try {
        parse(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
        CHECK(e.offset() == text.find('('));
    }
}

TEST_CASE("precedence binds AND tighter than OR, NOT tighter than AND") {
    FilterPtr f = parse(R"(LABEL("a") OR LABEL("b") AND NOT LABEL("c"))");
    const auto& disj = std::get<rs::FilterOr>(f->node);
    REQUIRE(disj.operands.size() == 2);
    CHECK(std::holds_alternative<rs::FilterLabel>(disj.operands[0]->node));
    const auto& conj = std::get<rs::FilterAnd>(disj.operands[1]->node);
    REQUIRE(conj.operands.size() == 2);
    CHECK(std::holds_alternative<rs::FilterNot>(conj.operands[1]->node));
}

TEST_CASE("parentheses survive printing") {
    std::string text = R"((LABEL("a") OR LABEL("b")) AND LABEL("c"))";
    FilterPtr f = parse(text);
    CHECK(rs::print_filter(f) == text);
    check_roundtrip(text);
}

TEST_CASE("print-parse identity holds across the predicate catalog") {
    std::vector<std::string> filters = {
        R"(LABEL("person"))",
        R"(SEM("is the person wearing a blue gown"))",
        R"(NOT LABEL("door"))",
        R"(LABEL("a") AND LABEL("b") AND LABEL("c"))",
        R"(LABEL("a") OR LABEL("b") OR LABEL("c"))",
        R"(LEFT_OF(ANCHOR(LABEL("operating table"))))",
        R"(RIGHT_OF(ANCHOR(LABEL("door"))))",
        R"(ABOVE(ANCHOR(LABEL("instrument tray"))))",
        R"(BELOW(ANCHOR(SEM("is a monitor"))))",
        R"(NEARER_THAN(ANCHOR(LABEL("operating table"))))",
        R"(FARTHER_THAN(ANCHOR(LABEL("door"))))",
        R"(WITHIN_PX(42.5, ANCHOR(LABEL("patient"))))",
        R"(OVERLAPS(ANCHOR(LABEL("operating table"))))",
        R"(OVERLAPS(0.25, ANCHOR(LABEL("operating table"))))",
        R"(NEAREST_K(2, ANCHOR(LABEL("anesthesia machine"))))",
        R"(FARTHEST_K(1, ANCHOR(LABEL("door"))))",
        R"(LARGEST_K(3))",
        R"(LABEL("person") AND WITHIN_PX(60, ANCHOR(LABEL("operating table") OR LABEL("instrument tray"))))",
        R"(NOT (LABEL("a") OR SEM("b")))",
        R"(NOT (NOT LABEL("a")))",
        R"(LABEL("says \"hi\" and \\ more"))",
        R"(LEFT_OF(ANCHOR(NEAREST_K(1, ANCHOR(LABEL("door"))))))",
    };
    for (const auto& text : filters) check_roundtrip(text);
}

TEST_CASE("numeric literals are canonicalized to six significant digits") {
    FilterPtr f = parse(R"(WITHIN_PX(0.123456789, ANCHOR(LABEL("x"))))");
    std::string printed = rs::print_filter(f);
    CHECK(printed == R"(WITHIN_PX(0.123457, ANCHOR(LABEL("x"))))");
    CHECK(rs::filter_equal(f, parse(printed)));
}

TEST_CASE("anchor depth is capped at two") {
    check_roundtrip(
        R"(LEFT_OF(ANCHOR(NEAREST_K(1, ANCHOR(LABEL("door"))))))");
    CHECK_THROWS_AS(
        parse(
            R"(LEFT_OF(ANCHOR(LEFT_OF(ANCHOR(LEFT_OF(ANCHOR(LABEL("x"))))))))"),
        ParseError);
}

TEST_CASE("malformed filters are rejected with positions") {
    const std::vector<std::string> bad = {
        "",
        "LABEL(person)",
        R"(LABEL("person)",
        R"(LABEL("a") AND)",
        R"(AND LABEL("a"))",
        R"(LABEL("a") LABEL("b"))",
        R"(NOT)",
        R"(NOT NOT LABEL("a"))",
        R"(WHATEVER("a"))",
        R"(LEFT_OF(LABEL("a")))",
        R"(LEFT_OF(ANCHOR(LABEL("a")) ))" + std::string("extra"),
        R"(WITHIN_PX(ANCHOR(LABEL("a"))))",
        R"(WITHIN_PX(-3, ANCHOR(LABEL("a"))))",
        R"(WITHIN_PX(0, ANCHOR(LABEL("a"))))",
        R"(OVERLAPS(1.5, ANCHOR(LABEL("a"))))",
        R"(OVERLAPS(0, ANCHOR(LABEL("a"))))",
        R"(NEAREST_K(0, ANCHOR(LABEL("a"))))",
        R"(NEAREST_K(1.5, ANCHOR(LABEL("a"))))",
        R"(LARGEST_K(2, ANCHOR(LABEL("a"))))",
        R"(LARGEST_K())",
        R"((LABEL("a"))",
        R"(LABEL("a")))",
        R"(LABEL("bad \n escape"))",
        R"(SEM())",
    };
    for (const auto& text : bad) {
        CAPTURE(text);
        CHECK_THROWS_AS(parse(text), ParseError);
    }
}

TEST_CASE("sem questions are collected once each, anchors included") {
    FilterPtr f = parse(
        R"(SEM("q1") AND LEFT_OF(ANCHOR(SEM("q2") OR SEM("q1"))) AND SEM("q2"))");
    auto qs = rs::filter_sem_questions(*f);
    CHECK(qs == std::vector<std::string>{"q1", "q2"});
}
