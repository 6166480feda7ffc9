#include "doctest.h"

#include <random>

#include "porosity/dyadic.hpp"
#include "porosity/families.hpp"
#include "support.hpp"

using namespace porosity;
using namespace porosity::testing;

TEST_CASE("rational parsing")
{
    CHECK(parse_rational("3/6") == Rational(1, 2));
    CHECK(parse_rational("-2/4") == Rational(-1, 2));
    CHECK(parse_rational("7") == Rational(7));
    CHECK(parse_rational("0.25") == Rational(1, 4));
    CHECK(parse_rational("-1.5") == Rational(-3, 2));
    CHECK(to_string(Rational(3, 4)) == "3/4");
    CHECK(to_string(Rational(4, 2)) == "2");
    CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("abc"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational(""), std::invalid_argument);
}

TEST_CASE("children")
{
    auto c = children(cube(0, {0}));
    REQUIRE(c.size() == 2);
    CHECK(c[0] == cube(1, {0}));
    CHECK(c[1] == cube(1, {1}));

    auto c2 = children(cube(1, {1, 0}));
    REQUIRE(c2.size() == 4);
    CHECK(c2[0] == cube(2, {2, 0}));
    CHECK(c2[1] == cube(2, {2, 1}));
    CHECK(c2[2] == cube(2, {3, 0}));
    CHECK(c2[3] == cube(2, {3, 1}));

    auto c3 = children(cube(3, {5}));
    CHECK(c3[0] == cube(4, {10}));
    CHECK(c3[1] == cube(4, {11}));
}

TEST_CASE("parent")
{
    CHECK(parent(cube(4, {11})) == cube(3, {5}));
    CHECK(parent(cube(2, {3, 1})) == cube(1, {1, 0}));
    CHECK_THROWS_WITH_AS(parent(cube(0, {0})), "root has no parent", std::domain_error);
}

TEST_CASE("parent of every child is the cube, up to level 12")
{
    std::mt19937_64 rng(7);
    for (std::size_t d = 1; d <= 3; ++d) {
        for (unsigned level = 0; level <= 12; ++level) {
            for (int trial = 0; trial < 20; ++trial) {
                DyadicCube q{level, IndexVector(d)};
                for (auto& v : q.index) v = std::uniform_int_distribution<std::uint64_t>(0, (std::uint64_t{1} << level) - 1)(rng);
                auto kids = children(q);
                CHECK(kids.size() == (std::size_t{1} << d));
                for (const auto& k : kids) {
                    CHECK(parent(k) == q);
                    CHECK(relative_measure(q) == relative_measure(k) * Rational(1 << d));
                }
                CHECK(std::is_sorted(kids.begin(), kids.end()));
            }
        }
    }
}

TEST_CASE("locate_point")
{
    RootFrame unit = RootFrame::unit(1);
    CHECK(locate_point(unit, pt({"0"}), 3) == cube(3, {0}));
    CHECK(locate_point(unit, pt({"1/2"}), 1) == cube(1, {1}));
    CHECK_FALSE(locate_point(unit, pt({"1"}), 2).has_value());
    CHECK_FALSE(locate_point(unit, pt({"-1/8"}), 2).has_value());

    RootFrame shifted({q("1/3"), q("-2")}, q("3/5"));
    auto c = locate_point(shifted, pt({"1/3", "-2"}), 5);
    REQUIRE(c);
    CHECK(*c == cube(5, {0, 0}));
}

TEST_CASE("every point lies in exactly one cube per level")
{
    std::mt19937_64 rng(11);
    for (std::size_t d = 1; d <= 3; ++d) {
        RootFrame frame(Point(d, q("-1/3")), q("5/7"));
        for (unsigned level = 0; level <= 3; ++level) {
            auto layer = cubes_at_level(d, level);
            for (int trial = 0; trial < 30; ++trial) {
                Point x = random_point(rng, d, 97);
                for (auto& c : x) c = frame.origin()[0] + c * frame.side();
                std::size_t hits = 0;
                for (const auto& cq : layer) hits += in_half_open(x, cube_box(frame, cq)) ? 1 : 0;
                CHECK(hits == 1);
                auto located = locate_point(frame, x, level);
                REQUIRE(located);
                CHECK(in_half_open(x, cube_box(frame, *located)));
            }
        }
    }
}

TEST_CASE("cube geometry is derived from the frame")
{
    RootFrame frame({q("1"), q("2")}, q("1/3"));
    Box b = cube_box(frame, cube(2, {3, 1}));
    CHECK(b.lo[0] == q("1") + q("3/12"));
    CHECK(b.hi[0] == q("1") + q("4/12"));
    CHECK(b.lo[1] == q("2") + q("1/12"));
    CHECK(relative_measure(cube(2, {3, 1})) == q("1/16"));
    CHECK(frame.volume() == q("1/9"));
}

TEST_CASE("containment and disjointness use indices only")
{
    CHECK(contains(cube(1, {1}), cube(3, {5})));
    CHECK_FALSE(contains(cube(1, {0}), cube(3, {5})));
    CHECK(disjoint(cube(2, {1, 0}), cube(2, {1, 1})));
    CHECK_FALSE(disjoint(cube(1, {0, 0}), cube(3, {1, 2})));
    CHECK(ancestor(cube(5, {21}), 2) == cube(2, {2}));
}
