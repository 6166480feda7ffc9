#include "doctest.h"

#include <random>

#include "porosity/families.hpp"
#include "support.hpp"

using namespace porosity;
using namespace porosity::testing;

TEST_CASE("families of a corner point, d=1, J=2")
{
    auto oracle = build_oracle(points_spec({pt({"0"})}));
    FamilySets fam = compute_families(RootFrame::unit(1), *oracle, 2);
    CHECK_FALSE(fam.degenerate);
    REQUIRE(fam.hitting.size() == 3);
    CHECK(fam.hitting[0] == std::vector{cube(0, {0})});
    CHECK(fam.hitting[1] == std::vector{cube(1, {0})});
    CHECK(fam.hitting[2] == std::vector{cube(2, {0})});
    CHECK(fam.empty_maximal == std::vector{cube(1, {1}), cube(2, {1})});
    CHECK(fam.frontier == std::vector{cube(2, {0})});
    REQUIRE(fam.largest_empty);
    CHECK(*fam.largest_empty == cube(1, {1}));
}

TEST_CASE("families when the set misses the frame")
{
    auto oracle = build_oracle(points_spec({pt({"0"})}));
    for (unsigned J : {0u, 3u, 10u}) {
        FamilySets fam = compute_families(frame_1d("2", "1"), *oracle, J);
        CHECK(fam.degenerate);
        for (const auto& level : fam.hitting) CHECK(level.empty());
        CHECK(fam.empty_maximal == std::vector{cube(0, {0})});
        CHECK(fam.largest_empty == cube(0, {0}));
        auto id = truncated_identity_check(fam);
        CHECK(id.lhs == 0);
        CHECK(id.rhs == 0);
        CHECK(id.remainder == 0);
        auto d0 = truncated_d0_identity_check(fam);
        CHECK(d0.lhs == 0);
        CHECK(d0.rhs == 0);
        auto lim = limit_identity_check(fam);
        CHECK(lim.remainder == 0);
    }
}

TEST_CASE("families of a corner point, d=2, J=1")
{
    auto oracle = build_oracle(points_spec({pt({"0", "0"})}));
    FamilySets fam = compute_families(RootFrame::unit(2), *oracle, 1);
    CHECK(fam.hitting[0] == std::vector{cube(0, {0, 0})});
    CHECK(fam.hitting[1] == std::vector{cube(1, {0, 0})});
    CHECK(fam.empty_maximal == std::vector{cube(1, {0, 1}), cube(1, {1, 0}), cube(1, {1, 1})});
    CHECK(fam.frontier == std::vector{cube(1, {0, 0})});

    auto id = truncated_identity_check(fam);
    CHECK(id.lhs == q("5/4"));
    CHECK(id.rhs == q("5/4"));
    CHECK(id.remainder == 0);

    auto d0 = truncated_d0_identity_check(fam);
    CHECK(d0.lhs == q("1/4"));
    CHECK(d0.rhs == q("1/4"));
}

TEST_CASE("truncated identities for the corner point, d=1")
{
    auto oracle = build_oracle(points_spec({pt({"0"})}));
    auto id = truncated_identity_check(compute_families(RootFrame::unit(1), *oracle, 2));
    CHECK(id.lhs == q("7/4"));
    CHECK(id.rhs == q("7/4"));
    CHECK(id.remainder == 0);

    auto fam3 = compute_families(RootFrame::unit(1), *oracle, 3);
    REQUIRE(fam3.largest_empty->level == 1);
    auto d0 = truncated_d0_identity_check(fam3);
    CHECK(d0.lhs == q("7/8"));
    CHECK(d0.rhs == q("7/8"));
    CHECK(d0.remainder == 0);
}

TEST_CASE("limit identity converges for corner points")
{
    SUBCASE("d=1, J=30")
    {
        auto oracle = build_oracle(points_spec({pt({"0"})}));
        auto lim = limit_identity_check(compute_families(RootFrame::unit(1), *oracle, 30));
        CHECK(abs(lim.lhs - lim.rhs) <= lim.remainder);
        CHECK(lim.remainder == Rational(31) * pow2_neg(30));
        // sum_{j<=J} 2^-j = 2 - 2^-J and sum_{j<=J} j 2^-j = 2 - (J+2) 2^-J
        CHECK(lim.lhs == Rational(2) - pow2_neg(30));
        CHECK(lim.rhs == Rational(2) - Rational(32) * pow2_neg(30));
        CHECK(abs(lim.lhs - 2) <= lim.remainder);
        CHECK(abs(lim.rhs - 2) <= 2 * lim.remainder);
        CHECK(lim.remainder < Rational(1, 1000000));
    }
    SUBCASE("d=2, J=20")
    {
        auto oracle = build_oracle(points_spec({pt({"0", "0"})}));
        auto lim = limit_identity_check(compute_families(RootFrame::unit(2), *oracle, 20));
        CHECK(lim.remainder == Rational(21) * pow2_neg(40));
        CHECK(abs(lim.lhs - lim.rhs) <= lim.remainder);
        CHECK(abs(lim.lhs - Rational(4, 3)) <= lim.remainder);
        CHECK(abs(lim.rhs - Rational(4, 3)) <= 2 * lim.remainder);
    }
}

TEST_CASE("d0 identity requires an empty cube")
{
    // A lattice finer than the frame's deepest cubes leaves nothing empty.
    auto oracle = build_oracle(lattice_spec("1/64", 1));
    auto fam = compute_families(RootFrame::unit(1), *oracle, 4);
    CHECK_FALSE(fam.largest_empty_found());
    CHECK_THROWS_WITH_AS(truncated_d0_identity_check(fam), "no empty cube up to depth 4", std::domain_error);
    CHECK(truncated_identity_check(fam).remainder == 0);
}

TEST_CASE("families match brute-force enumeration on random point sets")
{
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t d = 1 + trial % 3;
        const unsigned J = d == 3 ? 3 : 5;
        std::vector<Point> pts;
        const int n = 1 + static_cast<int>(rng() % 6);
        for (int k = 0; k < n; ++k) pts.push_back(random_point(rng, d, 12));
        auto oracle = build_oracle(points_spec(pts));
        RootFrame frame = RootFrame::unit(d);
        FamilySets fam = compute_families(frame, *oracle, J);
        BruteFamilies brute = brute_families(frame, pts, J);

        for (unsigned j = 0; j <= J; ++j) CHECK(fam.hitting[j] == brute.hitting[j]);
        CHECK(fam.empty_maximal == brute.empty_maximal);
        auto id = truncated_identity_check(fam);
        CHECK(id.lhs == brute.hitting_measure);
        CHECK(id.remainder == 0);
        auto lim = limit_identity_check(fam);
        CHECK(lim.rhs == brute.empty_level_weighted);
    }
}

TEST_CASE("family invariants on random sets and frames")
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t d = 1 + trial % 3;
        const unsigned J = 4 + trial % 6;
        std::vector<Point> pts;
        const int n = 1 + static_cast<int>(rng() % 64);
        for (int k = 0; k < n; ++k) pts.push_back(random_point(rng, d, 1000));
        auto oracle = build_oracle(points_spec(pts));
        RootFrame frame(Point(d, Rational(0)), Rational(1));
        FamilySets fam = compute_families(frame, *oracle, J);

        for (const auto& e : fam.empty_maximal) {
            CHECK_FALSE(oracle->intersects(cube_box(frame, e)));
            CHECK(oracle->intersects(cube_box(frame, parent(e))));
        }
        for (std::size_t a = 0; a < fam.empty_maximal.size(); ++a)
            for (std::size_t b = a + 1; b < fam.empty_maximal.size(); ++b)
                CHECK(disjoint(fam.empty_maximal[a], fam.empty_maximal[b]));

        // hitting[j] plus level-j descendants of shallower F cubes cover D_j(R) exactly.
        for (unsigned j = 0; j <= J; ++j) {
            Rational covered = Rational(fam.hitting[j].size()) * pow2_neg(j * static_cast<unsigned>(d));
            for (const auto& e : fam.empty_maximal)
                if (e.level <= j) covered += relative_measure(e);
            CHECK(covered == 1);
        }
        if (fam.largest_empty)
            for (const auto& e : fam.empty_maximal) CHECK(fam.largest_empty->level <= e.level);

        CHECK(truncated_identity_check(fam).remainder == 0);
        if (fam.largest_empty_found()) CHECK(truncated_d0_identity_check(fam).remainder == 0);
    }
}

TEST_CASE("deeper truncation only adds members and shrinks the tail")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 15; ++trial) {
        const std::size_t d = 1 + trial % 2;
        std::vector<Point> pts;
        for (int k = 0; k < 8; ++k) {
            Point p;
            for (std::size_t i = 0; i < d; ++i) p.push_back(Rational(static_cast<long>(rng() % 64), 64));
            pts.push_back(p);
        }
        auto oracle = build_oracle(points_spec(pts));
        RootFrame frame = RootFrame::unit(d);
        Rational previous_tail(-1);
        FamilySets prev = compute_families(frame, *oracle, 0);
        for (unsigned J = 1; J <= 14; ++J) {
            FamilySets fam = compute_families(frame, *oracle, J);
            for (unsigned j = 0; j <= prev.depth; ++j) CHECK(fam.hitting[j] == prev.hitting[j]);
            CHECK(std::includes(fam.empty_maximal.begin(), fam.empty_maximal.end(), prev.empty_maximal.begin(),
                                prev.empty_maximal.end()));
            Rational tail = limit_identity_check(fam).remainder;
            // From level 6 on, points of the 1/64 grid sit in distinct cubes.
            if (J > 6 && sgn(previous_tail) >= 0) CHECK(tail <= previous_tail);
            previous_tail = tail;
            prev = std::move(fam);
        }
    }
}
