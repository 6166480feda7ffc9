#include "doctest.h"

#include <cmath>
#include <numbers>

#include "porosity/analysis.hpp"
#include "support.hpp"

using namespace porosity;
using namespace porosity::testing;

namespace {

constexpr double ln2 = std::numbers::ln2;

FamilySets families(const SetSpec& spec, const RootFrame& frame, unsigned depth)
{
    return compute_families(frame, *build_oracle(spec), depth);
}

WeakPorosityParams params(const char* delta, const char* c, unsigned depth)
{
    return WeakPorosityParams{q(delta), q(c), depth};
}

SweepOptions quick_options(unsigned depth)
{
    SweepOptions opt;
    opt.params.depth = depth;
    opt.quadrature.budget = 5000;
    return opt;
}

SetSpec complement_grid_example()
{
    return SetSpec{UnionSpec{{SetSpec{ComplementGridSpec{q("1/256"), pt({"0"}), q("1/2")}}, points_spec({pt({"3/4"})})}}};
}

}  // namespace

TEST_CASE("weak porosity certificate examples")
{
    SUBCASE("lattice 1/16")
    {
        auto fam = families(lattice_spec("1/16", 1), RootFrame::unit(1), 12);
        auto cert = weak_porosity_certificate(fam, params("1", "1/4", 12));
        CHECK(cert.family.size() == 16);
        for (const auto& c : cert.family) CHECK(cube_side(RootFrame::unit(1), c) == q("1/32"));
        CHECK(cert.coverage_ratio == q("1/2"));
        CHECK(cert.pass);
    }
    SUBCASE("corner point")
    {
        auto fam = families(points_spec({pt({"0"})}), RootFrame::unit(1), 12);
        auto full = weak_porosity_certificate(fam, params("1", "1/4", 12));
        CHECK(full.family == std::vector<DyadicCube>{cube(1, {1})});
        CHECK(full.coverage_ratio == q("1/2"));
        auto quarter = weak_porosity_certificate(fam, params("1/4", "1/4", 12));
        CHECK(quarter.family == std::vector<DyadicCube>{cube(1, {1}), cube(2, {1}), cube(3, {1})});
        CHECK(quarter.coverage_ratio == q("7/8"));
    }
    SUBCASE("undetermined")
    {
        auto fam = families(lattice_spec("1/64", 1), RootFrame::unit(1), 3);
        auto cert = weak_porosity_certificate(fam, params("1", "1/4", 3));
        CHECK_FALSE(cert.determined);
        CHECK_FALSE(cert.pass);
        auto r = certificate_report(fam, cert);
        CHECK_FALSE(r.determined);
        CHECK(std::isinf(r.implied_constant));
    }
    SUBCASE("parameter validation")
    {
        CHECK_THROWS_AS(validate(params("0", "1/4", 5)), SpecError);
        CHECK_THROWS_AS(validate(params("3/2", "1/4", 5)), SpecError);
        CHECK_THROWS_AS(validate(params("1", "1", 5)), SpecError);
        CHECK_NOTHROW(validate(params("1", "1/2", 5)));
    }
}

TEST_CASE("dyadic sum conditions")
{
    const RootFrame unit = RootFrame::unit(1);
    auto corner = families(points_spec({pt({"0"})}), unit, 30);
    auto lattice = families(lattice_spec("1/16", 1), unit, 30);

    SUBCASE("condition (i)")
    {
        auto r = condition_i(corner);
        CHECK(r.lhs == doctest::Approx(2.0 * ln2).epsilon(1e-8));
        CHECK(std::abs(r.implied_constant - ln2) <= r.tail + 1e-12);
        auto l = condition_i(lattice);
        CHECK(l.implied_constant == doctest::Approx(ln2).epsilon(1e-6));
    }
    SUBCASE("condition (ii)")
    {
        auto r = condition_ii(corner);
        CHECK(r.lhs == doctest::Approx(2.0).epsilon(1e-8));
        CHECK(r.implied_constant == doctest::Approx(2.0 - ln2).epsilon(1e-8));
        auto fam2 = families(points_spec({pt({"0", "0"})}), RootFrame::unit(2), 20);
        CHECK(condition_ii(fam2).implied_constant == doctest::Approx(4.0 / 3.0 - ln2).epsilon(1e-8));
    }
    SUBCASE("condition (iii)")
    {
        auto r = condition_iii(corner);
        CHECK(r.implied_constant == doctest::Approx(1.0).epsilon(1e-8));
        auto l = condition_iii(lattice);
        CHECK(std::abs(l.implied_constant - 1.0) <= l.tail);
        CHECK(*l.exact_lhs == truncated_d0_identity_check(lattice).lhs);
        CHECK(*l.exact_lhs == 1 - pow2_neg(26));
    }
    SUBCASE("degenerate frame")
    {
        auto far = families(points_spec({pt({"5"})}), unit, 10);
        CHECK(condition_i(far).lhs == 0.0);
        CHECK(condition_i(far).implied_constant == 0.0);
        CHECK(condition_ii(far).lhs == 0.0);
        CHECK(condition_iii(far).lhs == 0.0);
        CHECK(condition_i(far).notes.find("convention") != std::string::npos);
    }
    SUBCASE("undetermined frames report infinite constants")
    {
        auto dense = families(lattice_spec("1/64", 1), unit, 3);
        for (const auto& r : {condition_i(dense), condition_ii(dense), condition_iii(dense)}) {
            CHECK_FALSE(r.determined);
            CHECK(std::isinf(r.implied_constant));
        }
    }
    SUBCASE("(ii) and (iii) differ by the coarse levels")
    {
        auto e = points_spec({pt({"1/3"}), pt({"5/7"}), pt({"7/9"})});
        auto fam = families(e, unit, 16);
        const unsigned m0 = fam.largest_empty->level;
        Rational coarse = 0;
        for (unsigned j = 0; j < m0; ++j) coarse += Rational(Integer(fam.hitting[j].size())) * pow2_neg(j);
        CHECK(*condition_ii(fam).exact_lhs - *condition_iii(fam).exact_lhs == coarse);
    }
}

TEST_CASE("porosity conditions")
{
    auto corner = families(points_spec({pt({"0"})}), RootFrame::unit(1), 30);
    auto pc = porosity_conditions(corner);
    CHECK(*pc.porosity_ratio == q("1/2"));
    CHECK(pc.bnt.implied_constant == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(pc.dynkin.implied_constant == doctest::Approx(2.0 * ln2).epsilon(1e-8));
    CHECK(pc.bnt.condition == ConditionTag::cor3_ii);

    auto lattice = lattice_spec("1/16", 1);
    CHECK(*porosity_conditions(families(lattice, RootFrame::unit(1), 12)).porosity_ratio == q("1/32"));
    CHECK(*porosity_conditions(families(lattice, frame_1d("0", "1/16"), 12)).porosity_ratio == q("1/2"));
    for (const char* side : {"2", "4", "8"}) {
        auto ratio = *porosity_conditions(families(lattice, frame_1d("0", side), 16)).porosity_ratio;
        CHECK(ratio * q(side) / q("1/16") == q("1/2"));
    }
}

TEST_CASE("mean oscillation above the infimum")
{
    auto e = build_oracle(points_spec({pt({"0"})}));
    IntegrationOptions opt{IntegrationMethod::adaptive, 20000, 0.0, 0, 1};
    for (const char* side : {"1", "1/2"}) {
        RootFrame frame = frame_1d("0", side);
        auto fam = compute_families(frame, *e, 20);
        auto r = blo_estimate(frame, *e, fam, opt);
        CHECK(r.determined);
        CHECK(r.implied_constant == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(*r.implied_lower == doctest::Approx(1.0).epsilon(1e-6));
    }
    RootFrame far = frame_1d("4", "1");
    auto fam = compute_families(far, *e, 5);
    auto r = blo_estimate(far, *e, fam, opt);
    CHECK(r.notes.find("convention") != std::string::npos);
    CHECK(*r.implied_lower <= r.implied_constant);
}

TEST_CASE("sweeps")
{
    SUBCASE("dyadic frames of the lattice")
    {
        SweepSpec s;
        s.dyadic_levels = {0, 4};
        auto frames = sweep_frames(RootFrame::unit(1), s);
        CHECK(frames.size() == 31);
        auto report = sweep(lattice_spec("1/16", 1), frames, quick_options(24));
        const auto& iii = report.aggregates.conditions[3];
        REQUIRE(iii.condition == ConditionTag::thm_iii);
        CHECK(*iii.max_implied == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(*iii.max_implied <= 1.0);
        CHECK(report.aggregates.nonzero_residuals == 0);
        CHECK(*report.aggregates.min_porosity_ratio == q("1/32"));
    }
    SUBCASE("scale invariance of a corner point")
    {
        std::vector<RootFrame> frames;
        for (unsigned k = 0; k <= 5; ++k) frames.emplace_back(pt({"0"}), pow2_neg(k));
        auto report = sweep(points_spec({pt({"0"})}), frames, quick_options(24));
        const FrameAnalysis& first = report.frames.front();
        for (const auto& f : report.frames) {
            for (ConditionTag tag : {ConditionTag::def2, ConditionTag::thm_ii, ConditionTag::thm_iii, ConditionTag::cor3_ii})
                CHECK(*f.report(tag).exact_lhs == *first.report(tag).exact_lhs);
            // exact in the limit; the truncated sums differ by less than the tails
            const auto& i = f.report(ConditionTag::thm_i);
            const auto& i0 = first.report(ConditionTag::thm_i);
            CHECK(std::abs(i.implied_constant - i0.implied_constant) <= i.tail + i0.tail);
            CHECK(f.report(ConditionTag::blo).implied_constant ==
                  doctest::Approx(first.report(ConditionTag::blo).implied_constant).epsilon(1e-9));
            CHECK(*f.porosity_ratio == *first.porosity_ratio);
        }
    }
    SUBCASE("empty frame list")
    {
        CHECK_THROWS_AS(sweep(points_spec({pt({"0"})}), {}, quick_options(5)), std::invalid_argument);
    }
    SUBCASE("parallel evaluation preserves results")
    {
        SweepSpec s;
        s.dyadic_levels = {0, 2};
        s.random_frames = 6;
        s.random_seed = 77;
        auto frames = sweep_frames(RootFrame::unit(2), s);
        auto e = points_spec({pt({"1/3", "1/5"}), pt({"2/3", "7/8"})});
        auto serial = sweep(e, frames, quick_options(10));
        SweepOptions par = quick_options(10);
        par.jobs = 4;
        auto parallel = sweep(e, frames, par);
        REQUIRE(serial.frames.size() == parallel.frames.size());
        for (std::size_t i = 0; i < serial.frames.size(); ++i)
            for (std::size_t k = 0; k < kConditionTags.size(); ++k)
                CHECK(serial.frames[i].conditions[k].lhs == parallel.frames[i].conditions[k].lhs);
    }
    SUBCASE("random frames are reproducible and inside the base")
    {
        SweepSpec s;
        s.random_frames = 20;
        s.random_seed = 5;
        auto a = sweep_frames(frame_1d("1", "2"), s);
        auto b = sweep_frames(frame_1d("1", "2"), s);
        REQUIRE(a.size() == 20);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].origin() == b[i].origin());
            CHECK(a[i].side() == b[i].side());
            CHECK(a[i].origin()[0] >= 1);
            CHECK(a[i].origin()[0] + a[i].side() <= 3);
        }
    }
}

TEST_CASE("evidence")
{
    SUBCASE("lattice")
    {
        SweepSpec s;
        s.dyadic_levels = {0, 4};
        s.explicit_frames = {frame_1d("0", "2"), frame_1d("0", "4")};
        auto report = sweep(lattice_spec("1/16", 1), sweep_frames(RootFrame::unit(1), s), quick_options(20));
        CHECK(report.evidence.summary == "weakly porous: supported; porous: refuted at tested scales");
        CHECK(*report.evidence.porosity_slope == doctest::Approx(-1.0));
    }
    SUBCASE("complement grid")
    {
        auto e = complement_grid_example();
        auto fam = families(e, RootFrame::unit(1), 12);
        CHECK(fam.largest_empty->level == 2);
        CHECK(condition_iii(fam).implied_constant > 3.0);
        SweepSpec s;
        s.dyadic_levels = {0, 1};
        auto report = sweep(e, sweep_frames(RootFrame::unit(1), s), quick_options(12));
        CHECK(report.evidence.weak_porosity == "refuted above mesh scale");
        CHECK(report.evidence.porosity == "refuted at tested scales");
    }
    SUBCASE("cantor product above its resolution")
    {
        SweepSpec s;
        s.dyadic_levels = {0, 6};
        auto report = sweep(cantor_spec("1/3", 8, 1), sweep_frames(RootFrame::unit(1), s), quick_options(6));
        CHECK(report.evidence.summary == "weakly porous: supported; porous: supported above scale 1/6561");
        // below 3^-8 the approximation is solid, which the evidence must ignore
        auto deep = sweep(cantor_spec("1/3", 8, 1), sweep_frames(RootFrame::unit(1), s), quick_options(14));
        CHECK(deep.evidence.weak_porosity == "supported");
    }
    SUBCASE("dense lattice is undetermined")
    {
        auto report = sweep(lattice_spec("1/1024", 1), {RootFrame::unit(1)}, quick_options(6));
        CHECK(report.aggregates.undetermined_frames == 1);
        CHECK(report.evidence.weak_porosity == "refuted at tested scales");
        CHECK(report.frames[0].partial_sums.size() == 7);
        CHECK(report.frames[0].partial_sums.back() == doctest::Approx(7.0));
    }
}

TEST_CASE("porous sets carry a certificate with delta = 1")
{
    SweepSpec s;
    s.dyadic_levels = {0, 6};
    auto spec = cantor_spec("1/3", 8, 1);
    auto report = sweep(spec, sweep_frames(RootFrame::unit(1), s), quick_options(10));
    REQUIRE(report.aggregates.undetermined_frames == 0);
    const Rational floor = *report.aggregates.min_porosity_ratio;
    auto oracle = build_oracle(spec);
    for (const auto& f : report.frames) {
        auto fam = compute_families(f.frame, *oracle, 10);
        CHECK(weak_porosity_certificate(fam, WeakPorosityParams{Rational(1), floor, 10}).pass);
    }
}

TEST_CASE("certificate coverage is monotone")
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Point> pts;
        for (int k = 0; k < 6; ++k) pts.push_back(random_point(rng, 2, 30));
        auto e = build_oracle(points_spec(pts));
        const RootFrame unit = RootFrame::unit(2);
        Rational previous_j = 0;
        for (unsigned J = 4; J <= 10; J += 2) {
            auto fam = compute_families(unit, *e, J);
            if (!fam.largest_empty_found()) continue;
            Rational previous_delta = 2;
            for (const char* delta : {"1/16", "1/8", "1/4", "1/2", "1"}) {
                auto cert = weak_porosity_certificate(fam, params(delta, "1/2", J));
                CHECK(cert.coverage_ratio <= previous_delta);
                previous_delta = cert.coverage_ratio;
            }
            auto at_small = weak_porosity_certificate(fam, params("1/64", "1/2", J)).coverage_ratio;
            CHECK(at_small >= previous_j);
            previous_j = at_small;
        }
    }
}
