#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "porosity/entropy.hpp"
#include "porosity/families.hpp"

namespace porosity {

/// Constants c and delta of the weak-porosity certificate, and the depth J.
struct WeakPorosityParams {
    Rational delta{1};
    Rational c_threshold{1, 16};
    unsigned depth = 20;
};

/// Throws SpecError naming the offending field.
void validate(const WeakPorosityParams& params);

enum class ConditionTag { def2, thm_i, thm_ii, thm_iii, cor3_i, cor3_ii, blo };

inline constexpr std::array<ConditionTag, 7> kConditionTags{ConditionTag::def2,  ConditionTag::thm_i,  ConditionTag::thm_ii,
                                                            ConditionTag::thm_iii, ConditionTag::cor3_i, ConditionTag::cor3_ii,
                                                            ConditionTag::blo};

std::string_view to_string(ConditionTag tag);

struct ConditionReport {
    RootFrame frame = RootFrame::unit(1);
    ConditionTag condition = ConditionTag::thm_i;
    /// Absolute sum or integral (def2 and blo: already |R|-normalized).
    double lhs = 0.0;
    /// |R| for the sums; 1 for the normalized quantities.
    double rhs_scale = 0.0;
    /// Smallest C for this frame; +infinity when undetermined.
    double implied_constant = 0.0;
    bool determined = false;
    std::string notes;
    /// Normalized truncation tail or integration error.
    double tail = 0.0;
    /// Exact normalized lhs for the counting conditions.
    std::optional<Rational> exact_lhs;
    /// blo: the constant at the lower end of the sup-distance bracket.
    std::optional<double> implied_lower;
};

struct Certificate {
    std::vector<DyadicCube> family;
    Rational coverage_ratio{0};
    bool determined = false;
    bool pass = false;
};

/// F(R,E) cubes at levels <= J with |Q'| >= delta |M(R)|.
Certificate weak_porosity_certificate(const FamilySets& fam, const WeakPorosityParams& params);
ConditionReport certificate_report(const FamilySets& fam, const Certificate& cert);

ConditionReport condition_i(const FamilySets& fam);
ConditionReport condition_ii(const FamilySets& fam);
ConditionReport condition_iii(const FamilySets& fam);

struct PorosityConditions {
    ConditionReport dynkin;
    ConditionReport bnt;
    /// l(M(R)) / l(R); nullopt when M(R) was not found.
    std::optional<Rational> porosity_ratio;
};

PorosityConditions porosity_conditions(const FamilySets& fam);

ConditionReport blo_estimate(const RootFrame& frame, const SetOracle& oracle, const FamilySets& fam,
                             const IntegrationOptions& options);

/// Frames to analyse: dyadic subcubes of the base frame at the given levels,
/// seeded random frames inside it, and explicit frames.
struct SweepSpec {
    std::optional<std::pair<unsigned, unsigned>> dyadic_levels;
    std::size_t random_frames = 0;
    std::uint64_t random_seed = 0;
    /// Random frames have side base_side * 2^-k, k drawn from this range.
    std::pair<unsigned, unsigned> random_levels{0, 4};
    std::vector<RootFrame> explicit_frames;
};

std::vector<RootFrame> sweep_frames(const RootFrame& base, const SweepSpec& spec);

struct FrameAnalysis {
    RootFrame frame = RootFrame::unit(1);
    bool degenerate = false;
    bool determined = false;
    std::size_t largest_empty_level = 0;
    Certificate certificate;
    /// One entry per tag, in kConditionTags order.
    std::vector<ConditionReport> conditions;
    std::optional<Rational> porosity_ratio;
    IdentityResult identity;
    std::optional<IdentityResult> d0_identity;
    /// Condition (iii) partial sums S_j = sum over D_0 levels m0..j, j = m0..J;
    /// without M(R), the full hitting-measure partial sums for j = 0..J.
    std::vector<double> partial_sums;
    std::size_t partial_sums_from = 0;

    const ConditionReport& report(ConditionTag tag) const;
};

struct SweepOptions {
    WeakPorosityParams params;
    IntegrationOptions quadrature;
    bool include_blo = true;
    unsigned jobs = 1;
};

FrameAnalysis analyze_frame(const RootFrame& frame, const SetOracle& oracle, const SweepOptions& options);

struct ConditionAggregate {
    ConditionTag condition = ConditionTag::thm_i;
    /// Max over determined frames; nullopt when none.
    std::optional<double> max_implied;
    std::size_t argmax = 0;
    std::size_t undetermined = 0;
};

struct Aggregates {
    std::vector<ConditionAggregate> conditions;
    std::optional<Rational> min_coverage;
    std::optional<Rational> min_porosity_ratio;
    std::size_t min_porosity_frame = 0;
    std::size_t undetermined_frames = 0;
    std::size_t degenerate_frames = 0;
    std::size_t certificate_failures = 0;
    std::size_t nonzero_residuals = 0;
};

struct Evidence {
    /// "supported", "refuted at tested scales" or "refuted above mesh scale".
    std::string weak_porosity;
    /// "supported at tested scales", "supported above scale s", "refuted at tested scales" or "not assessed".
    /// Refuted when |slope| >= 1/2 or a frame above the set's resolution has no empty cube.
    std::string porosity;
    /// Least-squares slope of log2(min porosity ratio) against log2(frame side); nullopt with one scale.
    std::optional<double> porosity_slope;
    std::string summary;
};

struct AnalysisReport {
    std::vector<FrameAnalysis> frames;
    Aggregates aggregates;
    Evidence evidence;
};

/// Frames are evaluated independently (in parallel with jobs > 1); output
/// order matches the input order. Throws std::invalid_argument for an empty list.
AnalysisReport sweep(const SetSpec& spec, const std::vector<RootFrame>& frames, const SweepOptions& options);

Aggregates aggregate(const std::vector<FrameAnalysis>& frames);
Evidence assess(const SetSpec& spec, const std::vector<FrameAnalysis>& frames, const Aggregates& agg);

/// Finest scale resolved by the set description (ratio^g, mesh), if any.
std::optional<Rational> set_resolution(const SetSpec& spec);

}  // namespace porosity
