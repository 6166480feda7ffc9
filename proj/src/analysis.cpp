#include "porosity/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

namespace porosity {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ConditionReport blank(const FamilySets& fam, ConditionTag tag)
{
    ConditionReport r;
    r.frame = fam.frame;
    r.condition = tag;
    r.rhs_scale = fam.frame.volume().get_d();
    r.implied_constant = kInf;
    return r;
}

void mark_undetermined(ConditionReport& r, const FamilySets& fam)
{
    r.determined = false;
    r.implied_constant = kInf;
    r.notes = "no empty dyadic cube up to depth " + std::to_string(fam.depth);
}

double log_inv(double x) { return -std::log(x); }

double log_inv_m_side(const FamilySets& fam)
{
    return log_inv(fam.frame.side().get_d()) + static_cast<double>(fam.largest_empty->level) * std::numbers::ln2;
}

// Frontier measure relative to |R|; bounds sum_{j>J} |D_j| when it halves per level.
double frontier_tail(const FamilySets& fam)
{
    if (fam.degenerate) return 0.0;
    return std::ldexp(static_cast<double>(fam.frontier.size()), -static_cast<int>(fam.depth * fam.dim()));
}

const char* kDegenerateNote = "R cap E is empty; F = {R}, M(R) = R by convention";

std::uint64_t draw(std::mt19937_64& rng, std::uint64_t n) { return n == 0 ? 0 : rng() % n; }

}  // namespace

void validate(const WeakPorosityParams& params)
{
    if (params.delta <= 0 || params.delta > 1) throw SpecError("delta", "must lie in (0, 1]");
    if (params.c_threshold <= 0 || params.c_threshold >= 1) throw SpecError("c_threshold", "must lie in (0, 1)");
    if (params.depth < 1 || params.depth > kMaxLevel) throw SpecError("depth", "must lie in [1, " + std::to_string(kMaxLevel) + "]");
}

std::string_view to_string(ConditionTag tag)
{
    switch (tag) {
    case ConditionTag::def2: return "def2";
    case ConditionTag::thm_i: return "thm_i";
    case ConditionTag::thm_ii: return "thm_ii";
    case ConditionTag::thm_iii: return "thm_iii";
    case ConditionTag::cor3_i: return "cor3_i";
    case ConditionTag::cor3_ii: return "cor3_ii";
    case ConditionTag::blo: return "blo";
    }
    return "unknown";
}

Certificate weak_porosity_certificate(const FamilySets& fam, const WeakPorosityParams& params)
{
    Certificate cert;
    if (!fam.largest_empty_found()) return cert;
    cert.determined = true;
    const Rational m_measure = relative_measure(*fam.largest_empty);
    const Rational floor = params.delta * m_measure;
    for (const auto& q : fam.empty_maximal) {
        Rational measure = relative_measure(q);
        if (measure >= floor) {
            cert.family.push_back(q);
            cert.coverage_ratio += measure;
        }
    }
    cert.pass = cert.coverage_ratio >= params.c_threshold;
    return cert;
}

ConditionReport certificate_report(const FamilySets& fam, const Certificate& cert)
{
    ConditionReport r = blank(fam, ConditionTag::def2);
    r.rhs_scale = 1.0;
    if (!cert.determined) {
        mark_undetermined(r, fam);
        return r;
    }
    r.determined = true;
    r.exact_lhs = cert.coverage_ratio;
    r.lhs = cert.coverage_ratio.get_d();
    r.implied_constant = r.lhs;
    r.notes = "family restricted to F(R,E); " + std::to_string(cert.family.size()) + " cubes";
    if (fam.degenerate) r.notes += "; " + std::string(kDegenerateNote);
    return r;
}

ConditionReport condition_i(const FamilySets& fam)
{
    ConditionReport r = blank(fam, ConditionTag::thm_i);
    WhitneySum w = whitney_entropy_sum(fam, fam.frame);
    r.lhs = w.value;
    r.tail = w.tail_bound / r.rhs_scale;
    if (!fam.largest_empty_found()) {
        mark_undetermined(r, fam);
        return r;
    }
    r.determined = true;
    r.implied_constant = r.lhs / r.rhs_scale - log_inv_m_side(fam);
    if (fam.degenerate) r.notes = kDegenerateNote;
    return r;
}

ConditionReport condition_ii(const FamilySets& fam)
{
    ConditionReport r = blank(fam, ConditionTag::thm_ii);
    Rational exact = level_weighted_measure(fam.hitting_counts(), fam.dim(), 0);
    r.exact_lhs = exact;
    r.lhs = exact.get_d() * r.rhs_scale;
    r.tail = frontier_tail(fam);
    if (!fam.largest_empty_found()) {
        mark_undetermined(r, fam);
        return r;
    }
    r.determined = true;
    // log(l(R)/l(M)) = m0 log 2
    r.implied_constant = exact.get_d() - static_cast<double>(fam.largest_empty->level) * std::numbers::ln2;
    if (fam.degenerate) r.notes = kDegenerateNote;
    return r;
}

ConditionReport condition_iii(const FamilySets& fam)
{
    ConditionReport r = blank(fam, ConditionTag::thm_iii);
    r.tail = frontier_tail(fam);
    if (!fam.largest_empty_found()) {
        r.lhs = level_weighted_measure(fam.hitting_counts(), fam.dim(), 0).get_d() * r.rhs_scale;
        mark_undetermined(r, fam);
        return r;
    }
    Rational exact = level_weighted_measure(fam.hitting_counts(), fam.dim(), fam.largest_empty->level);
    r.exact_lhs = exact;
    r.lhs = exact.get_d() * r.rhs_scale;
    r.determined = true;
    r.implied_constant = exact.get_d();
    if (fam.degenerate) r.notes = kDegenerateNote;
    return r;
}

PorosityConditions porosity_conditions(const FamilySets& fam)
{
    PorosityConditions out;
    out.dynkin = condition_i(fam);
    out.dynkin.condition = ConditionTag::cor3_i;
    out.bnt = condition_ii(fam);
    out.bnt.condition = ConditionTag::cor3_ii;
    if (!fam.largest_empty_found()) return out;
    out.dynkin.implied_constant = out.dynkin.lhs / out.dynkin.rhs_scale - log_inv(fam.frame.side().get_d());
    out.bnt.implied_constant = out.bnt.exact_lhs->get_d();
    out.porosity_ratio = pow2_neg(fam.largest_empty->level);
    return out;
}

ConditionReport blo_estimate(const RootFrame& frame, const SetOracle& oracle, const FamilySets& fam,
                             const IntegrationOptions& options)
{
    ConditionReport r = blank(fam, ConditionTag::blo);
    r.rhs_scale = 1.0;
    if (!fam.largest_empty_found()) {
        mark_undetermined(r, fam);
        return r;
    }
    const double volume = frame.volume().get_d();
    IntegralEstimate integral = log_distance_integral(frame, oracle, options);
    SupDistanceBracket bracket = sup_distance_estimate(oracle, frame, fam);
    r.lhs = integral.value / volume;
    r.tail = integral.error_estimate / volume;
    r.determined = true;
    r.implied_constant = r.lhs - log_inv(bracket.upper);
    r.implied_lower = r.lhs - log_inv(bracket.lower);
    r.notes = bracket.exact_squared ? "sup distance exact" : "sup distance bracketed";
    if (integral.budget_exhausted) r.notes += "; quadrature budget exhausted";
    if (fam.degenerate) r.notes += "; " + std::string(kDegenerateNote);
    return r;
}

std::vector<RootFrame> sweep_frames(const RootFrame& base, const SweepSpec& spec)
{
    std::vector<RootFrame> frames;
    if (spec.dyadic_levels) {
        auto [lo, hi] = *spec.dyadic_levels;
        if (lo > hi || hi > kMaxLevel) throw SpecError("dyadic_levels", "invalid level range");
        for (unsigned level = lo; level <= hi; ++level)
            for (const auto& q : cubes_at_level(base.dim(), level)) frames.push_back(subframe(base, q));
    }
    if (spec.random_frames > 0) {
        auto [lo, hi] = spec.random_levels;
        if (lo > hi || hi > kMaxLevel) throw SpecError("random_levels", "invalid level range");
        std::mt19937_64 rng(spec.random_seed);
        for (std::size_t k = 0; k < spec.random_frames; ++k) {
            const unsigned level = lo + static_cast<unsigned>(draw(rng, hi - lo + 1));
            const Rational side = base.side() * pow2_neg(level);
            Point origin = base.origin();
            for (auto& o : origin) {
                const std::uint64_t b = 1 + draw(rng, 64);
                const std::uint64_t a = draw(rng, b + 1);
                Rational offset(static_cast<long>(a), static_cast<long>(b));
                offset.canonicalize();
                o += offset * (base.side() - side);
            }
            frames.emplace_back(std::move(origin), side);
        }
    }
    for (const auto& f : spec.explicit_frames) {
        if (f.dim() != base.dim()) throw SpecError("explicit_frames", "dimension differs from the base frame");
        frames.push_back(f);
    }
    return frames;
}

const ConditionReport& FrameAnalysis::report(ConditionTag tag) const
{
    for (const auto& r : conditions)
        if (r.condition == tag) return r;
    throw std::out_of_range("condition not evaluated: " + std::string(to_string(tag)));
}

FrameAnalysis analyze_frame(const RootFrame& frame, const SetOracle& oracle, const SweepOptions& options)
{
    FamilySets fam = compute_families(frame, oracle, options.params.depth);
    FrameAnalysis out;
    out.frame = frame;
    out.degenerate = fam.degenerate;
    out.determined = fam.largest_empty_found();
    if (out.determined) out.largest_empty_level = fam.largest_empty->level;

    out.certificate = weak_porosity_certificate(fam, options.params);
    PorosityConditions pc = porosity_conditions(fam);
    out.porosity_ratio = pc.porosity_ratio;
    out.conditions.push_back(certificate_report(fam, out.certificate));
    out.conditions.push_back(condition_i(fam));
    out.conditions.push_back(condition_ii(fam));
    ConditionReport iii = condition_iii(fam);
    out.identity = truncated_identity_check(fam);
    if (out.determined) {
        out.d0_identity = truncated_d0_identity_check(fam);
        if (*iii.exact_lhs != out.d0_identity->lhs) iii.notes = "disagrees with the D_0 identity";
    }
    out.conditions.push_back(std::move(iii));
    out.conditions.push_back(std::move(pc.dynkin));
    out.conditions.push_back(std::move(pc.bnt));
    if (options.include_blo) {
        out.conditions.push_back(blo_estimate(frame, oracle, fam, options.quadrature));
    } else {
        ConditionReport skipped = blank(fam, ConditionTag::blo);
        skipped.rhs_scale = 1.0;
        skipped.notes = "not evaluated";
        out.conditions.push_back(std::move(skipped));
    }

    const auto counts = fam.hitting_counts();
    out.partial_sums_from = out.determined ? out.largest_empty_level : 0;
    Rational running = 0;
    for (std::size_t j = out.partial_sums_from; j < counts.size(); ++j) {
        running += Rational(Integer(counts[j])) * pow2_neg(static_cast<unsigned>(j * frame.dim()));
        out.partial_sums.push_back(running.get_d());
    }
    return out;
}

Aggregates aggregate(const std::vector<FrameAnalysis>& frames)
{
    Aggregates agg;
    for (ConditionTag tag : kConditionTags) {
        ConditionAggregate ca;
        ca.condition = tag;
        for (std::size_t i = 0; i < frames.size(); ++i) {
            const ConditionReport& r = frames[i].report(tag);
            if (!r.determined) {
                if (r.notes != "not evaluated") ++ca.undetermined;
                continue;
            }
            if (!ca.max_implied || r.implied_constant > *ca.max_implied) {
                ca.max_implied = r.implied_constant;
                ca.argmax = i;
            }
        }
        agg.conditions.push_back(ca);
    }
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const FrameAnalysis& f = frames[i];
        if (!f.determined) ++agg.undetermined_frames;
        if (f.degenerate) ++agg.degenerate_frames;
        if (f.certificate.determined) {
            if (!agg.min_coverage || f.certificate.coverage_ratio < *agg.min_coverage) agg.min_coverage = f.certificate.coverage_ratio;
            if (!f.certificate.pass) ++agg.certificate_failures;
        }
        if (f.porosity_ratio && (!agg.min_porosity_ratio || *f.porosity_ratio < *agg.min_porosity_ratio)) {
            agg.min_porosity_ratio = f.porosity_ratio;
            agg.min_porosity_frame = i;
        }
        if (f.identity.remainder != 0) ++agg.nonzero_residuals;
        if (f.d0_identity && f.d0_identity->remainder != 0) ++agg.nonzero_residuals;
    }
    return agg;
}

std::optional<Rational> set_resolution(const SetSpec& spec)
{
    return std::visit(
        [](const auto& s) -> std::optional<Rational> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CantorProductSpec>) {
                Rational r = 1;
                for (unsigned g = 0; g < s.generation; ++g) r *= s.ratio;
                return r;
            } else if constexpr (std::is_same_v<T, ComplementGridSpec>) {
                return s.mesh;
            } else if constexpr (std::is_same_v<T, UnionSpec>) {
                std::optional<Rational> best;
                for (const auto& m : s.members) {
                    auto r = set_resolution(m);
                    if (r && (!best || *r > *best)) best = r;
                }
                return best;
            } else {
                return std::nullopt;
            }
        },
        spec.variant);
}

Evidence assess(const SetSpec& spec, const std::vector<FrameAnalysis>& frames, const Aggregates& agg)
{
    Evidence ev;
    const auto resolution = set_resolution(spec);

    // Levels whose cubes are at least as large as the set's resolution; finer
    // levels see the approximation, not the set.
    auto resolved = [&](const FrameAnalysis& f, std::size_t level) {
        return !resolution || f.frame.side() * pow2_neg(static_cast<unsigned>(level)) >= *resolution;
    };

    // Four consecutive resolved levels each adding at least |R|/2 to the
    // condition (iii) sum indicate growth linear in J rather than a convergent
    // series. Undetermined frames carry the full hitting measure, 1 per level.
    bool stalled = false;
    bool collapsed = false;
    for (const auto& f : frames) {
        std::size_t run = 0;
        for (std::size_t k = 0; k < f.partial_sums.size() && resolved(f, f.partial_sums_from + k); ++k) {
            const double inc = k == 0 ? f.partial_sums[0] : f.partial_sums[k] - f.partial_sums[k - 1];
            run = inc >= 0.5 ? run + 1 : 0;
            if (run >= 4) stalled = true;
        }
        if (!f.determined && resolved(f, f.partial_sums.size() - 1)) collapsed = true;
    }
    ev.weak_porosity = stalled ? (resolution ? "refuted above mesh scale" : "refuted at tested scales") : "supported";

    std::map<Rational, Rational> min_by_side;
    for (const auto& f : frames) {
        if (!f.porosity_ratio) continue;
        auto [it, inserted] = min_by_side.try_emplace(f.frame.side(), *f.porosity_ratio);
        if (!inserted && *f.porosity_ratio < it->second) it->second = *f.porosity_ratio;
    }
    if (min_by_side.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(min_by_side.size());
        for (const auto& [side, ratio] : min_by_side) {
            const double x = std::log2(side.get_d());
            const double y = std::log2(ratio.get_d());
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        ev.porosity_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    // A power-law trend of the smallest ratio in the frame side, either way,
    // means no uniform lower bound.
    if (collapsed || (ev.porosity_slope && std::abs(*ev.porosity_slope) >= 0.5))
        ev.porosity = "refuted at tested scales";
    else if (ev.porosity_slope)
        ev.porosity = resolution ? "supported above scale " + to_string(*resolution) : "supported at tested scales";
    else
        ev.porosity = "not assessed";

    ev.summary = "weakly porous: " + ev.weak_porosity + "; porous: " + ev.porosity;
    if (agg.undetermined_frames > 0) ev.summary += " (" + std::to_string(agg.undetermined_frames) + " undetermined frames)";
    return ev;
}

AnalysisReport sweep(const SetSpec& spec, const std::vector<RootFrame>& frames, const SweepOptions& options)
{
    if (frames.empty()) throw std::invalid_argument("frame list is empty");
    validate(options.params);
    auto oracle = build_oracle(spec);

    AnalysisReport report;
    report.frames.resize(frames.size());
    const unsigned workers = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(frames.size())));
    SweepOptions per_frame = options;
    per_frame.quadrature.jobs = 1;
    if (workers == 1) {
        for (std::size_t i = 0; i < frames.size(); ++i) report.frames[i] = analyze_frame(frames[i], *oracle, per_frame);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = next++; i < frames.size(); i = next++)
                        report.frames[i] = analyze_frame(frames[i], *oracle, per_frame);
                } catch (...) {
                    errors[w] = std::current_exception();
                    next = frames.size();
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    report.aggregates = aggregate(report.frames);
    report.evidence = assess(spec, report.frames, report.aggregates);
    return report;
}

}  // namespace porosity
