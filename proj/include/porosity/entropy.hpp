#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include "porosity/families.hpp"
#include "porosity/set_oracle.hpp"
#include "porosity/sup_distance.hpp"

namespace porosity {

/// Whitney sum sum_{F(R,E), level<=J} |Q'| log(1/l(Q')) in absolute units, with
/// a tail estimate for the part below depth J.
struct WhitneySum {
    double value = 0.0;
    /// Frontier measure times (|log(1/l_J)| + 2 log 2). Exact for a single point
    /// in d=1; assumes the frontier measure at least halves per level beyond J.
    double tail_bound = 0.0;
};

WhitneySum whitney_entropy_sum(const FamilySets& fam, const RootFrame& frame);

enum class IntegrationMethod { adaptive, monte_carlo };

struct IntegrationOptions {
    IntegrationMethod method = IntegrationMethod::adaptive;
    /// Cell evaluations (adaptive) or samples (Monte Carlo).
    std::uint64_t budget = 100000;
    /// Adaptive refinement stops early once the error estimate is below this.
    double tolerance = 0.0;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
};

struct IntegralEstimate {
    double value = 0.0;
    /// Adaptive: accumulated per-cell error. Monte Carlo: standard error.
    double error_estimate = 0.0;
    std::uint64_t work = 0;
    bool budget_exhausted = false;
};

/// integral over R of log(1/dist(x,E)) dx.
IntegralEstimate log_distance_integral(const RootFrame& frame, const SetOracle& oracle, const IntegrationOptions& options);

/// log(1/side) + log 2 + H_dim, the mean of log(1/dist(x, boundary)) over a cube.
double lemma1_reference(unsigned dim, double side);

/// The harmonic number 1 + 1/2 + ... + 1/d.
double harmonic(unsigned d);

/// Numerical integral over Q = [0, side)^dim of log(1/dist(x, boundary of Q)).
/// Returns the average over Q (value / |Q|), with its error, so it compares
/// directly with lemma1_reference.
IntegralEstimate boundary_log_distance_integral(unsigned dim, double side, const IntegrationOptions& options);

/// Low-level integrator: log(1/dist) over the frame, where `singular` marks
/// cubes whose closure meets the zero set of dist.
struct LogDistanceField {
    std::function<double(std::span<const double>)> distance;
    std::function<bool(const DyadicCube&)> singular;
};
IntegralEstimate integrate_log_distance(const RootFrame& frame, const LogDistanceField& field, const IntegrationOptions& options);

struct EntropyBandCheck {
    double whitney = 0.0;
    double whitney_tail = 0.0;
    IntegralEstimate integral;
    /// |whitney - integral| / |R|
    double diff = 0.0;
    /// max(log(2 sqrt d), log 2 + H_d) plus both error terms over |R|.
    double band = 0.0;
    double constant = 0.0;
    bool pass = false;
};

/// Compares the Whitney sum with the entropy integral. The family must be
/// computed for the same frame and oracle.
EntropyBandCheck prop2_band_check(const RootFrame& frame, const SetOracle& oracle, const FamilySets& fam,
                                  const IntegrationOptions& options);

/// The same comparison for precomputed estimates.
EntropyBandCheck compare_band(const RootFrame& frame, const WhitneySum& whitney, const IntegralEstimate& integral);

struct InfBracketCheck {
    double log_inv_m_side = 0.0;
    /// |log(1/l(M)) - log(1/s)| at the ends of the sup-distance bracket.
    double diff_lower = 0.0;
    double diff_upper = 0.0;
    /// diff at the exact supremum when known, else the larger bracket end.
    double diff = 0.0;
    double band = 0.0;
    bool exact = false;
    bool pass = false;
    SupDistanceBracket bracket;
};

/// Checks |log(1/l(M(R))) - inf_R log(1/dist)| <= log(2 sqrt d) over the whole
/// sup-distance bracket. Throws std::domain_error("undetermined") without M(R).
InfBracketCheck prop2_inf_check(const RootFrame& frame, const SetOracle& oracle, const FamilySets& fam);

/// All three entropy estimates for one frame.
struct EntropyEstimate {
    WhitneySum whitney;
    IntegralEstimate quadrature;
    IntegralEstimate monte_carlo;
    std::uint64_t seed = 0;
    double lemma1_constant = 0.0;
};

EntropyEstimate entropy_estimates(const RootFrame& frame, const SetOracle& oracle, const FamilySets& fam,
                                  std::uint64_t quadrature_budget, std::uint64_t samples, std::uint64_t seed,
                                  unsigned jobs = 1);

}  // namespace porosity
