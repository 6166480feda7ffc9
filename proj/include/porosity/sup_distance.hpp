#pragma once

#include <optional>

#include "porosity/families.hpp"
#include "porosity/set_oracle.hpp"

namespace porosity {

/// Bracket lower <= sup_{x in R} dist(x,E) <= upper.
struct SupDistanceBracket {
    double lower = 0.0;
    double upper = 0.0;
    /// Set when the oracle computes the supremum exactly; then lower == upper.
    std::optional<Rational> exact_squared;
    /// R cap E is empty and the bracket comes from the frame alone.
    bool degenerate = false;
};

/// lower = max(l(M(R))/2, sampled distances); upper = 2 sqrt(d) l(M(R)), since
/// every point of R lies in an F-cube whose doubled parent meets E.
/// Throws std::domain_error("undetermined") if M(R) was not found.
SupDistanceBracket sup_distance_estimate(const SetOracle& oracle, const RootFrame& frame, const FamilySets& fam);

}  // namespace porosity
