#pragma once

#include <optional>
#include <vector>

#include "porosity/dyadic.hpp"
#include "porosity/set_oracle.hpp"

namespace porosity {

/// D(R,E), F(R,E), the frontier D_J(R,E) and M(R), truncated at depth J.
struct FamilySets {
    RootFrame frame;
    unsigned depth = 0;
    /// hitting[j] = cubes of D_j(R) meeting E, lexicographic; size depth+1.
    std::vector<std::vector<DyadicCube>> hitting;
    /// Maximal empty cubes (empty, parent hits E) at levels <= depth, ordered by level then index.
    std::vector<DyadicCube> empty_maximal;
    /// Level-depth cubes meeting E.
    std::vector<DyadicCube> frontier;
    /// M(R): first empty cube in breadth-first, lexicographic order.
    std::optional<DyadicCube> largest_empty;
    /// R cap E is empty; by convention F = {R} and M(R) = R.
    bool degenerate = false;

    bool largest_empty_found() const { return largest_empty.has_value(); }
    std::size_t dim() const { return frame.dim(); }

    /// Number of cubes per level, levels 0..depth.
    std::vector<std::size_t> hitting_counts() const;
    std::vector<std::size_t> empty_counts() const;
};

/// Breadth-first refinement of R, expanding only cubes that meet E.
/// Throws std::invalid_argument for depth > kMaxLevel or a dimension mismatch.
FamilySets compute_families(const RootFrame& frame, const SetOracle& oracle, unsigned depth);

/// Exact sums, in units of |R|.
struct IdentityResult {
    Rational lhs;
    Rational rhs;
    /// lhs - rhs for the truncated identities, the tail (J+1) |D_J| for the limit form.
    Rational remainder;
};

/// sum_{D(R,E), level<=J} |Q| = sum_F |Q'| level(Q') + (J+1) sum_frontier |P|.
IdentityResult truncated_identity_check(const FamilySets& fam);

/// lhs = sum_D |Q|, rhs = sum_F |Q'| log2(l(R)/l(Q')), remainder = tail bound (J+1) |D_J|.
IdentityResult limit_identity_check(const FamilySets& fam);

/// Same counting restricted to D_0(R,E) = {Q in D(R,E): |Q| <= |M(R)|}.
/// Throws std::domain_error("no empty cube up to depth J") when M(R) was not found.
IdentityResult truncated_d0_identity_check(const FamilySets& fam);

/// sum over levels of count_j * 2^{-j d}, exactly.
Rational level_weighted_measure(const std::vector<std::size_t>& counts, std::size_t dim, unsigned from_level = 0);

}  // namespace porosity
