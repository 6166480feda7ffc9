#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "porosity/rational.hpp"

namespace porosity {

/// Deepest level a dyadic cube may have; indices are 64-bit and fixed-point
/// point location uses 63 fractional bits.
inline constexpr unsigned kMaxLevel = 62;

using Point = std::vector<Rational>;
using IndexVector = boost::container::small_vector<std::uint64_t, 4>;

/// The analysis cube R = prod_i [origin_i, origin_i + side).
class RootFrame {
public:
    RootFrame(Point origin, Rational side);

    /// Unit cube [0,1)^dim.
    static RootFrame unit(std::size_t dim);

    std::size_t dim() const { return origin_.size(); }
    const Point& origin() const { return origin_; }
    const Rational& side() const { return side_; }
    /// |R| = side^dim.
    Rational volume() const;

    bool contains(const Point& x) const;

    friend bool operator==(const RootFrame&, const RootFrame&) = default;

private:
    Point origin_;
    Rational side_;
};

/// A cube of D(R): level j and an integer index vector, each entry in [0, 2^j).
/// Geometry is always derived from a RootFrame.
struct DyadicCube {
    unsigned level = 0;
    IndexVector index;

    static DyadicCube root(std::size_t dim);

    std::size_t dim() const { return index.size(); }

    friend bool operator==(const DyadicCube& a, const DyadicCube& b)
    {
        return a.level == b.level && a.index == b.index;
    }
    /// Level first, then lexicographic index.
    friend std::strong_ordering operator<=>(const DyadicCube& a, const DyadicCube& b);
};

/// The 2^d children of q, lexicographic by index.
std::vector<DyadicCube> children(const DyadicCube& q);

/// The unique cube one level up. Throws std::domain_error for the root.
DyadicCube parent(const DyadicCube& q);

/// The ancestor of q at the given (shallower or equal) level.
DyadicCube ancestor(const DyadicCube& q, unsigned level);

/// True when a is q or an ancestor of q.
bool contains(const DyadicCube& a, const DyadicCube& q);

/// Dyadic cubes are either nested or disjoint.
bool disjoint(const DyadicCube& a, const DyadicCube& b);

/// The level-`level` cube containing x, or nullopt when x lies outside R.
std::optional<DyadicCube> locate_point(const RootFrame& frame, const Point& x, unsigned level);

/// Axis-aligned box with rational corners [lo_i, hi_i].
struct Box {
    Point lo;
    Point hi;

    std::size_t dim() const { return lo.size(); }
};

/// Geometry of a cube relative to its frame.
Box cube_box(const RootFrame& frame, const DyadicCube& q);
Rational cube_side(const RootFrame& frame, const DyadicCube& q);
/// |Q| / |R| = 2^{-level * d}.
Rational relative_measure(const DyadicCube& q);

/// The frame whose root cube is q.
RootFrame subframe(const RootFrame& frame, const DyadicCube& q);

/// All level-`level` cubes of D(R) in lexicographic order.
std::vector<DyadicCube> cubes_at_level(std::size_t dim, unsigned level);

}  // namespace porosity
