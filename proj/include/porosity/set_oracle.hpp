#pragma once

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "porosity/dyadic.hpp"

namespace porosity {

struct SetSpec;

/// A finite point set.
struct PointsSpec {
    std::vector<Point> points;
};

/// spacing * Z^dim.
struct LatticeSpec {
    Rational spacing;
    std::size_t dim = 1;
};

/// Product of dim copies of the generation-g Cantor approximation in [0,1]:
/// every closed interval [a,b] is replaced by [a, a+ratio(b-a)] and [b-ratio(b-a), b].
struct CantorProductSpec {
    Rational ratio;
    unsigned generation = 1;
    std::size_t dim = 1;
};

struct UnionSpec {
    std::vector<SetSpec> members;
};

/// The grid mesh * Z^d restricted to the half-open subcube prod [origin_i, origin_i + side).
/// A fine mesh emulates a set whose closure has positive measure.
struct ComplementGridSpec {
    Rational mesh;
    Point origin;
    Rational side;
};

struct SetSpec {
    std::variant<PointsSpec, LatticeSpec, CantorProductSpec, UnionSpec, ComplementGridSpec> variant;

    std::size_t dim() const;
    /// "points", "lattice", "cantor_product", "union" or "complement_grid".
    std::string kind() const;
};

/// Validation failure; field() names the offending spec field.
class SpecError : public std::invalid_argument {
public:
    SpecError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field))
    {
    }
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

void validate(const SetSpec& spec);

/// Cube-intersection predicate bound to one root frame.
class CubeTester {
public:
    virtual ~CubeTester() = default;
    /// Q cap E != empty for the half-open cube Q.
    virtual bool intersects(const DyadicCube& q) const = 0;
};

/// The set E with the queries the analysis needs. Immutable; every query is
/// safe to call concurrently.
class SetOracle {
public:
    explicit SetOracle(SetSpec spec) : spec_(std::move(spec)) {}
    virtual ~SetOracle() = default;

    const SetSpec& descriptor() const { return spec_; }
    std::size_t dim() const { return spec_.dim(); }

    /// Exact test of E against the half-open box prod [lo_i, hi_i).
    virtual bool intersects(const Box& half_open) const = 0;
    /// Exact test of clos E against the closed box prod [lo_i, hi_i].
    virtual bool touches_closure(const Box& closed) const = 0;

    /// Exact squared Euclidean distance from a rational point to E.
    virtual Rational distance_squared(const Point& x) const = 0;
    /// Floating-point distance, used by quadrature and sampling.
    virtual double distance(std::span<const double> x) const = 0;

    /// Exact sup over the closed box of dist(x,E)^2, when the variant allows it.
    virtual std::optional<Rational> sup_distance_squared(const Box& closed) const = 0;

    /// Frame-bound intersection tester. The default derives cube geometry in
    /// rationals and calls intersects(Box).
    virtual std::unique_ptr<CubeTester> bind(const RootFrame& frame) const;

private:
    SetSpec spec_;
};

/// Validates the spec and builds its oracle. Throws SpecError.
std::unique_ptr<SetOracle> build_oracle(const SetSpec& spec);

/// Euclidean distance from x to E. Throws std::invalid_argument on dimension mismatch.
double distance(const SetOracle& oracle, const Point& x);

}  // namespace porosity
