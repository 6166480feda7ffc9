#pragma once

// Test-only helpers: spec builders and a brute-force family enumerator that
// shares no code path with compute_families.

#include <random>
#include <string>
#include <vector>

#include "porosity/dyadic.hpp"
#include "porosity/families.hpp"
#include "porosity/set_oracle.hpp"

namespace porosity::testing {

inline Rational q(const char* s) { return parse_rational(s); }

inline Point pt(std::initializer_list<const char*> coords)
{
    Point p;
    for (const char* c : coords) p.push_back(parse_rational(c));
    return p;
}

inline SetSpec points_spec(std::vector<Point> pts) { return SetSpec{PointsSpec{std::move(pts)}}; }
inline SetSpec lattice_spec(const char* spacing, std::size_t dim) { return SetSpec{LatticeSpec{parse_rational(spacing), dim}}; }
inline SetSpec cantor_spec(const char* ratio, unsigned g, std::size_t dim)
{
    return SetSpec{CantorProductSpec{parse_rational(ratio), g, dim}};
}

inline RootFrame frame_1d(const char* origin, const char* side) { return RootFrame({parse_rational(origin)}, parse_rational(side)); }

inline DyadicCube cube(unsigned level, std::initializer_list<std::uint64_t> idx)
{
    return DyadicCube{level, IndexVector(idx.begin(), idx.end())};
}

inline bool in_half_open(const Point& p, const Box& b)
{
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] < b.lo[i] || !(p[i] < b.hi[i])) return false;
    return true;
}

/// Exhaustive enumeration of D_j(R) for j <= J against a finite point list.
struct BruteFamilies {
    std::vector<std::vector<DyadicCube>> hitting;
    std::vector<DyadicCube> empty_maximal;
    // sums in units of |R|, accumulated cube by cube
    Rational hitting_measure{0};
    Rational empty_level_weighted{0};
};

inline BruteFamilies brute_families(const RootFrame& frame, const std::vector<Point>& pts, unsigned J)
{
    BruteFamilies out;
    out.hitting.resize(J + 1);
    for (unsigned j = 0; j <= J; ++j) {
        for (const auto& c : cubes_at_level(frame.dim(), j)) {
            Box b = cube_box(frame, c);
            bool hit = false;
            for (const auto& p : pts) hit = hit || in_half_open(p, b);
            Rational rel = 1;
            for (unsigned k = 0; k < j * frame.dim(); ++k) rel /= 2;
            if (hit) {
                out.hitting[j].push_back(c);
                out.hitting_measure += rel;
            } else if (j > 0) {
                Box pb = cube_box(frame, parent(c));
                bool parent_hit = false;
                for (const auto& p : pts) parent_hit = parent_hit || in_half_open(p, pb);
                if (parent_hit) {
                    out.empty_maximal.push_back(c);
                    out.empty_level_weighted += rel * j;
                }
            }
        }
    }
    return out;
}

/// Random rational point in [0,1)^d with denominators up to max_den.
inline Point random_point(std::mt19937_64& rng, std::size_t d, long max_den)
{
    std::uniform_int_distribution<long> den_dist(1, max_den);
    Point p;
    for (std::size_t i = 0; i < d; ++i) {
        long den = den_dist(rng);
        std::uniform_int_distribution<long> num_dist(0, den - 1);
        Rational r(num_dist(rng), den);
        r.canonicalize();
        p.push_back(r);
    }
    return p;
}

}  // namespace porosity::testing
