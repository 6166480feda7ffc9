#include "porosity/dyadic.hpp"

#include <algorithm>
#include <stdexcept>

namespace porosity {

RootFrame::RootFrame(Point origin, Rational side)
    : origin_(std::move(origin)), side_(std::move(side))
{
    if (origin_.empty()) throw std::invalid_argument("frame: dimension must be positive");
    if (sgn(side_) <= 0) throw std::invalid_argument("frame: side must be positive");
}

RootFrame RootFrame::unit(std::size_t dim)
{
    return RootFrame(Point(dim, Rational(0)), Rational(1));
}

Rational RootFrame::volume() const
{
    Rational v(1);
    for (std::size_t i = 0; i < dim(); ++i) v *= side_;
    return v;
}

bool RootFrame::contains(const Point& x) const
{
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i) {
        if (x[i] < origin_[i]) return false;
        if (x[i] >= origin_[i] + side_) return false;
    }
    return true;
}

DyadicCube DyadicCube::root(std::size_t dim)
{
    return DyadicCube{0, IndexVector(dim, 0)};
}

std::strong_ordering operator<=>(const DyadicCube& a, const DyadicCube& b)
{
    if (auto c = a.level <=> b.level; c != 0) return c;
    return std::lexicographical_compare_three_way(a.index.begin(), a.index.end(), b.index.begin(), b.index.end());
}

std::vector<DyadicCube> children(const DyadicCube& q)
{
    if (q.level >= kMaxLevel) throw std::domain_error("cube at maximum level has no children");
    const std::size_t d = q.dim();
    const std::size_t count = std::size_t{1} << d;
    std::vector<DyadicCube> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        DyadicCube c{q.level + 1, IndexVector(d)};
        // Bit (d-1-i) of k selects the upper half along axis i, giving lexicographic order.
        for (std::size_t i = 0; i < d; ++i)
            c.index[i] = 2 * q.index[i] + ((k >> (d - 1 - i)) & 1u);
        out.push_back(std::move(c));
    }
    return out;
}

DyadicCube parent(const DyadicCube& q)
{
    if (q.level == 0) throw std::domain_error("root has no parent");
    DyadicCube p{q.level - 1, q.index};
    for (auto& v : p.index) v >>= 1;
    return p;
}

DyadicCube ancestor(const DyadicCube& q, unsigned level)
{
    if (level > q.level) throw std::domain_error("ancestor level deeper than cube");
    DyadicCube a{level, q.index};
    for (auto& v : a.index) v >>= (q.level - level);
    return a;
}

bool contains(const DyadicCube& a, const DyadicCube& q)
{
    if (a.level > q.level || a.dim() != q.dim()) return false;
    for (std::size_t i = 0; i < a.dim(); ++i)
        if ((q.index[i] >> (q.level - a.level)) != a.index[i]) return false;
    return true;
}

bool disjoint(const DyadicCube& a, const DyadicCube& b)
{
    return !contains(a, b) && !contains(b, a);
}

std::optional<DyadicCube> locate_point(const RootFrame& frame, const Point& x, unsigned level)
{
    if (level > kMaxLevel) throw std::domain_error("level exceeds maximum dyadic level");
    if (!frame.contains(x)) return std::nullopt;
    DyadicCube q{level, IndexVector(frame.dim())};
    for (std::size_t i = 0; i < frame.dim(); ++i) {
        Rational t = (x[i] - frame.origin()[i]) / frame.side();
        q.index[i] = fixed_point_floor(t, level);
    }
    return q;
}

Rational cube_side(const RootFrame& frame, const DyadicCube& q)
{
    return frame.side() * pow2_neg(q.level);
}

Box cube_box(const RootFrame& frame, const DyadicCube& q)
{
    const Rational h = cube_side(frame, q);
    Box b{Point(q.dim()), Point(q.dim())};
    for (std::size_t i = 0; i < q.dim(); ++i) {
        b.lo[i] = frame.origin()[i] + Rational(Integer(static_cast<unsigned long>(q.index[i]))) * h;
        b.hi[i] = b.lo[i] + h;
    }
    return b;
}

Rational relative_measure(const DyadicCube& q)
{
    return pow2_neg(q.level * static_cast<unsigned>(q.dim()));
}

RootFrame subframe(const RootFrame& frame, const DyadicCube& q)
{
    Box b = cube_box(frame, q);
    return RootFrame(std::move(b.lo), cube_side(frame, q));
}

std::vector<DyadicCube> cubes_at_level(std::size_t dim, unsigned level)
{
    std::vector<DyadicCube> layer{DyadicCube::root(dim)};
    for (unsigned j = 0; j < level; ++j) {
        std::vector<DyadicCube> next;
        next.reserve(layer.size() << dim);
        for (const auto& q : layer)
            for (auto& c : children(q)) next.push_back(std::move(c));
        layer = std::move(next);
    }
    // Children of lexicographically ordered parents interleave; restore global order.
    std::sort(layer.begin(), layer.end());
    return layer;
}

}  // namespace porosity
