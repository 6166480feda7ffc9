#include "porosity/set_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace porosity {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr unsigned kMaxCantorGeneration = 24;
// Upper limit on vertex/equidistant-point candidates for the exact sup of a point set.
constexpr double kMaxSupCandidates = 4.0e4;

// ---------------------------------------------------------------------------
// One-dimensional closed sets: spacing*Z, or a finite union of disjoint
// closed intervals sorted by left endpoint (points are degenerate intervals).

class AxisSet {
public:
    static AxisSet periodic(Rational spacing)
    {
        AxisSet a;
        a.spacing_ = std::move(spacing);
        a.spacing_d_ = a.spacing_.get_d();
        return a;
    }

    static AxisSet intervals(std::vector<Rational> lo, std::vector<Rational> hi)
    {
        AxisSet a;
        a.lo_ = std::move(lo);
        a.hi_ = std::move(hi);
        a.lo_d_.reserve(a.lo_.size());
        a.hi_d_.reserve(a.hi_.size());
        for (std::size_t k = 0; k < a.lo_.size(); ++k) {
            a.lo_d_.push_back(a.lo_[k].get_d());
            a.hi_d_.push_back(a.hi_[k].get_d());
        }
        return a;
    }

    bool is_periodic() const { return sgn(spacing_) > 0; }

    // [a, b) meets the set.
    bool meets_half_open(const Rational& a, const Rational& b) const
    {
        if (is_periodic()) return Rational(ceil(a / spacing_)) * spacing_ < b;
        auto k = first_ending_at_or_after(a);
        return k < lo_.size() && lo_[k] < b;
    }

    // [a, b] meets the set.
    bool meets_closed(const Rational& a, const Rational& b) const
    {
        if (is_periodic()) return Rational(ceil(a / spacing_)) * spacing_ <= b;
        auto k = first_ending_at_or_after(a);
        return k < lo_.size() && lo_[k] <= b;
    }

    Rational distance(const Rational& x) const
    {
        if (is_periodic()) {
            Rational t = x / spacing_;
            Rational below = Rational(floor(t)) * spacing_;
            Rational d1 = x - below;
            Rational d2 = below + spacing_ - x;
            return d1 < d2 ? d1 : d2;
        }
        auto k = first_ending_at_or_after(x);
        if (k < lo_.size() && lo_[k] <= x) return Rational(0);
        Rational best(-1);
        if (k < lo_.size()) best = lo_[k] - x;
        if (k > 0) {
            Rational left = x - hi_[k - 1];
            if (sgn(best) < 0 || left < best) best = left;
        }
        return best;
    }

    double distance(double x) const
    {
        if (is_periodic()) {
            double r = x - std::floor(x / spacing_d_) * spacing_d_;
            return std::min(r, spacing_d_ - r);
        }
        auto it = std::lower_bound(hi_d_.begin(), hi_d_.end(), x);
        std::size_t k = static_cast<std::size_t>(it - hi_d_.begin());
        if (k < lo_d_.size() && lo_d_[k] <= x) return 0.0;
        double best = std::numeric_limits<double>::infinity();
        if (k < lo_d_.size()) best = lo_d_[k] - x;
        if (k > 0) best = std::min(best, x - hi_d_[k - 1]);
        return best;
    }

    // max over y in [a,b] of dist(y, set).
    Rational sup_distance(const Rational& a, const Rational& b) const
    {
        Rational best = distance(a);
        if (Rational db = distance(b); db > best) best = db;
        if (is_periodic()) {
            // The maximum s/2 is reached exactly at midpoints (k + 1/2) s.
            Rational half = spacing_ / 2;
            Rational k = Rational(ceil((a - half) / spacing_));
            if (k * spacing_ + half <= b && half > best) best = half;
            return best;
        }
        // Interior maxima sit at gap midpoints.
        std::size_t start = first_ending_at_or_after(a);
        if (start > 0) --start;
        for (std::size_t k = start; k + 1 < lo_.size() && hi_[k] <= b; ++k) {
            Rational mid = (hi_[k] + lo_[k + 1]) / 2;
            if (mid < a || mid > b) continue;
            Rational half = (lo_[k + 1] - hi_[k]) / 2;
            if (half > best) best = half;
        }
        return best;
    }

private:
    std::size_t first_ending_at_or_after(const Rational& x) const
    {
        auto it = std::lower_bound(hi_.begin(), hi_.end(), x, [](const Rational& h, const Rational& v) { return h < v; });
        return static_cast<std::size_t>(it - hi_.begin());
    }

    Rational spacing_{0};
    double spacing_d_ = 0.0;
    std::vector<Rational> lo_, hi_;
    std::vector<double> lo_d_, hi_d_;
};

AxisSet cantor_axis(const Rational& ratio, unsigned generation)
{
    std::vector<Rational> lo{Rational(0)}, hi{Rational(1)};
    for (unsigned g = 0; g < generation; ++g) {
        std::vector<Rational> nlo, nhi;
        nlo.reserve(2 * lo.size());
        nhi.reserve(2 * hi.size());
        for (std::size_t k = 0; k < lo.size(); ++k) {
            Rational len = (hi[k] - lo[k]) * ratio;
            nlo.push_back(lo[k]);
            nhi.push_back(lo[k] + len);
            nlo.push_back(hi[k] - len);
            nhi.push_back(hi[k]);
        }
        lo = std::move(nlo);
        hi = std::move(nhi);
    }
    return AxisSet::intervals(std::move(lo), std::move(hi));
}

AxisSet grid_axis(const Rational& mesh, const Rational& origin, const Rational& side)
{
    Integer first = ceil(origin / mesh);
    Integer last = ceil((origin + side) / mesh) - 1;  // half-open subcube
    std::vector<Rational> pts;
    for (Integer k = first; k <= last; ++k) pts.push_back(Rational(k) * mesh);
    return AxisSet::intervals(pts, pts);
}

// ---------------------------------------------------------------------------
// Product sets A_1 x ... x A_d: intersection, closure contact, distance and
// sup-distance all factor over the axes.

class ProductOracle final : public SetOracle {
public:
    ProductOracle(SetSpec spec, std::vector<AxisSet> axes) : SetOracle(std::move(spec)), axes_(std::move(axes)) {}

    bool intersects(const Box& b) const override
    {
        for (std::size_t i = 0; i < axes_.size(); ++i)
            if (!axes_[i].meets_half_open(b.lo[i], b.hi[i])) return false;
        return true;
    }

    bool touches_closure(const Box& b) const override
    {
        for (std::size_t i = 0; i < axes_.size(); ++i)
            if (!axes_[i].meets_closed(b.lo[i], b.hi[i])) return false;
        return true;
    }

    Rational distance_squared(const Point& x) const override
    {
        Rational s(0);
        for (std::size_t i = 0; i < axes_.size(); ++i) {
            Rational di = axes_[i].distance(x[i]);
            s += di * di;
        }
        return s;
    }

    double distance(std::span<const double> x) const override
    {
        double s = 0.0;
        for (std::size_t i = 0; i < axes_.size(); ++i) {
            double di = axes_[i].distance(x[i]);
            s += di * di;
        }
        return std::sqrt(s);
    }

    std::optional<Rational> sup_distance_squared(const Box& b) const override
    {
        Rational s(0);
        for (std::size_t i = 0; i < axes_.size(); ++i) {
            Rational di = axes_[i].sup_distance(b.lo[i], b.hi[i]);
            s += di * di;
        }
        return s;
    }

private:
    std::vector<AxisSet> axes_;
};

// ---------------------------------------------------------------------------

class FixedPointTester final : public CubeTester {
public:
    // Fractional bits used for point location inside the frame.
    static constexpr unsigned kBits = 63;

    FixedPointTester(const RootFrame& frame, const std::vector<Point>& points) : dim_(frame.dim())
    {
        for (const auto& p : points) {
            if (!frame.contains(p)) continue;
            for (std::size_t i = 0; i < dim_; ++i) {
                Rational t = (p[i] - frame.origin()[i]) / frame.side();
                coords_.push_back(fixed_point_floor(t, kBits));
            }
        }
    }

    bool intersects(const DyadicCube& q) const override
    {
        const unsigned shift = kBits - q.level;
        for (std::size_t p = 0; p < coords_.size(); p += dim_) {
            bool inside = true;
            for (std::size_t i = 0; i < dim_ && inside; ++i) inside = (coords_[p + i] >> shift) == q.index[i];
            if (inside) return true;
        }
        return false;
    }

private:
    std::size_t dim_;
    std::vector<std::uint64_t> coords_;
};

double binomial(std::size_t n, std::size_t k)
{
    if (k > n) return 0.0;
    double r = 1.0;
    for (std::size_t i = 0; i < k; ++i) r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return r;
}

// Solves the square system a x = b in place by Gaussian elimination.
// Returns false when singular.
bool solve(std::vector<std::vector<Rational>>& a, std::vector<Rational>& b)
{
    const std::size_t m = b.size();
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t pivot = col;
        while (pivot < m && sgn(a[pivot][col]) == 0) ++pivot;
        if (pivot == m) return false;
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t r = 0; r < m; ++r) {
            if (r == col || sgn(a[r][col]) == 0) continue;
            Rational f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < m; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t r = 0; r < m; ++r) b[r] /= a[r][r];
    return true;
}

class PointsOracle final : public SetOracle {
public:
    explicit PointsOracle(SetSpec spec) : SetOracle(std::move(spec))
    {
        points_ = std::get<PointsSpec>(descriptor().variant).points;
        for (const auto& p : points_)
            for (const auto& c : p) coords_d_.push_back(c.get_d());
        if (dim() == 1) {
            std::vector<Rational> xs;
            for (const auto& p : points_) xs.push_back(p[0]);
            std::sort(xs.begin(), xs.end());
            xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
            line_ = AxisSet::intervals(xs, xs);
        }
    }

    bool intersects(const Box& b) const override
    {
        return std::any_of(points_.begin(), points_.end(), [&](const Point& p) {
            for (std::size_t i = 0; i < p.size(); ++i)
                if (p[i] < b.lo[i] || p[i] >= b.hi[i]) return false;
            return true;
        });
    }

    bool touches_closure(const Box& b) const override
    {
        return std::any_of(points_.begin(), points_.end(), [&](const Point& p) {
            for (std::size_t i = 0; i < p.size(); ++i)
                if (p[i] < b.lo[i] || p[i] > b.hi[i]) return false;
            return true;
        });
    }

    Rational distance_squared(const Point& x) const override
    {
        Rational best(-1);
        for (const auto& p : points_) {
            Rational s(0);
            for (std::size_t i = 0; i < p.size(); ++i) s += (x[i] - p[i]) * (x[i] - p[i]);
            if (sgn(best) < 0 || s < best) best = s;
        }
        return best;
    }

    double distance(std::span<const double> x) const override
    {
        const std::size_t d = dim();
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < coords_d_.size(); p += d) {
            double s = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                double t = x[i] - coords_d_[p + i];
                s += t * t;
            }
            best = std::min(best, s);
        }
        return std::sqrt(best);
    }

    std::optional<Rational> sup_distance_squared(const Box& b) const override
    {
        if (line_) {
            Rational s = line_->sup_distance(b.lo[0], b.hi[0]);
            return s * s;
        }
        return enumerate_sup(b);
    }

    std::unique_ptr<CubeTester> bind(const RootFrame& frame) const override
    {
        return std::make_unique<FixedPointTester>(frame, points_);
    }

private:
    // The maximum of x -> min_p |x - p|^2 over a box is attained on some face
    // of dimension m at a point equidistant from m+1 affinely independent
    // points of E, or at a vertex. Enumerate all such candidates exactly.
    std::optional<Rational> enumerate_sup(const Box& b) const
    {
        const std::size_t d = dim();
        const std::size_t n = points_.size();
        double candidates = 0.0;
        for (std::size_t m = 0; m <= d; ++m)
            candidates += binomial(d, m) * std::pow(2.0, static_cast<double>(d - m)) * (m == 0 ? 1.0 : binomial(n, m + 1));
        if (candidates > kMaxSupCandidates) return std::nullopt;

        Rational best(-1);
        auto consider = [&](const Point& x) {
            Rational v = distance_squared(x);
            if (v > best) best = v;
        };

        for (unsigned mask = 0; mask < (1u << d); ++mask) {
            std::vector<std::size_t> free_axes, fixed_axes;
            for (std::size_t i = 0; i < d; ++i) ((mask >> i) & 1u ? free_axes : fixed_axes).push_back(i);
            const std::size_t m = free_axes.size();
            for (unsigned corner = 0; corner < (1u << fixed_axes.size()); ++corner) {
                Point x(d);
                for (std::size_t f = 0; f < fixed_axes.size(); ++f)
                    x[fixed_axes[f]] = ((corner >> f) & 1u) ? b.hi[fixed_axes[f]] : b.lo[fixed_axes[f]];
                if (m == 0) {
                    consider(x);
                    continue;
                }
                if (n < m + 1) continue;
                std::vector<std::size_t> pick(m + 1);
                for (std::size_t k = 0; k <= m; ++k) pick[k] = k;
                while (true) {
                    const Point& p0 = points_[pick[0]];
                    std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m));
                    std::vector<Rational> rhs(m);
                    for (std::size_t r = 0; r < m; ++r) {
                        const Point& pk = points_[pick[r + 1]];
                        // 2 (pk - p0) . x = |pk|^2 - |p0|^2
                        Rational c(0);
                        for (std::size_t i = 0; i < d; ++i) c += pk[i] * pk[i] - p0[i] * p0[i];
                        for (std::size_t f : fixed_axes) c -= 2 * (pk[f] - p0[f]) * x[f];
                        for (std::size_t s = 0; s < m; ++s) a[r][s] = 2 * (pk[free_axes[s]] - p0[free_axes[s]]);
                        rhs[r] = c;
                    }
                    if (solve(a, rhs)) {
                        bool inside = true;
                        for (std::size_t s = 0; s < m && inside; ++s) {
                            std::size_t i = free_axes[s];
                            inside = rhs[s] >= b.lo[i] && rhs[s] <= b.hi[i];
                            x[i] = rhs[s];
                        }
                        if (inside) consider(x);
                    }
                    // next combination
                    std::size_t k = m + 1;
                    while (k > 0 && pick[k - 1] == n - (m + 1) + (k - 1)) --k;
                    if (k == 0) break;
                    ++pick[k - 1];
                    for (std::size_t t = k; t <= m; ++t) pick[t] = pick[t - 1] + 1;
                }
            }
        }
        return best;
    }

    std::vector<Point> points_;
    std::vector<double> coords_d_;
    std::optional<AxisSet> line_;
};

// ---------------------------------------------------------------------------

class UnionTester final : public CubeTester {
public:
    explicit UnionTester(std::vector<std::unique_ptr<CubeTester>> members) : members_(std::move(members)) {}

    bool intersects(const DyadicCube& q) const override
    {
        return std::any_of(members_.begin(), members_.end(), [&](const auto& m) { return m->intersects(q); });
    }

private:
    std::vector<std::unique_ptr<CubeTester>> members_;
};

class UnionOracle final : public SetOracle {
public:
    UnionOracle(SetSpec spec, std::vector<std::unique_ptr<SetOracle>> members)
        : SetOracle(std::move(spec)), members_(std::move(members))
    {
    }

    bool intersects(const Box& b) const override
    {
        return std::any_of(members_.begin(), members_.end(), [&](const auto& m) { return m->intersects(b); });
    }

    bool touches_closure(const Box& b) const override
    {
        return std::any_of(members_.begin(), members_.end(), [&](const auto& m) { return m->touches_closure(b); });
    }

    Rational distance_squared(const Point& x) const override
    {
        Rational best = members_.front()->distance_squared(x);
        for (std::size_t k = 1; k < members_.size(); ++k) {
            Rational v = members_[k]->distance_squared(x);
            if (v < best) best = v;
        }
        return best;
    }

    double distance(std::span<const double> x) const override
    {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& m : members_) best = std::min(best, m->distance(x));
        return best;
    }

    // sup of a pointwise minimum does not factor over members.
    std::optional<Rational> sup_distance_squared(const Box& b) const override
    {
        if (members_.size() == 1) return members_.front()->sup_distance_squared(b);
        return std::nullopt;
    }

    std::unique_ptr<CubeTester> bind(const RootFrame& frame) const override
    {
        std::vector<std::unique_ptr<CubeTester>> testers;
        for (const auto& m : members_) testers.push_back(m->bind(frame));
        return std::make_unique<UnionTester>(std::move(testers));
    }

private:
    std::vector<std::unique_ptr<SetOracle>> members_;
};

class GeometricTester final : public CubeTester {
public:
    GeometricTester(const RootFrame& frame, const SetOracle& oracle) : frame_(frame), oracle_(oracle) {}

    bool intersects(const DyadicCube& q) const override { return oracle_.intersects(cube_box(frame_, q)); }

private:
    RootFrame frame_;
    const SetOracle& oracle_;
};

}  // namespace

std::size_t SetSpec::dim() const
{
    return std::visit(overloaded{
                          [](const PointsSpec& s) -> std::size_t { return s.points.empty() ? 0 : s.points.front().size(); },
                          [](const LatticeSpec& s) -> std::size_t { return s.dim; },
                          [](const CantorProductSpec& s) -> std::size_t { return s.dim; },
                          [](const UnionSpec& s) -> std::size_t { return s.members.empty() ? 0 : s.members.front().dim(); },
                          [](const ComplementGridSpec& s) -> std::size_t { return s.origin.size(); },
                      },
                      variant);
}

std::string SetSpec::kind() const
{
    return std::visit(overloaded{
                          [](const PointsSpec&) { return std::string("points"); },
                          [](const LatticeSpec&) { return std::string("lattice"); },
                          [](const CantorProductSpec&) { return std::string("cantor_product"); },
                          [](const UnionSpec&) { return std::string("union"); },
                          [](const ComplementGridSpec&) { return std::string("complement_grid"); },
                      },
                      variant);
}

void validate(const SetSpec& spec)
{
    std::visit(overloaded{
                   [](const PointsSpec& s) {
                       if (s.points.empty()) throw SpecError("points", "point list must be nonempty");
                       const std::size_t d = s.points.front().size();
                       if (d == 0) throw SpecError("points", "points must have positive dimension");
                       for (const auto& p : s.points)
                           if (p.size() != d) throw SpecError("points", "all points must have the same dimension");
                   },
                   [](const LatticeSpec& s) {
                       if (sgn(s.spacing) <= 0) throw SpecError("spacing", "lattice spacing must be positive");
                       if (s.dim == 0) throw SpecError("dim", "dimension must be positive");
                   },
                   [](const CantorProductSpec& s) {
                       if (sgn(s.ratio) <= 0 || s.ratio >= Rational(1, 2))
                           throw SpecError("ratio", "cantor ratio must lie in (0, 1/2), got " + to_string(s.ratio));
                       if (s.generation == 0 || s.generation > kMaxCantorGeneration)
                           throw SpecError("generation", "generation must lie in [1, 24]");
                       if (s.dim == 0) throw SpecError("dim", "dimension must be positive");
                   },
                   [](const UnionSpec& s) {
                       if (s.members.empty()) throw SpecError("members", "union must have at least one member");
                       for (const auto& m : s.members) validate(m);
                       const std::size_t d = s.members.front().dim();
                       for (const auto& m : s.members)
                           if (m.dim() != d) throw SpecError("members", "union members must share one dimension");
                   },
                   [](const ComplementGridSpec& s) {
                       if (sgn(s.mesh) <= 0) throw SpecError("mesh", "grid mesh must be positive");
                       if (sgn(s.side) <= 0) throw SpecError("side", "grid subcube side must be positive");
                       if (s.origin.empty()) throw SpecError("origin", "grid subcube origin must be nonempty");
                       if (s.side / s.mesh > Rational(1 << 20))
                           throw SpecError("mesh", "grid has more than 2^20 points per axis");
                       for (const auto& o : s.origin)
                           if (ceil(o / s.mesh) > ceil((o + s.side) / s.mesh) - 1)
                               throw SpecError("mesh", "grid subcube contains no grid point");
                   },
               },
               spec.variant);
}

std::unique_ptr<CubeTester> SetOracle::bind(const RootFrame& frame) const
{
    return std::make_unique<GeometricTester>(frame, *this);
}

std::unique_ptr<SetOracle> build_oracle(const SetSpec& spec)
{
    validate(spec);
    return std::visit(overloaded{
                          [&](const PointsSpec&) -> std::unique_ptr<SetOracle> { return std::make_unique<PointsOracle>(spec); },
                          [&](const LatticeSpec& s) -> std::unique_ptr<SetOracle> {
                              return std::make_unique<ProductOracle>(spec, std::vector<AxisSet>(s.dim, AxisSet::periodic(s.spacing)));
                          },
                          [&](const CantorProductSpec& s) -> std::unique_ptr<SetOracle> {
                              return std::make_unique<ProductOracle>(spec, std::vector<AxisSet>(s.dim, cantor_axis(s.ratio, s.generation)));
                          },
                          [&](const UnionSpec& s) -> std::unique_ptr<SetOracle> {
                              std::vector<std::unique_ptr<SetOracle>> members;
                              for (const auto& m : s.members) members.push_back(build_oracle(m));
                              return std::make_unique<UnionOracle>(spec, std::move(members));
                          },
                          [&](const ComplementGridSpec& s) -> std::unique_ptr<SetOracle> {
                              std::vector<AxisSet> axes;
                              for (const auto& o : s.origin) axes.push_back(grid_axis(s.mesh, o, s.side));
                              return std::make_unique<ProductOracle>(spec, std::move(axes));
                          },
                      },
                      spec.variant);
}

double distance(const SetOracle& oracle, const Point& x)
{
    if (x.size() != oracle.dim())
        throw std::invalid_argument("distance: point has dimension " + std::to_string(x.size()) + ", set has " +
                                    std::to_string(oracle.dim()));
    return std::sqrt(oracle.distance_squared(x).get_d());
}

}  // namespace porosity
