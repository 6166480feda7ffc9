#include "porosity/families.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace porosity {

namespace {

// sum_j counts[j] * weight(j) * 2^{-j d}, accumulated as an integer over 2^{J d}.
template <class Weight>
Rational weighted_sum(const std::vector<std::size_t>& counts, std::size_t dim, Weight weight)
{
    if (counts.empty()) return Rational(0);
    const unsigned top = static_cast<unsigned>(counts.size() - 1);
    Integer num(0);
    for (unsigned j = 0; j <= top; ++j) {
        if (counts[j] == 0) continue;
        Integer term(static_cast<unsigned long>(counts[j]));
        term *= weight(j);
        term <<= (top - j) * static_cast<unsigned>(dim);
        num += term;
    }
    Rational r(num, Integer(1));
    r /= Rational(Integer(1) << (top * static_cast<unsigned>(dim)));
    r.canonicalize();
    return r;
}

std::vector<std::size_t> frontier_counts(const FamilySets& fam)
{
    std::vector<std::size_t> c(fam.depth + 1, 0);
    c[fam.depth] = fam.frontier.size();
    return c;
}

}  // namespace

std::vector<std::size_t> FamilySets::hitting_counts() const
{
    std::vector<std::size_t> c(depth + 1, 0);
    for (std::size_t j = 0; j < hitting.size(); ++j) c[j] = hitting[j].size();
    return c;
}

std::vector<std::size_t> FamilySets::empty_counts() const
{
    std::vector<std::size_t> c(depth + 1, 0);
    for (const auto& q : empty_maximal) ++c[q.level];
    return c;
}

FamilySets compute_families(const RootFrame& frame, const SetOracle& oracle, unsigned depth)
{
    if (depth > kMaxLevel) throw std::invalid_argument("depth exceeds maximum dyadic level " + std::to_string(kMaxLevel));
    if (frame.dim() != oracle.dim())
        throw std::invalid_argument("frame dimension " + std::to_string(frame.dim()) + " does not match set dimension " +
                                    std::to_string(oracle.dim()));

    FamilySets fam{frame, depth, std::vector<std::vector<DyadicCube>>(depth + 1), {}, {}, std::nullopt, false};
    const auto tester = oracle.bind(frame);
    const DyadicCube root = DyadicCube::root(frame.dim());

    if (!tester->intersects(root)) {
        fam.degenerate = true;
        fam.empty_maximal.push_back(root);
        fam.largest_empty = root;
        return fam;
    }

    fam.hitting[0].push_back(root);
    for (unsigned j = 0; j < depth; ++j) {
        std::vector<DyadicCube>& next = fam.hitting[j + 1];
        std::vector<DyadicCube> empties;
        for (const auto& q : fam.hitting[j]) {
            for (auto& c : children(q)) {
                if (tester->intersects(c))
                    next.push_back(std::move(c));
                else
                    empties.push_back(std::move(c));
            }
        }
        std::sort(next.begin(), next.end());
        std::sort(empties.begin(), empties.end());
        if (!fam.largest_empty && !empties.empty()) fam.largest_empty = empties.front();
        fam.empty_maximal.insert(fam.empty_maximal.end(), std::make_move_iterator(empties.begin()),
                                 std::make_move_iterator(empties.end()));
    }
    fam.frontier = fam.hitting[depth];
    return fam;
}

Rational level_weighted_measure(const std::vector<std::size_t>& counts, std::size_t dim, unsigned from_level)
{
    return weighted_sum(counts, dim, [from_level](unsigned j) { return Integer(j >= from_level ? 1 : 0); });
}

IdentityResult truncated_identity_check(const FamilySets& fam)
{
    if (fam.degenerate) return {Rational(0), Rational(0), Rational(0)};
    const std::size_t d = fam.dim();
    const unsigned J = fam.depth;
    Rational lhs = level_weighted_measure(fam.hitting_counts(), d);
    Rational rhs = weighted_sum(fam.empty_counts(), d, [](unsigned j) { return Integer(j); }) +
                   weighted_sum(frontier_counts(fam), d, [J](unsigned) { return Integer(J + 1); });
    return {lhs, rhs, lhs - rhs};
}

IdentityResult limit_identity_check(const FamilySets& fam)
{
    if (fam.degenerate) return {Rational(0), Rational(0), Rational(0)};
    const std::size_t d = fam.dim();
    const unsigned J = fam.depth;
    Rational lhs = level_weighted_measure(fam.hitting_counts(), d);
    Rational rhs = weighted_sum(fam.empty_counts(), d, [](unsigned j) { return Integer(j); });
    Rational tail = weighted_sum(frontier_counts(fam), d, [J](unsigned) { return Integer(J + 1); });
    return {lhs, rhs, tail};
}

IdentityResult truncated_d0_identity_check(const FamilySets& fam)
{
    if (!fam.largest_empty_found())
        throw std::domain_error("no empty cube up to depth " + std::to_string(fam.depth));
    if (fam.degenerate) return {Rational(0), Rational(0), Rational(0)};
    const std::size_t d = fam.dim();
    const unsigned J = fam.depth;
    const unsigned m0 = fam.largest_empty->level;
    Rational lhs = level_weighted_measure(fam.hitting_counts(), d, m0);
    // Every F-cube sits at level >= m0, so level - m0 never underflows.
    Rational rhs = weighted_sum(fam.empty_counts(), d, [m0](unsigned j) { return Integer(j >= m0 ? j - m0 : 0); }) +
                   weighted_sum(frontier_counts(fam), d, [J, m0](unsigned) { return Integer(J + 1 - m0); });
    return {lhs, rhs, lhs - rhs};
}

}  // namespace porosity
