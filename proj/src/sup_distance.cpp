#include "porosity/sup_distance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace porosity {

namespace {

// Cell centres of a regular grid with at most ~4096 cells.
double sampled_max_distance(const SetOracle& oracle, const RootFrame& frame)
{
    const std::size_t d = frame.dim();
    unsigned per_axis = 1;
    while (std::pow(static_cast<double>(per_axis * 2), static_cast<double>(d)) <= 4096.0) per_axis *= 2;
    const double side = frame.side().get_d();
    std::vector<double> origin(d), x(d);
    for (std::size_t i = 0; i < d; ++i) origin[i] = frame.origin()[i].get_d();

    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= per_axis;
    double best = 0.0;
    for (std::size_t k = 0; k < total; ++k) {
        std::size_t rest = k;
        for (std::size_t i = 0; i < d; ++i) {
            x[i] = origin[i] + side * ((static_cast<double>(rest % per_axis) + 0.5) / per_axis);
            rest /= per_axis;
        }
        best = std::max(best, oracle.distance(x));
    }
    return best;
}

}  // namespace

SupDistanceBracket sup_distance_estimate(const SetOracle& oracle, const RootFrame& frame, const FamilySets& fam)
{
    if (!fam.largest_empty_found()) throw std::domain_error("undetermined");
    const std::size_t d = frame.dim();
    const double root_d = std::sqrt(static_cast<double>(d));
    const double m_side = cube_side(frame, *fam.largest_empty).get_d();

    SupDistanceBracket out;
    out.degenerate = fam.degenerate;
    out.lower = std::max(m_side / 2.0, sampled_max_distance(oracle, frame));
    if (fam.degenerate) {
        // dist is 1-Lipschitz: sup <= dist(centre) + half the diagonal.
        Point centre(d);
        for (std::size_t i = 0; i < d; ++i) centre[i] = frame.origin()[i] + frame.side() / 2;
        out.upper = distance(oracle, centre) + root_d * frame.side().get_d() / 2.0;
    } else {
        out.upper = 2.0 * root_d * m_side;
    }

    Box closed{frame.origin(), frame.origin()};
    for (std::size_t i = 0; i < d; ++i) closed.hi[i] += frame.side();
    if (auto exact = oracle.sup_distance_squared(closed)) {
        out.exact_squared = exact;
        out.lower = out.upper = std::sqrt(exact->get_d());
    }
    out.upper = std::max(out.upper, out.lower);
    return out;
}

}  // namespace porosity
