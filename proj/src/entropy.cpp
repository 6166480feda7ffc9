#include "porosity/entropy.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include <boost/container/small_vector.hpp>

namespace porosity {

namespace {

constexpr std::array<double, 4> kGaussNodes{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
constexpr std::array<double, 4> kGaussWeights{0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};

constexpr std::uint64_t kSamplesPerChunk = std::uint64_t{1} << 16;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

struct CellGeometry {
    std::vector<double> origin;
    double side = 0.0;

    void corner(const DyadicCube& q, std::span<double> out, double& h) const
    {
        h = std::ldexp(side, -static_cast<int>(q.level));
        for (std::size_t i = 0; i < origin.size(); ++i) out[i] = origin[i] + static_cast<double>(q.index[i]) * h;
    }
};

class AdaptiveIntegrator {
public:
    AdaptiveIntegrator(const RootFrame& frame, const LogDistanceField& field, const IntegrationOptions& options)
        : field_(field), options_(options), dim_(frame.dim())
    {
        geom_.side = frame.side().get_d();
        for (const auto& o : frame.origin()) geom_.origin.push_back(o.get_d());
        // Upper envelope of (1/|Q|) int_Q log(1/dist) - log(1/l(Q)) on a cube touching the zero set,
        // measured from the value estimate below.
        singular_spread_ = harmonic(static_cast<unsigned>(dim_)) + 0.5 * std::log(static_cast<double>(dim_));
        // Large dimensions make the tensor rule impractical; cap at 2 nodes per axis.
        nodes_ = dim_ <= 3 ? 4 : 2;
    }

    IntegralEstimate run()
    {
        IntegralEstimate out;
        std::vector<Leaf> heap;
        std::vector<Leaf> frozen;
        const DyadicCube root = DyadicCube::root(dim_);
        heap.push_back(evaluate(root, field_.singular(root), std::nullopt));
        std::uint64_t work = 1;
        const std::uint64_t fanout = std::uint64_t{1} << dim_;
        auto cmp = [](const Leaf& a, const Leaf& b) { return a.err < b.err; };

        double total_err = heap.front().err;
        while (!heap.empty()) {
            if (total_err <= options_.tolerance) break;
            if (work + fanout > options_.budget) {
                out.budget_exhausted = true;
                break;
            }
            std::pop_heap(heap.begin(), heap.end(), cmp);
            Leaf leaf = std::move(heap.back());
            heap.pop_back();
            if (leaf.err <= 0.0 || leaf.cell.level + 1 >= kMaxLevel) {
                frozen.push_back(std::move(leaf));
                continue;
            }
            total_err -= leaf.err;
            auto kids = children(leaf.cell);
            for (std::size_t k = 0; k < kids.size(); ++k) {
                bool singular = leaf.singular && field_.singular(kids[k]);
                std::optional<double> coarse;
                if (!leaf.singular) coarse = leaf.child_values[k];
                heap.push_back(evaluate(kids[k], singular, coarse));
                total_err += heap.back().err;
                std::push_heap(heap.begin(), heap.end(), cmp);
            }
            work += fanout;
        }

        // Sum in a fixed order for reproducibility, smallest contributions first.
        std::vector<double> values, errs;
        for (const auto* set : {&heap, &frozen})
            for (const auto& l : *set) {
                values.push_back(l.value);
                errs.push_back(l.err);
            }
        out.value = ordered_sum(values);
        out.error_estimate = ordered_sum(errs);
        out.work = work;
        if (out.error_estimate <= options_.tolerance) out.budget_exhausted = false;
        return out;
    }

private:
    struct Leaf {
        DyadicCube cell;
        double value = 0.0;
        double err = 0.0;
        bool singular = false;
        boost::container::small_vector<double, 8> child_values;
    };

    static double ordered_sum(std::vector<double>& v)
    {
        std::sort(v.begin(), v.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
        long double s = 0.0L;
        for (double x : v) s += x;
        return static_cast<double>(s);
    }

    // Tensor Gauss-Legendre rule; nullopt if a node lands on the zero set.
    std::optional<double> gauss(const DyadicCube& q) const
    {
        std::vector<double> lo(dim_), x(dim_);
        double h = 0.0;
        geom_.corner(q, lo, h);
        std::size_t total = 1;
        for (std::size_t i = 0; i < dim_; ++i) total *= nodes_;
        const double two_point[2] = {-0.5773502691896257, 0.5773502691896257};
        long double sum = 0.0L;
        for (std::size_t k = 0; k < total; ++k) {
            std::size_t rest = k;
            double w = 1.0;
            for (std::size_t i = 0; i < dim_; ++i) {
                std::size_t a = rest % nodes_;
                rest /= nodes_;
                double node = nodes_ == 4 ? kGaussNodes[a] : two_point[a];
                w *= nodes_ == 4 ? kGaussWeights[a] : 1.0;
                x[i] = lo[i] + h * 0.5 * (node + 1.0);
            }
            double dist = field_.distance(x);
            if (!(dist > 0.0)) return std::nullopt;
            sum += w * -std::log(dist);
        }
        double volume = std::pow(h, static_cast<double>(dim_));
        return static_cast<double>(sum) * volume / std::pow(2.0, static_cast<double>(dim_));
    }

    Leaf singular_leaf(const DyadicCube& q) const
    {
        Leaf leaf{q, 0.0, 0.0, true, {}};
        double h = std::ldexp(geom_.side, -static_cast<int>(q.level));
        double volume = std::pow(h, static_cast<double>(dim_));
        // Exact for a cube with the zero set on one face or at one corner (d=1).
        leaf.value = volume * (-std::log(h) + 1.0);
        leaf.err = volume * singular_spread_;
        return leaf;
    }

    Leaf evaluate(const DyadicCube& q, bool singular, std::optional<double> coarse) const
    {
        if (singular) return singular_leaf(q);
        if (!coarse) coarse = gauss(q);
        if (!coarse) return singular_leaf(q);
        Leaf leaf{q, 0.0, 0.0, false, {}};
        double fine = 0.0;
        for (const auto& c : children(q)) {
            auto v = gauss(c);
            if (!v) return singular_leaf(q);
            leaf.child_values.push_back(*v);
            fine += *v;
        }
        leaf.value = fine;
        leaf.err = std::abs(fine - *coarse);
        return leaf;
    }

    const LogDistanceField& field_;
    const IntegrationOptions& options_;
    std::size_t dim_;
    CellGeometry geom_;
    double singular_spread_ = 1.0;
    std::size_t nodes_ = 4;
};

// Mean of log(1/dist) over uniform samples in the frame, partitioned in fixed
// chunks with per-chunk seeds so the result is independent of the worker count.
IntegralEstimate monte_carlo_mean(const RootFrame& frame, const std::function<double(std::span<const double>)>& dist,
                                  const IntegrationOptions& options)
{
    const std::size_t d = frame.dim();
    std::vector<double> origin;
    for (const auto& o : frame.origin()) origin.push_back(o.get_d());
    const double side = frame.side().get_d();

    const std::uint64_t samples = options.budget;
    const std::uint64_t chunks = (samples + kSamplesPerChunk - 1) / kSamplesPerChunk;
    std::vector<long double> sums(chunks, 0.0L), squares(chunks, 0.0L);

    auto run_chunk = [&](std::uint64_t c) {
        std::mt19937_64 rng(splitmix64(options.seed ^ splitmix64(c)));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const std::uint64_t begin = c * kSamplesPerChunk;
        const std::uint64_t end = std::min(samples, begin + kSamplesPerChunk);
        std::vector<double> x(d);
        long double s = 0.0L, s2 = 0.0L;
        for (std::uint64_t k = begin; k < end; ++k) {
            double v = 0.0;
            while (true) {
                for (std::size_t i = 0; i < d; ++i) x[i] = origin[i] + side * unif(rng);
                double r = dist(x);
                if (r > 0.0) {
                    v = -std::log(r);
                    break;
                }
            }
            s += v;
            s2 += static_cast<long double>(v) * v;
        }
        sums[c] = s;
        squares[c] = s2;
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(chunks)));
    if (workers <= 1) {
        for (std::uint64_t c = 0; c < chunks; ++c) run_chunk(c);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::uint64_t c = next++; c < chunks; c = next++) run_chunk(c);
            });
        for (auto& t : pool) t.join();
    }

    long double s = 0.0L, s2 = 0.0L;
    for (std::uint64_t c = 0; c < chunks; ++c) {
        s += sums[c];
        s2 += squares[c];
    }
    const long double n = static_cast<long double>(samples);
    const long double mean = s / n;
    const long double var = std::max(0.0L, (s2 / n - mean * mean) * n / std::max(1.0L, n - 1));
    IntegralEstimate out;
    out.value = static_cast<double>(mean);
    out.error_estimate = static_cast<double>(std::sqrt(var / n));
    out.work = samples;
    return out;
}

}  // namespace

double harmonic(unsigned d)
{
    double h = 0.0;
    for (unsigned k = 1; k <= d; ++k) h += 1.0 / k;
    return h;
}

double lemma1_reference(unsigned dim, double side)
{
    if (dim == 0) throw std::invalid_argument("dimension must be positive");
    return std::log(1.0 / side) + std::numbers::ln2 + harmonic(dim);
}

WhitneySum whitney_entropy_sum(const FamilySets& fam, const RootFrame& frame)
{
    const double d = static_cast<double>(frame.dim());
    const double side = frame.side().get_d();
    const double volume = std::pow(side, d);
    const double log_inv_side = -std::log(side);
    long double value = 0.0L;
    for (const auto& q : fam.empty_maximal) {
        const double level = static_cast<double>(q.level);
        value += std::ldexp(volume, -static_cast<int>(q.level * frame.dim())) * (log_inv_side + level * std::numbers::ln2);
    }
    WhitneySum out;
    out.value = static_cast<double>(value);
    if (!fam.degenerate && !fam.frontier.empty()) {
        const int J = static_cast<int>(fam.depth);
        const double mu = static_cast<double>(fam.frontier.size()) * std::ldexp(volume, -J * static_cast<int>(frame.dim()));
        out.tail_bound = mu * (std::abs(log_inv_side + J * std::numbers::ln2) + 2.0 * std::numbers::ln2);
    }
    return out;
}

IntegralEstimate integrate_log_distance(const RootFrame& frame, const LogDistanceField& field, const IntegrationOptions& options)
{
    if (options.budget == 0) throw std::invalid_argument("integration budget must be positive");
    if (options.method == IntegrationMethod::monte_carlo) {
        IntegralEstimate mean = monte_carlo_mean(frame, field.distance, options);
        const double volume = frame.volume().get_d();
        mean.value *= volume;
        mean.error_estimate *= volume;
        return mean;
    }
    return AdaptiveIntegrator(frame, field, options).run();
}

IntegralEstimate log_distance_integral(const RootFrame& frame, const SetOracle& oracle, const IntegrationOptions& options)
{
    if (frame.dim() != oracle.dim()) throw std::invalid_argument("frame and set dimensions differ");
    LogDistanceField field{
        [&oracle](std::span<const double> x) { return oracle.distance(x); },
        [&oracle, &frame](const DyadicCube& q) { return oracle.touches_closure(cube_box(frame, q)); },
    };
    return integrate_log_distance(frame, field, options);
}

IntegralEstimate boundary_log_distance_integral(unsigned dim, double side, const IntegrationOptions& options)
{
    if (dim == 0) throw std::invalid_argument("dimension must be positive");
    if (!(side > 0.0)) throw std::invalid_argument("side must be positive");
    Rational exact_side(side);
    RootFrame frame(Point(dim, Rational(0)), exact_side);
    LogDistanceField field{
        [side](std::span<const double> x) {
            double best = std::numeric_limits<double>::infinity();
            for (double xi : x) best = std::min({best, xi, side - xi});
            return best;
        },
        [](const DyadicCube& q) {
            const std::uint64_t last = (std::uint64_t{1} << q.level) - 1;
            return std::any_of(q.index.begin(), q.index.end(), [last](std::uint64_t v) { return v == 0 || v == last; });
        },
    };
    IntegralEstimate est = integrate_log_distance(frame, field, options);
    const double volume = std::pow(side, static_cast<double>(dim));
    est.value /= volume;
    est.error_estimate /= volume;
    return est;
}

EntropyBandCheck compare_band(const RootFrame& frame, const WhitneySum& whitney, const IntegralEstimate& integral)
{
    EntropyBandCheck out;
    const double volume = frame.volume().get_d();
    const double d = static_cast<double>(frame.dim());
    out.whitney = whitney.value;
    out.whitney_tail = whitney.tail_bound;
    out.integral = integral;
    out.diff = std::abs(whitney.value - integral.value) / volume;
    out.constant = std::max(std::log(2.0 * std::sqrt(d)), std::numbers::ln2 + harmonic(static_cast<unsigned>(frame.dim())));
    out.band = out.constant + (integral.error_estimate + whitney.tail_bound) / volume;
    out.pass = out.diff <= out.band;
    return out;
}

EntropyBandCheck prop2_band_check(const RootFrame& frame, const SetOracle& oracle, const FamilySets& fam,
                                  const IntegrationOptions& options)
{
    return compare_band(frame, whitney_entropy_sum(fam, frame), log_distance_integral(frame, oracle, options));
}

InfBracketCheck prop2_inf_check(const RootFrame& frame, const SetOracle& oracle, const FamilySets& fam)
{
    InfBracketCheck out;
    out.bracket = sup_distance_estimate(oracle, frame, fam);
    const double m_side = cube_side(frame, *fam.largest_empty).get_d();
    out.log_inv_m_side = -std::log(m_side);
    out.diff_lower = std::abs(out.log_inv_m_side + std::log(out.bracket.lower));
    out.diff_upper = std::abs(out.log_inv_m_side + std::log(out.bracket.upper));
    out.exact = out.bracket.exact_squared.has_value();
    out.diff = out.exact ? std::abs(out.log_inv_m_side + 0.5 * std::log(out.bracket.exact_squared->get_d()))
                         : std::max(out.diff_lower, out.diff_upper);
    out.band = std::log(2.0 * std::sqrt(static_cast<double>(frame.dim())));
    // |x| is convex in log s, so the largest deviation over the bracket sits at an end.
    const double worst = out.exact ? out.diff : std::max(out.diff_lower, out.diff_upper);
    out.pass = worst <= out.band + 1e-12;
    return out;
}

EntropyEstimate entropy_estimates(const RootFrame& frame, const SetOracle& oracle, const FamilySets& fam,
                                  std::uint64_t quadrature_budget, std::uint64_t samples, std::uint64_t seed, unsigned jobs)
{
    EntropyEstimate out;
    out.whitney = whitney_entropy_sum(fam, frame);
    out.quadrature = log_distance_integral(frame, oracle, {IntegrationMethod::adaptive, quadrature_budget, 0.0, 0, jobs});
    out.monte_carlo = log_distance_integral(frame, oracle, {IntegrationMethod::monte_carlo, samples, 0.0, seed, jobs});
    out.seed = seed;
    out.lemma1_constant = std::numbers::ln2 + harmonic(static_cast<unsigned>(frame.dim()));
    return out;
}

}  // namespace porosity
