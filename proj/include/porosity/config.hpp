#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "porosity/analysis.hpp"

namespace porosity {

using Json = nlohmann::ordered_json;

/// A run configuration: the set, the base frame, the sweep and the numerical budgets.
struct RunConfig {
    SetSpec set;
    RootFrame base_frame = RootFrame::unit(1);
    SweepSpec sweep;
    /// Explicitly configured random-frame seed; otherwise the master seed is used.
    std::optional<std::uint64_t> random_seed;
    unsigned depth = 12;
    WeakPorosityParams params;
    std::uint64_t quadrature_budget = 100000;
    std::uint64_t monte_carlo_samples = 100000;
    std::uint64_t seed = 0;
    std::string format = "json";
    std::string output_path;
};

/// Command-line overrides, applied on top of the file.
struct RunOverrides {
    std::optional<unsigned> depth;
    std::optional<Rational> delta;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> format;
};

/// Parses and validates; throws SpecError with a dotted field path.
RunConfig parse_config(const Json& doc);
RunConfig load_config(const std::string& path);

void apply_overrides(RunConfig& config, const RunOverrides& overrides);

/// Throws SpecError: depth in [1, 62], budget >= 1000, a nonempty sweep, valid set and params.
void validate(const RunConfig& config);

/// Frames of the configured sweep with resolved seeds.
std::vector<RootFrame> config_frames(const RunConfig& config);

Json to_json(const SetSpec& spec);
Json to_json(const RootFrame& frame);
/// Echo of the resolved configuration.
Json to_json(const RunConfig& config);

/// "p/q" (or "p" for integers).
std::string rational_text(const Rational& r);
/// Real rounded to 12 significant digits; null when not finite.
Json real(double x);

}  // namespace porosity
