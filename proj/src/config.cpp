#include "porosity/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>

namespace porosity {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string indexed(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object()) throw SpecError(path.empty() ? "config" : path, "expected an object");
    std::set<std::string> names(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items())
        if (!names.count(key)) throw SpecError(join(path, key), "unknown key");
}

const Json& require(const Json& obj, const std::string& path, const char* key)
{
    auto it = obj.find(key);
    if (it == obj.end()) throw SpecError(join(path, key), "missing");
    return *it;
}

Rational read_rational(const Json& j, const std::string& path)
{
    if (j.is_number_integer()) return Rational(Integer(j.dump()));
    if (j.is_number_float()) throw SpecError(path, "write non-integer values as \"p/q\" strings");
    if (!j.is_string()) throw SpecError(path, "expected a rational string");
    try {
        return parse_rational(j.get<std::string>());
    } catch (const std::invalid_argument&) {
        throw SpecError(path, "not a rational: '" + j.get<std::string>() + "'");
    }
}

std::uint64_t read_unsigned(const Json& j, const std::string& path)
{
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer()) throw SpecError(path, "must be nonnegative");
    throw SpecError(path, "expected a nonnegative integer");
}

Point read_point(const Json& j, const std::string& path)
{
    if (!j.is_array() || j.empty()) throw SpecError(path, "expected a nonempty array of coordinates");
    Point p;
    for (std::size_t i = 0; i < j.size(); ++i) p.push_back(read_rational(j[i], indexed(path, i)));
    return p;
}

std::pair<unsigned, unsigned> read_range(const Json& j, const std::string& path)
{
    if (!j.is_array() || j.size() != 2) throw SpecError(path, "expected [first, last]");
    auto lo = read_unsigned(j[0], indexed(path, 0));
    auto hi = read_unsigned(j[1], indexed(path, 1));
    if (lo > hi || hi > kMaxLevel) throw SpecError(path, "need first <= last <= " + std::to_string(kMaxLevel));
    return {static_cast<unsigned>(lo), static_cast<unsigned>(hi)};
}

RootFrame read_frame(const Json& j, const std::string& path)
{
    check_keys(j, path, {"origin", "side"});
    Point origin = read_point(require(j, path, "origin"), join(path, "origin"));
    Rational side = read_rational(require(j, path, "side"), join(path, "side"));
    if (side <= 0) throw SpecError(join(path, "side"), "must be positive");
    return RootFrame(std::move(origin), side);
}

std::size_t read_dim(const Json& j, const std::string& path)
{
    auto d = read_unsigned(j, path);
    if (d < 1 || d > 8) throw SpecError(path, "must lie in [1, 8]");
    return static_cast<std::size_t>(d);
}

SetSpec read_set(const Json& j, const std::string& path)
{
    if (!j.is_object()) throw SpecError(path, "expected an object");
    const Json& kind_j = require(j, path, "kind");
    if (!kind_j.is_string()) throw SpecError(join(path, "kind"), "expected a string");
    const std::string kind = kind_j.get<std::string>();
    if (kind == "points") {
        check_keys(j, path, {"kind", "points"});
        const Json& pts = require(j, path, "points");
        if (!pts.is_array()) throw SpecError(join(path, "points"), "expected an array of points");
        PointsSpec s;
        for (std::size_t i = 0; i < pts.size(); ++i) s.points.push_back(read_point(pts[i], indexed(join(path, "points"), i)));
        return SetSpec{s};
    }
    if (kind == "lattice") {
        check_keys(j, path, {"kind", "spacing", "dim"});
        return SetSpec{LatticeSpec{read_rational(require(j, path, "spacing"), join(path, "spacing")),
                                   read_dim(require(j, path, "dim"), join(path, "dim"))}};
    }
    if (kind == "cantor_product") {
        check_keys(j, path, {"kind", "ratio", "generation", "dim"});
        auto g = read_unsigned(require(j, path, "generation"), join(path, "generation"));
        if (g > 1000) throw SpecError(join(path, "generation"), "too large");
        return SetSpec{CantorProductSpec{read_rational(require(j, path, "ratio"), join(path, "ratio")), static_cast<unsigned>(g),
                                         read_dim(require(j, path, "dim"), join(path, "dim"))}};
    }
    if (kind == "union") {
        check_keys(j, path, {"kind", "members"});
        const Json& members = require(j, path, "members");
        if (!members.is_array()) throw SpecError(join(path, "members"), "expected an array of sets");
        UnionSpec u;
        for (std::size_t i = 0; i < members.size(); ++i) u.members.push_back(read_set(members[i], indexed(join(path, "members"), i)));
        return SetSpec{u};
    }
    if (kind == "complement_grid") {
        check_keys(j, path, {"kind", "mesh", "origin", "side"});
        return SetSpec{ComplementGridSpec{read_rational(require(j, path, "mesh"), join(path, "mesh")),
                                          read_point(require(j, path, "origin"), join(path, "origin")),
                                          read_rational(require(j, path, "side"), join(path, "side"))}};
    }
    throw SpecError(join(path, "kind"),
                    "unknown set kind '" + kind + "' (points, lattice, cantor_product, union, complement_grid)");
}

Json point_json(const Point& p)
{
    Json a = Json::array();
    for (const auto& x : p) a.push_back(rational_text(x));
    return a;
}

}  // namespace

std::string rational_text(const Rational& r) { return to_string(r); }

Json real(double x)
{
    if (!std::isfinite(x)) return nullptr;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    double rounded = std::strtod(buf, nullptr);
    if (rounded == 0.0) rounded = 0.0;
    return rounded;
}

RunConfig parse_config(const Json& doc)
{
    check_keys(doc, "", {"set", "base_frame", "sweep", "depth", "params", "quadrature_budget", "monte_carlo_samples", "seed", "output"});
    RunConfig c;
    c.set = read_set(require(doc, "", "set"), "set");
    if (doc.contains("base_frame"))
        c.base_frame = read_frame(doc["base_frame"], "base_frame");
    else
        c.base_frame = RootFrame::unit(c.set.dim() ? c.set.dim() : 1);

    const Json& sweep = require(doc, "", "sweep");
    check_keys(sweep, "sweep", {"dyadic_levels", "random_frames", "explicit_frames"});
    if (sweep.contains("dyadic_levels")) c.sweep.dyadic_levels = read_range(sweep["dyadic_levels"], "sweep.dyadic_levels");
    if (sweep.contains("random_frames")) {
        const Json& r = sweep["random_frames"];
        check_keys(r, "sweep.random_frames", {"count", "seed", "levels"});
        c.sweep.random_frames = read_unsigned(require(r, "sweep.random_frames", "count"), "sweep.random_frames.count");
        if (r.contains("seed")) c.random_seed = read_unsigned(r["seed"], "sweep.random_frames.seed");
        if (r.contains("levels")) c.sweep.random_levels = read_range(r["levels"], "sweep.random_frames.levels");
    }
    if (sweep.contains("explicit_frames")) {
        const Json& e = sweep["explicit_frames"];
        if (!e.is_array()) throw SpecError("sweep.explicit_frames", "expected an array of frames");
        for (std::size_t i = 0; i < e.size(); ++i)
            c.sweep.explicit_frames.push_back(read_frame(e[i], indexed("sweep.explicit_frames", i)));
    }

    if (doc.contains("depth")) {
        auto d = read_unsigned(doc["depth"], "depth");
        if (d > kMaxLevel) throw SpecError("depth", "must lie in [1, " + std::to_string(kMaxLevel) + "]");
        c.depth = static_cast<unsigned>(d);
    }
    if (doc.contains("params")) {
        const Json& p = doc["params"];
        check_keys(p, "params", {"delta", "c_threshold"});
        if (p.contains("delta")) c.params.delta = read_rational(p["delta"], "params.delta");
        if (p.contains("c_threshold")) c.params.c_threshold = read_rational(p["c_threshold"], "params.c_threshold");
    }
    if (doc.contains("quadrature_budget")) c.quadrature_budget = read_unsigned(doc["quadrature_budget"], "quadrature_budget");
    if (doc.contains("monte_carlo_samples")) c.monte_carlo_samples = read_unsigned(doc["monte_carlo_samples"], "monte_carlo_samples");
    if (doc.contains("seed")) c.seed = read_unsigned(doc["seed"], "seed");
    if (doc.contains("output")) {
        const Json& o = doc["output"];
        check_keys(o, "output", {"format", "path"});
        if (o.contains("format")) {
            if (!o["format"].is_string()) throw SpecError("output.format", "expected \"json\" or \"csv\"");
            c.format = o["format"].get<std::string>();
        }
        if (o.contains("path")) {
            if (!o["path"].is_string()) throw SpecError("output.path", "expected a string");
            c.output_path = o["path"].get<std::string>();
        }
    }
    validate(c);
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw SpecError("config", "cannot open '" + path + "'");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw SpecError("config", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(doc);
}

void apply_overrides(RunConfig& config, const RunOverrides& overrides)
{
    if (overrides.depth) config.depth = *overrides.depth;
    if (overrides.delta) config.params.delta = *overrides.delta;
    if (overrides.seed) config.seed = *overrides.seed;
    if (overrides.format) config.format = *overrides.format;
    validate(config);
}

void validate(const RunConfig& config)
{
    try {
        porosity::validate(config.set);
    } catch (const SpecError& e) {
        throw SpecError("set." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
    }
    if (config.base_frame.dim() != config.set.dim()) throw SpecError("base_frame.origin", "dimension differs from the set");
    for (std::size_t i = 0; i < config.sweep.explicit_frames.size(); ++i)
        if (config.sweep.explicit_frames[i].dim() != config.set.dim())
            throw SpecError(indexed("sweep.explicit_frames", i) + ".origin", "dimension differs from the set");
    if (!config.sweep.dyadic_levels && config.sweep.random_frames == 0 && config.sweep.explicit_frames.empty())
        throw SpecError("sweep", "at least one of dyadic_levels, random_frames, explicit_frames must be nonempty");
    if (config.depth < 1 || config.depth > kMaxLevel) throw SpecError("depth", "must lie in [1, " + std::to_string(kMaxLevel) + "]");
    if (config.quadrature_budget < 1000) throw SpecError("quadrature_budget", "must be at least 1000");
    if (config.monte_carlo_samples < 1) throw SpecError("monte_carlo_samples", "must be positive");
    if (config.format != "json" && config.format != "csv") throw SpecError("output.format", "expected \"json\" or \"csv\"");
    WeakPorosityParams p = config.params;
    p.depth = config.depth;
    try {
        porosity::validate(p);
    } catch (const SpecError& e) {
        throw SpecError("params." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
    }
}

std::vector<RootFrame> config_frames(const RunConfig& config)
{
    SweepSpec s = config.sweep;
    s.random_seed = config.random_seed.value_or(config.seed);
    return sweep_frames(config.base_frame, s);
}

Json to_json(const SetSpec& spec)
{
    return std::visit(
        [](const auto& s) -> Json {
            using T = std::decay_t<decltype(s)>;
            Json j;
            if constexpr (std::is_same_v<T, PointsSpec>) {
                j["kind"] = "points";
                j["points"] = Json::array();
                for (const auto& p : s.points) j["points"].push_back(point_json(p));
            } else if constexpr (std::is_same_v<T, LatticeSpec>) {
                j["kind"] = "lattice";
                j["spacing"] = rational_text(s.spacing);
                j["dim"] = s.dim;
            } else if constexpr (std::is_same_v<T, CantorProductSpec>) {
                j["kind"] = "cantor_product";
                j["ratio"] = rational_text(s.ratio);
                j["generation"] = s.generation;
                j["dim"] = s.dim;
            } else if constexpr (std::is_same_v<T, UnionSpec>) {
                j["kind"] = "union";
                j["members"] = Json::array();
                for (const auto& m : s.members) j["members"].push_back(to_json(m));
            } else {
                j["kind"] = "complement_grid";
                j["mesh"] = rational_text(s.mesh);
                j["origin"] = point_json(s.origin);
                j["side"] = rational_text(s.side);
            }
            return j;
        },
        spec.variant);
}

Json to_json(const RootFrame& frame)
{
    Json j;
    j["origin"] = point_json(frame.origin());
    j["side"] = rational_text(frame.side());
    return j;
}

Json to_json(const RunConfig& config)
{
    Json j;
    j["set"] = to_json(config.set);
    j["base_frame"] = to_json(config.base_frame);
    Json sweep;
    if (config.sweep.dyadic_levels)
        sweep["dyadic_levels"] = {config.sweep.dyadic_levels->first, config.sweep.dyadic_levels->second};
    else
        sweep["dyadic_levels"] = nullptr;
    sweep["random_frames"] = {{"count", config.sweep.random_frames},
                              {"seed", config.random_seed.value_or(config.seed)},
                              {"levels", {config.sweep.random_levels.first, config.sweep.random_levels.second}}};
    sweep["explicit_frames"] = Json::array();
    for (const auto& f : config.sweep.explicit_frames) sweep["explicit_frames"].push_back(to_json(f));
    j["sweep"] = sweep;
    j["depth"] = config.depth;
    j["params"] = {{"delta", rational_text(config.params.delta)}, {"c_threshold", rational_text(config.params.c_threshold)}};
    j["quadrature_budget"] = config.quadrature_budget;
    j["monte_carlo_samples"] = config.monte_carlo_samples;
    j["seed"] = config.seed;
    j["output"] = {{"format", config.format}, {"path", config.output_path}};
    return j;
}

}  // namespace porosity
