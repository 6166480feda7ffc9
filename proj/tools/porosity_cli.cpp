#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "porosity/commands.hpp"

using namespace porosity;

namespace {

struct Flags {
    std::string config_path;
    std::optional<unsigned> depth;
    std::optional<std::string> delta;
    unsigned jobs = 1;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> format;
    std::optional<std::string> output;
    bool strict = false;
    bool timing = false;
    std::uint64_t budget = 400000;
    std::uint64_t samples = 10000000;
};

void add_common(CLI::App* cmd, Flags& flags, bool needs_config)
{
    auto* opt = cmd->add_option("--config", flags.config_path, "Run configuration (JSON)");
    if (needs_config) opt->required();
    cmd->add_option("--depth", flags.depth, "Truncation depth J");
    cmd->add_option("--delta", flags.delta, "Certificate delta as p/q");
    cmd->add_option("--jobs", flags.jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", flags.seed, "Master seed");
    cmd->add_option("--format", flags.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--output", flags.output, "Report path (default: stdout or the config's output.path)");
    cmd->add_flag("--strict", flags.strict, "Exit 3 when undetermined results are present");
    cmd->add_flag("--timing", flags.timing, "Record wall-clock time in the report");
}

int emit(const CommandResult& result, const std::string& format, const std::string& path)
{
    const std::string text = render(result.report, format);
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write '" << path << "'\n";
            return exit_config_error;
        }
        out << text;
    }
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dyadic coverings, porosity and weak-porosity checks"};
    app.require_subcommand(1);
    Flags flags;
    auto* identity = app.add_subcommand("identity", "Exact summation identities over the sweep");
    auto* analyze = app.add_subcommand("analyze", "Certificate, dyadic conditions and evidence over the sweep");
    auto* entropy = app.add_subcommand("entropy", "Whitney sum against the entropy integral");
    auto* lemma = app.add_subcommand("lemma", "Boundary integral against its closed form");
    for (auto* cmd : {identity, analyze, entropy}) add_common(cmd, flags, true);
    add_common(lemma, flags, false);
    lemma->add_option("--budget", flags.budget, "Adaptive cell evaluations (d = 1, 2)");
    lemma->add_option("--samples", flags.samples, "Monte Carlo samples (d = 3)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : exit_config_error;
    }

    CommandOptions options{flags.jobs, flags.strict, flags.timing};
    try {
        if (lemma->parsed()) {
            LemmaOptions lo{flags.budget, flags.samples, flags.seed.value_or(0)};
            return emit(cmd_lemma(lo, options), flags.format.value_or("json"), flags.output.value_or(""));
        }
        RunConfig config = load_config(flags.config_path);
        RunOverrides overrides;
        overrides.depth = flags.depth;
        if (flags.delta) {
            try {
                overrides.delta = parse_rational(*flags.delta);
            } catch (const std::invalid_argument&) {
                throw SpecError("--delta", "not a rational: '" + *flags.delta + "'");
            }
        }
        overrides.seed = flags.seed;
        overrides.format = flags.format;
        apply_overrides(config, overrides);
        const std::string path = flags.output.value_or(config.output_path);

        CommandResult result = identity->parsed()  ? cmd_identity(config, options)
                               : analyze->parsed() ? cmd_analyze(config, options)
                                                   : cmd_entropy(config, options);
        return emit(result, config.format, path);
    } catch (const SpecError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_math_failure;
    }
}
