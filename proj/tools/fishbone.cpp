#include "fishbone/experiment.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>
#include <string>
#include <utility>
#include <vector>

using namespace fishbone;

namespace {

// Command-line overrides, kept as text so every value goes through the same
// parser as the config file.
struct Overrides {
    std::vector<std::pair<std::string, CLI::Option*>> options;
    std::vector<std::pair<std::string, std::string>> values;
};

void add_override(CLI::App& cmd, Overrides& o, const std::string& flag, const std::string& key,
                  const std::string& help)
{
    o.values.emplace_back(key, std::string());
    // values never reallocates after setup, see reserve below
    auto* opt = cmd.add_option(flag, o.values.back().second, help);
    o.options.emplace_back(key, opt);
}

struct Subcommand {
    CLI::App* app = nullptr;
    Command command{};
    std::string preset;
    std::string config_path;
    Overrides overrides;
};

int run(const Subcommand& sub, const std::string& out_path, int jobs, bool jobs_given)
{
    ExperimentConfig config;
    try {
        if (!sub.preset.empty()) {
            const Preset* p = find_preset(sub.preset);
            if (!p)
                throw ConfigError(fmt::format("unknown preset '{}' (see `fishbone presets`)", sub.preset));
            if (p->command != sub.command)
                throw ConfigError(fmt::format("preset '{}' belongs to the {} command", p->name, to_string(p->command)));
            if (!sub.config_path.empty())
                throw ConfigError("--config cannot be combined with --preset");
            for (const auto& [key, opt] : sub.overrides.options)
                if (opt->count() > 0)
                    throw ConfigError(fmt::format("{} cannot be overridden under a preset", opt->get_name()));
            config = resolve_preset(*p);
        }
        else {
            if (!sub.config_path.empty())
                apply_config_file(config, sub.config_path);
            for (std::size_t i = 0; i < sub.overrides.options.size(); ++i)
                if (sub.overrides.options[i].second->count() > 0)
                    apply_setting(config, sub.overrides.values[i].first, sub.overrides.values[i].second);
        }
    }
    catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_code::config;
    }
    if (!out_path.empty())
        config.output_path = out_path;
    if (jobs_given)
        config.jobs = jobs;

    switch (sub.command) {
    case Command::Simulate:
        return run_simulate(config, std::cout, std::cerr);
    case Command::Hill:
        return run_hill(config, std::cout, std::cerr);
    case Command::Threshold:
        return run_threshold(config, std::cout, std::cerr);
    case Command::Sweep:
        return run_sweep(config, std::cout, std::cerr);
    }
    return exit_code::usage;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Fish-bone suspension bridge model: simulation, Hill stability charts, threshold search."};
    app.footer("Exit status: 0 ok, 1 usage, 2 config, 3 I/O, 4 blow-up, 5 invalid bracket.\n"
               "FISHBONE_SEED_NONE is reserved and ignored: every command is deterministic.");
    app.require_subcommand(1);

    std::string out_path;
    int jobs = 1;

    std::vector<Subcommand> subs(4);
    const std::pair<Command, const char*> names[] = {
        {Command::Simulate, "Integrate one trajectory and write it as CSV"},
        {Command::Hill, "Stability chart of the Hill equation over an energy grid"},
        {Command::Threshold, "Bisect on sigma for the torsional instability threshold"},
        {Command::Sweep, "Onset time and peak torsion over a (delta, sigma) grid"},
    };
    CLI::Option* jobs_opt = nullptr;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        auto& s = subs[i];
        s.command = names[i].first;
        s.app = app.add_subcommand(std::string(to_string(s.command)), names[i].second);
        s.app->add_option("--preset", s.preset, "Named experiment; fixes every setting");
        s.app->add_option("--config", s.config_path, "key=value settings file");
        s.app->add_option("--out", out_path, "Output file, - for stdout")->default_str("-");

        auto& o = s.overrides;
        o.values.reserve(16);
        if (s.command != Command::Hill) {
            add_override(*s.app, o, "--variant", "variant", "isolated, cross or crosszero");
            add_override(*s.app, o, "--modes", "modes", "Number of Galerkin modes (aerodynamic variants: 1)");
            add_override(*s.app, o, "--onset-gain", "onset_gain", "Torsion amplification that counts as onset");
            add_override(*s.app, o, "--t-end", "t_end", "Final time");
            add_override(*s.app, o, "--step", "h", "Fixed step, or first trial step when adaptive");
            add_override(*s.app, o, "--scheme", "scheme", "rk4 or adaptive");
        }
        switch (s.command) {
        case Command::Simulate:
            add_override(*s.app, o, "--sigma", "sigma", "Initial vertical amplitude");
            add_override(*s.app, o, "--delta", "delta", "Aerodynamic coupling");
            break;
        case Command::Threshold:
            add_override(*s.app, o, "--delta", "delta", "Aerodynamic coupling");
            add_override(*s.app, o, "--bracket", "bracket", "lo:hi, no onset at lo and onset at hi");
            add_override(*s.app, o, "--tol", "tol", "Bracket width to stop at");
            break;
        case Command::Sweep:
            add_override(*s.app, o, "--deltas", "deltas", "Comma-separated delta values");
            add_override(*s.app, o, "--sigmas", "sigmas", "Comma-separated sigma values");
            jobs_opt = s.app->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 64));
            break;
        case Command::Hill:
            add_override(*s.app, o, "--energies", "energies", "Grid a:b:step, single values, or comma lists");
            add_override(*s.app, o, "--forced-delta", "forced_delta", "Also run the forced boundedness check");
            add_override(*s.app, o, "--horizon", "horizon_periods", "Forced check horizon in periods");
            break;
        }
    }

    auto* list = app.add_subcommand("presets", "List the named experiments");
    std::string stub_command;
    std::string stub_csv;
    auto* stub = app.add_subcommand("plot-stub", "Print a matplotlib script for a CSV produced by this tool");
    stub->add_option("command", stub_command, "simulate, hill, threshold or sweep")
        ->required()
        ->check(CLI::IsMember({"simulate", "hill", "threshold", "sweep"}));
    stub->add_option("csv", stub_csv, "CSV path")->required();

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_code::usage;
    }

    if (list->parsed()) {
        for (const auto& p : presets())
            std::cout << fmt::format("{:<12} {:<9} {}\n", p.name, to_string(p.command), p.description);
        return exit_code::ok;
    }
    if (stub->parsed()) {
        Command c = Command::Simulate;
        for (const auto& s : subs)
            if (to_string(s.command) == stub_command)
                c = s.command;
        std::cout << plot_stub(c, stub_csv);
        return exit_code::ok;
    }
    for (const auto& s : subs)
        if (s.app->parsed())
            return run(s, out_path, jobs, jobs_opt && jobs_opt->count() > 0);
    return exit_code::usage;
}
