#include "fishbone/experiment.hpp"

#include "fishbone/hill.hpp"
#include "fishbone/threshold.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

namespace fishbone {

std::string_view to_string(Command c)
{
    switch (c) {
    case Command::Simulate:
        return "simulate";
    case Command::Hill:
        return "hill";
    case Command::Threshold:
        return "threshold";
    case Command::Sweep:
        return "sweep";
    }
    return "unknown";
}

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text)
{
    text = trim(text);
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value))
        throw ConfigError(fmt::format("{}: '{}' is not a finite number", key, text));
    return value;
}

int parse_int(std::string_view key, std::string_view text)
{
    text = trim(text);
    int value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end)
        throw ConfigError(fmt::format("{}: '{}' is not an integer", key, text));
    return value;
}

std::vector<double> parse_list(std::string_view key, std::string_view text)
{
    std::vector<double> values;
    while (!text.empty()) {
        const auto comma = text.find(',');
        values.push_back(parse_double(key, text.substr(0, comma)));
        if (comma == std::string_view::npos)
            break;
        text.remove_prefix(comma + 1);
    }
    if (values.empty())
        throw ConfigError(fmt::format("{}: empty list", key));
    return values;
}

std::string join(const std::vector<double>& values)
{
    return fmt::format("{}", fmt::join(values, ","));
}

// Opens `path` for writing, or hands back `fallback` for "-".
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback)
    {
        if (path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::out | std::ios::trunc);
            stream_ = file_.get();
        }
    }
    bool ok() const { return static_cast<bool>(*stream_); }
    std::ostream& stream() { return *stream_; }
    bool finish()
    {
        stream_->flush();
        if (file_)
            file_->close();
        return file_ ? static_cast<bool>(*file_) : static_cast<bool>(*stream_);
    }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

std::vector<double> positive_grid(const ExperimentConfig& config)
{
    auto grid = parse_grid(config.energies);
    for (double e : grid)
        if (!(e > 0.0))
            throw ConfigError(fmt::format("energies: {} is not positive", e));
    return grid;
}

}  // namespace

std::vector<std::string> ExperimentConfig::fingerprint(Command command) const
{
    std::vector<std::string> lines;
    if (preset)
        lines.push_back("preset=" + *preset);
    lines.push_back(fmt::format("command={}", to_string(command)));
    if (command == Command::Hill) {
        lines.push_back("energies=" + energies);
        if (forced_delta)
            lines.push_back(fmt::format("forced_delta={}", *forced_delta));
        lines.push_back(fmt::format("horizon_periods={}", horizon_periods));
        return lines;
    }
    lines.push_back(fmt::format("variant={}", to_string(variant)));
    lines.push_back(fmt::format("modes={}", modes));
    if (command != Command::Sweep)
        lines.push_back(fmt::format("delta={}", variant == Variant::Isolated ? 0.0 : delta));
    lines.push_back(fmt::format("scheme={}", to_string(integrator.scheme)));
    lines.push_back(fmt::format("h={}", integrator.h));
    lines.push_back(fmt::format("rel_tol={}", integrator.rel_tol));
    lines.push_back(fmt::format("abs_tol={}", integrator.abs_tol));
    lines.push_back(fmt::format("t_end={}", integrator.t_end));
    lines.push_back(fmt::format("sample_every={}", integrator.sample_every));
    lines.push_back(fmt::format("onset_gain={}", onset_gain));
    switch (command) {
    case Command::Simulate:
        lines.push_back(fmt::format("sigma={}", sigma));
        break;
    case Command::Threshold:
        lines.push_back(fmt::format("bracket={}:{}", bracket.first, bracket.second));
        lines.push_back(fmt::format("tol={}", tol));
        break;
    case Command::Sweep:
        lines.push_back("deltas=" + join(deltas));
        lines.push_back("sigmas=" + join(sigmas));
        break;
    case Command::Hill:
        break;
    }
    return lines;
}

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view raw)
{
    const std::string_view value = trim(raw);
    try {
        if (key == "variant")
            c.variant = parse_variant(value);
        else if (key == "modes")
            c.modes = parse_int(key, value);
        else if (key == "delta")
            c.delta = parse_double(key, value);
        else if (key == "sigma")
            c.sigma = parse_double(key, value);
        else if (key == "scheme")
            c.integrator.scheme = parse_scheme(value);
        else if (key == "h" || key == "step")
            c.integrator.h = parse_double(key, value);
        else if (key == "rel_tol")
            c.integrator.rel_tol = parse_double(key, value);
        else if (key == "abs_tol")
            c.integrator.abs_tol = parse_double(key, value);
        else if (key == "t_end")
            c.integrator.t_end = parse_double(key, value);
        else if (key == "sample_every")
            c.integrator.sample_every = parse_double(key, value);
        else if (key == "onset_gain")
            c.onset_gain = parse_double(key, value);
        else if (key == "out")
            c.output_path = std::string(value);
        else if (key == "energies") {
            parse_grid(value);
            c.energies = std::string(value);
        }
        else if (key == "forced_delta")
            c.forced_delta = parse_double(key, value);
        else if (key == "horizon_periods")
            c.horizon_periods = parse_int(key, value);
        else if (key == "bracket")
            c.bracket = parse_bracket(value);
        else if (key == "tol")
            c.tol = parse_double(key, value);
        else if (key == "deltas")
            c.deltas = parse_list(key, value);
        else if (key == "sigmas")
            c.sigmas = parse_list(key, value);
        else if (key == "jobs")
            c.jobs = parse_int(key, value);
        else
            throw ConfigError(fmt::format("unknown key '{}'", key));
    }
    catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("{}: {}", key, e.what()));
    }
}

void apply_config_text(ExperimentConfig& config, std::string_view text)
{
    int line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string_view line = trim(text.substr(0, nl));
        ++line_no;
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (line.empty() || line.front() == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(fmt::format("line {}: expected key=value", line_no));
        const std::string_view key = trim(line.substr(0, eq));
        if (key == "preset")
            throw ConfigError(fmt::format("line {}: presets are selected with --preset", line_no));
        apply_setting(config, key, line.substr(eq + 1));
    }
}

void apply_config_file(ExperimentConfig& config, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(fmt::format("cannot read config file '{}'", path));
    std::stringstream buffer;
    buffer << in.rdbuf();
    apply_config_text(config, buffer.str());
}

std::vector<double> parse_grid(std::string_view text)
{
    std::vector<double> values;
    text = trim(text);
    if (text.empty())
        throw ConfigError("empty grid");
    while (!text.empty()) {
        const auto comma = text.find(',');
        const std::string_view item = trim(text.substr(0, comma));
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);

        const auto c1 = item.find(':');
        if (c1 == std::string_view::npos) {
            values.push_back(parse_double("grid", item));
            continue;
        }
        const auto c2 = item.find(':', c1 + 1);
        if (c2 == std::string_view::npos)
            throw ConfigError(fmt::format("grid '{}': expected start:stop:step", item));
        const double start = parse_double("grid", item.substr(0, c1));
        const double stop = parse_double("grid", item.substr(c1 + 1, c2 - c1 - 1));
        const double step = parse_double("grid", item.substr(c2 + 1));
        if (!(step > 0.0) || stop < start)
            throw ConfigError(fmt::format("grid '{}': need step > 0 and stop >= start", item));
        const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
        if (n > 1000000)
            throw ConfigError(fmt::format("grid '{}' has too many points", item));
        for (long long k = 0; k <= n; ++k)
            values.push_back(start + static_cast<double>(k) * step);
    }
    return values;
}

std::pair<double, double> parse_bracket(std::string_view text)
{
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw ConfigError(fmt::format("bracket '{}': expected lo:hi", text));
    const double lo = parse_double("bracket", text.substr(0, colon));
    const double hi = parse_double("bracket", text.substr(colon + 1));
    if (!(lo < hi))
        throw ConfigError(fmt::format("bracket '{}': need lo < hi", text));
    return {lo, hi};
}

const std::vector<Preset>& presets()
{
    using S = std::vector<std::pair<std::string, std::string>>;
    auto panel = [](std::string name, std::string description, std::string variant, std::string delta,
                    std::string sigma, std::string t_end) {
        return Preset{std::move(name), Command::Simulate, std::move(description),
                      S{{"variant", std::move(variant)},
                        {"modes", "1"},
                        {"delta", std::move(delta)},
                        {"sigma", std::move(sigma)},
                        {"scheme", "rk4"},
                        {"h", "0.001"},
                        {"t_end", std::move(t_end)},
                        {"sample_every", "0.01"},
                        {"onset_gain", "100"}}};
    };
    static const std::vector<Preset> table = {
        panel("fig1-145", "isolated, ||y1|| = 1.45, t in [0,200]", "isolated", "0", "1.45", "200"),
        panel("fig1-147", "isolated, ||y1|| = 1.47, t in [0,200]", "isolated", "0", "1.47", "200"),
        panel("fig1-150", "isolated, ||y1|| = 1.5, t in [0,200]", "isolated", "0", "1.5", "200"),
        panel("fig1-170", "isolated, ||y1|| = 1.7, t in [0,200]", "isolated", "0", "1.7", "200"),
        panel("fig2-d001", "cross derivatives, sigma = 1.47, delta = 0.01", "cross", "0.01", "1.47", "200"),
        panel("fig2-d002", "cross derivatives, sigma = 1.47, delta = 0.02", "cross", "0.02", "1.47", "200"),
        panel("fig3-d003", "cross derivatives, sigma = 1.47, delta = 0.03", "cross", "0.03", "1.47", "200"),
        panel("fig3-d005", "cross derivatives, sigma = 1.47, delta = 0.05", "cross", "0.05", "1.47", "200"),
        panel("fig4-150", "cross derivatives, delta = 0.01, sigma = 1.5, t in [0,170]", "cross", "0.01", "1.5", "170"),
        panel("fig4-160", "cross derivatives, delta = 0.01, sigma = 1.6, t in [0,170]", "cross", "0.01", "1.6", "170"),
        panel("fig5-180", "cross derivatives, delta = 0.01, sigma = 1.8, t in [0,170]", "cross", "0.01", "1.8", "170"),
        panel("fig5-300", "cross derivatives, delta = 0.01, sigma = 3, t in [0,170] (chaotic)", "cross", "0.01", "3",
              "170"),
        panel("fig6-147", "cross derivatives and zero-order terms, delta = 0.01, sigma = 1.47", "crosszero", "0.01",
              "1.47", "200"),
        panel("fig6-150", "cross derivatives and zero-order terms, delta = 0.01, sigma = 1.5", "crosszero", "0.01",
              "1.5", "200"),
        Preset{"prop1-check", Command::Hill, "Hill chart below the sufficient bound E <= 235/294",
               S{{"energies", "0.05:0.799:0.05,0.799"}, {"horizon_periods", "200"}}},
        Preset{"prop2-grid", Command::Hill, "Hill chart with forced boundedness check, delta = 0.01",
               S{{"energies", "0.5:10:0.5"}, {"forced_delta", "0.01"}, {"horizon_periods", "200"}}},
    };
    return table;
}

const Preset* find_preset(std::string_view name)
{
    for (const auto& p : presets())
        if (p.name == name)
            return &p;
    return nullptr;
}

ExperimentConfig resolve_preset(const Preset& preset)
{
    ExperimentConfig config;
    for (const auto& [key, value] : preset.settings)
        apply_setting(config, key, value);
    config.preset = preset.name;
    return config;
}

int run_simulate(const ExperimentConfig& config, std::ostream& out, std::ostream& err)
{
    Trajectory trajectory{ModelSpec::isolated(), {}, {}, {}, 0.0, 0.0, 0.0};
    try {
        const ModelSpec spec = config.model();
        trajectory = simulate(spec, make_initial(config.sigma, config.modes), config.integrator, config.onset_gain);
    }
    catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return exit_code::config;
    }

    Sink sink(config.output_path, out);
    if (!sink.ok()) {
        err << "cannot open '" << config.output_path << "' for writing\n";
        return exit_code::io;
    }
    write_trajectory_csv(sink.stream(), trajectory, config.fingerprint(Command::Simulate));
    if (!sink.finish()) {
        err << "write to '" << config.output_path << "' failed\n";
        return exit_code::io;
    }

    std::ostream& summary = config.output_path == "-" ? err : out;
    const auto& last = trajectory.samples.back();
    summary << "onset=" << (trajectory.onset ? fmt::format("{:.6f}", trajectory.onset->t_onset) : "none");
    summary << " E_final=" << (last.energy ? fmt::format("{:.10g}", last.energy->total) : "n/a");
    summary << fmt::format(" max_torsion={:.6g}", trajectory.max_torsion);
    if (trajectory.terminated_early) {
        summary << fmt::format(" terminated_at={:.6f} reason=\"{}\"\n", trajectory.terminated_early->time,
                               trajectory.terminated_early->reason);
        return exit_code::blow_up;
    }
    summary << '\n';
    return exit_code::ok;
}

int run_hill(const ExperimentConfig& config, std::ostream& out, std::ostream& err)
{
    std::vector<double> grid;
    try {
        grid = positive_grid(config);
        if (config.forced_delta && !(*config.forced_delta >= 0.0))
            throw ConfigError("forced_delta must be >= 0");
        if (config.horizon_periods < 10)
            throw ConfigError("horizon_periods must be >= 10");
    }
    catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_code::config;
    }

    std::vector<StabilityChartRow> rows;
    std::vector<ForcedHillCheck> forced;
    for (double e : grid) {
        rows.push_back(chart_row(e));
        if (config.forced_delta)
            forced.push_back(forced_check(pure_mode_at_energy(e), *config.forced_delta, config.horizon_periods));
    }

    Sink sink(config.output_path, out);
    if (!sink.ok()) {
        err << "cannot open '" << config.output_path << "' for writing\n";
        return exit_code::io;
    }
    auto& os = sink.stream();
    if (config.preset)
        for (const auto& line : config.fingerprint(Command::Hill))
            os << "# " << line << '\n';
    if (!config.forced_delta) {
        write_stability_chart(os, rows);
    }
    else {
        os << "E,amplitude,period,trace,classification,zhukovskii,forced_sup,forced_growth,forced_bounded\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            const auto& f = forced[i];
            os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{},{},{:.17g},{:.17g},{}\n", r.energy, r.amplitude,
                              r.period, r.trace, to_string(r.classification), r.zhukovskii ? "true" : "false",
                              f.sup_norm, f.growth_rate, f.bounded_verdict ? "true" : "false");
        }
    }
    if (!sink.finish()) {
        err << "write to '" << config.output_path << "' failed\n";
        return exit_code::io;
    }
    return exit_code::ok;
}

int run_threshold(const ExperimentConfig& config, std::ostream& out, std::ostream& err)
{
    ThresholdResult result;
    try {
        result = find_threshold(config.model(), config.bracket, config.tol, config.integrator, config.onset_gain);
    }
    catch (const InvalidBracket& e) {
        err << "invalid bracket: " << e.what() << '\n';
        return exit_code::invalid_bracket;
    }
    catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return exit_code::config;
    }
    for (const auto& a : result.anomalies)
        err << a << '\n';

    Sink sink(config.output_path, out);
    if (!sink.ok()) {
        err << "cannot open '" << config.output_path << "' for writing\n";
        return exit_code::io;
    }
    if (config.preset)
        sink.stream() << "preset=" << *config.preset << '\n';
    write_threshold_report(sink.stream(), result);
    if (!sink.finish()) {
        err << "write to '" << config.output_path << "' failed\n";
        return exit_code::io;
    }
    return exit_code::ok;
}

int run_sweep(const ExperimentConfig& config, std::ostream& out, std::ostream& err)
{
    std::vector<SweepRow> rows;
    try {
        rows = sweep(config.variant, config.deltas, config.sigmas, config.integrator, config.onset_gain, config.jobs);
    }
    catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return exit_code::config;
    }
    for (const auto& r : rows)
        if (r.terminated_early)
            err << fmt::format("delta={} sigma={}: terminated at t={:.6f} ({})\n", r.delta, r.sigma,
                               r.terminated_early->time, r.terminated_early->reason);

    Sink sink(config.output_path, out);
    if (!sink.ok()) {
        err << "cannot open '" << config.output_path << "' for writing\n";
        return exit_code::io;
    }
    write_sweep_csv(sink.stream(), rows);
    if (!sink.finish()) {
        err << "write to '" << config.output_path << "' failed\n";
        return exit_code::io;
    }
    return exit_code::ok;
}

std::string plot_stub(Command command, const std::string& csv_path)
{
    std::string body;
    switch (command) {
    case Command::Simulate:
        body = "fig, (top, bottom) = plt.subplots(2, 1, sharex=True)\n"
               "top.plot(df['t'], df['y1'], color='green', label='y1')\n"
               "top.plot(df['t'], df['z1'], color='black', label='z1')\n"
               "top.legend()\n"
               "bottom.plot(df['t'], df['E_total'], color='red', label='E')\n"
               "bottom.set_xlabel('t')\n"
               "bottom.legend()\n";
        break;
    case Command::Hill:
        body = "fig, ax = plt.subplots()\n"
               "ax.plot(df['E'], df['trace'], marker='.')\n"
               "ax.axhline(2, linestyle='--')\n"
               "ax.axhline(-2, linestyle='--')\n"
               "ax.set_xlabel('E')\n"
               "ax.set_ylabel('trace of monodromy')\n";
        break;
    case Command::Sweep:
        body = "fig, (top, bottom) = plt.subplots(2, 1)\n"
               "for d, g in df.groupby('delta'):\n"
               "    top.plot(g['sigma'], g['t_onset'], marker='o', label=f'delta={d}')\n"
               "    bottom.plot(g['sigma'], g['max_torsion'], marker='o', label=f'delta={d}')\n"
               "top.set_ylabel('t_onset')\n"
               "bottom.set_ylabel('max |z1|')\n"
               "bottom.set_xlabel('sigma')\n"
               "top.legend()\n";
        break;
    case Command::Threshold:
        body = "print(open(path).read())\n";
        return fmt::format("path = '{}'\n", csv_path) + body;
    }
    return "import matplotlib.pyplot as plt\n"
           "import pandas as pd\n\n"
           "df = pd.read_csv(" +
           fmt::format("'{}'", csv_path) +
           ", comment='#')\n" + body +
           "plt.tight_layout()\n"
           "plt.show()\n";
}

}  // namespace fishbone
