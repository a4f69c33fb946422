#ifndef FISHBONE_EXPERIMENT_HPP
#define FISHBONE_EXPERIMENT_HPP

#include "fishbone/integrator.hpp"
#include "fishbone/model.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fishbone {

// Process exit codes of the command-line front end.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int config = 2;
inline constexpr int io = 3;
inline constexpr int blow_up = 4;
inline constexpr int invalid_bracket = 5;
}  // namespace exit_code

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Command { Simulate, Hill, Threshold, Sweep };
std::string_view to_string(Command c);

struct ExperimentConfig {
    Variant variant = Variant::Isolated;
    int modes = 1;
    double delta = 0.0;
    double sigma = 1.47;
    IntegratorConfig integrator;
    double onset_gain = 100.0;
    std::string output_path = "-";
    std::optional<std::string> preset;

    // hill
    std::string energies = "0.1:10:0.1";
    std::optional<double> forced_delta;
    int horizon_periods = 200;

    // threshold
    std::pair<double, double> bracket{1.40, 1.60};
    double tol = 1e-3;

    // sweep
    std::vector<double> deltas{0.01};
    std::vector<double> sigmas{1.47};
    int jobs = 1;

    ModelSpec model() const { return ModelSpec(variant, modes, delta); }

    // Every result-affecting field as key=value, in a fixed order.
    std::vector<std::string> fingerprint(Command command) const;
};

/// Applies one key=value setting; throws ConfigError on unknown keys or bad values.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Flat key=value text: blank lines and lines starting with '#' are ignored.
void apply_config_text(ExperimentConfig& config, std::string_view text);
void apply_config_file(ExperimentConfig& config, const std::string& path);

/// "a:b:step" (inclusive of b up to roundoff), "v", or comma-separated mixes.
std::vector<double> parse_grid(std::string_view text);
std::pair<double, double> parse_bracket(std::string_view text);

struct Preset {
    std::string name;
    Command command;
    std::string description;
    std::vector<std::pair<std::string, std::string>> settings;
};

const std::vector<Preset>& presets();
const Preset* find_preset(std::string_view name);

/// Resolves a preset into a full configuration. output_path and jobs stay
/// caller-controlled; nothing else may be overridden.
ExperimentConfig resolve_preset(const Preset& preset);

// Runners return a process exit code. Diagnostics go to `err`.
int run_simulate(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int run_hill(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int run_threshold(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int run_sweep(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// A matplotlib script that plots the columns of a simulate/hill/sweep CSV.
std::string plot_stub(Command command, const std::string& csv_path);

}  // namespace fishbone

#endif  // FISHBONE_EXPERIMENT_HPP
