#ifndef FISHBONE_INTEGRATOR_HPP
#define FISHBONE_INTEGRATOR_HPP

#include "fishbone/model.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fishbone {

enum class Scheme { FixedRK4, AdaptiveEmbedded };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view name);

struct IntegratorConfig {
    Scheme scheme = Scheme::FixedRK4;
    double h = 1e-3;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double t_end = 200.0;
    double sample_every = 0.01;

    // Throws std::invalid_argument when a field is out of range.
    void validate() const;
    bool operator==(const IntegratorConfig&) const = default;
};

// Any state component beyond this magnitude terminates integration.
inline constexpr double blow_up_limit = 1e8;

class BlowUp : public std::runtime_error {
public:
    BlowUp(double t, const std::string& reason) : std::runtime_error(reason), t_(t) {}
    double time() const { return t_; }

private:
    double t_;
};

struct OnsetEvent {
    double t_onset = 0.0;
    double gain = 0.0;
};

struct Termination {
    double time = 0.0;
    std::string reason;
};

struct Sample {
    SystemState state;
    // Absent for m > 1, where no energy functional is defined.
    std::optional<EnergyBreakdown> energy;
};

struct Trajectory {
    ModelSpec spec;
    std::vector<Sample> samples;
    std::optional<OnsetEvent> onset;
    std::optional<Termination> terminated_early;
    // Largest |z_1| over every integration step, not only the samples.
    double max_torsion = 0.0;
    // |z_1| level that triggers onset: onset_gain * |z_1(0)| + forced_baseline.
    double onset_level = 0.0;
    // Peak |z_1| over the first vertical period of the same run started
    // without torsion; zero when delta = 0.
    double forced_baseline = 0.0;
};

struct SimulateOptions {
    bool record_samples = true;
    bool stop_at_onset = false;
};

/// One accepted step. In adaptive mode config.h is the first trial size,
/// shrunk until the local error meets the tolerances. Throws BlowUp.
SystemState step(const ModelSpec& spec, const SystemState& state, const IntegratorConfig& config);

// Onset fires at the first step where |z_1| >= onset_gain * |z_1(0)| plus the
// torsion the aerodynamic terms excite on their own (see forced_baseline).
// Without aerodynamic coupling this is the plain seed-gain rule.
Trajectory simulate(const ModelSpec& spec, const SystemState& initial, const IntegratorConfig& config,
                    double onset_gain, const SimulateOptions& options = {});

double forced_baseline(const ModelSpec& spec, const SystemState& initial, const IntegratorConfig& config);

/// y_1 = sigma, z_1 = 1e-4 sigma, everything else at rest.
SystemState make_initial(double sigma, int modes);

// Header plus one row per sample, 17 significant digits. Lines in
// `preamble` are written first, each prefixed with "# ".
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory,
                          const std::vector<std::string>& preamble = {});

}  // namespace fishbone

#endif  // FISHBONE_INTEGRATOR_HPP
