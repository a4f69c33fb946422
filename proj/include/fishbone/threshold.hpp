#ifndef FISHBONE_THRESHOLD_HPP
#define FISHBONE_THRESHOLD_HPP

#include "fishbone/integrator.hpp"
#include "fishbone/model.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fishbone {

class InvalidBracket : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConfigFingerprint {
    ModelSpec spec = ModelSpec::isolated();
    IntegratorConfig integrator;
    double onset_gain = 100.0;
};

struct ThresholdProbe {
    double sigma = 0.0;
    std::optional<OnsetEvent> onset;
};

struct ThresholdResult {
    double sigma_lo = 0.0;  // no onset
    double sigma_hi = 0.0;  // onset
    double sigma_star = 0.0;
    double energy_star = 0.0;
    OnsetEvent onset_at_hi;
    ConfigFingerprint fingerprint;
    std::vector<ThresholdProbe> probes;  // in evaluation order
    // NonMonotone notes: a stable probe found above an unstable one.
    std::vector<std::string> anomalies;
};

/// Onset (or not) of the full simulation started from make_initial(sigma).
std::optional<OnsetEvent> probe_onset(const ModelSpec& spec, double sigma, const IntegratorConfig& config,
                                      double onset_gain);

/// Bisection on sigma until sigma_hi - sigma_lo <= tol. Both endpoints are
/// simulated first; throws InvalidBracket unless lo is stable and hi is not.
ThresholdResult find_threshold(const ModelSpec& spec, std::pair<double, double> bracket, double tol,
                               const IntegratorConfig& config, double onset_gain);

void write_threshold_report(std::ostream& os, const ThresholdResult& result);

struct SweepRow {
    double delta = 0.0;
    double sigma = 0.0;
    std::optional<double> t_onset;
    double max_torsion = 0.0;
    double energy_initial = 0.0;
    double energy_final = 0.0;
    std::optional<Termination> terminated_early;
};

/// One simulation per (delta, sigma), delta-major, rows in input order.
/// Probes run on up to `jobs` threads.
std::vector<SweepRow> sweep(Variant variant, const std::vector<double>& deltas, const std::vector<double>& sigmas,
                            const IntegratorConfig& config, double onset_gain, int jobs = 1);

SweepRow sweep_row(const ModelSpec& spec, double sigma, const IntegratorConfig& config, double onset_gain);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace fishbone

#endif  // FISHBONE_THRESHOLD_HPP
