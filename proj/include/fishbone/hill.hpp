#ifndef FISHBONE_HILL_HPP
#define FISHBONE_HILL_HPP

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace fishbone {

// The periodic solution of ydd + 3y + (3/2)y^3 = 0 from (eta0, eta1).
class PureVerticalMode {
public:
    double eta0() const { return eta0_; }
    double eta1() const { return eta1_; }
    // Turning-point amplitude A; energy = (3/2)A^2 + (3/8)A^4.
    double amplitude() const { return amplitude_; }
    double energy() const { return energy_; }
    double period() const { return period_; }

    // (ybar(t), ybar'(t)), obtained by integrating from the turning point.
    Eigen::Vector2d state_at(double t) const;

    // Degenerate ybar = 0 with an arbitrary reference period; the Hill
    // coefficient is then constant 7.
    static PureVerticalMode rest(double reference_period);

private:
    friend PureVerticalMode pure_mode(double eta0, double eta1);

    double eta0_ = 0.0;
    double eta1_ = 0.0;
    double amplitude_ = 0.0;
    double energy_ = 0.0;
    double period_ = 0.0;
    double phase_ = 0.0;  // time from the turning point (A, 0) to (eta0, eta1)
};

/// Throws std::invalid_argument for (0, 0) or non-finite data.
PureVerticalMode pure_mode(double eta0, double eta1);

/// Mode started at its turning point with the given energy (> 0).
PureVerticalMode pure_mode_at_energy(double energy);

/// Amplitude A > 0 solving (3/8)A^4 + (3/2)A^2 = energy.
double amplitude_from_energy(double energy);

/// T = 4 * int_0^{pi/2} dphi / sqrt(3 + (3/4) A^2 (1 + sin^2 phi)), 64-point Gauss-Legendre.
double vertical_period(double amplitude);

/// a(t) = 7 + (27/2) ybar(t)^2
inline double hill_coefficient(double ybar) { return 7.0 + 13.5 * ybar * ybar; }
double hill_coefficient(const PureVerticalMode& mode, double t);

// Sufficient stability bound: A <= sqrt(10/21), equivalently E <= 235/294.
inline constexpr double zhukovskii_amplitude_sq = 10.0 / 21.0;
inline constexpr double zhukovskii_energy = 235.0 / 294.0;
bool zhukovskii_sufficient(double amplitude);

enum class Stability { Stable, Unstable, Marginal };
std::string_view to_string(Stability s);

inline constexpr double marginal_band = 1e-9;

struct HillStabilityReport {
    Eigen::Matrix2d monodromy;
    double trace = 0.0;
    double det = 0.0;
    std::array<std::complex<double>, 2> multipliers;
    // beta_j with multiplier = exp(i beta_j T); real when Stable.
    std::array<std::complex<double>, 2> exponents;
    Stability classification = Stability::Marginal;
    bool zhukovskii_sufficient = false;
};

/// Fundamental matrix of xi'' + a(t) xi = 0 after `periods` periods,
/// integrated together with ybar in one adaptive system.
Eigen::Matrix2d monodromy(const PureVerticalMode& mode, int periods = 1);

Stability classify_trace(double trace);
HillStabilityReport classify(const PureVerticalMode& mode);

struct ForcedHillCheck {
    double delta = 0.0;
    int horizon_periods = 0;
    double sup_norm = 0.0;
    double growth_rate = 0.0;
    bool bounded_verdict = true;
};

/// Integrates xi'' + a(t) xi = -delta ybar'(t) from rest over horizon_periods
/// periods. growth_rate is the least-squares slope of log(running max) over
/// the second half of the horizon; bounded iff it stays below
/// ln(10) / (horizon_periods * T).
ForcedHillCheck forced_check(const PureVerticalMode& mode, double delta, int horizon_periods);

struct StabilityChartRow {
    double energy = 0.0;
    double amplitude = 0.0;
    double period = 0.0;
    double trace = 0.0;
    Stability classification = Stability::Marginal;
    bool zhukovskii = false;
};

StabilityChartRow chart_row(double energy);
void write_stability_chart(std::ostream& os, const std::vector<StabilityChartRow>& rows);

}  // namespace fishbone

#endif  // FISHBONE_HILL_HPP
