#include "fishbone/hill.hpp"

#include "fishbone/ode.hpp"
#include "fishbone/quadrature.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace fishbone {

namespace {

constexpr double kRelTol = 1e-12;
constexpr double kAbsTol = 1e-14;
constexpr double kOverflowGuard = 1e150;

const GaussLegendreRule& period_rule()
{
    static const GaussLegendreRule rule = gauss_legendre(64);
    return rule;
}

// dt/dphi along the orbit after the substitution y = A sin(phi).
double time_density(double amplitude, double phi)
{
    const double s = std::sin(phi);
    return 1.0 / std::sqrt(3.0 + 0.75 * amplitude * amplitude * (1.0 + s * s));
}

ode::AdaptiveOptions<double> tight()
{
    return {kRelTol, kAbsTol, 1e-3};
}

void duffing(const Eigen::VectorXd& x, Eigen::VectorXd& dx)
{
    dx[0] = x[1];
    dx[1] = -(3.0 * x[0] + 1.5 * x[0] * x[0] * x[0]);
}

}  // namespace

double amplitude_from_energy(double energy)
{
    if (!(energy > 0.0) || !std::isfinite(energy))
        throw std::invalid_argument("energy must be positive and finite");
    // Positive root u = A^2 of (3/8)u^2 + (3/2)u - E = 0, cancellation-free form.
    const double u = 2.0 * energy / (1.5 + std::sqrt(2.25 + 1.5 * energy));
    return std::sqrt(u);
}

double vertical_period(double amplitude)
{
    return 4.0 * integrate_gauss_legendre([amplitude](double phi) { return time_density(amplitude, phi); }, 0.0,
                                          std::numbers::pi / 2, period_rule());
}

PureVerticalMode pure_mode(double eta0, double eta1)
{
    if (!std::isfinite(eta0) || !std::isfinite(eta1))
        throw std::invalid_argument("initial data must be finite");
    if (eta0 == 0.0 && eta1 == 0.0)
        throw std::invalid_argument("the rest state has no period");

    PureVerticalMode mode;
    mode.eta0_ = eta0;
    mode.eta1_ = eta1;
    mode.energy_ = vertical_mode_energy(eta0, eta1);
    mode.amplitude_ = eta1 == 0.0 ? std::abs(eta0) : amplitude_from_energy(mode.energy_);
    mode.period_ = vertical_period(mode.amplitude_);

    // Time to fall from (A, 0) to height eta0 with negative velocity.
    const double phi0 = std::asin(std::clamp(eta0 / mode.amplitude_, -1.0, 1.0));
    const double A = mode.amplitude_;
    const double fall = integrate_gauss_legendre([A](double phi) { return time_density(A, phi); }, phi0,
                                                 std::numbers::pi / 2, period_rule());
    mode.phase_ = eta1 > 0.0 ? mode.period_ - fall : fall;
    return mode;
}

PureVerticalMode pure_mode_at_energy(double energy)
{
    return pure_mode(amplitude_from_energy(energy), 0.0);
}

PureVerticalMode PureVerticalMode::rest(double reference_period)
{
    if (!(reference_period > 0.0))
        throw std::invalid_argument("reference period must be positive");
    PureVerticalMode mode;
    mode.period_ = reference_period;
    return mode;
}

Eigen::Vector2d PureVerticalMode::state_at(double t) const
{
    if (amplitude_ == 0.0)
        return Eigen::Vector2d::Zero();
    // Fold onto [0, T/4] using Y(s + T/2) = -Y(s) and Y(T/2 - s) = -Y(s).
    const double T = period_;
    double s = std::fmod(t + phase_, T);
    if (s < 0.0)
        s += T;
    double sign_y = 1.0;
    double sign_v = 1.0;
    if (s >= T / 2) {
        s -= T / 2;
        sign_y = -1.0;
        sign_v = -1.0;
    }
    if (s > T / 4) {
        s = T / 2 - s;
        sign_y = -sign_y;
    }
    Eigen::VectorXd x(2);
    x << amplitude_, 0.0;
    double tau = 0.0;
    if (s > 0.0)
        ode::integrate_adaptive([](double, const Eigen::VectorXd& u, Eigen::VectorXd& du) { duffing(u, du); }, tau, x,
                                s, tight());
    return {sign_y * x[0], sign_v * x[1]};
}

double hill_coefficient(const PureVerticalMode& mode, double t)
{
    return hill_coefficient(mode.state_at(t)[0]);
}

bool zhukovskii_sufficient(double amplitude)
{
    return amplitude * amplitude <= zhukovskii_amplitude_sq * (1.0 + 1e-14);
}

std::string_view to_string(Stability s)
{
    switch (s) {
    case Stability::Stable:
        return "stable";
    case Stability::Unstable:
        return "unstable";
    case Stability::Marginal:
        return "marginal";
    }
    return "unknown";
}

Eigen::Matrix2d monodromy(const PureVerticalMode& mode, int periods)
{
    if (periods < 1)
        throw std::invalid_argument("period count must be >= 1");
    Eigen::VectorXd x(6);
    const Eigen::Vector2d start = mode.state_at(0.0);
    x << start[0], start[1], 1.0, 0.0, 0.0, 1.0;
    auto rhs = [](double, const Eigen::VectorXd& u, Eigen::VectorXd& du) {
        duffing(u, du);
        const double a = hill_coefficient(u[0]);
        du[2] = u[3];
        du[3] = -a * u[2];
        du[4] = u[5];
        du[5] = -a * u[4];
    };
    double t = 0.0;
    ode::integrate_adaptive(rhs, t, x, periods * mode.period(), tight());
    Eigen::Matrix2d m;
    m << x[2], x[4], x[3], x[5];
    return m;
}

Stability classify_trace(double trace)
{
    const double r = std::abs(trace);
    if (r < 2.0 - marginal_band)
        return Stability::Stable;
    if (r > 2.0 + marginal_band)
        return Stability::Unstable;
    return Stability::Marginal;
}

HillStabilityReport classify(const PureVerticalMode& mode)
{
    HillStabilityReport report;
    report.monodromy = monodromy(mode, 1);
    report.trace = report.monodromy.trace();
    report.det = report.monodromy.determinant();
    const Eigen::EigenSolver<Eigen::Matrix2d> solver(report.monodromy, false);
    const std::complex<double> i(0.0, 1.0);
    for (int j = 0; j < 2; ++j) {
        report.multipliers[j] = solver.eigenvalues()[j];
        report.exponents[j] = -i * std::log(report.multipliers[j]) / mode.period();
    }
    report.classification = classify_trace(report.trace);
    report.zhukovskii_sufficient = mode.amplitude() == 0.0 || zhukovskii_sufficient(mode.amplitude());
    return report;
}

ForcedHillCheck forced_check(const PureVerticalMode& mode, double delta, int horizon_periods)
{
    if (!(delta >= 0.0))
        throw std::invalid_argument("delta must be >= 0");
    if (horizon_periods < 10)
        throw std::invalid_argument("horizon must span at least 10 periods");

    ForcedHillCheck check;
    check.delta = delta;
    check.horizon_periods = horizon_periods;
    if (delta == 0.0 || mode.amplitude() == 0.0)
        return check;

    const double T = mode.period();
    const Eigen::Vector2d start = mode.state_at(0.0);
    auto rhs = [delta](double, const Eigen::VectorXd& u, Eigen::VectorXd& du) {
        duffing(u, du);
        du[2] = u[3];
        du[3] = -hill_coefficient(u[0]) * u[2] - delta * u[1];
    };

    Eigen::VectorXd x(4);
    x << start[0], start[1], 0.0, 0.0;
    std::vector<double> running_max;
    running_max.reserve(horizon_periods);
    double sup = 0.0;
    double h = 1e-3;
    for (int k = 0; k < horizon_periods && sup < kOverflowGuard; ++k) {
        // ybar restarts from its exact initial state each period.
        x[0] = start[0];
        x[1] = start[1];
        double t = 0.0;
        auto opt = tight();
        opt.initial_step = h;
        h = ode::integrate_adaptive(rhs, t, x, T, opt, [&sup](double, const Eigen::VectorXd& u) {
            sup = std::max(sup, std::abs(u[2]));
            return sup < kOverflowGuard;
        });
        running_max.push_back(sup);
    }
    check.sup_norm = sup;

    // Least-squares slope of log(running max) against time on the second half.
    const std::size_t n = running_max.size();
    const std::size_t first = n / 2;
    double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
    int count = 0;
    for (std::size_t k = first; k < n; ++k) {
        if (!(running_max[k] > 0.0))
            continue;
        const double tk = static_cast<double>(k + 1) * T;
        const double lk = std::log(running_max[k]);
        st += tk;
        sl += lk;
        stt += tk * tk;
        stl += tk * lk;
        ++count;
    }
    if (count >= 2) {
        const double denom = count * stt - st * st;
        check.growth_rate = denom > 0.0 ? (count * stl - st * sl) / denom : 0.0;
    }
    if (n < static_cast<std::size_t>(horizon_periods))
        check.bounded_verdict = false;
    else
        check.bounded_verdict = check.growth_rate < std::log(10.0) / (horizon_periods * T);
    return check;
}

StabilityChartRow chart_row(double energy)
{
    const PureVerticalMode mode = pure_mode_at_energy(energy);
    const HillStabilityReport report = classify(mode);
    return {energy, mode.amplitude(), mode.period(), report.trace, report.classification,
            report.zhukovskii_sufficient};
}

void write_stability_chart(std::ostream& os, const std::vector<StabilityChartRow>& rows)
{
    os << "E,amplitude,period,trace,classification,zhukovskii\n";
    for (const auto& r : rows)
        os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{},{}\n", r.energy, r.amplitude, r.period, r.trace,
                          to_string(r.classification), r.zhukovskii ? "true" : "false");
}

}  // namespace fishbone
