#include "fishbone/integrator.hpp"

#include "fishbone/hill.hpp"
#include "fishbone/ode.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <memory>
#include <ostream>

namespace fishbone {

std::string_view to_string(Scheme s)
{
    return s == Scheme::FixedRK4 ? "rk4" : "adaptive";
}

Scheme parse_scheme(std::string_view name)
{
    if (name == "rk4")
        return Scheme::FixedRK4;
    if (name == "adaptive")
        return Scheme::AdaptiveEmbedded;
    throw std::invalid_argument("unknown scheme '" + std::string(name) + "' (expected rk4, adaptive)");
}

void IntegratorConfig::validate() const
{
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(h))
        throw std::invalid_argument("step h must be positive");
    if (!positive(rel_tol) || !positive(abs_tol))
        throw std::invalid_argument("tolerances must be positive");
    if (!positive(t_end))
        throw std::invalid_argument("t_end must be positive");
    if (!positive(sample_every))
        throw std::invalid_argument("sample_every must be positive");
    if (h > sample_every)
        throw std::invalid_argument("step h must not exceed sample_every");
}

namespace {

// First-order form of the selected model on the flat [y, z, ydot, zdot] layout.
class Dynamics {
public:
    explicit Dynamics(const ModelSpec& spec) : spec_(spec), m_(spec.modes())
    {
        if (m_ > 1)
            projector_ = std::make_unique<GalerkinProjector>(m_);
    }

    void operator()(double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) const
    {
        const auto m = m_;
        dx.segment(0, 2 * m) = x.segment(2 * m, 2 * m);
        if (m == 1) {
            const Eigen::Vector2d acc = rhs_one_mode<double>(spec_, x[0], x[1], x[2], x[3]);
            dx[2] = acc[0];
            dx[3] = acc[1];
        }
        else {
            projector_->accelerations(x.segment(0, m), x.segment(m, m), dx.segment(2 * m, m), dx.segment(3 * m, m));
        }
    }

private:
    ModelSpec spec_;
    Eigen::Index m_;
    std::unique_ptr<GalerkinProjector> projector_;
};

std::optional<std::string> blow_up_reason(const Eigen::VectorXd& x)
{
    if (!x.allFinite())
        return std::string("non-finite state");
    if (x.cwiseAbs().maxCoeff() > blow_up_limit)
        return fmt::format("state magnitude exceeded {:g}", blow_up_limit);
    return std::nullopt;
}

void check_spec(const ModelSpec& spec, const SystemState& state)
{
    if (!state.well_formed() || state.modes() != spec.modes())
        throw std::invalid_argument("state does not match the model's mode count");
    if (spec.variant() != Variant::Isolated && spec.modes() != 1)
        throw std::invalid_argument("aerodynamic variants are only defined for a single mode");
}

Sample make_sample(const ModelSpec& spec, double t, const Eigen::VectorXd& x)
{
    Sample s{SystemState::from_flat(t, x), std::nullopt};
    if (spec.modes() == 1)
        s.energy = energy(spec, s.state);
    return s;
}

// Tracks onset, peak torsion and sampling while stepping.
class Recorder {
public:
    Recorder(const ModelSpec& spec, const SystemState& initial, double level, const SimulateOptions& options,
             Trajectory& out)
        : spec_(spec), options_(options), out_(out), seed_(std::abs(initial.z[0])), level_(level)
    {
        out_.max_torsion = seed_;
    }

    // Returns false when integration should stop.
    bool after_step(double t, const Eigen::VectorXd& x)
    {
        const auto m = spec_.modes();
        const double torsion = std::abs(x[m]);
        out_.max_torsion = std::max(out_.max_torsion, torsion);
        if (!out_.onset && seed_ > 0.0 && torsion >= level_) {
            out_.onset = OnsetEvent{t, torsion / seed_};
            if (options_.stop_at_onset)
                return false;
        }
        return true;
    }

    void record(double t, const Eigen::VectorXd& x)
    {
        if (options_.record_samples)
            out_.samples.push_back(make_sample(spec_, t, x));
    }

    void record_last(double t, const Eigen::VectorXd& x)
    {
        if (!options_.record_samples)
            out_.samples.push_back(make_sample(spec_, t, x));
    }

private:
    const ModelSpec& spec_;
    const SimulateOptions& options_;
    Trajectory& out_;
    double seed_;
    double level_;
};

void simulate_fixed(const Dynamics& dynamics, Eigen::VectorXd& x, const IntegratorConfig& config, Recorder& rec,
                    Trajectory& out)
{
    ode::Rk4<double> rk4(x.size());
    const double h = config.h;
    const auto n_steps = static_cast<long long>(std::ceil(config.t_end / h - 1e-9));
    const auto stride = std::max<long long>(1, std::llround(config.sample_every / h));
    Eigen::VectorXd before(x.size());
    double t = 0.0;
    for (long long i = 1; i <= n_steps; ++i) {
        const double t_prev = static_cast<double>(i - 1) * h;
        const bool last = i == n_steps;
        const double dt = last ? config.t_end - t_prev : h;
        before = x;
        rk4.step(dynamics, t_prev, x, dt);
        t = last ? config.t_end : static_cast<double>(i) * h;
        if (auto reason = blow_up_reason(x)) {
            out.terminated_early = Termination{t, *reason};
            rec.record_last(t_prev, before);
            return;
        }
        const bool keep_going = rec.after_step(t, x);
        if (i % stride == 0 || last || !keep_going)
            rec.record(t, x);
        if (!keep_going) {
            rec.record_last(t, x);
            return;
        }
    }
    rec.record_last(t, x);
}

void simulate_adaptive(const Dynamics& dynamics, Eigen::VectorXd& x, const IntegratorConfig& config, Recorder& rec,
                       Trajectory& out)
{
    const ode::AdaptiveOptions<double> base{config.rel_tol, config.abs_tol, config.h};
    const auto n_samples = static_cast<long long>(std::ceil(config.t_end / config.sample_every - 1e-9));
    double t = 0.0;
    double h = config.h;
    Eigen::VectorXd last_good = x;
    double t_last_good = 0.0;
    for (long long k = 1; k <= n_samples; ++k) {
        const double target = k == n_samples ? config.t_end : static_cast<double>(k) * config.sample_every;
        bool stop = false;
        std::optional<std::string> blow;
        auto observer = [&](double ts, const Eigen::VectorXd& xs) {
            if ((blow = blow_up_reason(xs))) {
                stop = true;
                return false;
            }
            last_good = xs;
            t_last_good = ts;
            if (!rec.after_step(ts, xs)) {
                stop = true;
                return false;
            }
            return true;
        };
        try {
            auto opt = base;
            opt.initial_step = h;
            h = ode::integrate_adaptive(dynamics, t, x, target, opt, observer);
        }
        catch (const ode::StepSizeUnderflow& e) {
            out.terminated_early = Termination{e.time(), "step-size collapse"};
            rec.record_last(t_last_good, last_good);
            return;
        }
        if (blow) {
            out.terminated_early = Termination{t, *blow};
            rec.record_last(t_last_good, last_good);
            return;
        }
        if (stop) {
            rec.record(t, x);
            rec.record_last(t, x);
            return;
        }
        rec.record(t, x);
    }
    rec.record_last(t, x);
}

}  // namespace

SystemState step(const ModelSpec& spec, const SystemState& state, const IntegratorConfig& config)
{
    check_spec(spec, state);
    if (!state.finite())
        throw BlowUp(state.t, "non-finite state");
    const Dynamics dynamics(spec);
    Eigen::VectorXd x = state.flat();
    double t = state.t;
    if (config.scheme == Scheme::FixedRK4) {
        ode::Rk4<double> rk4(x.size());
        rk4.step(dynamics, t, x, config.h);
        t += config.h;
    }
    else {
        ode::DormandPrince<double> dp(x.size(), config.rel_tol, config.abs_tol);
        double h = config.h;
        for (;;) {
            const double err = dp.attempt(dynamics, t, x, h);
            if (err <= 1.0) {
                x = dp.proposal();
                t += h;
                break;
            }
            h = dp.next_step(h, err);
            if (std::abs(h) < 64 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0))
                throw BlowUp(t, "step-size collapse");
        }
    }
    if (auto reason = blow_up_reason(x))
        throw BlowUp(t, *reason);
    return SystemState::from_flat(t, x);
}

Trajectory simulate(const ModelSpec& spec, const SystemState& initial, const IntegratorConfig& config,
                    double onset_gain, const SimulateOptions& options)
{
    check_spec(spec, initial);
    config.validate();
    if (!(onset_gain > 1.0))
        throw std::invalid_argument("onset gain must exceed 1");

    Trajectory out{spec, {}, std::nullopt, std::nullopt, 0.0, 0.0, 0.0};
    if (initial.finite())
        out.forced_baseline = forced_baseline(spec, initial, config);
    out.onset_level = onset_gain * std::abs(initial.z[0]) + out.forced_baseline;
    Eigen::VectorXd x = initial.flat();
    Recorder rec(spec, initial, out.onset_level, options, out);
    rec.record(0.0, x);
    if (auto reason = blow_up_reason(x)) {
        out.terminated_early = Termination{0.0, *reason};
        out.samples.clear();
        return out;
    }

    const Dynamics dynamics(spec);
    if (config.scheme == Scheme::FixedRK4)
        simulate_fixed(dynamics, x, config, rec, out);
    else
        simulate_adaptive(dynamics, x, config, rec, out);
    return out;
}

double forced_baseline(const ModelSpec& spec, const SystemState& initial, const IntegratorConfig& config)
{
    check_spec(spec, initial);
    if (spec.delta() == 0.0)
        return 0.0;
    const double e = vertical_mode_energy(initial.y[0], initial.ydot[0]);
    if (!(e > 0.0))
        return 0.0;
    SystemState unseeded = initial;
    unseeded.z.setZero();
    unseeded.zdot.setZero();
    IntegratorConfig window = config;
    window.t_end = vertical_period(amplitude_from_energy(e));
    window.sample_every = std::max(window.sample_every, window.h);
    const SimulateOptions quiet{false, false};
    Trajectory probe{spec, {}, std::nullopt, std::nullopt, 0.0, 0.0, 0.0};
    Eigen::VectorXd x = unseeded.flat();
    Recorder rec(spec, unseeded, std::numeric_limits<double>::infinity(), quiet, probe);
    const Dynamics dynamics(spec);
    if (config.scheme == Scheme::FixedRK4)
        simulate_fixed(dynamics, x, window, rec, probe);
    else
        simulate_adaptive(dynamics, x, window, rec, probe);
    return probe.max_torsion;
}

SystemState make_initial(double sigma, int modes)
{
    if (modes < 1)
        throw std::invalid_argument("mode count must be >= 1");
    SystemState s = SystemState::zero(modes);
    s.y[0] = sigma;
    s.z[0] = sigma * 1e-4;
    return s;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory, const std::vector<std::string>& preamble)
{
    for (const auto& line : preamble)
        os << "# " << line << '\n';
    const int m = trajectory.spec.modes();
    os << 't';
    for (int j = 1; j <= m; ++j)
        os << ",y" << j;
    for (int j = 1; j <= m; ++j)
        os << ",z" << j;
    os << ",E_total,E_kin_y,E_kin_z,E_quad,E_coupling,E_quartic,E_aero\n";

    fmt::memory_buffer buf;
    for (const auto& s : trajectory.samples) {
        buf.clear();
        fmt::format_to(std::back_inserter(buf), "{:.17g}", s.state.t);
        for (int j = 0; j < m; ++j)
            fmt::format_to(std::back_inserter(buf), ",{:.17g}", s.state.y[j]);
        for (int j = 0; j < m; ++j)
            fmt::format_to(std::back_inserter(buf), ",{:.17g}", s.state.z[j]);
        if (s.energy) {
            const auto& e = *s.energy;
            fmt::format_to(std::back_inserter(buf), ",{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}", e.total,
                           e.kinetic_y, e.kinetic_z, e.quadratic, e.coupling, e.quartic, e.aero_cross);
        }
        else {
            fmt::format_to(std::back_inserter(buf), ",,,,,,,");
        }
        buf.push_back('\n');
        os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
}

}  // namespace fishbone
