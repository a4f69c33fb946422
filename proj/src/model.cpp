#include "fishbone/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fishbone {

std::string_view to_string(Variant v)
{
    switch (v) {
    case Variant::Isolated:
        return "isolated";
    case Variant::CrossDeriv:
        return "cross";
    case Variant::CrossDerivZero:
        return "crosszero";
    }
    return "unknown";
}

Variant parse_variant(std::string_view name)
{
    if (name == "isolated")
        return Variant::Isolated;
    if (name == "cross")
        return Variant::CrossDeriv;
    if (name == "crosszero")
        return Variant::CrossDerivZero;
    throw std::invalid_argument("unknown variant '" + std::string(name) + "' (expected isolated, cross, crosszero)");
}

ModelSpec::ModelSpec(Variant variant, int modes, double delta) : variant_(variant), modes_(modes), delta_(delta)
{
    if (modes < 1)
        throw std::invalid_argument("mode count must be >= 1");
    if (!(delta >= 0.0) || !std::isfinite(delta))
        throw std::invalid_argument("aerodynamic coefficient must be finite and >= 0");
    if (variant != Variant::Isolated && modes != 1)
        throw std::invalid_argument("aerodynamic variants are only defined for a single mode");
    if (variant == Variant::Isolated)
        delta_ = 0.0;
}

SystemState SystemState::zero(int modes)
{
    SystemState s;
    s.y = Eigen::VectorXd::Zero(modes);
    s.z = Eigen::VectorXd::Zero(modes);
    s.ydot = Eigen::VectorXd::Zero(modes);
    s.zdot = Eigen::VectorXd::Zero(modes);
    return s;
}

bool SystemState::well_formed() const
{
    const auto m = y.size();
    return m >= 1 && z.size() == m && ydot.size() == m && zdot.size() == m;
}

bool SystemState::finite() const
{
    return std::isfinite(t) && y.allFinite() && z.allFinite() && ydot.allFinite() && zdot.allFinite();
}

Eigen::VectorXd SystemState::flat() const
{
    const auto m = y.size();
    Eigen::VectorXd x(4 * m);
    x << y, z, ydot, zdot;
    return x;
}

SystemState SystemState::from_flat(double t, const Eigen::Ref<const Eigen::VectorXd>& x)
{
    if (x.size() % 4 != 0 || x.size() == 0)
        throw std::invalid_argument("flat state length must be a positive multiple of 4");
    const auto m = x.size() / 4;
    SystemState s;
    s.t = t;
    s.y = x.segment(0, m);
    s.z = x.segment(m, m);
    s.ydot = x.segment(2 * m, m);
    s.zdot = x.segment(3 * m, m);
    return s;
}

Eigen::Vector2d rhs_one_mode(const ModelSpec& spec, const SystemState& state)
{
    if (spec.modes() != 1 || state.modes() != 1)
        throw std::invalid_argument("rhs_one_mode requires m = 1");
    return rhs_one_mode<double>(spec, state.y[0], state.z[0], state.ydot[0], state.zdot[0]);
}

GalerkinProjector::GalerkinProjector(int modes) : modes_(modes), intervals_(4 * modes + 2)
{
    if (modes < 1)
        throw std::invalid_argument("mode count must be >= 1");
    const int nodes = intervals_ - 1;
    sines_.resize(nodes, modes);
    for (int k = 0; k < nodes; ++k) {
        const double x = (k + 1) * std::numbers::pi / intervals_;
        for (int j = 0; j < modes; ++j)
            sines_(k, j) = std::sin((j + 1) * x);
    }
    bending_.resize(modes);
    shear_.resize(modes);
    for (int j = 0; j < modes; ++j) {
        const double n = j + 1;
        bending_[j] = n * n * n * n;
        shear_[j] = n * n;
    }
}

void GalerkinProjector::accelerations(const Eigen::Ref<const Eigen::VectorXd>& y,
                                      const Eigen::Ref<const Eigen::VectorXd>& z, Eigen::Ref<Eigen::VectorXd> ydd,
                                      Eigen::Ref<Eigen::VectorXd> zdd) const
{
    const Eigen::ArrayXd yx = sines_ * y;
    const Eigen::ArrayXd zx = sines_ * z;
    const Eigen::ArrayXd y2 = yx.square();
    const Eigen::ArrayXd z2 = zx.square();
    const Eigen::VectorXd gy = (yx * (1.0 + y2 + 3.0 * z2)).matrix();
    const Eigen::VectorXd gz = (zx * (1.0 + 3.0 * y2 + z2)).matrix();
    // (4/pi) * (pi/N) * sum  and  (12/pi) * (pi/N) * sum
    const double n = intervals_;
    ydd.noalias() = -(bending_.cwiseProduct(y) + (4.0 / n) * (sines_.transpose() * gy));
    zdd.noalias() = -(shear_.cwiseProduct(z) + (12.0 / n) * (sines_.transpose() * gz));
}

ModeAccelerations rhs_m_mode(const ModelSpec& spec, const SystemState& state)
{
    if (spec.variant() != Variant::Isolated)
        throw std::invalid_argument("the m-mode system is only defined for the isolated variant");
    if (!state.well_formed() || state.modes() != spec.modes())
        throw std::invalid_argument("state does not match the model's mode count");
    const GalerkinProjector projector(spec.modes());
    ModeAccelerations out{Eigen::VectorXd(spec.modes()), Eigen::VectorXd(spec.modes())};
    projector.accelerations(state.y, state.z, out.ydd, out.zdd);
    return out;
}

EnergyBreakdown energy(const ModelSpec& spec, const SystemState& state)
{
    if (spec.modes() != 1 || state.modes() != 1)
        throw std::invalid_argument("the energy functional is only defined for a single mode");
    const double y = state.y[0];
    const double z = state.z[0];
    const double yd = state.ydot[0];
    const double zd = state.zdot[0];
    const double y2 = y * y;
    const double z2 = z * z;

    EnergyBreakdown e;
    e.kinetic_y = 0.5 * yd * yd;
    e.kinetic_z = zd * zd / 6.0;
    e.quadratic = 1.5 * y2 + 7.0 / 6.0 * z2;
    e.coupling = 2.25 * y2 * z2;
    e.quartic = 0.375 * (y2 * y2 + z2 * z2);
    e.aero_cross = spec.variant() == Variant::CrossDerivZero ? spec.delta() * y * z : 0.0;
    e.total = e.kinetic_y + e.kinetic_z + e.quadratic + e.coupling + e.quartic + e.aero_cross;
    return e;
}

}  // namespace fishbone
