#ifndef FISHBONE_MODEL_HPP
#define FISHBONE_MODEL_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <string_view>

namespace fishbone {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

// Which right-hand side is integrated.
//   Isolated       - structural system only
//   CrossDeriv     - adds delta*zdot to the vertical and delta*ydot to the torsional equation
//   CrossDerivZero - adds delta*(zdot+z) and 3*delta*(ydot+y)
enum class Variant { Isolated, CrossDeriv, CrossDerivZero };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

class ModelSpec {
public:
    // Throws std::invalid_argument on m < 1, delta < 0, or an aerodynamic
    // variant with m != 1. Isolated forces delta to zero.
    ModelSpec(Variant variant, int modes, double delta);

    static ModelSpec isolated(int modes = 1) { return {Variant::Isolated, modes, 0.0}; }
    static ModelSpec cross_deriv(double delta) { return {Variant::CrossDeriv, 1, delta}; }
    static ModelSpec cross_deriv_zero(double delta) { return {Variant::CrossDerivZero, 1, delta}; }

    Variant variant() const { return variant_; }
    int modes() const { return modes_; }
    double delta() const { return delta_; }

    bool operator==(const ModelSpec&) const = default;

private:
    Variant variant_;
    int modes_;
    double delta_;
};

// Generalized coordinates of the m-mode truncation. z is the scaled
// torsional coordinate (half-width times angle).
struct SystemState {
    double t = 0.0;
    Eigen::VectorXd y, z, ydot, zdot;

    static SystemState zero(int modes);

    int modes() const { return static_cast<int>(y.size()); }
    bool well_formed() const;
    bool finite() const;

    // Layout [y, z, ydot, zdot], length 4m.
    Eigen::VectorXd flat() const;
    static SystemState from_flat(double t, const Eigen::Ref<const Eigen::VectorXd>& x);
};

struct EnergyBreakdown {
    double kinetic_y = 0.0;
    double kinetic_z = 0.0;
    double quadratic = 0.0;
    double coupling = 0.0;
    double quartic = 0.0;
    double aero_cross = 0.0;
    double total = 0.0;
};

/// Accelerations (ydd, zdd) of the single-mode system. Coefficients are the
/// exact projections of the cubic nonlinearity onto sin(x).
template <typename Scalar>
Vector2<Scalar> rhs_one_mode(const ModelSpec& spec, const Scalar& y, const Scalar& z, const Scalar& ydot,
                             const Scalar& zdot)
{
    const Scalar y2 = y * y;
    const Scalar z2 = z * z;
    Scalar ydd = -(Scalar(3) * y + Scalar(3) / Scalar(2) * y2 * y + Scalar(9) / Scalar(2) * y * z2);
    Scalar zdd = -(Scalar(7) * z + Scalar(9) / Scalar(2) * z2 * z + Scalar(27) / Scalar(2) * z * y2);
    const Scalar delta(spec.delta());
    switch (spec.variant()) {
    case Variant::Isolated:
        break;
    case Variant::CrossDeriv:
        ydd -= delta * zdot;
        zdd -= delta * ydot;
        break;
    case Variant::CrossDerivZero:
        ydd -= delta * (zdot + z);
        zdd -= Scalar(3) * delta * (ydot + y);
        break;
    }
    return {ydd, zdd};
}

Eigen::Vector2d rhs_one_mode(const ModelSpec& spec, const SystemState& state);

// Galerkin projection of the cubic terms onto sin(jx), j = 1..m, using the
// trapezoid sum on x_k = k*pi/N, k = 1..N-1, N = 4m+2. The integrands are
// cosine polynomials of degree <= 4m < 2N, for which the rule is exact.
class GalerkinProjector {
public:
    explicit GalerkinProjector(int modes);

    int modes() const { return modes_; }
    int grid_intervals() const { return intervals_; }

    // Writes accelerations into ydd, zdd (each length m).
    void accelerations(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& z,
                       Eigen::Ref<Eigen::VectorXd> ydd, Eigen::Ref<Eigen::VectorXd> zdd) const;

private:
    int modes_;
    int intervals_;
    Eigen::MatrixXd sines_;  // (N-1) x m, sin(j x_k)
    Eigen::VectorXd bending_;  // j^4
    Eigen::VectorXd shear_;    // j^2
};

struct ModeAccelerations {
    Eigen::VectorXd ydd;
    Eigen::VectorXd zdd;
};

// Requires an Isolated spec whose mode count matches the state.
ModeAccelerations rhs_m_mode(const ModelSpec& spec, const SystemState& state);

// Single-mode energy functional; includes delta*y*z only for CrossDerivZero.
// Throws std::invalid_argument when m > 1.
EnergyBreakdown energy(const ModelSpec& spec, const SystemState& state);

/// Conserved energy of the pure vertical oscillation started from (eta0, eta1).
inline double vertical_mode_energy(double eta0, double eta1)
{
    const double e2 = eta0 * eta0;
    return 0.5 * eta1 * eta1 + 1.5 * e2 + 0.375 * e2 * e2;
}

}  // namespace fishbone

#endif  // FISHBONE_MODEL_HPP
