#ifndef FISHBONE_ODE_HPP
#define FISHBONE_ODE_HPP

#include "fishbone/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fishbone::ode {

// Rhs signature used by every stepper here:
//   void rhs(Scalar t, const Vector<Scalar>& x, Vector<Scalar>& dxdt)

class StepSizeUnderflow : public std::runtime_error {
public:
    StepSizeUnderflow(double t, double h)
        : std::runtime_error("adaptive step size underflow at t=" + std::to_string(t) + " (h=" + std::to_string(h) + ")"),
          t_(t)
    {
    }
    double time() const { return t_; }

private:
    double t_;
};

/// Classical fourth-order Runge-Kutta with preallocated stages.
template <typename Scalar>
class Rk4 {
public:
    explicit Rk4(Eigen::Index n) : k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n) {}

    template <typename Rhs>
    void step(Rhs&& rhs, Scalar t, Vector<Scalar>& x, Scalar h)
    {
        const Scalar half = h / Scalar(2);
        rhs(t, x, k1_);
        tmp_.noalias() = x + half * k1_;
        rhs(t + half, tmp_, k2_);
        tmp_.noalias() = x + half * k2_;
        rhs(t + half, tmp_, k3_);
        tmp_.noalias() = x + h * k3_;
        rhs(t + h, tmp_, k4_);
        x += (h / Scalar(6)) * (k1_ + Scalar(2) * (k2_ + k3_) + k4_);
    }

private:
    Vector<Scalar> k1_, k2_, k3_, k4_, tmp_;
};

/// Dormand-Prince 5(4) embedded pair with a mixed absolute/relative RMS error norm.
template <typename Scalar>
class DormandPrince {
public:
    DormandPrince(Eigen::Index n, Scalar rel_tol, Scalar abs_tol)
        : rel_tol_(rel_tol), abs_tol_(abs_tol), k1_(n), k2_(n), k3_(n), k4_(n), k5_(n), k6_(n), k7_(n), tmp_(n),
          proposal_(n)
    {
    }

    // Computes the fifth-order candidate for a step of size h from (t, x)
    // and returns its scaled error norm; the step is acceptable when <= 1.
    template <typename Rhs>
    Scalar attempt(Rhs&& rhs, Scalar t, const Vector<Scalar>& x, Scalar h)
    {
        using S = Scalar;
        rhs(t, x, k1_);
        tmp_.noalias() = x + h * (S(1) / S(5)) * k1_;
        rhs(t + h / S(5), tmp_, k2_);
        tmp_.noalias() = x + h * (S(3) / S(40) * k1_ + S(9) / S(40) * k2_);
        rhs(t + S(3) * h / S(10), tmp_, k3_);
        tmp_.noalias() = x + h * (S(44) / S(45) * k1_ - S(56) / S(15) * k2_ + S(32) / S(9) * k3_);
        rhs(t + S(4) * h / S(5), tmp_, k4_);
        tmp_.noalias() = x + h * (S(19372) / S(6561) * k1_ - S(25360) / S(2187) * k2_ + S(64448) / S(6561) * k3_ -
                                  S(212) / S(729) * k4_);
        rhs(t + S(8) * h / S(9), tmp_, k5_);
        tmp_.noalias() = x + h * (S(9017) / S(3168) * k1_ - S(355) / S(33) * k2_ + S(46732) / S(5247) * k3_ +
                                  S(49) / S(176) * k4_ - S(5103) / S(18656) * k5_);
        rhs(t + h, tmp_, k6_);
        proposal_.noalias() = x + h * (S(35) / S(384) * k1_ + S(500) / S(1113) * k3_ + S(125) / S(192) * k4_ -
                                       S(2187) / S(6784) * k5_ + S(11) / S(84) * k6_);
        rhs(t + h, proposal_, k7_);
        tmp_.noalias() = h * (S(71) / S(57600) * k1_ - S(71) / S(16695) * k3_ + S(71) / S(1920) * k4_ -
                              S(17253) / S(339200) * k5_ + S(22) / S(525) * k6_ - S(1) / S(40) * k7_);

        S sum(0);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            using std::abs;
            const S scale = abs_tol_ + rel_tol_ * std::max(abs(x[i]), abs(proposal_[i]));
            const S r = tmp_[i] / scale;
            sum += r * r;
        }
        using std::sqrt;
        return sqrt(sum / S(x.size()));
    }

    const Vector<Scalar>& proposal() const { return proposal_; }

    Scalar next_step(Scalar h, Scalar err) const
    {
        using std::pow;
        if (!(err == err))
            return h / Scalar(5);
        const Scalar factor =
            err == Scalar(0) ? Scalar(5) : std::clamp(Scalar(0.9) * pow(err, Scalar(-0.2)), Scalar(0.2), Scalar(5));
        return h * factor;
    }

private:
    Scalar rel_tol_, abs_tol_;
    Vector<Scalar> k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, proposal_;
};

template <typename Scalar>
struct AdaptiveOptions {
    Scalar rel_tol = Scalar(1e-10);
    Scalar abs_tol = Scalar(1e-12);
    Scalar initial_step = Scalar(1e-3);
};

/// Advances x from t to t_end with step control, landing exactly on t_end.
/// The observer is called after every accepted step as observer(t, x) and
/// may return false to stop early. Returns the suggested next step size.
template <typename Scalar, typename Rhs, typename Observer>
Scalar integrate_adaptive(Rhs&& rhs, Scalar& t, Vector<Scalar>& x, Scalar t_end, const AdaptiveOptions<Scalar>& opt,
                          Observer&& observer)
{
    using std::abs;
    DormandPrince<Scalar> dp(x.size(), opt.rel_tol, opt.abs_tol);
    Scalar h = opt.initial_step;
    const Scalar direction = t_end >= t ? Scalar(1) : Scalar(-1);
    h = direction * abs(h);
    while (direction * (t_end - t) > Scalar(0)) {
        bool last = false;
        const Scalar planned = h;
        if (direction * (t + h - t_end) >= Scalar(0)) {
            h = t_end - t;
            last = true;
        }
        const Scalar err = dp.attempt(rhs, t, x, h);
        if (err <= Scalar(1)) {
            t = last ? t_end : t + h;
            x = dp.proposal();
            const Scalar next = dp.next_step(h, err);
            if (!observer(t, x))
                return next;
            if (last)
                return abs(next) > abs(planned) ? next : planned;
            h = next;
        }
        else {
            h = dp.next_step(h, err);
            const Scalar floor = Scalar(64) * std::numeric_limits<Scalar>::epsilon() * std::max(abs(t), Scalar(1));
            if (abs(h) < floor)
                throw StepSizeUnderflow(static_cast<double>(t), static_cast<double>(h));
        }
    }
    return h;
}

template <typename Scalar, typename Rhs>
Scalar integrate_adaptive(Rhs&& rhs, Scalar& t, Vector<Scalar>& x, Scalar t_end, const AdaptiveOptions<Scalar>& opt)
{
    return integrate_adaptive(rhs, t, x, t_end, opt, [](Scalar, const Vector<Scalar>&) { return true; });
}

}  // namespace fishbone::ode

#endif  // FISHBONE_ODE_HPP
