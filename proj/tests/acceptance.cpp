// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "fishbone/hill.hpp"
#include "fishbone/integrator.hpp"
#include "fishbone/model.hpp"
#include "fishbone/threshold.hpp"

#include "oracles.hpp"
#include "symmetry.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>

using namespace fishbone;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

IntegratorConfig reference_config()
{
    IntegratorConfig c;  // RK4, h = 1e-3
    c.t_end = 200.0;
    return c;
}

Verdict threshold_reproduction()
{
    const auto r = find_threshold(ModelSpec::isolated(), {1.40, 1.60}, 1e-3, reference_config(), 100.0);
    const bool ok = r.sigma_star >= 1.45 && r.sigma_star <= 1.47 && r.energy_star >= 4.7 && r.energy_star <= 5.1;
    return {ok, fmt::format("sigma_star={:.5f} in [{:.5f}, {:.5f}], energy_star={:.4f}", r.sigma_star, r.sigma_lo,
                            r.sigma_hi, r.energy_star)};
}

Verdict onset_time()
{
    const auto at147 = probe_onset(ModelSpec::isolated(), 1.47, reference_config(), 100.0);
    const auto at145 = probe_onset(ModelSpec::isolated(), 1.45, reference_config(), 100.0);
    const bool ok = at147 && at147->t_onset >= 40.0 && at147->t_onset <= 60.0 && !at145;
    return {ok, fmt::format("t_onset(1.47)={}, onset(1.45)={}",
                            at147 ? fmt::format("{:.3f}", at147->t_onset) : "none",
                            at145 ? fmt::format("{:.3f}", at145->t_onset) : "none")};
}

Verdict sufficient_bound()
{
    const double e = energy(ModelSpec::isolated(), [] {
                         SystemState s = SystemState::zero(1);
                         s.y[0] = std::sqrt(10.0 / 21.0);
                         return s;
                     }())
                         .total;
    const double err = std::abs(e - 235.0 / 294.0);
    int points = 0, good = 0;
    for (int k = 1; 0.05 * k <= 0.799 + 1e-12; ++k) {
        const auto r = classify(pure_mode_at_energy(0.05 * k));
        ++points;
        good += r.classification == Stability::Stable && r.zhukovskii_sufficient;
    }
    return {err <= 1e-12 && good == points,
            fmt::format("|E(sqrt(10/21),0) - 235/294|={:.2e}, stable+sufficient on {}/{} grid points", err, good,
                        points)};
}

Verdict delta_independence()
{
    const std::array<double, 3> deltas{0.0, 0.01, 0.05};
    std::array<double, 3> star{};
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const ModelSpec spec = deltas[i] == 0.0 ? ModelSpec::isolated() : ModelSpec::cross_deriv(deltas[i]);
        star[i] = find_threshold(spec, {1.40, 1.60}, 1e-3, reference_config(), 100.0).sigma_star;
    }
    double spread = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j)
            spread = std::max(spread, std::abs(star[i] - star[j]));
    const bool thresholds_ok = spread <= 2e-3;

    int compared = 0, agree = 0, marginal = 0;
    for (int k = 1; k <= 20; ++k) {
        const PureVerticalMode m = pure_mode_at_energy(0.5 * k);
        const auto cls = classify(m).classification;
        if (cls == Stability::Marginal) {
            ++marginal;
            continue;
        }
        ++compared;
        agree += forced_check(m, 0.01, 200).bounded_verdict == (cls == Stability::Stable);
    }
    return {thresholds_ok && agree == compared,
            fmt::format("sigma_star(0, 0.01, 0.05)=({:.5f}, {:.5f}, {:.5f}), max pairwise gap {:.2e} vs 2e-03; "
                        "forced/Floquet agree on {}/{} cells ({} marginal)",
                        star[0], star[1], star[2], spread, agree, compared, marginal)};
}

Verdict onset_anticipation()
{
    const auto rows = sweep(Variant::CrossDeriv, {0.0, 0.01, 0.02, 0.03, 0.05}, {1.47}, reference_config(), 100.0);
    bool decreasing = true;
    std::string times;
    double lo = INFINITY, hi = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        times += rows[i].t_onset ? fmt::format("{:.2f}", *rows[i].t_onset) : "none";
        times += i + 1 < rows.size() ? ", " : "";
        if (!rows[i].t_onset || (i > 0 && rows[i - 1].t_onset && *rows[i].t_onset >= *rows[i - 1].t_onset))
            decreasing = false;
        lo = std::min(lo, rows[i].max_torsion);
        hi = std::max(hi, rows[i].max_torsion);
    }
    return {decreasing && hi < 2.0 * lo,
            fmt::format("t_onset over delta (0, 0.01, 0.02, 0.03, 0.05) = ({}), max_torsion ratio {:.3f}", times,
                        hi / lo)};
}

Verdict zero_order_terms()
{
    const auto cross = sweep_row(ModelSpec::cross_deriv(0.01), 1.47, reference_config(), 100.0);
    const auto zero = sweep_row(ModelSpec::cross_deriv_zero(0.01), 1.47, reference_config(), 100.0);
    const auto quiet = sweep_row(ModelSpec::cross_deriv_zero(0.01), 1.40, reference_config(), 100.0);
    const bool earlier = cross.t_onset && zero.t_onset && *zero.t_onset < *cross.t_onset;
    const bool grows = !quiet.t_onset && quiet.energy_final > quiet.energy_initial;
    return {earlier && grows,
            fmt::format("t_onset crosszero={} vs cross={}; sigma=1.40: onset={}, E0={:.6f}, Ef={:.6f}",
                        zero.t_onset ? fmt::format("{:.2f}", *zero.t_onset) : "none",
                        cross.t_onset ? fmt::format("{:.2f}", *cross.t_onset) : "none",
                        quiet.t_onset ? "yes" : "none", quiet.energy_initial, quiet.energy_final)};
}

Verdict conservation()
{
    double drift = 0.0;
    for (double sigma : {0.5, 1.0, 1.45}) {
        const auto tr = simulate(ModelSpec::isolated(), make_initial(sigma, 1), reference_config(), 100.0);
        const double e0 = tr.samples.front().energy->total;
        for (const auto& s : tr.samples)
            drift = std::max(drift, std::abs(s.energy->total - e0) / e0);
    }
    double det_err = 0.0;
    for (int i = 0; i < 100; ++i)
        det_err = std::max(det_err, std::abs(classify(pure_mode_at_energy(oracle::uniform(1e-3, 10.0))).det - 1.0));
    double velocity_ratio = 0.0;
    for (int i = 0; i < 100; ++i) {
        const PureVerticalMode m = pure_mode(oracle::uniform(-2.0, 2.0), oracle::uniform(-4.0, 4.0));
        for (int k = 0; k < 200; ++k)
            velocity_ratio = std::max(velocity_ratio, std::abs(m.state_at(m.period() * k / 200.0)[1]) /
                                                          std::sqrt(2.0 * m.energy()));
    }
    return {drift < 1e-6 && det_err < 1e-8 && velocity_ratio <= 1.0 + 1e-9,
            fmt::format("energy drift {:.2e}, max |det M - 1| {:.2e}, max |ybar'|/sqrt(2E) {:.12f}", drift, det_err,
                        velocity_ratio)};
}

Verdict oracle_equivalence()
{
    double rhs_err = 0.0;
    for (int i = 0; i < 1000; ++i) {
        SystemState s = SystemState::zero(1);
        s.y[0] = oracle::uniform(-3, 3);
        s.z[0] = oracle::uniform(-3, 3);
        s.ydot[0] = oracle::uniform(-3, 3);
        s.zdot[0] = oracle::uniform(-3, 3);
        const auto m = rhs_m_mode(ModelSpec::isolated(1), s);
        const Eigen::Vector2d one = rhs_one_mode(ModelSpec::isolated(), s);
        rhs_err = std::max({rhs_err, std::abs(m.ydd[0] - one[0]), std::abs(m.zdd[0] - one[1])});
    }
    double period_err = 0.0;
    for (double a : {0.1, 0.5, 1.0, 1.5, 2.0})
        period_err = std::max(period_err, std::abs(vertical_period(a) - oracle::event_period(a)));
    return {rhs_err < 1e-12 && period_err < 1e-9,
            fmt::format("rhs m=1 vs one-mode max diff {:.2e}, period vs event oracle max diff {:.2e}", rhs_err,
                        period_err)};
}

Verdict symmetries()
{
    IntegratorConfig c;
    c.t_end = 30.0;
    c.sample_every = 0.1;
    double flip = 0.0;
    for (const ModelSpec& spec :
         {ModelSpec::isolated(), ModelSpec::cross_deriv(0.03), ModelSpec::cross_deriv_zero(0.03)})
        flip = std::max(flip, symmetry::check(spec, -1.0, -1.0, 20, c));
    const double reflect = symmetry::check(ModelSpec::isolated(), 1.0, -1.0, 20, c);
    return {flip < 1e-9 && reflect < 1e-9,
            fmt::format("sign flip max deviation {:.2e}, torsional reflection {:.2e}", flip, reflect)};
}

Verdict chaotic_run()
{
    IntegratorConfig c = reference_config();
    c.t_end = 170.0;
    const auto tr = simulate(ModelSpec::cross_deriv(0.01), make_initial(3.0, 1), c, 100.0, {false, false});
    const bool ok = (tr.terminated_early || tr.max_torsion > 1.0) && tr.samples.back().state.finite();
    return {ok, fmt::format("sigma=3: {}, max_torsion={:.3f}",
                            tr.terminated_early ? fmt::format("terminated at t={:.2f} ({})", tr.terminated_early->time,
                                                              tr.terminated_early->reason)
                                                : "completed",
                            tr.max_torsion)};
}

}  // namespace

int main()
{
    const std::pair<const char*, std::function<Verdict()>> criteria[] = {
        {"1 threshold reproduction", threshold_reproduction},
        {"2 onset time", onset_time},
        {"3 sufficient stability bound", sufficient_bound},
        {"4 delta-independence", delta_independence},
        {"5 onset anticipation in delta", onset_anticipation},
        {"6 zero-order aerodynamic terms", zero_order_terms},
        {"7 conservation properties", conservation},
        {"8 oracle equivalence", oracle_equivalence},
        {"9 symmetries", symmetries},
        {"- chaotic run (sigma=3)", chaotic_run},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Verdict v;
        try {
            v = run();
        }
        catch (const std::exception& e) {
            v = {false, fmt::format("exception: {}", e.what())};
        }
        failed += !v.pass;
        std::printf("[%s] %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu checks failed\n", failed, std::size(criteria));
    return failed == 0 ? 0 : 1;
}
