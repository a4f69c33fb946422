#include "fishbone/threshold.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

namespace fishbone {

std::optional<OnsetEvent> probe_onset(const ModelSpec& spec, double sigma, const IntegratorConfig& config,
                                      double onset_gain)
{
    const Trajectory tr = simulate(spec, make_initial(sigma, spec.modes()), config, onset_gain, {false, true});
    return tr.onset;
}

ThresholdResult find_threshold(const ModelSpec& spec, std::pair<double, double> bracket, double tol,
                               const IntegratorConfig& config, double onset_gain)
{
    auto [lo, hi] = bracket;
    if (!(lo < hi))
        throw InvalidBracket(fmt::format("bracket must satisfy lo < hi (got {}, {})", lo, hi));
    if (!(tol > 0.0))
        throw std::invalid_argument("tolerance must be positive");
    config.validate();

    ThresholdResult result;
    result.fingerprint = {spec, config, onset_gain};
    auto probe = [&](double sigma) {
        auto onset = probe_onset(spec, sigma, config, onset_gain);
        result.probes.push_back({sigma, onset});
        return onset;
    };

    if (auto at_lo = probe(lo))
        throw InvalidBracket(fmt::format("onset already at the lower end sigma={} (t={:.6g})", lo, at_lo->t_onset));
    auto at_hi = probe(hi);
    if (!at_hi)
        throw InvalidBracket(fmt::format("no onset at the upper end sigma={} within t_end={}", hi, config.t_end));

    OnsetEvent onset_hi = *at_hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (auto at_mid = probe(mid)) {
            hi = mid;
            onset_hi = *at_mid;
        }
        else {
            lo = mid;
        }
    }

    auto sorted = result.probes;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.sigma < b.sigma; });
    double lowest_unstable = std::numeric_limits<double>::infinity();
    for (const auto& p : sorted) {
        if (p.onset)
            lowest_unstable = std::min(lowest_unstable, p.sigma);
        else if (p.sigma > lowest_unstable)
            result.anomalies.push_back(
                fmt::format("NonMonotone: no onset at sigma={} above onset at sigma={}", p.sigma, lowest_unstable));
    }

    result.sigma_lo = lo;
    result.sigma_hi = hi;
    result.sigma_star = 0.5 * (lo + hi);
    result.onset_at_hi = onset_hi;
    result.energy_star = spec.modes() == 1 ? energy(spec, make_initial(result.sigma_star, 1)).total
                                           : std::numeric_limits<double>::quiet_NaN();
    return result;
}

void write_threshold_report(std::ostream& os, const ThresholdResult& r)
{
    const auto& f = r.fingerprint;
    os << fmt::format("variant={}\nmodes={}\ndelta={:.17g}\n", to_string(f.spec.variant()), f.spec.modes(),
                      f.spec.delta());
    os << fmt::format("sigma_lo={:.17g}\nsigma_hi={:.17g}\nsigma_star={:.17g}\nenergy_star={:.17g}\n", r.sigma_lo,
                      r.sigma_hi, r.sigma_star, r.energy_star);
    os << fmt::format("onset_t_at_hi={:.17g}\nonset_gain_at_hi={:.17g}\n", r.onset_at_hi.t_onset, r.onset_at_hi.gain);
    const auto& c = f.integrator;
    os << fmt::format("scheme={}\nh={:.17g}\nrel_tol={:.17g}\nabs_tol={:.17g}\nt_end={:.17g}\nsample_every={:.17g}\n",
                      to_string(c.scheme), c.h, c.rel_tol, c.abs_tol, c.t_end, c.sample_every);
    os << fmt::format("onset_gain={:.17g}\nprobes={}\n", f.onset_gain, r.probes.size());
    for (const auto& a : r.anomalies)
        os << "anomaly=" << a << '\n';
}

SweepRow sweep_row(const ModelSpec& spec, double sigma, const IntegratorConfig& config, double onset_gain)
{
    const SystemState initial = make_initial(sigma, spec.modes());
    const Trajectory tr = simulate(spec, initial, config, onset_gain, {false, false});
    SweepRow row;
    row.delta = spec.delta();
    row.sigma = sigma;
    if (tr.onset)
        row.t_onset = tr.onset->t_onset;
    row.max_torsion = tr.max_torsion;
    row.energy_initial = energy(spec, initial).total;
    row.energy_final = tr.samples.empty() ? row.energy_initial : tr.samples.back().energy->total;
    row.terminated_early = tr.terminated_early;
    return row;
}

std::vector<SweepRow> sweep(Variant variant, const std::vector<double>& deltas, const std::vector<double>& sigmas,
                            const IntegratorConfig& config, double onset_gain, int jobs)
{
    config.validate();
    std::vector<std::pair<ModelSpec, double>> tasks;
    for (double d : deltas)
        for (double s : sigmas)
            tasks.emplace_back(ModelSpec(variant, 1, d), s);

    std::vector<SweepRow> rows(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++)
            rows[i] = sweep_row(tasks[i].first, tasks[i].second, config, onset_gain);
    };
    const auto n_threads = static_cast<std::size_t>(std::clamp(jobs, 1, 64));
    if (n_threads == 1 || tasks.size() < 2) {
        worker();
        return rows;
    }
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < std::min(n_threads, tasks.size()); ++k)
        pool.emplace_back(worker);
    pool.clear();
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows)
{
    os << "delta,sigma,t_onset,max_torsion,E0,Ef\n";
    for (const auto& r : rows) {
        const std::string onset = r.t_onset ? fmt::format("{:.17g}", *r.t_onset) : std::string();
        os << fmt::format("{:.17g},{:.17g},{},{:.17g},{:.17g},{:.17g}\n", r.delta, r.sigma, onset, r.max_torsion,
                          r.energy_initial, r.energy_final);
    }
}

}  // namespace fishbone
