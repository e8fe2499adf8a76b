#include "carq/const_power.hpp"

#include <algorithm>
#include <cmath>

#include "carq/errors.hpp"
#include "carq/golden.hpp"

namespace carq {

namespace {

Thresholds inversion_levels(const AmcModeTable& table, double target) {
    Thresholds th;
    for (int n = 0; n < table.size(); ++n) {
        const AmcMode& m = table.mode(n);
        th.levels.push_back(std::max(snr_for_per(m, target), m.fit_gamma_p));
    }
    for (std::size_t i = 1; i < th.levels.size(); ++i) {
        const double floor_val = th.levels[i - 1] * (1.0 + 1e-12);
        if (th.levels[i] <= floor_val) th.levels[i] = floor_val;
    }
    return th;
}

}  // namespace

std::pair<Thresholds, Thresholds> const_power_thresholds(const AmcModeTable& source_table,
                                                         const AmcModeTable& relay_table,
                                                         double p_t1, double p_loss) {
    if (!(p_t1 > p_loss && p_t1 < 1.0))
        throw ValidationError("const-power target split must lie in (p_loss, 1)");
    Thresholds src = inversion_levels(source_table, p_t1);
    Thresholds rel = inversion_levels(relay_table, p_loss / p_t1);
    src.validate();
    rel.validate();
    return {std::move(src), std::move(rel)};
}

ConstPowerResult optimize_const_power(const Scenario& scenario, double pt1_search_tol,
                                      OmegaVariant variant) {
    scenario.validate();

    const auto objective = [&](double p_t1) {
        auto [src, rel] = const_power_thresholds(scenario.table, scenario.relay_table, p_t1,
                                                 scenario.p_loss);
        PowerPolicy policy = make_const_power_policy(p_t1, scenario.p_loss, std::move(src), std::move(rel));
        return spectral_efficiency(scenario, policy);
    };

    const GoldenResult g =
        golden_max_log(objective, scenario.p_loss * 1.0001, 0.9999, pt1_search_tol);

    ConstPowerResult result;
    auto [src, rel] =
        const_power_thresholds(scenario.table, scenario.relay_table, g.x, scenario.p_loss);
    result.policy = make_const_power_policy(g.x, scenario.p_loss, std::move(src), std::move(rel));
    result.p_t1_star = g.x;
    result.report = make_report(scenario, result.policy, variant);
    return result;
}

double direct_transmission_se(const Scenario& scenario) {
    const Thresholds th = direct_transmission_thresholds(scenario);
    double eta = 0.0;
    for (int n = 0; n < scenario.num_modes(); ++n) {
        const double pi = mode_probability(scenario.source_link, th, n);
        const double per =
            avg_per_constant_power(scenario.source_link, scenario.table.mode(n), th.lower(n), th.upper(n));
        eta += scenario.table.rate(n) * (1.0 - per) * pi;
    }
    return eta;
}

Thresholds direct_transmission_thresholds(const Scenario& scenario) {
    Thresholds th = inversion_levels(scenario.table, scenario.p_loss);
    th.validate();
    return th;
}

double direct_transmission_avg_power(const Scenario& scenario) {
    const Thresholds th = direct_transmission_thresholds(scenario);
    double active = 0.0;
    for (int n = 0; n < scenario.num_modes(); ++n)
        active += mode_probability(scenario.source_link, th, n);
    return scenario.p_bar_s * active;
}

}  // namespace carq
