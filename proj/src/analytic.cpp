#include "carq/analytic.hpp"

#include <cmath>
#include <sstream>

#include "carq/errors.hpp"

namespace carq {

std::string to_string(OmegaVariant v) {
    return v == OmegaVariant::prop2 ? "prop2" : "appendixB";
}

OmegaVariant omega_variant_from_string(const std::string& s) {
    if (s == "prop2") return OmegaVariant::prop2;
    if (s == "appendixB" || s == "appendix_b") return OmegaVariant::appendix_b;
    throw ValidationError("unknown omega variant: " + s + " (expected prop2 or appendixB)");
}

void Scenario::validate() const {
    if (table.modes.empty()) throw ValidationError("scenario has no mode table");
    if (relay_table.size() != table.size())
        throw ValidationError("source and relay tables must have the same mode count");
    if (relay_table.packet_bits != table.packet_bits)
        throw ValidationError("source and relay tables must agree on packet_bits");
    if (!(p_loss > 0.0 && p_loss < 1.0)) throw ValidationError("p_loss must be in (0,1)");
    if (!(p_bar > 0.0 && p_bar_s > 0.0 && p_bar_r > 0.0))
        throw ValidationError("powers must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must be in (0,1)");
    if (!(source_link.mean_snr > 0.0 && relay_link.mean_snr > 0.0))
        throw ValidationError("link mean SNRs must be positive");
}

PowerPolicy build_power_policy(const Scenario& scenario, double p_t1,
                               Thresholds source_thresholds, Thresholds relay_thresholds) {
    if (!(p_t1 > scenario.p_loss && p_t1 < 1.0)) {
        std::ostringstream msg;
        msg << "target PER split P_t1 = " << p_t1 << " must lie in (" << scenario.p_loss << ", 1)";
        throw ValidationError(msg.str());
    }
    const double p_t2 = scenario.p_loss / p_t1;

    PowerPolicy policy;
    policy.target_per_source = p_t1;
    policy.target_per_relay = p_t2;
    policy.power_adaptive = true;

    const int n_modes = scenario.num_modes();
    for (int n = 0; n < n_modes; ++n) {
        const AmcMode& ms = scenario.table.mode(n);
        const AmcMode& mr = scenario.relay_table.mode(n);
        if (ms.fit_a <= p_t1) {
            std::ostringstream msg;
            msg << "mode " << ms.index << " cannot reach target PER " << p_t1
                << " (fit parameter a = " << ms.fit_a << ")";
            throw ValidationError(msg.str());
        }
        if (mr.fit_a <= p_t2) {
            std::ostringstream msg;
            msg << "relay mode " << mr.index << " cannot reach target PER " << p_t2
                << " (fit parameter a = " << mr.fit_a << ")";
            throw ValidationError(msg.str());
        }
        policy.source_gains.push_back(snr_for_per(ms, p_t1));
        policy.relay_gains.push_back(snr_for_per(mr, p_t2));
    }

    source_thresholds.validate();
    relay_thresholds.validate();
    for (int n = 0; n < n_modes; ++n) {
        if (source_thresholds.lower(n) < scenario.table.mode(n).fit_gamma_p * (1.0 - 1e-12))
            throw ValidationError("source threshold below gamma_p floor at mode " +
                                  std::to_string(n + 1));
        if (relay_thresholds.lower(n) < scenario.relay_table.mode(n).fit_gamma_p * (1.0 - 1e-12))
            throw ValidationError("relay threshold below gamma_p floor at mode " +
                                  std::to_string(n + 1));
    }
    policy.source_thresholds = std::move(source_thresholds);
    policy.relay_thresholds = std::move(relay_thresholds);
    return policy;
}

PowerPolicy make_const_power_policy(double p_t1, double p_loss,
                                    Thresholds source_thresholds, Thresholds relay_thresholds) {
    source_thresholds.validate();
    relay_thresholds.validate();
    PowerPolicy policy;
    policy.target_per_source = p_t1;
    policy.target_per_relay = p_loss / p_t1;
    policy.power_adaptive = false;
    policy.source_thresholds = std::move(source_thresholds);
    policy.relay_thresholds = std::move(relay_thresholds);
    return policy;
}

double instantaneous_plr(double per_source, double per_relay) {
    return per_source * per_relay;
}

std::vector<double> link_avg_pers(const Scenario& scenario, const PowerPolicy& policy, bool relay) {
    const AmcModeTable& table = relay ? scenario.relay_table : scenario.table;
    const LinkModel& link = relay ? scenario.relay_link : scenario.source_link;
    const Thresholds& th = relay ? policy.relay_thresholds : policy.source_thresholds;
    const double target = relay ? policy.target_per_relay : policy.target_per_source;

    std::vector<double> pers(static_cast<std::size_t>(table.size()));
    for (int n = 0; n < table.size(); ++n) {
        if (policy.power_adaptive) {
            // Post-adaptation SNR is pinned to h inside each region, so the
            // conditional PER equals the target exactly.
            pers[static_cast<std::size_t>(n)] = target;
        } else {
            pers[static_cast<std::size_t>(n)] =
                avg_per_constant_power(link, table.mode(n), th.lower(n), th.upper(n));
        }
    }
    return pers;
}

double omega(const Scenario& scenario, const Thresholds& source_thresholds,
             const Thresholds& relay_thresholds, OmegaVariant variant) {
    const std::vector<double> pi1 = mode_probabilities(scenario.source_link, source_thresholds);
    const std::vector<double> pi2 = mode_probabilities(scenario.relay_link, relay_thresholds);
    const int n_modes = scenario.num_modes();
    double sum = 0.0;
    for (int n = 0; n < n_modes; ++n) {
        const double rn = scenario.table.rate(n);
        for (int m = 0; m < n_modes; ++m) {
            const double rm = scenario.relay_table.rate(m);
            const double w = variant == OmegaVariant::prop2 ? rn * rm / (rn + rm) : rn / rm;
            sum += w * pi2[static_cast<std::size_t>(m)] * pi1[static_cast<std::size_t>(n)];
        }
    }
    return sum;
}

double spectral_efficiency(const Scenario& scenario, const PowerPolicy& policy) {
    const std::vector<double> pi1 = mode_probabilities(scenario.source_link, policy.source_thresholds);
    const std::vector<double> pi2 = mode_probabilities(scenario.relay_link, policy.relay_thresholds);
    const std::vector<double> per1 = link_avg_pers(scenario, policy, false);
    const std::vector<double> per2 = link_avg_pers(scenario, policy, true);

    const int n_modes = scenario.num_modes();
    double eta = 0.0;
    for (int n = 0; n < n_modes; ++n) {
        const double rn = scenario.table.rate(n);
        eta += rn * (1.0 - per1[static_cast<std::size_t>(n)]) * pi1[static_cast<std::size_t>(n)];
        for (int m = 0; m < n_modes; ++m) {
            const double rm = scenario.relay_table.rate(m);
            eta += rn * rm / (rn + rm) * per1[static_cast<std::size_t>(n)] *
                   (1.0 - per2[static_cast<std::size_t>(m)]) * pi2[static_cast<std::size_t>(m)] *
                   pi1[static_cast<std::size_t>(n)];
        }
    }
    return eta;
}

double expected_source_power(const Scenario& scenario, const PowerPolicy& policy) {
    if (!policy.power_adaptive) {
        // Constant power whenever transmitting; outage spends nothing.
        double active = 0.0;
        for (int n = 0; n < scenario.num_modes(); ++n)
            active += mode_probability(scenario.source_link, policy.source_thresholds, n);
        return scenario.p_bar_s * active;
    }
    double sum = 0.0;
    for (int n = 0; n < scenario.num_modes(); ++n) {
        sum += scenario.p_bar_s * policy.source_gains[static_cast<std::size_t>(n)] *
               expected_inverse_snr(scenario.source_link, policy.source_thresholds.lower(n),
                                    policy.source_thresholds.upper(n));
    }
    return sum;
}

double expected_relay_power(const Scenario& scenario, const PowerPolicy& policy) {
    if (!policy.power_adaptive) {
        double active = 0.0;
        for (int m = 0; m < scenario.num_modes(); ++m)
            active += mode_probability(scenario.relay_link, policy.relay_thresholds, m);
        return scenario.p_bar_r * active;
    }
    double sum = 0.0;
    for (int m = 0; m < scenario.num_modes(); ++m) {
        sum += scenario.p_bar_r * policy.relay_gains[static_cast<std::size_t>(m)] *
               expected_inverse_snr(scenario.relay_link, policy.relay_thresholds.lower(m),
                                    policy.relay_thresholds.upper(m));
    }
    return sum;
}

double average_power(const Scenario& scenario, const PowerPolicy& policy, OmegaVariant variant) {
    const double om = omega(scenario, policy.source_thresholds, policy.relay_thresholds, variant);
    const double x = policy.target_per_source * om;
    const double ws = 1.0 / (1.0 + x);
    const double wr = x / (1.0 + x);
    return ws * expected_source_power(scenario, policy) +
           wr * expected_relay_power(scenario, policy);
}

PerfReport make_report(const Scenario& scenario, const PowerPolicy& policy, OmegaVariant variant) {
    PerfReport report;
    report.spectral_efficiency = spectral_efficiency(scenario, policy);
    report.avg_power = average_power(scenario, policy, variant);
    report.omega = omega(scenario, policy.source_thresholds, policy.relay_thresholds, variant);
    report.omega_variant = variant;

    report.source_mode_probabilities.push_back(
        mode_probability(scenario.source_link, policy.source_thresholds, -1));
    report.relay_mode_probabilities.push_back(
        mode_probability(scenario.relay_link, policy.relay_thresholds, -1));
    for (int n = 0; n < scenario.num_modes(); ++n) {
        report.source_mode_probabilities.push_back(
            mode_probability(scenario.source_link, policy.source_thresholds, n));
        report.relay_mode_probabilities.push_back(
            mode_probability(scenario.relay_link, policy.relay_thresholds, n));
    }
    report.source_avg_pers = link_avg_pers(scenario, policy, false);
    report.relay_avg_pers = link_avg_pers(scenario, policy, true);
    return report;
}

}  // namespace carq
