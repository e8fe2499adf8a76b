#pragma once

#include <utility>

#include "carq/analytic.hpp"

namespace carq {

// Mode switching levels for the constant-power scheme: closed-form
// target-PER inversion per link, floored at gamma_p. The relay target is
// p_loss / p_t1.
std::pair<Thresholds, Thresholds> const_power_thresholds(const AmcModeTable& source_table,
                                                         const AmcModeTable& relay_table,
                                                         double p_t1, double p_loss);

struct ConstPowerResult {
    PowerPolicy policy;
    double p_t1_star = 0.0;
    PerfReport report;
};

// 1-D search over the target-PER split; powers fixed at p_bar_s / p_bar_r,
// no average-power constraint.
ConstPowerResult optimize_const_power(const Scenario& scenario,
                                      double pt1_search_tol = 1e-4,
                                      OmegaVariant variant = OmegaVariant::prop2);

// AMC-only direct transmission baseline on the source-destination link:
// constant power, thresholds from target-PER inversion at p_loss, no
// retransmissions.
double direct_transmission_se(const Scenario& scenario);

// The baseline's thresholds and average power (p_bar_s times the probability
// of not being in outage).
Thresholds direct_transmission_thresholds(const Scenario& scenario);
double direct_transmission_avg_power(const Scenario& scenario);

}  // namespace carq
