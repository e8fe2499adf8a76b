#pragma once

#include <optional>
#include <string>
#include <vector>

#include "carq/amc.hpp"
#include "carq/channel.hpp"

namespace carq {

// The average-power weighting term Omega is printed in two variants that
// disagree for N >= 2 with unequal rates:
//   prop2:      sum_nm R_n R_m / (R_n + R_m) pi2_m pi1_n
//   appendix_b: sum_nm (R_n / R_m)           pi2_m pi1_n
// Both are implemented; the Monte Carlo slot-count ratio referees.
enum class OmegaVariant { prop2, appendix_b };

std::string to_string(OmegaVariant v);
OmegaVariant omega_variant_from_string(const std::string& s);

// Full problem instance. SNR means are linear; see config_io for the dB
// boundary (gamma1 = p_bar_s, gamma2 = mu * p_bar_r).
struct Scenario {
    AmcModeTable table;          // source link table
    AmcModeTable relay_table;    // defaults to the same table
    LinkModel source_link;       // mean gamma1
    LinkModel relay_link;        // mean gamma2
    double p_bar = 0.0;          // max average power (linear)
    double p_bar_s = 0.0;
    double p_bar_r = 0.0;
    double p_loss = 0.0;         // target PLR
    double alpha = 0.5;          // relay frame fraction (simulator only)
    double mu_db = 0.0;          // path-loss parameter (record only)

    int num_modes() const { return table.size(); }
    void validate() const;
};

// Per-link thresholds, channel-inversion gain vectors and the target-PER
// split. For constant-power operation the gain vectors are unused and
// power_adaptive is false.
struct PowerPolicy {
    Thresholds source_thresholds;
    Thresholds relay_thresholds;
    std::vector<double> source_gains;  // h_{1,n}, post-SNR pinned per region
    std::vector<double> relay_gains;   // h_{2,m}
    double target_per_source = 0.0;    // P_t,1
    double target_per_relay = 0.0;     // P_t,2 = P_loss / P_t,1
    bool power_adaptive = true;
};

struct PerfReport {
    double spectral_efficiency = 0.0;
    double avg_power = 0.0;
    double omega = 0.0;                       // selected variant
    OmegaVariant omega_variant = OmegaVariant::prop2;
    // Index 0 is the outage mode; indices 1..N the transmission modes.
    std::vector<double> source_mode_probabilities;
    std::vector<double> relay_mode_probabilities;
    std::vector<double> source_avg_pers;  // length N
    std::vector<double> relay_avg_pers;
};

// h vectors from the target-PER split (P_t,2 = p_loss/p_t1), with the given
// per-link thresholds (already floored at gamma_p). Throws if p_t1 is outside
// (p_loss, 1) or some mode cannot reach the target (a_n <= p_t1).
PowerPolicy build_power_policy(const Scenario& scenario, double p_t1,
                               Thresholds source_thresholds, Thresholds relay_thresholds);

// Constant-power policy wrapper around precomputed thresholds.
PowerPolicy make_const_power_policy(double p_t1, double p_loss,
                                    Thresholds source_thresholds, Thresholds relay_thresholds);

double instantaneous_plr(double per_source, double per_relay);

// Mode-conditional average PERs for both links. Power-adaptive policies pin
// these to the targets; constant-power policies integrate the PER curve.
std::vector<double> link_avg_pers(const Scenario& scenario, const PowerPolicy& policy, bool relay);

double omega(const Scenario& scenario, const Thresholds& source_thresholds,
             const Thresholds& relay_thresholds, OmegaVariant variant);

// Average accepted information bits per transmitted symbol.
double spectral_efficiency(const Scenario& scenario, const PowerPolicy& policy);

// Average transmit power of the adaptive policy: convex combination of
// E[P_s] and E[P_r] with weights 1/(1+P_t1*Omega) and P_t1*Omega/(1+...).
double average_power(const Scenario& scenario, const PowerPolicy& policy, OmegaVariant variant);

// The two expectations entering average_power.
double expected_source_power(const Scenario& scenario, const PowerPolicy& policy);
double expected_relay_power(const Scenario& scenario, const PowerPolicy& policy);

PerfReport make_report(const Scenario& scenario, const PowerPolicy& policy, OmegaVariant variant);

}  // namespace carq
