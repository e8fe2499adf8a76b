#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "carq/analytic.hpp"

namespace carq {

enum class SeEstimatorMode { per_packet_expectation, ratio_of_totals };

struct SimConfig {
    std::uint64_t packet_budget = 1'000'000;
    std::uint64_t seed = 1;
    int frame_symbols = 4320;  // N_s; cancels out of every reported ratio
    double alpha = 0.0;        // relay frame fraction; 0 = take the scenario's
    SeEstimatorMode estimator_mode = SeEstimatorMode::per_packet_expectation;
    int batches = 100;         // batch-means standard errors

    void validate() const;
};

struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

struct SimCounts {
    std::uint64_t packets = 0;        // all draws, outage included
    std::uint64_t outage_slots = 0;   // source outage draws (nothing sent)
    std::uint64_t sent = 0;
    std::uint64_t success_first_try = 0;
    std::uint64_t failed_first_try = 0;
    std::uint64_t recovered_by_relay = 0;
    std::uint64_t lost_relay_outage = 0;
    std::uint64_t lost_relay_error = 0;
};

struct SimEstimate {
    Estimate se_per_packet;        // estimator of the per-packet SE expectation
    Estimate se_ratio_totals;      // accepted bits / transmitted symbols
    Estimate avg_power_ratio_totals;  // consumed energy / elapsed time
    Estimate realized_plr;            // lost via relay decoding error, per sent packet
    Estimate realized_plr_incl_outage;  // adds relay-outage losses
    Estimate slot_ratio_j_over_i;  // relay frames per source slot
    SimCounts counts;
    double headline_se = 0.0;      // picked by SimConfig::estimator_mode
    double alpha_used = 0.0;
    // Per-batch values for the optional CSV dump (same order as estimators).
    std::vector<std::array<double, 6>> batch_values;
};

// Slot-level Monte Carlo of the C-ARQ protocol under the given policy.
// Per source packet: draw gamma1; outage is a no-transmission slot; otherwise
// transmit at the policy's mode/power and fail with per_awgn at the
// post-adaptation SNR; a failed packet draws gamma2 for its relay slot and is
// lost on relay outage, else retried once. Deterministic for a fixed
// (scenario, policy, config) regardless of worker count.
SimEstimate simulate(const Scenario& scenario, const PowerPolicy& policy, const SimConfig& config);

// Plain single-pass reference implementation; must match simulate() bit for
// bit (the parallel kernel reduces per-batch in a fixed order).
SimEstimate simulate_serial(const Scenario& scenario, const PowerPolicy& policy,
                            const SimConfig& config);

// Closed-form limits of the simulator's own accounting; used as oracles and
// printed alongside the per-variant closed forms in compare reports.
double sim_accounting_power_limit(const Scenario& scenario, const PowerPolicy& policy);
double sim_accounting_slot_ratio_limit(const Scenario& scenario, const PowerPolicy& policy,
                                       double alpha);

struct CompareRow {
    std::string metric;
    double simulated = 0.0;
    double stderr_ = 0.0;
    double analytic = 0.0;
    double sigmas = 0.0;  // |simulated - analytic| / stderr
    bool ok = true;       // within 4 standard errors
};

struct CompareReport {
    SimEstimate sim;
    std::vector<CompareRow> rows;
    // Which omega variant the measured slot ratio matches (within 4 sigma);
    // "none" when neither fits.
    std::string slot_ratio_verdict;
    bool all_ok = true;

    std::string to_text() const;
    std::string batch_csv() const;
};

// Side-by-side analytic vs simulated SE, average power (both omega
// variants), PLR and slot ratio; flags metrics outside 4 standard errors.
CompareReport compare(const Scenario& scenario, const PowerPolicy& policy,
                      const SimConfig& config);

}  // namespace carq
