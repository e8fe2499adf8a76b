#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "carq/analytic.hpp"

namespace carq {

enum class ThresholdInit { gamma_p_floors, random_db, user_supplied };

struct OptimizerConfig {
    int max_iterations = 50;          // I_max
    double se_convergence_tol = 1e-4; // absolute SE change declaring convergence
    double lambda_bracket_lo = 0.0;
    double lambda_bracket_hi = 1.0;   // doubled until the residual changes sign
    double lambda_bracket_cap = 1.152921504606847e18;  // 2^60
    double lambda_tol = 1e-10;        // relative power residual
    double pt1_search_tol = 1e-4;     // golden-section bracket width in p_t1
    ThresholdInit init = ThresholdInit::gamma_p_floors;
    std::uint64_t init_seed = 1;      // for random_db
    double init_spread_db = 25.0;     // random levels within [floor, floor+spread] dB
    Thresholds user_source_init;
    Thresholds user_relay_init;
    OmegaVariant omega_variant = OmegaVariant::prop2;
};

struct IterationRecord {
    double lambda = 0.0;
    double phi = 0.0;
    double eta = 0.0;
    Thresholds source;
    Thresholds relay;
};

struct IterationTrace {
    double initial_eta = 0.0;
    std::vector<IterationRecord> steps;
    bool converged = false;
    // Largest decrease eta^{(i-1)} - eta^{(i)} observed after iteration 1;
    // zero for a monotone run.
    double max_eta_decrease = 0.0;
};

// Stationarity-condition mode-switching levels for the source link at
// multiplier lambda, with the relay mode probabilities frozen (from the
// previous iterate's relay thresholds). Each level is floored at gamma_p and
// strict ordering is enforced by a relative nudge.
Thresholds source_levels(const Scenario& scenario, double p_t1,
                         const std::vector<double>& relay_mode_probs, double lambda);

// Mirror image for the relay link; the numerator carries the phi weight.
Thresholds relay_levels(const Scenario& scenario, double p_t1,
                        const std::vector<double>& source_mode_probs, double lambda, double phi);

struct LambdaResult {
    double lambda = 0.0;
    Thresholds source;
    Thresholds relay;
    double consumed = 0.0;  // LHS of the power-equality at the returned lambda
    double target = 0.0;    // p_bar * (1 + phi * p_t1)
};

// Finds lambda >= 0 with the power constraint satisfied with equality (or
// lambda = 0 when the constraint is slack at the gamma_p floors). Both
// threshold vectors are treated as functions of lambda with the opposite
// link's mode probabilities frozen at the previous iterate.
LambdaResult solve_lambda(const Scenario& scenario, double p_t1,
                          const Thresholds& prev_source, const Thresholds& prev_relay,
                          double phi, const OptimizerConfig& config);

// Fixed-point iteration at a given target-PER split.
std::pair<PowerPolicy, IterationTrace> iterate(const Scenario& scenario, double p_t1,
                                               const OptimizerConfig& config);

struct OptimizeResult {
    PowerPolicy policy;
    double p_t1_star = 0.0;
    PerfReport report;
    IterationTrace trace;  // trace of the winning iterate run
};

// Outer quasiconcave search over the target-PER split.
OptimizeResult optimize(const Scenario& scenario, const OptimizerConfig& config = {});

struct QuasiconcavityAudit {
    std::vector<double> p_t1_grid;
    std::vector<double> eta;
    int strict_local_maxima = 0;
    bool unimodal = false;
};

// Samples eta(p_t1) at log-spaced points and counts strict local maxima
// (tolerance 1e-6). A violation is a logged finding, not an optimizer error.
QuasiconcavityAudit audit_quasiconcavity(const Scenario& scenario, int points,
                                         const OptimizerConfig& config = {});

}  // namespace carq
