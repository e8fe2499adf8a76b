#include "carq/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "carq/errors.hpp"
#include "carq/golden.hpp"
#include "carq/rng.hpp"
#include "carq/units.hpp"

namespace carq {

namespace {

// Strict ordering after gamma_p flooring; collisions get a relative nudge
// (the squeezed mode ends up with a zero-width region).
void enforce_ordering(std::vector<double>& levels) {
    for (std::size_t i = 1; i < levels.size(); ++i) {
        const double floor_val = levels[i - 1] * (1.0 + 1e-12);
        if (levels[i] <= floor_val) levels[i] = floor_val;
    }
}

std::vector<double> policy_gains(const AmcModeTable& table, double target) {
    std::vector<double> h(static_cast<std::size_t>(table.size()));
    for (int n = 0; n < table.size(); ++n) h[static_cast<std::size_t>(n)] = snr_for_per(table.mode(n), target);
    return h;
}

double consumed_power(const Scenario& scenario, const Thresholds& src, const Thresholds& rel,
                      const std::vector<double>& h1, const std::vector<double>& h2,
                      double phi, double p_t1) {
    double e_s = 0.0;
    double e_r = 0.0;
    for (int n = 0; n < scenario.num_modes(); ++n) {
        e_s += scenario.p_bar_s * h1[static_cast<std::size_t>(n)] *
               expected_inverse_snr(scenario.source_link, src.lower(n), src.upper(n));
        e_r += scenario.p_bar_r * h2[static_cast<std::size_t>(n)] *
               expected_inverse_snr(scenario.relay_link, rel.lower(n), rel.upper(n));
    }
    return e_s + phi * p_t1 * e_r;
}

Thresholds initial_thresholds(const AmcModeTable& table, const OptimizerConfig& config,
                              std::uint64_t stream) {
    Thresholds th;
    if (config.init == ThresholdInit::random_db) {
        PacketRng rng(config.init_seed, stream);
        for (int n = 0; n < table.size(); ++n) {
            const double floor_lin = std::max(table.mode(n).fit_gamma_p, 1e-9);
            th.levels.push_back(floor_lin * db_to_linear(rng.next_uniform() * config.init_spread_db));
        }
        std::sort(th.levels.begin(), th.levels.end());
    } else {
        for (int n = 0; n < table.size(); ++n)
            th.levels.push_back(std::max(table.mode(n).fit_gamma_p, 1e-9));
    }
    enforce_ordering(th.levels);
    return th;
}

}  // namespace

Thresholds source_levels(const Scenario& scenario, double p_t1,
                         const std::vector<double>& relay_mode_probs, double lambda) {
    const int n_modes = scenario.num_modes();
    const std::vector<double> h1 = policy_gains(scenario.table, p_t1);

    Thresholds th;
    for (int n = 0; n < n_modes; ++n) {
        const double rn = scenario.table.rate(n);
        const double rn_prev = n > 0 ? scenario.table.rate(n - 1) : 0.0;
        const double h_prev = n > 0 ? h1[static_cast<std::size_t>(n - 1)] : 0.0;
        const double numer =
            lambda * scenario.p_bar_s * (h1[static_cast<std::size_t>(n)] - h_prev) / (rn - rn_prev);

        double weight = 0.0;
        for (int m = 0; m < n_modes; ++m) {
            const double rm = scenario.relay_table.rate(m);
            weight += rm * rm / ((rm + rn_prev) * (rm + rn)) * relay_mode_probs[static_cast<std::size_t>(m)];
        }
        const double denom = 1.0 - p_t1 + (p_t1 - scenario.p_loss) * weight;
        if (!(denom > 0.0)) {
            std::ostringstream msg;
            msg << "nonpositive source-level denominator at mode " << n + 1 << " (p_t1 = " << p_t1 << ")";
            throw NumericalError(msg.str());
        }
        th.levels.push_back(std::max(numer / denom, scenario.table.mode(n).fit_gamma_p));
    }
    enforce_ordering(th.levels);
    return th;
}

Thresholds relay_levels(const Scenario& scenario, double p_t1,
                        const std::vector<double>& source_mode_probs, double lambda, double phi) {
    const int n_modes = scenario.num_modes();
    const double p_t2 = scenario.p_loss / p_t1;
    const std::vector<double> h2 = policy_gains(scenario.relay_table, p_t2);

    Thresholds th;
    for (int m = 0; m < n_modes; ++m) {
        const double rm = scenario.relay_table.rate(m);
        const double rm_prev = m > 0 ? scenario.relay_table.rate(m - 1) : 0.0;
        const double h_prev = m > 0 ? h2[static_cast<std::size_t>(m - 1)] : 0.0;
        const double numer = lambda * phi * scenario.p_bar_r *
                             (h2[static_cast<std::size_t>(m)] - h_prev) / (rm - rm_prev);
        if (numer == 0.0) {
            th.levels.push_back(scenario.relay_table.mode(m).fit_gamma_p);
            continue;
        }

        double weight = 0.0;
        for (int n = 0; n < n_modes; ++n) {
            const double rn = scenario.table.rate(n);
            weight += rn * rn / ((rn + rm_prev) * (rn + rm)) * source_mode_probs[static_cast<std::size_t>(n)];
        }
        const double denom = (1.0 - scenario.p_loss / p_t1) * weight;
        if (!(denom > 0.0)) {
            std::ostringstream msg;
            msg << "nonpositive relay-level denominator at mode " << m + 1 << " (p_t1 = " << p_t1 << ")";
            throw NumericalError(msg.str());
        }
        th.levels.push_back(std::max(numer / denom, scenario.relay_table.mode(m).fit_gamma_p));
    }
    enforce_ordering(th.levels);
    return th;
}

LambdaResult solve_lambda(const Scenario& scenario, double p_t1,
                          const Thresholds& prev_source, const Thresholds& prev_relay,
                          double phi, const OptimizerConfig& config) {
    const std::vector<double> pi1_prev = mode_probabilities(scenario.source_link, prev_source);
    const std::vector<double> pi2_prev = mode_probabilities(scenario.relay_link, prev_relay);
    const std::vector<double> h1 = policy_gains(scenario.table, p_t1);
    const std::vector<double> h2 = policy_gains(scenario.relay_table, scenario.p_loss / p_t1);

    const double target = scenario.p_bar * (1.0 + phi * p_t1);

    const auto eval = [&](double lambda) {
        LambdaResult r;
        r.lambda = lambda;
        r.source = source_levels(scenario, p_t1, pi2_prev, lambda);
        r.relay = relay_levels(scenario, p_t1, pi1_prev, lambda, phi);
        r.consumed = consumed_power(scenario, r.source, r.relay, h1, h2, phi, p_t1);
        r.target = target;
        return r;
    };

    // Consumed power is maximal at the gamma_p floors (lambda = 0) and
    // non-increasing in lambda; a slack budget there means lambda = 0.
    LambdaResult at_floor = eval(config.lambda_bracket_lo);
    if (at_floor.consumed <= target) return at_floor;

    double lo = config.lambda_bracket_lo;
    double hi = std::max(config.lambda_bracket_hi, lo + 1.0);
    LambdaResult at_hi = eval(hi);
    while (at_hi.consumed > target) {
        hi *= 2.0;
        if (hi > config.lambda_bracket_cap)
            throw InfeasibleError("power constraint cannot be met at any multiplier; "
                                  "budget infeasible for this scenario");
        at_hi = eval(hi);
    }

    // Bisection on the monotone residual.
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        LambdaResult at_mid = eval(mid);
        if (at_mid.consumed > target)
            lo = mid;
        else
            hi = mid;
        if (std::abs(at_mid.consumed - target) <= config.lambda_tol * target) return at_mid;
        if (hi - lo <= 1e-15 * std::max(1.0, hi)) return at_mid;
    }
    return eval(0.5 * (lo + hi));
}

std::pair<PowerPolicy, IterationTrace> iterate(const Scenario& scenario, double p_t1,
                                               const OptimizerConfig& config) {
    if (!(p_t1 > scenario.p_loss && p_t1 < 1.0))
        throw ValidationError("p_t1 must lie in (p_loss, 1)");

    Thresholds src = config.init == ThresholdInit::user_supplied ? config.user_source_init
                                                                 : initial_thresholds(scenario.table, config, 0);
    Thresholds rel = config.init == ThresholdInit::user_supplied ? config.user_relay_init
                                                                 : initial_thresholds(scenario.relay_table, config, 1);
    src.validate();
    rel.validate();

    IterationTrace trace;
    {
        PowerPolicy p0 = build_power_policy(scenario, p_t1, src, rel);
        trace.initial_eta = spectral_efficiency(scenario, p0);
    }

    double prev_eta = trace.initial_eta;
    for (int i = 1; i <= config.max_iterations; ++i) {
        const double phi = omega(scenario, src, rel, config.omega_variant);
        LambdaResult step = solve_lambda(scenario, p_t1, src, rel, phi, config);
        src = step.source;
        rel = step.relay;

        PowerPolicy policy = build_power_policy(scenario, p_t1, src, rel);
        const double eta = spectral_efficiency(scenario, policy);

        IterationRecord rec;
        rec.lambda = step.lambda;
        rec.phi = phi;
        rec.eta = eta;
        rec.source = src;
        rec.relay = rel;
        trace.steps.push_back(std::move(rec));

        if (i > 1 && eta < prev_eta)
            trace.max_eta_decrease = std::max(trace.max_eta_decrease, prev_eta - eta);

        // Converged means the fixed point is self-consistent: the SE has
        // settled AND the policy is feasible under its own final weighting
        // term (the multiplier was solved against the previous iterate's
        // phi, so early stops can overdraw the budget slightly).
        if (std::abs(eta - prev_eta) < config.se_convergence_tol &&
            average_power(scenario, policy, config.omega_variant) <=
                scenario.p_bar * (1.0 + 1e-6)) {
            trace.converged = true;
            break;
        }
        prev_eta = eta;
    }

    PowerPolicy final_policy = build_power_policy(scenario, p_t1, src, rel);
    return {std::move(final_policy), std::move(trace)};
}

OptimizeResult optimize(const Scenario& scenario, const OptimizerConfig& config) {
    scenario.validate();
    const double lo = scenario.p_loss * 1.0001;
    const double hi = 0.9999;
    if (!(lo < hi)) throw ValidationError("empty p_t1 search interval");

    const auto objective = [&](double p_t1) {
        return iterate(scenario, p_t1, config).second.steps.back().eta;
    };
    const GoldenResult g = golden_max_log(objective, lo, hi, config.pt1_search_tol);

    OptimizeResult result;
    auto [policy, trace] = iterate(scenario, g.x, config);
    result.policy = std::move(policy);
    result.trace = std::move(trace);
    result.p_t1_star = g.x;
    result.report = make_report(scenario, result.policy, config.omega_variant);
    return result;
}

QuasiconcavityAudit audit_quasiconcavity(const Scenario& scenario, int points,
                                         const OptimizerConfig& config) {
    QuasiconcavityAudit audit;
    const double lo = std::log(scenario.p_loss * 1.0001);
    const double hi = std::log(0.9999);
    audit.p_t1_grid.resize(static_cast<std::size_t>(points));
    audit.eta.resize(static_cast<std::size_t>(points));

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int i = 0; i < points; ++i) {
        const double p = std::exp(lo + (hi - lo) * i / (points - 1));
        audit.p_t1_grid[static_cast<std::size_t>(i)] = p;
        double eta_i = -kInf;  // infeasible points sink below every neighbor
        try {
            eta_i = iterate(scenario, p, config).second.steps.back().eta;
        } catch (const std::exception&) {
        }
        audit.eta[static_cast<std::size_t>(i)] = eta_i;
    }

    constexpr double kTol = 1e-6;
    for (int i = 0; i < points; ++i) {
        const double left = i > 0 ? audit.eta[static_cast<std::size_t>(i - 1)] : -kInf;
        const double right = i + 1 < points ? audit.eta[static_cast<std::size_t>(i + 1)] : -kInf;
        const double v = audit.eta[static_cast<std::size_t>(i)];
        if (v > left + kTol && v > right + kTol) ++audit.strict_local_maxima;
    }
    audit.unimodal = audit.strict_local_maxima == 1;
    return audit;
}

}  // namespace carq
