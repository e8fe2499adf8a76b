#include "carq/simulator.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "carq/errors.hpp"
#include "carq/rng.hpp"

namespace carq {

void SimConfig::validate() const {
    if (packet_budget < 1) throw ValidationError("packet_budget must be >= 1");
    if (frame_symbols < 1) throw ValidationError("frame_symbols must be >= 1");
    if (batches < 1) throw ValidationError("batches must be >= 1");
    if (alpha < 0.0 || alpha >= 1.0) throw ValidationError("alpha must be in [0,1)");
}

namespace {

struct BatchAccum {
    double se_sum = 0.0;
    double bits = 0.0;
    double symbols = 0.0;
    double source_energy = 0.0;   // slot units: power x T_f
    double relay_energy = 0.0;
    double relay_slot_time = 0.0; // alpha * J, in T_f units
    std::uint64_t packets = 0;
    std::uint64_t outage = 0;
    std::uint64_t sent = 0;
    std::uint64_t success1 = 0;
    std::uint64_t failed = 0;
    std::uint64_t relay_outage = 0;
    std::uint64_t recovered = 0;
    std::uint64_t lost_error = 0;
};

// Everything the inner loop needs, flattened out of the policy structs.
struct Kernel {
    const Scenario* scenario;
    const PowerPolicy* policy;
    double packet_bits;

    void run_packet(std::uint64_t seed, std::uint64_t k, BatchAccum& acc) const {
        PacketRng rng(seed, k);
        const Scenario& sc = *scenario;
        const PowerPolicy& pol = *policy;

        acc.packets += 1;
        const double gamma1 = rng.next_exponential(sc.source_link.mean_snr);
        const int n = pol.source_thresholds.mode_for(gamma1);
        if (n < 0) {
            acc.outage += 1;  // no-transmission slot: zero symbols, bits, power
            return;
        }
        acc.sent += 1;

        const double rate_n = sc.table.rate(n);
        const double post1 = pol.power_adaptive ? pol.source_gains[static_cast<std::size_t>(n)] : gamma1;
        const double power1 = pol.power_adaptive
                                  ? sc.p_bar_s * pol.source_gains[static_cast<std::size_t>(n)] / gamma1
                                  : sc.p_bar_s;
        acc.source_energy += power1;
        acc.symbols += packet_bits / rate_n;

        if (!rng.next_bernoulli(per_awgn(sc.table.mode(n), post1))) {
            acc.success1 += 1;
            acc.se_sum += rate_n;
            acc.bits += packet_bits;
            return;
        }
        acc.failed += 1;

        const double gamma2 = rng.next_exponential(sc.relay_link.mean_snr);
        const int m = pol.relay_thresholds.mode_for(gamma2);
        if (m < 0) {
            acc.relay_outage += 1;  // packet dropped: its one retry chance is gone
            return;
        }

        const double rate_m = sc.relay_table.rate(m);
        const double post2 = pol.power_adaptive ? pol.relay_gains[static_cast<std::size_t>(m)] : gamma2;
        const double power2 = pol.power_adaptive
                                  ? sc.p_bar_r * pol.relay_gains[static_cast<std::size_t>(m)] / gamma2
                                  : sc.p_bar_r;
        // A mode-n source slot carries C*R_n packets; each failure demands
        // N_b/R_m relay symbols, i.e. (R_n/R_m)/alpha relay frames per source
        // slot. alpha cancels against the alpha*T_f frame duration, so the
        // accumulated relay time carries no alpha at all.
        const double slot_share = rate_n / rate_m;
        acc.relay_energy += power2 * slot_share;
        acc.relay_slot_time += slot_share;
        acc.symbols += packet_bits / rate_m;

        if (rng.next_bernoulli(per_awgn(sc.relay_table.mode(m), post2))) {
            acc.lost_error += 1;
            return;
        }
        acc.recovered += 1;
        acc.se_sum += rate_n * rate_m / (rate_n + rate_m);
        acc.bits += packet_bits;
    }
};

struct BatchValues {
    double se = 0.0;
    double se_ratio = 0.0;
    double power = 0.0;
    double plr = 0.0;
    double plr_incl = 0.0;
    double slot_ratio = 0.0;
};

BatchValues values_of(const BatchAccum& a, double alpha) {
    BatchValues v;
    const double n = static_cast<double>(a.packets);
    v.se = a.se_sum / n;
    v.se_ratio = a.symbols > 0.0 ? a.bits / a.symbols : 0.0;
    v.power = (a.source_energy + a.relay_energy) / (n + a.relay_slot_time);
    const double sent = static_cast<double>(a.sent);
    v.plr = sent > 0.0 ? static_cast<double>(a.lost_error) / sent : 0.0;
    v.plr_incl = sent > 0.0
                     ? static_cast<double>(a.lost_error + a.relay_outage) / sent
                     : 0.0;
    v.slot_ratio = a.relay_slot_time / alpha / n;
    return v;
}

SimEstimate finalize(const std::vector<BatchAccum>& batches, const SimConfig& config,
                     double alpha) {
    // Fixed reduction order: batch 0, 1, ... regardless of which worker
    // produced each batch.
    BatchAccum total;
    for (const BatchAccum& b : batches) {
        total.se_sum += b.se_sum;
        total.bits += b.bits;
        total.symbols += b.symbols;
        total.source_energy += b.source_energy;
        total.relay_energy += b.relay_energy;
        total.relay_slot_time += b.relay_slot_time;
        total.packets += b.packets;
        total.outage += b.outage;
        total.sent += b.sent;
        total.success1 += b.success1;
        total.failed += b.failed;
        total.relay_outage += b.relay_outage;
        total.recovered += b.recovered;
        total.lost_error += b.lost_error;
    }

    const BatchValues global = values_of(total, alpha);

    // Batch-means standard errors.
    std::array<double, 6> mean{};
    std::array<double, 6> m2{};
    int used = 0;
    std::vector<std::array<double, 6>> rows;
    for (const BatchAccum& b : batches) {
        if (b.packets == 0) continue;
        const BatchValues v = values_of(b, alpha);
        const std::array<double, 6> x{v.se, v.se_ratio, v.power, v.plr, v.plr_incl, v.slot_ratio};
        rows.push_back(x);
        ++used;
        for (int i = 0; i < 6; ++i) {
            const double d = x[static_cast<std::size_t>(i)] - mean[static_cast<std::size_t>(i)];
            mean[static_cast<std::size_t>(i)] += d / used;
            m2[static_cast<std::size_t>(i)] += d * (x[static_cast<std::size_t>(i)] - mean[static_cast<std::size_t>(i)]);
        }
    }
    std::array<double, 6> se{};
    for (int i = 0; i < 6; ++i) {
        se[static_cast<std::size_t>(i)] =
            used > 1 ? std::sqrt(m2[static_cast<std::size_t>(i)] / (used - 1) / used) : 0.0;
    }

    SimEstimate est;
    est.se_per_packet = {global.se, se[0]};
    est.se_ratio_totals = {global.se_ratio, se[1]};
    est.avg_power_ratio_totals = {global.power, se[2]};
    est.realized_plr = {global.plr, se[3]};
    est.realized_plr_incl_outage = {global.plr_incl, se[4]};
    est.slot_ratio_j_over_i = {global.slot_ratio, se[5]};
    est.counts.packets = total.packets;
    est.counts.outage_slots = total.outage;
    est.counts.sent = total.sent;
    est.counts.success_first_try = total.success1;
    est.counts.failed_first_try = total.failed;
    est.counts.recovered_by_relay = total.recovered;
    est.counts.lost_relay_outage = total.relay_outage;
    est.counts.lost_relay_error = total.lost_error;
    est.headline_se = config.estimator_mode == SeEstimatorMode::per_packet_expectation
                          ? global.se
                          : global.se_ratio;
    est.alpha_used = alpha;
    est.batch_values = std::move(rows);
    return est;
}

void check_inputs(const Scenario& scenario, const PowerPolicy& policy, const SimConfig& config) {
    scenario.validate();
    config.validate();
    if (policy.source_thresholds.size() != scenario.num_modes() ||
        policy.relay_thresholds.size() != scenario.num_modes())
        throw ValidationError("policy thresholds do not match the scenario's mode table");
}

}  // namespace

SimEstimate simulate(const Scenario& scenario, const PowerPolicy& policy, const SimConfig& config) {
    check_inputs(scenario, policy, config);
    const double alpha = config.alpha > 0.0 ? config.alpha : scenario.alpha;
    const Kernel kernel{&scenario, &policy, static_cast<double>(scenario.table.packet_bits)};

    const std::uint64_t total = config.packet_budget;
    const int n_batches = static_cast<int>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(config.batches), total));
    std::vector<BatchAccum> batches(static_cast<std::size_t>(n_batches));

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int b = 0; b < n_batches; ++b) {
        const std::uint64_t begin = total * static_cast<std::uint64_t>(b) / static_cast<std::uint64_t>(n_batches);
        const std::uint64_t end = total * (static_cast<std::uint64_t>(b) + 1) / static_cast<std::uint64_t>(n_batches);
        BatchAccum& acc = batches[static_cast<std::size_t>(b)];
        for (std::uint64_t k = begin; k < end; ++k) kernel.run_packet(config.seed, k, acc);
    }

    return finalize(batches, config, alpha);
}

SimEstimate simulate_serial(const Scenario& scenario, const PowerPolicy& policy,
                            const SimConfig& config) {
    check_inputs(scenario, policy, config);
    const double alpha = config.alpha > 0.0 ? config.alpha : scenario.alpha;
    const Kernel kernel{&scenario, &policy, static_cast<double>(scenario.table.packet_bits)};

    const std::uint64_t total = config.packet_budget;
    const int n_batches = static_cast<int>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(config.batches), total));
    std::vector<BatchAccum> batches(static_cast<std::size_t>(n_batches));

    for (std::uint64_t k = 0; k < total; ++k) {
        const int b = static_cast<int>(k * static_cast<std::uint64_t>(n_batches) / total);
        kernel.run_packet(config.seed, k, batches[static_cast<std::size_t>(b)]);
    }

    return finalize(batches, config, alpha);
}

double sim_accounting_power_limit(const Scenario& scenario, const PowerPolicy& policy) {
    const std::vector<double> pi1 = mode_probabilities(scenario.source_link, policy.source_thresholds);
    const std::vector<double> per1 = link_avg_pers(scenario, policy, false);

    double rate_fail = 0.0;  // sum_n R_n PER1_n pi1_n
    for (int n = 0; n < scenario.num_modes(); ++n)
        rate_fail += scenario.table.rate(n) * per1[static_cast<std::size_t>(n)] * pi1[static_cast<std::size_t>(n)];

    double relay_energy = 0.0;  // per source slot, T_f units
    double relay_time = 0.0;
    for (int m = 0; m < scenario.num_modes(); ++m) {
        const double rm = scenario.relay_table.rate(m);
        const double pi = mode_probability(scenario.relay_link, policy.relay_thresholds, m);
        const double mean_power =
            policy.power_adaptive
                ? scenario.p_bar_r * policy.relay_gains[static_cast<std::size_t>(m)] *
                      expected_inverse_snr(scenario.relay_link, policy.relay_thresholds.lower(m),
                                           policy.relay_thresholds.upper(m))
                : scenario.p_bar_r * pi;
        relay_energy += rate_fail * mean_power / rm;
        relay_time += rate_fail * pi / rm;
    }
    return (expected_source_power(scenario, policy) + relay_energy) / (1.0 + relay_time);
}

double sim_accounting_slot_ratio_limit(const Scenario& scenario, const PowerPolicy& policy,
                                       double alpha) {
    const std::vector<double> pi1 = mode_probabilities(scenario.source_link, policy.source_thresholds);
    const std::vector<double> pi2 = mode_probabilities(scenario.relay_link, policy.relay_thresholds);
    const std::vector<double> per1 = link_avg_pers(scenario, policy, false);
    double sum = 0.0;
    for (int n = 0; n < scenario.num_modes(); ++n) {
        for (int m = 0; m < scenario.num_modes(); ++m) {
            sum += scenario.table.rate(n) / scenario.relay_table.rate(m) *
                   per1[static_cast<std::size_t>(n)] * pi2[static_cast<std::size_t>(m)] *
                   pi1[static_cast<std::size_t>(n)];
        }
    }
    return sum / alpha;
}

namespace {

CompareRow make_row(const std::string& metric, const Estimate& sim, double analytic) {
    CompareRow row;
    row.metric = metric;
    row.simulated = sim.value;
    row.stderr_ = sim.stderr_;
    row.analytic = analytic;
    row.sigmas = sim.stderr_ > 0.0 ? std::abs(sim.value - analytic) / sim.stderr_ : kInf;
    row.ok = row.sigmas <= 4.0;
    return row;
}

}  // namespace

CompareReport compare(const Scenario& scenario, const PowerPolicy& policy,
                      const SimConfig& config) {
    CompareReport report;
    report.sim = simulate(scenario, policy, config);
    const double alpha = report.sim.alpha_used;

    const double eta = spectral_efficiency(scenario, policy);
    const double p_prop2 = average_power(scenario, policy, OmegaVariant::prop2);
    const double p_appb = average_power(scenario, policy, OmegaVariant::appendix_b);
    const double p_sim_model = sim_accounting_power_limit(scenario, policy);
    const double ji = sim_accounting_slot_ratio_limit(scenario, policy, alpha);

    // Slot-ratio prediction with the prop2 kernel in place of R_n/R_m.
    const std::vector<double> pi1 = mode_probabilities(scenario.source_link, policy.source_thresholds);
    const std::vector<double> pi2 = mode_probabilities(scenario.relay_link, policy.relay_thresholds);
    const std::vector<double> per1 = link_avg_pers(scenario, policy, false);
    double ji_prop2 = 0.0;
    for (int n = 0; n < scenario.num_modes(); ++n) {
        const double rn = scenario.table.rate(n);
        for (int m = 0; m < scenario.num_modes(); ++m) {
            const double rm = scenario.relay_table.rate(m);
            ji_prop2 += rn * rm / (rn + rm) * per1[static_cast<std::size_t>(n)] *
                        pi2[static_cast<std::size_t>(m)] * pi1[static_cast<std::size_t>(n)];
        }
    }
    ji_prop2 /= alpha;

    // Exact expectation of the headline PLR (relay decoding losses per sent
    // packet): E[PER1 | sent] * sum_m pi2_m PER2_m.
    const std::vector<double> per2 = link_avg_pers(scenario, policy, true);
    double sent_prob = 0.0;
    double fail_rate = 0.0;
    double relay_error_rate = 0.0;
    for (int n = 0; n < scenario.num_modes(); ++n) {
        sent_prob += pi1[static_cast<std::size_t>(n)];
        fail_rate += pi1[static_cast<std::size_t>(n)] * per1[static_cast<std::size_t>(n)];
        relay_error_rate += pi2[static_cast<std::size_t>(n)] * per2[static_cast<std::size_t>(n)];
    }
    const double plr_expected = fail_rate / sent_prob * relay_error_rate;

    report.rows.push_back(make_row("se_per_packet_vs_closed_form", report.sim.se_per_packet, eta));
    report.rows.push_back(make_row("avg_power_vs_prop2", report.sim.avg_power_ratio_totals, p_prop2));
    report.rows.push_back(make_row("avg_power_vs_appendixB", report.sim.avg_power_ratio_totals, p_appb));
    report.rows.push_back(
        make_row("avg_power_vs_sim_accounting_limit", report.sim.avg_power_ratio_totals, p_sim_model));
    report.rows.push_back(make_row("slot_ratio_vs_appendixB", report.sim.slot_ratio_j_over_i, ji));
    report.rows.push_back(make_row("slot_ratio_vs_prop2", report.sim.slot_ratio_j_over_i, ji_prop2));
    report.rows.push_back(
        make_row("plr_excl_relay_outage_vs_expected", report.sim.realized_plr, plr_expected));
    const CompareRow& ji_b = report.rows[4];
    const CompareRow& ji_p = report.rows[5];
    if (ji_b.ok && ji_p.ok)
        report.slot_ratio_verdict = "both";
    else if (ji_b.ok)
        report.slot_ratio_verdict = "appendixB";
    else if (ji_p.ok)
        report.slot_ratio_verdict = "prop2";
    else
        report.slot_ratio_verdict = "none";

    for (const CompareRow& row : report.rows) report.all_ok = report.all_ok && row.ok;
    return report;
}

std::string CompareReport::to_text() const {
    std::ostringstream out;
    out.precision(10);
    out << "packets=" << sim.counts.packets << "\n";
    out << "sent=" << sim.counts.sent << "\n";
    out << "outage_slots=" << sim.counts.outage_slots << "\n";
    out << "success_first_try=" << sim.counts.success_first_try << "\n";
    out << "recovered_by_relay=" << sim.counts.recovered_by_relay << "\n";
    out << "lost_relay_outage=" << sim.counts.lost_relay_outage << "\n";
    out << "lost_relay_error=" << sim.counts.lost_relay_error << "\n";
    out << "headline_se=" << sim.headline_se << "\n";
    for (const CompareRow& row : rows) {
        out << row.metric << ".sim=" << row.simulated << "\n";
        out << row.metric << ".stderr=" << row.stderr_ << "\n";
        out << row.metric << ".analytic=" << row.analytic << "\n";
        out << row.metric << ".sigmas=" << row.sigmas << "\n";
        out << row.metric << ".ok=" << (row.ok ? "1" : "0") << "\n";
    }
    out << "slot_ratio_verdict=" << slot_ratio_verdict << "\n";
    out << "all_ok=" << (all_ok ? "1" : "0") << "\n";
    return out.str();
}

std::string CompareReport::batch_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "batch,se_per_packet,se_ratio_totals,avg_power,plr,plr_incl_outage,slot_ratio\n";
    for (std::size_t i = 0; i < sim.batch_values.size(); ++i) {
        out << i;
        for (double v : sim.batch_values[i]) out << "," << v;
        out << "\n";
    }
    return out.str();
}

}  // namespace carq
