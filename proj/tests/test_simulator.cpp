#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "carq/const_power.hpp"
#include "carq/optimizer.hpp"
#include "carq/simulator.hpp"
#include "test_util.hpp"

using namespace carq;

namespace {

PowerPolicy reference_policy(const Scenario& sc, double p_t1 = 0.056) {
    OptimizerConfig cfg;
    cfg.omega_variant = OmegaVariant::appendix_b;
    return iterate(sc, p_t1, cfg).first;
}

bool estimates_identical(const SimEstimate& a, const SimEstimate& b) {
    return a.se_per_packet.value == b.se_per_packet.value &&
           a.se_per_packet.stderr_ == b.se_per_packet.stderr_ &&
           a.se_ratio_totals.value == b.se_ratio_totals.value &&
           a.avg_power_ratio_totals.value == b.avg_power_ratio_totals.value &&
           a.avg_power_ratio_totals.stderr_ == b.avg_power_ratio_totals.stderr_ &&
           a.realized_plr.value == b.realized_plr.value &&
           a.slot_ratio_j_over_i.value == b.slot_ratio_j_over_i.value &&
           a.counts.sent == b.counts.sent &&
           a.counts.recovered_by_relay == b.counts.recovered_by_relay &&
           a.counts.lost_relay_error == b.counts.lost_relay_error &&
           a.counts.lost_relay_outage == b.counts.lost_relay_outage;
}

}  // namespace

TEST_CASE("determinism and parallel/serial equivalence") {
    const Scenario sc = test::table1_scenario();
    const PowerPolicy pol = reference_policy(sc);
    SimConfig cfg;
    cfg.packet_budget = 200'000;
    cfg.seed = 99;

    const SimEstimate a = simulate(sc, pol, cfg);
    const SimEstimate b = simulate(sc, pol, cfg);
    CHECK(estimates_identical(a, b));

    const SimEstimate serial = simulate_serial(sc, pol, cfg);
    CHECK(estimates_identical(a, serial));

    SimConfig other = cfg;
    other.seed = 100;
    CHECK(!estimates_identical(a, simulate(sc, pol, other)));
}

TEST_CASE("packet conservation") {
    const Scenario sc = test::table1_scenario();
    const PowerPolicy pol = reference_policy(sc);
    SimConfig cfg;
    cfg.packet_budget = 100'000;
    const SimEstimate est = simulate(sc, pol, cfg);

    const SimCounts& c = est.counts;
    CHECK(c.packets == cfg.packet_budget);
    CHECK(c.packets == c.sent + c.outage_slots);
    CHECK(c.sent == c.success_first_try + c.failed_first_try);
    CHECK(c.failed_first_try == c.recovered_by_relay + c.lost_relay_outage + c.lost_relay_error);
    CHECK(est.realized_plr_incl_outage.value >= est.realized_plr.value);
    CHECK(est.se_per_packet.stderr_ > 0.0);
}

TEST_CASE("perfect PER gives zero loss and the rate-weighted draw average") {
    AmcModeTable t = test::reduced_table({2, 4});
    for (auto& m : t.modes) {
        m.fit_a = 1.0;
        m.fit_g = 1e9;  // PER ~ 0 above the floor
    }
    Scenario sc = make_scenario(t, 10.0, 0.0, 1e-3);
    auto [src, rel] = const_power_thresholds(sc.table, sc.relay_table, 0.5, sc.p_loss);
    const PowerPolicy pol = make_const_power_policy(0.5, sc.p_loss, src, rel);

    SimConfig cfg;
    cfg.packet_budget = 400'000;
    const SimEstimate est = simulate(sc, pol, cfg);
    CHECK(est.realized_plr.value == 0.0);
    CHECK(est.counts.failed_first_try == 0);

    const std::vector<double> pi1 = mode_probabilities(sc.source_link, pol.source_thresholds);
    double expect = 0.0;
    for (int n = 0; n < sc.num_modes(); ++n) expect += sc.table.rate(n) * pi1[static_cast<std::size_t>(n)];
    CHECK(std::abs(est.se_per_packet.value - expect) <= 3.0 * est.se_per_packet.stderr_);
}

TEST_CASE("alpha cancels from the power totals and scales the slot ratio") {
    const Scenario sc = test::table1_scenario();
    const PowerPolicy pol = reference_policy(sc);
    SimConfig a3;
    a3.packet_budget = 200'000;
    a3.alpha = 0.3;
    SimConfig a7 = a3;
    a7.alpha = 0.7;

    const SimEstimate e3 = simulate(sc, pol, a3);
    const SimEstimate e7 = simulate(sc, pol, a7);
    CHECK(e3.avg_power_ratio_totals.value == e7.avg_power_ratio_totals.value);
    CHECK(std::abs(e3.avg_power_ratio_totals.value - e7.avg_power_ratio_totals.value) <=
          3.0 * std::max(e3.avg_power_ratio_totals.stderr_, 1e-30));
    CHECK(e3.slot_ratio_j_over_i.value * 0.3 ==
          doctest::Approx(e7.slot_ratio_j_over_i.value * 0.7).epsilon(1e-14));
}

TEST_CASE("estimators converge to the accounting closed forms") {
    const Scenario sc = test::table1_scenario();
    SimConfig cfg;
    cfg.packet_budget = 2'000'000;

    SUBCASE("power-adaptive policy") {
        const PowerPolicy pol = reference_policy(sc);
        const SimEstimate est = simulate(sc, pol, cfg);
        const double eta = spectral_efficiency(sc, pol);
        const double power = sim_accounting_power_limit(sc, pol);
        const double ji = sim_accounting_slot_ratio_limit(sc, pol, est.alpha_used);
        CHECK(std::abs(est.se_per_packet.value - eta) <= 4.0 * est.se_per_packet.stderr_);
        CHECK(std::abs(est.avg_power_ratio_totals.value - power) <=
              4.0 * est.avg_power_ratio_totals.stderr_);
        CHECK(std::abs(est.slot_ratio_j_over_i.value - ji) <=
              4.0 * est.slot_ratio_j_over_i.stderr_);
        // Relay-loss PLR sits at p_loss scaled by the relay-availability mass.
        const double plr_pred = sc.p_loss * (1.0 - mode_probability(sc.relay_link,
                                                                    pol.relay_thresholds, -1));
        CHECK(std::abs(est.realized_plr.value - plr_pred) <= 4.0 * est.realized_plr.stderr_);
    }

    SUBCASE("constant-power policy") {
        auto [src, rel] = const_power_thresholds(sc.table, sc.relay_table, 0.04, sc.p_loss);
        const PowerPolicy pol = make_const_power_policy(0.04, sc.p_loss, src, rel);
        const SimEstimate est = simulate(sc, pol, cfg);
        const double eta = spectral_efficiency(sc, pol);
        const double power = sim_accounting_power_limit(sc, pol);
        CHECK(std::abs(est.se_per_packet.value - eta) <= 4.0 * est.se_per_packet.stderr_);
        CHECK(std::abs(est.avg_power_ratio_totals.value - power) <=
              4.0 * est.avg_power_ratio_totals.stderr_);
    }
}

TEST_CASE("realized PLR at the const-power optimum respects the budget") {
    const Scenario sc = test::table1_scenario();
    const ConstPowerResult res = optimize_const_power(sc, 1e-4, OmegaVariant::appendix_b);
    SimConfig cfg;
    cfg.packet_budget = 2'000'000;
    cfg.seed = 5;
    const SimEstimate est = simulate(sc, res.policy, cfg);
    CHECK(est.realized_plr.value <= sc.p_loss + 3.0 * est.realized_plr.stderr_);
}

TEST_CASE("compare report referees the slot-ratio variants") {
    SUBCASE("N = 1 with rate 2: variants coincide, verdict is both") {
        AmcModeTable t;
        t.packet_bits = 1080;
        AmcMode m;
        m.index = 1;
        m.rate = 2.0;
        m.fit_a = 90.0;
        m.fit_g = 1.0;
        m.fit_gamma_p = 1.2;
        t.modes = {m};
        Scenario sc = make_scenario(t, 9.0, 0.0, 1e-3);
        OptimizerConfig ocfg;
        ocfg.omega_variant = OmegaVariant::appendix_b;
        auto [pol, trace] = iterate(sc, 0.05, ocfg);
        SimConfig cfg;
        cfg.packet_budget = 1'000'000;
        const CompareReport rep = compare(sc, pol, cfg);
        CHECK(rep.slot_ratio_verdict == "both");
    }

    SUBCASE("fault injection: corrupted gain vector raises flags") {
        const Scenario sc = test::table1_scenario();
        PowerPolicy pol = reference_policy(sc);
        for (double& h : pol.source_gains) h *= 1.5;
        SimConfig cfg;
        cfg.packet_budget = 500'000;
        const CompareReport rep = compare(sc, pol, cfg);
        bool se_or_power_flagged = false;
        for (const CompareRow& row : rep.rows) {
            if ((row.metric == "se_per_packet_vs_closed_form" ||
                 row.metric == "avg_power_vs_sim_accounting_limit" ||
                 row.metric == "plr_excl_relay_outage_vs_expected") &&
                !row.ok)
                se_or_power_flagged = true;
        }
        CHECK(se_or_power_flagged);
    }
}

TEST_CASE("compare report renders machine-readable text and batch CSV") {
    const Scenario sc = test::table1_scenario();
    const PowerPolicy pol = reference_policy(sc);
    SimConfig cfg;
    cfg.packet_budget = 50'000;
    const CompareReport rep = compare(sc, pol, cfg);
    const std::string text = rep.to_text();
    CHECK(text.find("se_per_packet_vs_closed_form.sim=") != std::string::npos);
    CHECK(text.find("slot_ratio_verdict=") != std::string::npos);
    const std::string csv = rep.batch_csv();
    CHECK(csv.rfind("batch,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 101);  // header + 100 batches
}
