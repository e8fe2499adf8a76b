#include <doctest.h>

#include <cmath>

#include "carq/const_power.hpp"
#include "carq/errors.hpp"
#include "test_util.hpp"

using namespace carq;

TEST_CASE("const_power_thresholds closed form") {
    AmcModeTable t;
    t.packet_bits = 100;
    AmcMode m;
    m.index = 1;
    m.rate = 1.0;
    m.fit_a = std::exp(1.0);
    m.fit_g = 1.0;
    m.fit_gamma_p = 0.1;
    t.modes = {m};

    auto [src, rel] = const_power_thresholds(t, t, std::exp(-3.0), 1e-3);
    CHECK(src.lower(0) == doctest::Approx(4.0).epsilon(1e-12));  // ln(e / e^-3)

    CHECK_THROWS_AS(const_power_thresholds(t, t, 1e-4, 1e-3), ValidationError);
}

TEST_CASE("symmetric split makes both links coincide on a shared table") {
    const AmcModeTable table = test::default_table();
    const double root = std::sqrt(1e-3);
    auto [src, rel] = const_power_thresholds(table, table, root, 1e-3);
    for (int n = 0; n < table.size(); ++n)
        CHECK(src.lower(n) == doctest::Approx(rel.lower(n)).epsilon(1e-14));
}

TEST_CASE("inversion identity wherever the floor is inactive") {
    const AmcModeTable table = test::default_table();
    for (double p_t1 : {0.002, 0.01, 0.05, 0.2, 0.5}) {
        auto [src, rel] = const_power_thresholds(table, table, p_t1, 1e-3);
        const double p_t2 = 1e-3 / p_t1;
        for (int n = 0; n < table.size(); ++n) {
            if (src.lower(n) > table.mode(n).fit_gamma_p * (1.0 + 1e-9))
                CHECK(per_awgn(table.mode(n), src.lower(n)) ==
                      doctest::Approx(p_t1).epsilon(1e-14));
            if (rel.lower(n) > table.mode(n).fit_gamma_p * (1.0 + 1e-9))
                CHECK(per_awgn(table.mode(n), rel.lower(n)) ==
                      doctest::Approx(p_t2).epsilon(1e-14));
        }
    }
}

TEST_CASE("threshold-corner PLR never exceeds the budget") {
    const AmcModeTable table = test::default_table();
    for (double p_t1 : {0.002, 0.05, 0.3, 0.9}) {
        auto [src, rel] = const_power_thresholds(table, table, p_t1, 1e-3);
        for (int n = 0; n < table.size(); ++n) {
            for (int mdx = 0; mdx < table.size(); ++mdx) {
                const double plr = per_awgn(table.mode(n), src.lower(n)) *
                                   per_awgn(table.mode(mdx), rel.lower(mdx));
                CHECK(plr <= 1e-3 * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("optimize_const_power single-mode matches a dense scan") {
    Scenario sc = make_scenario(test::reduced_table({3}), 8.0, 0.0, 1e-3);
    const ConstPowerResult res = optimize_const_power(sc);

    double best = 0.0;
    for (double p = 2e-3; p < 0.999; p += 1e-3) {
        auto [src, rel] = const_power_thresholds(sc.table, sc.relay_table, p, sc.p_loss);
        const PowerPolicy pol = make_const_power_policy(p, sc.p_loss, src, rel);
        best = std::max(best, spectral_efficiency(sc, pol));
    }
    CHECK(std::abs(res.report.spectral_efficiency - best) < 1e-4);
}

TEST_CASE("direct transmission baseline") {
    const Scenario sc = test::table1_scenario();
    const double dt = direct_transmission_se(sc);
    CHECK(dt > 0.0);
    CHECK(dt <= sc.table.max_rate());

    const ConstPowerResult cp = optimize_const_power(sc);
    CHECK(dt <= cp.report.spectral_efficiency);

    Scenario dead = sc;
    dead.source_link.mean_snr = 1e-6;
    CHECK(direct_transmission_se(dead) < 1e-4);

    CHECK(direct_transmission_avg_power(sc) <= sc.p_bar_s);
}

TEST_CASE("const-power optimum stays below the power-adaptive optimum's rate budget") {
    // Constant power spends p_bar_s whenever transmitting, never more.
    const Scenario sc = test::table1_scenario();
    const ConstPowerResult cp = optimize_const_power(sc);
    CHECK(average_power(sc, cp.policy, OmegaVariant::appendix_b) <= sc.p_bar * (1.0 + 1e-9));
}
