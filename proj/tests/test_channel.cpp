#include <doctest.h>

#include <cmath>

#include "carq/channel.hpp"
#include "carq/const_power.hpp"
#include "carq/errors.hpp"
#include "carq/rng.hpp"
#include "test_util.hpp"

using namespace carq;

namespace {

// Quadrature of the PER curve against the exponential density; independent
// of the closed form under test.
double avg_per_by_quadrature(const LinkModel& link, const AmcMode& mode, double lo, double hi) {
    const double mean = link.mean_snr;
    const double hi_eff = std::isinf(hi) ? std::max(lo, 50.0 * mean) + 50.0 * mean : hi;
    const auto integrand = [&](double x) {
        return per_awgn(mode, x) * std::exp(-x / mean) / mean;
    };
    // Split at the PER seam where the integrand kinks.
    const double seam = std::max(mode.fit_gamma_p, mode.unit_per_snr());
    double mass = 0.0;
    if (seam > lo && seam < hi_eff) {
        mass = integrate(integrand, lo, seam) + integrate(integrand, seam, hi_eff);
    } else {
        mass = integrate(integrand, lo, hi_eff);
    }
    const double pi = std::exp(-lo / mean) - (std::isinf(hi) ? 0.0 : std::exp(-hi / mean));
    return mass / pi;
}

}  // namespace

TEST_CASE("exponential integral reference values") {
    CHECK(expint_e1(1.0) == doctest::Approx(0.21938393439552026).epsilon(1e-12));
    CHECK(expint_e1(0.5) == doctest::Approx(0.55977359477616081).epsilon(1e-12));
    CHECK(expint_e1(2.0) == doctest::Approx(0.04890051070806112).epsilon(1e-12));
    CHECK(expint_e1(kInf) == 0.0);
    CHECK_THROWS_AS(expint_e1(0.0), NumericalError);
    // Continuity across the series / continued-fraction switch at 1.0.
    CHECK(expint_e1(1.0 - 1e-9) == doctest::Approx(expint_e1(1.0 + 1e-9)).epsilon(1e-7));
}

TEST_CASE("mode probabilities: closed form, CDF arithmetic, total mass") {
    LinkModel link{1.0, "test"};
    Thresholds th;
    th.levels = {std::log(2.0)};
    CHECK(mode_probability(link, th, -1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(mode_probability(link, th, 0) == doctest::Approx(0.5).epsilon(1e-14));

    PacketRng rng(11, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        LinkModel l{0.1 + 40.0 * rng.next_uniform(), "r"};
        Thresholds t;
        double level = 0.0;
        const int n = 1 + static_cast<int>(rng.next_uniform() * 8);
        for (int i = 0; i < n; ++i) {
            level += 0.01 + 10.0 * rng.next_uniform();
            t.levels.push_back(level);
        }
        double total = mode_probability(l, t, -1);
        for (int i = 0; i < n; ++i) total += mode_probability(l, t, i);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }

    CHECK_THROWS_AS(mode_probability(link, th, 1), ValidationError);
}

TEST_CASE("mode probability agrees with quadrature of the density") {
    PacketRng rng(13, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const LinkModel link{0.2 + 30.0 * rng.next_uniform(), "q"};
        const double lo = 0.05 + 5.0 * rng.next_uniform();
        const double hi = lo + 0.1 + 20.0 * rng.next_uniform();
        Thresholds th;
        th.levels = {lo, hi};
        const double closed = mode_probability(link, th, 0);
        const double quad = integrate(
            [&](double x) { return std::exp(-x / link.mean_snr) / link.mean_snr; }, lo, hi);
        CHECK(closed == doctest::Approx(quad).epsilon(1e-10));
    }
}

TEST_CASE("avg_per_constant_power closed form") {
    const AmcModeTable table = test::default_table();
    const LinkModel link{10.0, "sd"};

    SUBCASE("interval entirely below gamma_p clamps to 1") {
        const AmcMode& m = table.mode(5);  // gamma_p ~ 39.6 linear
        CHECK(avg_per_constant_power(link, m, 1.0, 5.0) == 1.0);
    }

    SUBCASE("weak fit approaches 1 from below") {
        AmcMode m;
        m.index = 1;
        m.rate = 1.0;
        m.fit_a = 1.0;
        m.fit_g = 1e-9;
        m.fit_gamma_p = 0.0;
        const double v = avg_per_constant_power(link, m, 0.5, 20.0);
        CHECK(v < 1.0);
        CHECK(v > 1.0 - 1e-6);
    }

    SUBCASE("matches quadrature on the shipped table with inversion thresholds") {
        auto [src, rel] = const_power_thresholds(table, table, 0.05, 1e-3);
        for (int n = 0; n < table.size(); ++n) {
            const double closed =
                avg_per_constant_power(link, table.mode(n), src.lower(n), src.upper(n));
            const double quad =
                avg_per_by_quadrature(link, table.mode(n), src.lower(n), src.upper(n));
            CHECK(closed == doctest::Approx(quad).epsilon(1e-8));
        }
    }

    SUBCASE("bounded by the endpoint PER values") {
        PacketRng rng(17, 0);
        for (int trial = 0; trial < 300; ++trial) {
            const AmcMode& m = table.mode(static_cast<int>(rng.next_uniform() * 6));
            const double lo = 0.05 + 30.0 * rng.next_uniform();
            const double hi = lo * (1.0 + 3.0 * rng.next_uniform());
            const double v = avg_per_constant_power(link, m, lo, hi);
            CHECK(v <= per_awgn(m, lo) + 1e-12);
            CHECK(v >= per_awgn(m, hi) - 1e-12);
        }
    }
}

TEST_CASE("expected_inverse_snr: reference value, edge cases, scaling") {
    const LinkModel unit{1.0, "u"};
    CHECK(expected_inverse_snr(unit, 1.0, kInf) ==
          doctest::Approx(0.21938393439552026).epsilon(1e-12));
    CHECK(expected_inverse_snr(unit, 3.0, 3.0) == 0.0);
    CHECK_THROWS_AS(expected_inverse_snr(unit, 0.0, 1.0), NumericalError);

    // Change of variables: value(mean, a, b) = value(1, a/mean, b/mean) / mean.
    const LinkModel scaled{8.0, "s"};
    const double lhs = expected_inverse_snr(scaled, 2.0, 11.0);
    const double rhs = expected_inverse_snr(unit, 2.0 / 8.0, 11.0 / 8.0) / 8.0;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("expected_inverse_snr monotone in its limits") {
    const LinkModel link{5.0, "m"};
    double prev = expected_inverse_snr(link, 0.5, 10.0);
    for (double lo = 0.6; lo < 5.0; lo += 0.5) {
        const double v = expected_inverse_snr(link, lo, 10.0);
        CHECK(v < prev);
        prev = v;
    }
    prev = expected_inverse_snr(link, 1.0, 2.0);
    for (double hi = 3.0; hi < 30.0; hi += 2.0) {
        const double v = expected_inverse_snr(link, 1.0, hi);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("special-function and quadrature routes agree on 1000 random intervals") {
    PacketRng rng(23, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const LinkModel link{0.1 + 50.0 * rng.next_uniform(), "x"};
        const double lo = 0.01 + 20.0 * rng.next_uniform();
        const bool infinite = rng.next_bernoulli(0.25);
        const double hi = infinite ? kInf : lo + 0.05 + 40.0 * rng.next_uniform();
        const double a = expected_inverse_snr(link, lo, hi);
        const double b = expected_inverse_snr_quadrature(link, lo, hi);
        worst = std::max(worst, std::abs(a - b) / std::abs(a));
    }
    CHECK(worst < 1e-8);
}
