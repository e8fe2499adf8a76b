#include <doctest.h>

#include <cmath>

#include "carq/amc.hpp"
#include "carq/errors.hpp"
#include "carq/rng.hpp"
#include "carq/units.hpp"
#include "test_util.hpp"

using namespace carq;

namespace {

AmcMode mode_of(double rate, double a, double g, double gamma_p, int index = 1) {
    AmcMode m;
    m.index = index;
    m.rate = rate;
    m.fit_a = a;
    m.fit_g = g;
    m.fit_gamma_p = gamma_p;
    return m;
}

}  // namespace

TEST_CASE("per_awgn branches") {
    const AmcMode m = mode_of(1.0, std::exp(1.0), 1.0, 1.0);
    CHECK(per_awgn(m, 0.5) == 1.0);  // clamp below gamma_p
    CHECK(per_awgn(m, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(per_awgn(m, 0.0) == 1.0);
}

TEST_CASE("per_awgn is a probability and non-increasing in SNR") {
    PacketRng rng(7, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const AmcMode m = mode_of(1.0, 1.0 + 400.0 * rng.next_uniform(),
                                  0.05 + 8.0 * rng.next_uniform(), 3.0 * rng.next_uniform());
        double prev = 1.0;
        for (double snr = 0.0; snr < 60.0; snr += 0.25) {
            const double p = per_awgn(m, snr);
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            CHECK(p <= prev + 1e-15);
            prev = p;
        }
        CHECK(per_awgn(m, m.fit_gamma_p) <= 1.0);
        CHECK(per_awgn(m, 1e6 / m.fit_g) < 1e-12);
    }
}

TEST_CASE("transcribed mode 1 at 10 dB matches independently re-entered parameters") {
    const AmcModeTable table = test::default_table();
    // Re-entered by hand, not read back from the data file.
    const double a1 = 274.7229;
    const double g1 = 7.9932;
    const double expected = std::min(1.0, a1 * std::exp(-g1 * 10.0));
    CHECK(per_awgn(table.mode(0), 10.0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(table.packet_bits == 1080);
    CHECK(table.size() == 6);
}

TEST_CASE("load_mode_table validates") {
    const char* good = R"({
      "packet_bits": 1080,
      "modes": [
        {"index": 1, "rate_bits_per_symbol": 0.5, "a": 270.0, "g": 8.0, "gamma_p_db": -1.5},
        {"index": 2, "rate_bits_per_symbol": 1.0, "a": 90.0, "g": 3.5, "gamma_p_db": 1.1},
        {"index": 3, "rate_bits_per_symbol": 1.5, "a": 67.0, "g": 1.7, "gamma_p_db": 4.0},
        {"index": 4, "rate_bits_per_symbol": 2.25, "a": 50.0, "g": 0.66, "gamma_p_db": 7.7},
        {"index": 5, "rate_bits_per_symbol": 3.0, "a": 53.0, "g": 0.38, "gamma_p_db": 10.2}
      ]})";
    const AmcModeTable table = load_mode_table(good);
    CHECK(table.size() == 5);
    CHECK(table.mode(3).fit_gamma_p == doctest::Approx(db_to_linear(7.7)));

    const char* non_increasing = R"({
      "packet_bits": 1080,
      "modes": [
        {"index": 1, "rate_bits_per_symbol": 1.0, "a": 270.0, "g": 8.0, "gamma_p_db": -1.5},
        {"index": 2, "rate_bits_per_symbol": 0.5, "a": 90.0, "g": 3.5, "gamma_p_db": 1.1}
      ]})";
    CHECK_THROWS_WITH_AS(load_mode_table(non_increasing), doctest::Contains("mode 2"),
                         ValidationError);

    CHECK_THROWS_AS(load_mode_table("{ not json"), ParseError);
    CHECK_THROWS_AS(load_mode_table(R"({"packet_bits": 0, "modes": []})"), ValidationError);

    const char* bad_index = R"({
      "packet_bits": 10,
      "modes": [{"index": 2, "rate_bits_per_symbol": 1.0, "a": 2.0, "g": 1.0, "gamma_p_db": 0.0}]})";
    CHECK_THROWS_AS(load_mode_table(bad_index), ValidationError);
}

TEST_CASE("seam warning fires exactly when the PER branches disagree at gamma_p") {
    // a*exp(-g*gamma_p) = 1.2 at gamma_p = 1: branch values disagree at the seam.
    const char* mismatched = R"({
      "packet_bits": 100,
      "modes": [{"index": 1, "rate_bits_per_symbol": 1.0, "a": 3.2619276, "g": 1.0, "gamma_p_db": 0.0}]})";
    TableWarnings w1;
    load_mode_table(mismatched, &w1);
    REQUIRE(w1.seam_mismatch_modes.size() == 1);
    CHECK(w1.seam_mismatch_modes[0] == 1);

    // a*exp(-g*gamma_p) = 0.8: consistent seam, no warning.
    const char* consistent = R"({
      "packet_bits": 100,
      "modes": [{"index": 1, "rate_bits_per_symbol": 1.0, "a": 2.1746185, "g": 1.0, "gamma_p_db": 0.0}]})";
    TableWarnings w2;
    load_mode_table(consistent, &w2);
    CHECK(w2.seam_mismatch_modes.empty());
}

TEST_CASE("practical-range check on the shipped table") {
    const AmcModeTable table = test::default_table();
    // Holds comfortably at small target PERs...
    CHECK(practical_range_violations(table, 0.001).empty());
    CHECK(practical_range_violations(table, 0.01).empty());
    // ...but the mode-1/mode-2 slope ordering inverts above roughly 0.035.
    const std::vector<int> bad = practical_range_violations(table, 0.1);
    REQUIRE(!bad.empty());
    CHECK(bad[0] == 2);
}
