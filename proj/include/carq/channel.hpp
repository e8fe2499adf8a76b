#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "carq/amc.hpp"

namespace carq {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Exponential integral E1(x) = int_x^inf exp(-t)/t dt, x > 0.
// Power series below x = 1, modified-Lentz continued fraction above.
double expint_e1(double x);

// Adaptive Gauss-Kronrod (G7,K15) quadrature on a finite interval.
// Subdivides until |K15 - G7| <= max(abs_tol, rel_tol*|I|) per panel.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double abs_tol = 1e-12, double rel_tol = 1e-10);

// One fading link: exponential (Rayleigh-power) SNR with the given mean.
struct LinkModel {
    double mean_snr = 0.0;  // linear
    std::string label;
};

// Mode-switching levels G[0] < G[1] < ... < G[N-1] for modes 1..N.
// Mode 0 (outage) is [0, G[0]); mode N's region extends to infinity.
struct Thresholds {
    std::vector<double> levels;

    int size() const { return static_cast<int>(levels.size()); }
    double lower(int n) const { return levels[static_cast<std::size_t>(n)]; }
    double upper(int n) const {
        return n + 1 < size() ? levels[static_cast<std::size_t>(n + 1)] : kInf;
    }
    // Mode index 0..N-1 for a non-outage SNR, -1 for outage.
    int mode_for(double snr) const;
    // Throws ValidationError unless 0 < G[0] < G[1] < ... (strict).
    void validate() const;
};

// P{ SNR in mode-n region }. n = -1 (or 0 <= n < N) selects outage or a
// transmission mode; closed form of the exponential CDF.
double mode_probability(const LinkModel& link, const Thresholds& th, int n);

// All transmission-mode probabilities pi_1..pi_N (outage excluded).
std::vector<double> mode_probabilities(const LinkModel& link, const Thresholds& th);

// Conditional mean of per_awgn(mode, snr) given SNR in [lower, upper), under
// constant transmit power (post-adaptation SNR equals the channel SNR).
// Closed form; integrates the clamped PER exactly, splitting at the seam.
double avg_per_constant_power(const LinkModel& link, const AmcMode& mode,
                              double lower, double upper);

// int_lower^upper (1/x) p(x) dx for the link's exponential density.
// Special-function route: (E1(lo/mean) - E1(hi/mean)) / mean.
double expected_inverse_snr(const LinkModel& link, double lower, double upper);

// Same integral by adaptive quadrature; the two routes must agree to
// ~1e-8 relative and tests enforce that.
double expected_inverse_snr_quadrature(const LinkModel& link, double lower, double upper);

}  // namespace carq
