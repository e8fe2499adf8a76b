#include "carq/channel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "carq/errors.hpp"

namespace carq {

double expint_e1(double x) {
    if (x <= 0.0) throw NumericalError("expint_e1 requires x > 0");
    if (std::isinf(x)) return 0.0;
    if (x <= 1.0) {
        // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
        constexpr double kEulerGamma = 0.57721566490153286061;
        double sum = -kEulerGamma - std::log(x);
        double term = 1.0;
        for (int k = 1; k <= 64; ++k) {
            term *= -x / k;
            const double add = -term / k;
            sum += add;
            if (std::abs(add) < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    // Continued fraction E1(x) = e^-x / (x+1- 1/(x+3- 4/(x+5- 9/(...)))),
    // evaluated with the modified Lentz algorithm.
    constexpr double kTiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 200; ++i) {
        const double a = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x);
}

namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct PanelResult {
    double kronrod;
    double err;
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - hw * kXgk[i]);
        fv[14 - i] = f(c + hw * kXgk[i]);
    }
    fv[7] = f(c);
    double resk = 0.0;
    for (int i = 0; i < 7; ++i) resk += kWgk[i] * (fv[i] + fv[14 - i]);
    resk += kWgk[7] * fv[7];
    double resg = 0.0;
    for (int i = 0; i < 3; ++i) resg += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    resg += kWg[3] * fv[7];
    return {resk * hw, std::abs(resk - resg) * hw};
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double rel_tol, int depth, double whole_estimate) {
    const PanelResult r = gk15(f, a, b);
    const double tol = std::max(abs_tol, rel_tol * std::abs(whole_estimate));
    if (r.err <= tol || depth >= 48) return r.kronrod;
    const double mid = 0.5 * (a + b);
    return integrate_adaptive(f, a, mid, abs_tol * 0.5, rel_tol, depth + 1, whole_estimate) +
           integrate_adaptive(f, mid, b, abs_tol * 0.5, rel_tol, depth + 1, whole_estimate);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double abs_tol, double rel_tol) {
    if (!(lo < hi)) return 0.0;
    const PanelResult first = gk15(f, lo, hi);
    return integrate_adaptive(f, lo, hi, abs_tol, rel_tol, 0, first.kronrod);
}

int Thresholds::mode_for(double snr) const {
    if (snr < levels.front()) return -1;
    auto it = std::upper_bound(levels.begin(), levels.end(), snr);
    return static_cast<int>(it - levels.begin()) - 1;
}

void Thresholds::validate() const {
    if (levels.empty()) throw ValidationError("threshold vector is empty");
    if (!(levels.front() > 0.0))
        throw ValidationError("first mode switching level must be positive");
    for (std::size_t i = 1; i < levels.size(); ++i) {
        if (!(levels[i] > levels[i - 1])) {
            std::ostringstream msg;
            msg << "mode switching levels must be strictly increasing (level " << i + 1
                << " = " << levels[i] << " <= level " << i << " = " << levels[i - 1] << ")";
            throw ValidationError(msg.str());
        }
    }
}

double mode_probability(const LinkModel& link, const Thresholds& th, int n) {
    if (n < -1 || n >= th.size()) throw ValidationError("mode index out of range");
    const double inv_mean = 1.0 / link.mean_snr;
    if (n == -1) return 1.0 - std::exp(-th.levels.front() * inv_mean);
    const double lo = th.lower(n);
    const double hi = th.upper(n);
    const double tail = std::isinf(hi) ? 0.0 : std::exp(-hi * inv_mean);
    return std::exp(-lo * inv_mean) - tail;
}

std::vector<double> mode_probabilities(const LinkModel& link, const Thresholds& th) {
    std::vector<double> pi(static_cast<std::size_t>(th.size()));
    for (int n = 0; n < th.size(); ++n) pi[static_cast<std::size_t>(n)] = mode_probability(link, th, n);
    return pi;
}

double avg_per_constant_power(const LinkModel& link, const AmcMode& mode,
                              double lower, double upper) {
    const double mean = link.mean_snr;
    const double pi = std::exp(-lower / mean) - (std::isinf(upper) ? 0.0 : std::exp(-upper / mean));
    if (pi <= 0.0) return per_awgn(mode, lower);

    // per_awgn == 1 below the seam, a*exp(-g x) above it.
    const double seam = std::max(mode.fit_gamma_p, mode.unit_per_snr());

    double mass = 0.0;
    const double clamp_hi = std::min(upper, std::max(lower, seam));
    if (clamp_hi > lower)
        mass += std::exp(-lower / mean) - std::exp(-clamp_hi / mean);

    const double lo2 = std::max(lower, seam);
    if (std::isinf(upper) || upper > lo2) {
        const double k = mode.fit_g + 1.0 / mean;
        const double tail = std::isinf(upper) ? 0.0 : std::exp(-k * upper);
        mass += mode.fit_a / (1.0 + mode.fit_g * mean) * (std::exp(-k * lo2) - tail);
    }
    return std::min(1.0, mass / pi);
}

double expected_inverse_snr(const LinkModel& link, double lower, double upper) {
    if (lower <= 0.0)
        throw NumericalError("expected_inverse_snr diverges at lower = 0; thresholds must be positive");
    if (!(lower < upper)) return 0.0;
    const double mean = link.mean_snr;
    const double hi_term = std::isinf(upper) ? 0.0 : expint_e1(upper / mean);
    return (expint_e1(lower / mean) - hi_term) / mean;
}

double expected_inverse_snr_quadrature(const LinkModel& link, double lower, double upper) {
    if (lower <= 0.0)
        throw NumericalError("expected_inverse_snr diverges at lower = 0; thresholds must be positive");
    if (!(lower < upper)) return 0.0;
    const double mean = link.mean_snr;
    // Exponential tail beyond ~50 means is below any tolerance in play.
    const double hi = std::isinf(upper) ? std::max(lower, 50.0 * mean) + 50.0 * mean
                                        : upper;
    // Substituting x = e^u removes the 1/x weight, so panels near a small
    // lower limit no longer dominate the error budget. Relative-only control
    // keeps small-valued integrals (large lower/mean) at full precision.
    const auto f = [&](double u) { return std::exp(-std::exp(u) / mean) / mean; };
    return integrate(f, std::log(lower), std::log(hi), 0.0, 1e-11);
}

}  // namespace carq
