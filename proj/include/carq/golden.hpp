#pragma once

#include <cmath>
#include <functional>

namespace carq {

struct GoldenResult {
    double x = 0.0;
    double value = 0.0;
    int evaluations = 0;
};

// Golden-section maximization of a unimodal f over (lo, hi), run in log
// space (a monotone reparametrization preserves quasiconcavity). Stops when
// the bracket width in the original variable drops below tol_x.
inline GoldenResult golden_max_log(const std::function<double(double)>& f, double lo, double hi,
                                   double tol_x, int max_iter = 200) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::log(lo);
    double b = std::log(hi);
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(std::exp(c));
    double fd = f(std::exp(d));
    int evals = 2;

    GoldenResult best;
    best.x = fc >= fd ? std::exp(c) : std::exp(d);
    best.value = std::max(fc, fd);

    for (int i = 0; i < max_iter && std::exp(b) - std::exp(a) > tol_x; ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(std::exp(d));
        }
        ++evals;
        if (fc > best.value) { best.value = fc; best.x = std::exp(c); }
        if (fd > best.value) { best.value = fd; best.x = std::exp(d); }
    }
    best.evaluations = evals;
    return best;
}

}  // namespace carq
