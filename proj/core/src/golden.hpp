#pragma once

#include <cmath>
#include <utility>

namespace kreisslab::detail {

// Golden-section maximization on [a, b]. Endpoints are compared as well;
// ties resolve to the smaller abscissa.
template <typename F>
std::pair<double, double> golden_max(F&& f, double a, double b, double tol, int max_iter = 200,
                                     std::size_t* evals = nullptr) {
    constexpr double r = 0.6180339887498949;
    double fa = f(a);
    double fb = f(b);
    double best_x = a;
    double best_f = fa;
    auto consider = [&](double x, double v) {
        if (v > best_f || (v == best_f && x < best_x)) {
            best_f = v;
            best_x = x;
        }
    };
    consider(b, fb);
    double c = b - r * (b - a);
    double d = a + r * (b - a);
    double fc = f(c);
    double fd = f(d);
    consider(c, fc);
    consider(d, fd);
    std::size_t n = 4;
    for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
            consider(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
            consider(d, fd);
        }
        ++n;
    }
    if (evals) *evals += n;
    return {best_x, best_f};
}

} // namespace kreisslab::detail
