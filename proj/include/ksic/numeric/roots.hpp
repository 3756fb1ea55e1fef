#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>

namespace ksic::numeric {

struct Bracket {
    double lo, hi;
    double mid() const { return 0.5 * (lo + hi); }
};

inline int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

/// Bisection on a sign-change bracket until hi - lo <= tol. Only the sign of
/// f is consulted, so f may return scaled values.
template <class F>
Bracket bisect(F&& f, double lo, double hi, double tol, int max_iter = 400) {
    int slo = sign_of(f(lo));
    if (slo == 0) return {lo, lo};
    for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
        const double m = 0.5 * (lo + hi);
        if (m <= lo || m >= hi) break;
        const int sm = sign_of(f(m));
        if (sm == 0) return {m, m};
        if (sm == slo) lo = m;
        else hi = m;
    }
    return {lo, hi};
}

/// Safeguarded Newton on [lo, hi] with f(lo), f(hi) of opposite sign.
template <class F, class DF>
double newton_bisect(F&& f, DF&& df, double lo, double hi, double xtol = 0.0, int max_iter = 200) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    if (f(hi) == 0.0) return hi;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        const double fx = f(x);
        if (fx == 0.0) return x;
        if (sign_of(fx) == sign_of(flo)) { lo = x; flo = fx; }
        else hi = x;
        const double d = df(x);
        double xn = (d != 0.0) ? x - fx / d : lo - 1.0;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        const double tol = std::max(xtol, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(xn));
        if (std::abs(xn - x) <= tol || hi - lo <= tol) return xn;
        x = xn;
    }
    return x;
}

}  // namespace ksic::numeric
