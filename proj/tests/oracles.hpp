#pragma once

// Independent reference computations used only by the tests.

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace oracle {

using Mat4 = std::array<std::array<double, 4>, 4>;

inline double det3(double a, double b, double c, double d, double e, double f, double g, double h, double i) {
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

/// Laplace expansion along the first row.
inline double cofactor_det4(const Mat4& m) {
    double s = 0.0;
    for (int j = 0; j < 4; ++j) {
        double sub[9];
        int k = 0;
        for (int r = 1; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                if (c != j) sub[k++] = m[r][c];
        const double minor = det3(sub[0], sub[1], sub[2], sub[3], sub[4], sub[5], sub[6], sub[7], sub[8]);
        s += ((j % 2) ? -1.0 : 1.0) * m[0][j] * minor;
    }
    return s;
}

/// Smallest positive root of cos(mu) cosh(mu) = 1, by bisection.
inline double clamped_beam_mu() {
    auto f = [](double mu) { return std::cos(mu) * std::cosh(mu) - 1.0; };
    double lo = 4.0, hi = 5.0;
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (lo + hi);
        if ((f(lo) < 0) == (f(m) < 0)) lo = m;
        else hi = m;
    }
    return 0.5 * (lo + hi);
}

/// int_a^b f by 64-point Gauss-Legendre.
inline double gauss64(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 64>::integrate(f, a, b);
}

/// Quintic on [a, b] with zero end slopes and random values / interior shape.
struct Quintic {
    std::array<double, 6> c{};  // in t = (x - a)/(b - a)
    double a = 0.0, b = 1.0;
    double operator()(double x) const {
        const double t = (x - a) / (b - a);
        double s = 0.0;
        for (int k = 5; k >= 0; --k) s = s * t + c[static_cast<std::size_t>(k)];
        return s;
    }
};

/// c0 = z(a), c1 = 0 forces z'(a) = 0; c2..c5 random with one linear
/// constraint enforcing z'(b) = 0.
inline Quintic random_zero_slope_quintic(std::mt19937_64& rng, double a, double b, double scale = 1.0) {
    std::normal_distribution<double> N(0.0, scale);
    Quintic q;
    q.a = a;
    q.b = b;
    q.c[0] = N(rng);
    q.c[1] = 0.0;
    q.c[3] = N(rng);
    q.c[4] = N(rng);
    q.c[5] = N(rng);
    // z'(1) in t: 2 c2 + 3 c3 + 4 c4 + 5 c5 = 0
    q.c[2] = -(3.0 * q.c[3] + 4.0 * q.c[4] + 5.0 * q.c[5]) / 2.0;
    return q;
}

inline std::vector<double> sample(const std::function<double(double)>& f, double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = f(a + (b - a) * i / (n - 1));
    return v;
}

}  // namespace oracle
