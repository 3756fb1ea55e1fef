#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace ksic::numeric {

/// Dense polynomial, c[k] multiplies t^k.
struct Poly {
    std::vector<double> c;

    Poly() = default;
    Poly(std::initializer_list<double> coeffs) : c(coeffs) {}
    explicit Poly(std::vector<double> coeffs) : c(std::move(coeffs)) {}

    double operator()(double t) const {
        double s = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) s = s * t + c[k];
        return s;
    }

    Poly derivative() const {
        if (c.size() <= 1) return Poly{0.0};
        std::vector<double> d(c.size() - 1);
        for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = static_cast<double>(k) * c[k];
        return Poly(std::move(d));
    }

    /// int_0^1 p(t) dt
    double integral01() const {
        double s = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) s += c[k] / static_cast<double>(k + 1);
        return s;
    }

    friend Poly operator*(const Poly& a, const Poly& b) {
        if (a.c.empty() || b.c.empty()) return Poly{0.0};
        std::vector<double> r(a.c.size() + b.c.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.c.size(); ++i)
            for (std::size_t j = 0; j < b.c.size(); ++j) r[i + j] += a.c[i] * b.c[j];
        return Poly(std::move(r));
    }

    friend Poly operator*(double s, Poly p) {
        for (double& v : p.c) v *= s;
        return p;
    }

    friend Poly operator+(Poly a, const Poly& b) {
        if (a.c.size() < b.c.size()) a.c.resize(b.c.size(), 0.0);
        for (std::size_t k = 0; k < b.c.size(); ++k) a.c[k] += b.c[k];
        return a;
    }
};

}  // namespace ksic::numeric
