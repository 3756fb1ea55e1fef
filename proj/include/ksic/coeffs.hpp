#pragma once

// Bridge cubic with clamped ends and the boundary-coefficient integrals
//   C_z1 = 2 int kappa_xx^2,  C_z2 = int kappa^2,  C_z3 = 2 int kappa_x^2
// written as quadratic forms in the end values (p, q) = (z(a), z(b)).

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "ksic/errors.hpp"
#include "ksic/numeric/polynomial.hpp"
#include "ksic/numeric/quadrature.hpp"

namespace ksic::coeffs {

/// Cubic on [a, b] in the normalized coordinate t = (x - a)/(b - a).
struct BridgePolynomial {
    double a = 0.0, b = 1.0;
    numeric::Poly in_t;

    double length() const { return b - a; }
    double t_of(double x) const { return (x - a) / (b - a); }

    double operator()(double x) const { return in_t(t_of(x)); }

    double derivative(double x, int order) const {
        numeric::Poly p = in_t;
        double scale = 1.0;
        for (int k = 0; k < order; ++k) {
            p = p.derivative();
            scale /= length();
        }
        return p(t_of(x)) * scale;
    }
};

inline BridgePolynomial bridge_poly(double za, double zb, double a, double b) {
    if (!(b > a)) throw DomainError("bridge_poly: need b > a");
    const double d = zb - za;
    return {a, b, numeric::Poly{za, 0.0, 3.0 * d, -2.0 * d}};
}

/// C(p, q) = a p^2 + b q^2 + c p q
struct QuadForm {
    double a = 0.0, b = 0.0, c = 0.0;
    double operator()(double p, double q) const { return a * p * p + b * q * q + c * p * q; }
};

struct BoundaryCoeffTable {
    double a = 0.0, b = 1.0;
    std::array<QuadForm, 3> C;  ///< C[0] = C_z1, C[1] = C_z2, C[2] = C_z3

    const QuadForm& operator[](int i) const { return C.at(static_cast<std::size_t>(i - 1)); }
};

/// Exact integration of the squared bridge derivatives.
inline BoundaryCoeffTable czi_table(double a, double b) {
    if (!(b > a)) throw DomainError("czi_table: need b > a");
    const double len = b - a;
    const numeric::Poly s{0.0, 0.0, 3.0, -2.0};
    const numeric::Poly phi_p = numeric::Poly{1.0} + (-1.0) * s;
    const numeric::Poly phi_q = s;

    auto form = [&](int order, double factor) {
        numeric::Poly dp = phi_p, dq = phi_q;
        for (int k = 0; k < order; ++k) {
            dp = dp.derivative();
            dq = dq.derivative();
        }
        // d/dx = (1/len) d/dt and dx = len dt
        const double jac = factor * std::pow(len, 1 - 2 * order);
        return QuadForm{jac * (dp * dp).integral01(), jac * (dq * dq).integral01(), 2.0 * jac * (dp * dq).integral01()};
    };
    return {a, b, {form(2, 2.0), form(0, 1.0), form(1, 2.0)}};
}

struct DeltaSplit {
    double delta = 0.0, delta1 = 0.0, delta2 = 0.0;
};

inline DeltaSplit delta_split(double delta) {
    const double m = std::abs(delta);
    return {delta, (m - 2.0 * delta) / 3.0, (4.0 * m - 2.0 * delta) / 3.0};
}

/// Integrals of z^2, z_x^2, z_xx^2 for uniform samples on [a, b].
struct SampledIntegrals {
    double zz = 0.0, zx = 0.0, zxx = 0.0;
};

namespace detail {

inline SampledIntegrals integrals(std::span<const double> z, double h) {
    const auto d1 = numeric::uniform_derivative(z, h, 1);
    const auto d2 = numeric::uniform_derivative(z, h, 2);
    std::vector<double> f0(z.size()), f1(z.size()), f2(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        f0[i] = z[i] * z[i];
        f1[i] = d1[i] * d1[i];
        f2[i] = d2[i] * d2[i];
    }
    return {numeric::simpson(f0, h), numeric::simpson(f1, h), numeric::simpson(f2, h)};
}

inline bool close(double fine, double coarse, double floor) {
    return std::abs(fine - coarse) <= 1e-4 * std::abs(fine) + floor;
}

}  // namespace detail

/// Integrals with a consistency check against every-other-sample data when
/// the sample count allows it.
inline SampledIntegrals sampled_integrals(std::span<const double> z, double a, double b) {
    if (z.size() < 7) throw ResolutionError("sampled_integrals: need at least 7 samples");
    const double h = (b - a) / static_cast<double>(z.size() - 1);
    const SampledIntegrals fine = detail::integrals(z, h);
    if (z.size() % 2 == 1 && (z.size() + 1) / 2 >= 9) {
        std::vector<double> half;
        for (std::size_t i = 0; i < z.size(); i += 2) half.push_back(z[i]);
        const SampledIntegrals coarse = detail::integrals(half, 2.0 * h);
        const double floor = 1e-12 * (1.0 + fine.zz + fine.zx + fine.zxx);
        if (!detail::close(fine.zz, coarse.zz, floor) || !detail::close(fine.zx, coarse.zx, floor) ||
            !detail::close(fine.zxx, coarse.zxx, floor))
            throw ResolutionError("sampled_integrals: derivative quadrature not resolved");
    }
    return fine;
}

/// RHS - LHS of
///   -int z_xx^2 + l1 int z_x^2 <= d1 int z^2 + C_z1 + d2 C_z2 + l1 C_z3
/// for z sampled uniformly on [a, b] with zero end slopes.
inline double lemma4_margin(std::span<const double> z, double a, double b, double lambda1, double delta) {
    const SampledIntegrals I = sampled_integrals(z, a, b);
    const BoundaryCoeffTable T = czi_table(a, b);
    const DeltaSplit d = delta_split(delta);
    const double p = z.front(), q = z.back();
    const double rhs = d.delta1 * I.zz + T[1](p, q) + d.delta2 * T[2](p, q) + lambda1 * T[3](p, q);
    const double lhs = -I.zxx + lambda1 * I.zx;
    return rhs - lhs;
}

/// RHS - LHS of  -int z_xx^2 + lambda int z_x^2 <= -delta_o int z^2  for
/// clamped z (zero values and slopes at both ends).
inline double clamped_margin(std::span<const double> z, double a, double b, double lambda, double delta_o) {
    const SampledIntegrals I = sampled_integrals(z, a, b);
    return -delta_o * I.zz + I.zxx - lambda * I.zx;
}

}  // namespace ksic::coeffs
