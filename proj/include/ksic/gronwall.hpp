#pragma once

// Bounds for V1 on windows where w is not measured:
//   dV1/dt <= 2 delta1 V1 + u2 dgamma/dt + C u2^2,   gamma = int_0^Y w.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "ksic/errors.hpp"
#include "ksic/numeric/quadrature.hpp"

namespace ksic::gronwall {

/// V(t) <= alpha(t) + int_{t0}^t alpha(s) beta(s) exp(int_s^t beta) ds.
inline double gronwall_bound(const std::function<double(double)>& alpha, const std::function<double(double)>& beta, double t0,
                             double t, std::size_t n = 2048) {
    if (!(t >= t0)) throw DomainError("gronwall_bound: t < t0");
    if (t == t0) return alpha(t0);
    if (n < 2) n = 2;
    const double h = (t - t0) / static_cast<double>(n);
    std::vector<double> a(n + 1), b(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double s = t0 + h * static_cast<double>(i);
        a[i] = alpha(s);
        b[i] = beta(s);
    }
    const auto B = numeric::cumulative_integral(b, h);
    std::vector<double> f(n + 1);
    for (std::size_t i = 0; i <= n; ++i) f[i] = a[i] * b[i] * std::exp(B[n] - B[i]);
    return a[n] + numeric::simpson(f, h);
}

struct GronwallData {
    double t0 = 0.0;
    double T = 0.0;
    std::vector<double> u2;  ///< samples on t0 + i T / (size - 1), linear in between
    double delta1 = 0.0, delta2 = 0.0, C = 0.0, P = 0.0;

    std::size_t panels() const { return u2.empty() ? 0 : u2.size() - 1; }
    double h() const { return T / static_cast<double>(panels()); }

    void validate() const {
        if (u2.size() < 3) throw DomainError("GronwallData: need at least 3 samples");
        if (!(T > 0.0)) throw DomainError("GronwallData: horizon must be positive");
        if (!(C >= 0.0)) throw DomainError("GronwallData: C must be >= 0");
    }

    /// Largest |u2| over the samples divided by P; the Property-1 bound
    /// requires this to be at most the latched value.
    double u2_over_P() const {
        double m = 0.0;
        for (double x : u2) m = std::max(m, std::abs(x));
        return m / P;
    }
};

/// Bound on V1 at every sample time of data.u2, from V1(t0) = V1_0.
/// alpha(t) = 2 e^{2 d1 (t - t0)} V1_0 + 2 C int u2 g + 2 u2(t)^2
///            + 2 |g(t, t0)| sqrt(V1_0) + 1/2 int beta,
/// g(t, tau) = e^{2 d1 (t - tau)} u2(tau), beta(t, tau) = 2 |dg/dtau|.
inline std::vector<double> lemma12_bound(const GronwallData& data, double V1_0) {
    data.validate();
    if (!(V1_0 >= 0.0)) throw DomainError("lemma12_bound: V1_0 must be >= 0");
    const std::size_t n = data.panels();
    const double h = data.h();
    const double d1 = data.delta1;
    const auto& u = data.u2;

    std::vector<double> du(n + 1);
    du[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    du[n] = (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * h);
    for (std::size_t i = 1; i < n; ++i) du[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);

    // beta(t, tau) = e^{2 d1 (t - t0)} b(tau) and the C integral factor the same way
    std::vector<double> e(n + 1), b(n + 1), q(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double s = h * static_cast<double>(i);
        e[i] = std::exp(2.0 * d1 * s);
        b[i] = 2.0 / e[i] * std::abs(du[i] - 2.0 * d1 * u[i]);
        q[i] = u[i] * u[i] / e[i];
    }
    const auto Bc = numeric::cumulative_integral(b, h);
    const auto Qc = numeric::cumulative_integral(q, h);

    std::vector<double> alpha(n + 1);
    const double root = std::sqrt(V1_0);
    for (std::size_t i = 0; i <= n; ++i)
        alpha[i] = 2.0 * e[i] * V1_0 + 2.0 * data.C * e[i] * Qc[i] + 2.0 * u[i] * u[i] + 2.0 * e[i] * std::abs(u[0]) * root +
                   0.5 * e[i] * Bc[i];

    std::vector<double> bound(n + 1), f(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        for (std::size_t j = 0; j <= k; ++j) f[j] = alpha[j] * e[k] * b[j] * std::exp(e[k] * (Bc[k] - Bc[j]));
        bound[k] = alpha[k] + numeric::simpson(std::span<const double>(f.data(), k + 1), h);
    }
    return bound;
}

struct EnvelopeParams {
    double delta1 = 0.0, delta2 = 0.0, C = 0.0, P = 0.0;
};

struct EnvelopeReport {
    double value = 0.0;   ///< the envelope V1-bar
    double alpha_bar = 0.0;
    double beta1 = 0.0;
    double G1 = 0.0;      ///< sup of g1 on [0, T]
    double M1 = 0.0;
    double M2 = 0.0;
    double sup_g2 = 0.0, sup_g3 = 0.0;
    double M1_at_zero = 0.0;          ///< g2(0) = 2 P^2 + P
    double M1_limit_remark = 0.0;     ///< 4 P^2 + P, the small-T value quoted alongside
};

namespace detail {

inline double g1(double s, const EnvelopeParams& p) { return (2.0 + p.P) * std::exp(2.0 * p.delta1 * s); }

/// sup of e^{2 d1 (t - tau)} over tau in [t0, t0 + s]
inline double e_plus(double s, const EnvelopeParams& p) { return std::exp(2.0 * std::max(p.delta1, 0.0) * s); }

inline double g2(double s, const EnvelopeParams& p) {
    return 2.0 * p.C * e_plus(s, p) * p.P * p.P * s + 2.0 * p.P * p.P + std::exp(2.0 * p.delta1 * s) * p.P;
}

/// Bound on int |dg/dtau| per unit latched value: 2 delta2 P e^{2 d1 s} s.
inline double g3(double s, const EnvelopeParams& p) { return 2.0 * p.P * p.delta2 * e_plus(s, p) * s; }

inline double h1(double s, const EnvelopeParams& p) { return 4.0 * p.delta2 * p.P * std::exp(2.0 * p.delta1 * s); }

/// Sup over [0, T]: at an endpoint when f is monotone (delta1 >= 0),
/// otherwise on a 10^4-point grid plus both endpoints.
template <class F>
double sup_on(F&& f, double T, bool monotone) {
    if (monotone || T == 0.0) return std::max(f(0.0), f(T));
    double m = std::max(f(0.0), f(T));
    const int n = 10000;
    for (int i = 1; i < n; ++i) m = std::max(m, f(T * i / n));
    return m;
}

}  // namespace detail

/// V1(t) <= V1-bar(T, V1(t0), latched) on [t0, t0 + T] with
///   alpha-bar = G1 V1(t0) + M1 (latched^2 + latched),  beta1 = M2 latched,
///   V1-bar    = alpha-bar (1 + T beta1 e^{beta1 T}).
inline EnvelopeReport lemma13_envelope(double T, double V1_0, double latched, const EnvelopeParams& p) {
    if (!(T >= 0.0)) throw DomainError("lemma13_envelope: T must be >= 0");
    if (!(V1_0 >= 0.0) || !(latched >= 0.0)) throw DomainError("lemma13_envelope: arguments must be >= 0");
    const bool mono = p.delta1 >= 0.0;
    EnvelopeReport r;
    r.G1 = detail::sup_on([&](double s) { return detail::g1(s, p); }, T, mono);
    r.sup_g2 = detail::sup_on([&](double s) { return detail::g2(s, p); }, T, mono);
    r.sup_g3 = detail::sup_on([&](double s) { return detail::g3(s, p); }, T, mono);
    r.M1 = std::max(r.sup_g2, r.sup_g3);
    r.M2 = detail::sup_on([&](double s) { return detail::h1(s, p); }, T, mono);
    r.M1_at_zero = detail::g2(0.0, p);
    r.M1_limit_remark = 4.0 * p.P * p.P + p.P;
    r.alpha_bar = r.G1 * V1_0 + r.M1 * (latched * latched + latched);
    r.beta1 = r.M2 * latched;
    r.value = r.alpha_bar * (1.0 + T * r.beta1 * std::exp(r.beta1 * T));
    return r;
}

}  // namespace ksic::gronwall
