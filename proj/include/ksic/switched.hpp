#pragma once

// Finite-dimensional comparison systems for (V1, V2).
//   Sigma3: I1: V1' = -alpha1 V1, V2' = 2 delta1 V2;  I2: V1' = 2 delta1 V1, V2' = -alpha2 V2
//   Sigma4: I1 as Sigma3;  I2: V2' <= -alpha2^{1/3} V2 + b0, V1 bounded by the Gronwall envelope

#include <cmath>
#include <vector>

#include "ksic/control.hpp"
#include "ksic/errors.hpp"
#include "ksic/gronwall.hpp"

namespace ksic::switched {

struct SwitchedParams {
    double alpha1 = 1.0, alpha2 = 1.0;
    double delta1 = 0.0, delta2 = 0.0;
};

/// alpha1 > 2 delta2 Tbar2 / Tbar1 and alpha2 > 2 delta2 Tbar1 / Tbar2 (strict).
inline bool check_conditions(double alpha1, double alpha2, double delta2, double tbar1, double tbar2) {
    if (!(tbar1 > 0.0) || !(tbar2 > 0.0)) throw DomainError("check_conditions: dwell times must be positive");
    return alpha1 > 2.0 * delta2 * tbar2 / tbar1 && alpha2 > 2.0 * delta2 * tbar1 / tbar2;
}

struct CertificateReport {
    bool conditions_ok = false;
    double rate_beta = 0.0;
    double overshoot_kappa = 0.0;            ///< e^{(2 max(delta1, 0) + beta)(Tbar1 + Tbar2)}
    double overshoot_kappa_displayed = 0.0;  ///< e^{(2 delta1 + beta)(Tbar1 + Tbar2)}
    // controller 2
    double b0 = 0.0;
    double M = 0.0;
    double residual_bound = 0.0;  ///< M b0 alpha2^{-1/3}
    double q = 0.0, p = 0.0;      ///< per-period recursion W <- q W + p
    double q_simplified = 0.0, p_simplified = 0.0;
    double margin = 0.0;          ///< 2 delta1 Tbar1 - alpha2^{1/3} Tbar2, must be <= -2
};

inline CertificateReport theorem1_certificate(const SwitchedParams& p, const control::PhaseSchedule& s) {
    s.validate();
    CertificateReport r;
    r.conditions_ok = check_conditions(p.alpha1, p.alpha2, p.delta2, s.tbar1, s.tbar2);
    if (!r.conditions_ok) throw ConditionsViolated("theorem1_certificate: alpha1/alpha2 below the dwell-time thresholds");
    const double period = s.period();
    r.rate_beta = std::min(p.alpha1 * s.tbar1 - 2.0 * p.delta2 * s.tbar2, p.alpha2 * s.tbar2 - 2.0 * p.delta2 * s.tbar1) / period;
    r.overshoot_kappa = std::exp((2.0 * std::max(p.delta1, 0.0) + r.rate_beta) * period);
    r.overshoot_kappa_displayed = std::exp((2.0 * p.delta1 + r.rate_beta) * period);
    return r;
}

struct Sample {
    double t = 0.0, V1 = 0.0, V2 = 0.0;
    double W() const { return V1 + V2; }
};

/// Exact propagation of Sigma3, `per_phase` samples in each dwell window.
/// `growth` is the rate of the unmeasured side (2 delta1 for Sigma3).
inline std::vector<Sample> simulate_sigma3(double V10, double V20, double alpha1, double alpha2, double growth,
                                           const control::PhaseSchedule& s, int n_periods, int per_phase = 50) {
    s.validate();
    if (!(V10 >= 0.0) || !(V20 >= 0.0)) throw DomainError("simulate_sigma3: initial values must be >= 0");
    if (per_phase < 1 || n_periods < 0) throw DomainError("simulate_sigma3: bad sampling");
    std::vector<Sample> out;
    out.push_back({0.0, V10, V20});
    double V1 = V10, V2 = V20;
    for (int k = 0; k < n_periods; ++k) {
        const double t0 = k * s.period();
        for (int i = 1; i <= per_phase; ++i) {
            const double tau = s.tbar1 * i / per_phase;
            out.push_back({t0 + tau, V1 * std::exp(-alpha1 * tau), V2 * std::exp(growth * tau)});
        }
        V1 *= std::exp(-alpha1 * s.tbar1);
        V2 *= std::exp(growth * s.tbar1);
        for (int i = 1; i <= per_phase; ++i) {
            const double tau = s.tbar2 * i / per_phase;
            out.push_back({t0 + s.tbar1 + tau, V1 * std::exp(growth * tau), V2 * std::exp(-alpha2 * tau)});
        }
        V1 *= std::exp(growth * s.tbar2);
        V2 *= std::exp(-alpha2 * s.tbar2);
        out.back().V1 = V1;
        out.back().V2 = V2;
    }
    return out;
}

inline std::vector<Sample> simulate_sigma3(double V10, double V20, const SwitchedParams& p, const control::PhaseSchedule& s,
                                           int n_periods, int per_phase = 50) {
    return simulate_sigma3(V10, V20, p.alpha1, p.alpha2, 2.0 * p.delta1, s, n_periods, per_phase);
}

/// Smallest b0 >= 0 with pi^3 - 2 delta1 alpha2^{-1/3} pi >= pi - b0 for all pi >= 0.
inline double lemma11_bo(double delta1, double alpha2) {
    if (!(alpha2 > 0.0)) throw DomainError("lemma11_bo: alpha2 must be positive");
    const double c = 2.0 * delta1 / std::cbrt(alpha2) + 1.0;
    if (c <= 0.0) return 0.0;
    const double pi = std::sqrt(c / 3.0);
    return std::max(0.0, -(pi * pi * pi - c * pi));
}

/// Controller-2 constants: b0, the per-period recursion (q, p) and the
/// limiting bound M b0 alpha2^{-1/3}. Throws if the alpha2 margin fails.
inline CertificateReport theorem2_certificate(const SwitchedParams& p, const control::PhaseSchedule& s) {
    s.validate();
    CertificateReport r;
    const double a = std::cbrt(p.alpha2);
    r.margin = 2.0 * p.delta1 * s.tbar1 - a * s.tbar2;
    r.conditions_ok = r.margin <= -2.0;
    if (!r.conditions_ok) throw ConditionsViolated("theorem2_certificate: need 2 delta1 Tbar1 - alpha2^{1/3} Tbar2 <= -2");
    r.b0 = lemma11_bo(p.delta1, p.alpha2);
    const double grow = std::exp(2.0 * p.delta1 * s.tbar1);
    r.q = std::exp(-p.alpha1 * s.tbar1 / 2.0) + std::exp(-2.0);
    r.p = grow * r.b0 * (1.0 - std::exp(-a * s.tbar2)) / a;
    r.q_simplified = 2.0 * std::exp(-2.0);
    r.p_simplified = grow * r.b0 / a;
    r.M = grow / (1.0 - 2.0 * std::exp(-2.0));
    r.residual_bound = r.M * r.b0 / a;
    return r;
}

/// Iterates W_{i+1} = q W_i + p from W_1, and the closed form
/// q^{i-1} W_1 + p (1 - q^{i-1}) / (1 - q).
struct RecursionRow {
    double iterate = 0.0, closed_form = 0.0;
};

inline std::vector<RecursionRow> recursion(double W1, double q, double p, int n) {
    std::vector<RecursionRow> out;
    double w = W1;
    for (int i = 1; i <= n; ++i) {
        const double qi = std::pow(q, i - 1);
        out.push_back({w, qi * W1 + p * (1.0 - qi) / (1.0 - q)});
        w = q * w + p;
    }
    return out;
}

struct Sigma4Result {
    std::vector<Sample> trajectory;  ///< worst-case envelope
    std::vector<double> W_at_I2_entry;
    std::vector<bool> recursion_holds;  ///< W(t_{2k+2}) <= q W(t_{2k}) + p per period
    CertificateReport report;
};

/// Worst-case envelope for Sigma4: exact exponentials on I1; on I2 the
/// comparison solution for V2 and the Gronwall envelope for V1 evaluated at
/// the elapsed time with the arguments latched at the window entry.
inline Sigma4Result simulate_sigma4(double V10, double V20, const SwitchedParams& p, const control::PhaseSchedule& s,
                                    int n_periods, const gronwall::EnvelopeParams& env, int per_phase = 50) {
    Sigma4Result res;
    res.report = theorem2_certificate(p, s);
    if (!(V10 >= 0.0) || !(V20 >= 0.0)) throw DomainError("simulate_sigma4: initial values must be >= 0");
    const double a = std::cbrt(p.alpha2);
    const double b0 = res.report.b0;
    double V1 = V10, V2 = V20;
    res.trajectory.push_back({0.0, V1, V2});
    for (int k = 0; k < n_periods; ++k) {
        const double t0 = k * s.period();
        for (int i = 1; i <= per_phase; ++i) {
            const double tau = s.tbar1 * i / per_phase;
            res.trajectory.push_back({t0 + tau, V1 * std::exp(-p.alpha1 * tau), V2 * std::exp(2.0 * p.delta1 * tau)});
        }
        V1 *= std::exp(-p.alpha1 * s.tbar1);
        V2 *= std::exp(2.0 * p.delta1 * s.tbar1);
        const double W_entry = V1 + V2;
        res.W_at_I2_entry.push_back(W_entry);
        if (res.W_at_I2_entry.size() >= 2) {
            const double prev = res.W_at_I2_entry[res.W_at_I2_entry.size() - 2];
            res.recursion_holds.push_back(W_entry <= res.report.q * prev + res.report.p);
        }
        const double latched = a * V2;
        const double V1e = V1, V2e = V2;
        for (int i = 1; i <= per_phase; ++i) {
            const double tau = s.tbar2 * i / per_phase;
            const double v2 = std::exp(-a * tau) * V2e + b0 / a * (1.0 - std::exp(-a * tau));
            const double v1 = gronwall::lemma13_envelope(tau, V1e, latched, env).value;
            res.trajectory.push_back({t0 + s.tbar1 + tau, v1, v2});
        }
        V1 = res.trajectory.back().V1;
        V2 = res.trajectory.back().V2;
    }
    return res;
}

}  // namespace ksic::switched
