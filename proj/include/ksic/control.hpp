#pragma once

// Sensing schedule and the boundary feedback laws.
//   I1 = [t_{2k-1}, t_{2k}), length Tbar1: w on [0, Y] is measured
//   I2 = [t_{2k}, t_{2k+1}), length Tbar2: v on [Y, L] is measured
// with t_1 = 0.

#include <cmath>
#include <span>

#include "ksic/coeffs.hpp"
#include "ksic/errors.hpp"
#include "ksic/numeric/roots.hpp"
#include "ksic/pde.hpp"

namespace ksic::control {

struct PhaseSchedule {
    double tbar1 = 0.05;
    double tbar2 = 0.05;

    double period() const { return tbar1 + tbar2; }
    void validate() const {
        if (!(tbar1 > 0.0) || !(tbar2 > 0.0)) throw DomainError("PhaseSchedule: dwell times must be positive");
    }
};

enum class Phase { I1, I2 };

struct PhaseInfo {
    Phase phase = Phase::I1;
    long k = 1;                 ///< 1-based window index of this phase
    double window_start = 0.0;  ///< t_{2k-1} for I1, t_{2k} for I2
    double latch_instant = 0.0; ///< t_{2k}, the I2 entry of period k
};

/// Window boundaries are snapped with a relative tolerance of 1e-12 of the
/// period so that t = n dt lands on the right side of a switch.
inline PhaseInfo phase_of(double t, const PhaseSchedule& s) {
    if (!(t >= 0.0)) throw DomainError("phase_of: t must be >= 0");
    const double P = s.period();
    const double eps = 1e-12;
    const double q = t / P;
    const double k = std::floor(q + eps);
    const double r = std::max(0.0, (q - k) * P);
    PhaseInfo out;
    out.k = static_cast<long>(k) + 1;
    out.latch_instant = k * P + s.tbar1;
    if (r >= s.tbar1 - eps * P) {
        out.phase = Phase::I2;
        out.window_start = out.latch_instant;
    } else {
        out.phase = Phase::I1;
        out.window_start = k * P;
    }
    return out;
}

inline double sign(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

/// Positive root of b^3 - 6 b - 3 = 0.
inline double kappa2_beta() {
    auto f = [](double b) { return b * b * b - 6.0 * b - 3.0; };
    auto df = [](double b) { return 3.0 * b * b - 6.0; };
    return numeric::newton_bisect(f, df, 2.0, 3.0);
}

struct ControllerParams {
    double lambda1 = 0.0;
    double alpha1 = 0.0, alpha2 = 0.0;
    double delta = 0.0, delta1 = 0.0, delta2 = 0.0;
    coeffs::BoundaryCoeffTable tables_w, tables_v;
    double beta_kappa2 = 0.0;
    double P = 0.0;
    double B = 0.0;  ///< B u^2 = C_v1(u,0) + delta2 C_v2(u,0) + lambda1 C_v3(u,0)
    double C = 0.0;  ///< C u^2 = C_w1(u,u) + delta2 C_w2(u,u) + lambda1 C_w3(u,u)

    /// u^2 coefficient of the I1 design inequality
    double A_w() const { return tables_w[1].a + delta2 * tables_w[2].a + lambda1 * tables_w[3].a; }
    /// u^2 coefficient of the I2 design inequality at x = L
    double A_v() const { return tables_v[1].b + delta2 * tables_v[2].b + lambda1 * tables_v[3].b; }

    static ControllerParams design(double lambda1, double alpha1, double alpha2, double delta, double Y, double L) {
        ControllerParams p;
        p.lambda1 = lambda1;
        p.alpha1 = alpha1;
        p.alpha2 = alpha2;
        const auto ds = coeffs::delta_split(delta);
        p.delta = delta;
        p.delta1 = ds.delta1;
        p.delta2 = ds.delta2;
        p.tables_w = coeffs::czi_table(0.0, Y);
        p.tables_v = coeffs::czi_table(Y, L);
        p.beta_kappa2 = kappa2_beta();
        p.P = p.beta_kappa2 + 1.0;
        // both sides are quadratic forms in u; evaluate at u = 1
        p.B = p.tables_v[1](1.0, 0.0) + p.delta2 * p.tables_v[2](1.0, 0.0) + lambda1 * p.tables_v[3](1.0, 0.0);
        p.C = p.tables_w[1](1.0, 1.0) + p.delta2 * p.tables_w[2](1.0, 1.0) + lambda1 * p.tables_w[3](1.0, 1.0);
        return p;
    }
};

/// The lumped constant exactly as displayed next to C, where the last term
/// repeats C_v2 instead of C_v1.
inline double B_as_displayed(const ControllerParams& p) {
    return p.lambda1 * p.tables_v[3](1.0, 0.0) + p.delta2 * p.tables_v[2](1.0, 0.0) + p.tables_v[2](1.0, 0.0);
}

/// Far/near switching threshold, including the lambda1 a_w3 term so that the
/// far branch satisfies the design inequality.
inline double l1(double V1, const ControllerParams& p) {
    return V1 * V1 / 3.0 + p.A_w() * V1 + (p.alpha1 + 2.0 * p.delta1);
}

inline double l3(double V2, const ControllerParams& p) {
    return V2 * V2 / 3.0 + p.A_v() * V2 + (p.alpha2 + 2.0 * p.delta1);
}

/// Threshold without the lambda1 term, as in the lemma statement.
inline double l1_as_stated(double V1, const ControllerParams& p) {
    return V1 * V1 / 3.0 + (p.tables_w[1].a + p.delta2 * p.tables_w[2].a) * V1 + (p.alpha1 + 2.0 * p.delta1);
}

inline double l3_as_stated(double V2, const ControllerParams& p) {
    return V2 * V2 / 3.0 + (p.tables_v[1].b + p.delta2 * p.tables_v[2].b) * V2 + (p.alpha2 + 2.0 * p.delta1);
}

/// Most negative real root of k^3 + 3(A + 1) k^2 + 3 l^2 + 3 c V = 0.
inline double near_branch_root(double A, double l, double c, double V) {
    const double a1 = A + 1.0;
    const double k0 = 3.0 * l * l + 3.0 * c * V;
    auto f = [&](double k) { return k * k * k + 3.0 * a1 * k * k + k0; };
    auto df = [&](double k) { return 3.0 * k * k + 6.0 * a1 * k; };
    // left of the local maximum at -2(A+1) the cubic is increasing
    const double hi = std::min(0.0, -2.0 * a1);
    if (f(hi) < 0.0) throw DesignInfeasible("near_branch_root: no real root <= 0");
    double lo = hi - 10.0 * (1.0 + std::abs(a1) + std::abs(l));
    for (int i = 0; f(lo) >= 0.0; ++i) {
        if (i > 200) throw DesignInfeasible("near_branch_root: bracket search failed");
        lo = hi - 2.0 * (hi - lo);
    }
    return numeric::newton_bisect(f, df, lo, hi);
}

inline double k1(double V1, const ControllerParams& p) {
    return near_branch_root(p.A_w(), l1(V1, p), p.alpha1 + 2.0 * p.delta1, V1);
}

inline double k3(double V2, const ControllerParams& p) {
    return near_branch_root(p.A_v(), l3(V2, p), p.alpha2 + 2.0 * p.delta1, V2);
}

/// u1 at x = 0. At V1 = 0 the law returns 0 (the design inequality reads
/// 0 <= 0 there).
inline double kappa1(double V1, double wxxx0, const ControllerParams& p) {
    if (V1 <= 0.0) return 0.0;
    if (std::abs(wxxx0) >= l1(V1, p)) return -sign(wxxx0) * V1;
    return k1(V1, p);
}

/// u3 at x = L. The boundary term enters the I2 inequality as
/// -u^3/3 + A u^2 - u v_xxx(L), so u3 is the mirror image of the kappa1 law.
inline double kappa3(double V2, double vxxxL, const ControllerParams& p) {
    if (V2 <= 0.0) return 0.0;
    if (std::abs(vxxxL) >= l3(V2, p)) return sign(vxxxL) * V2;
    return -k3(V2, p);
}

/// u1 = u2 on I2 from the latched value a = alpha2^{1/3} V2(t_{2k}).
inline double kappa2(double latched, double vxxxY, const ControllerParams& p) {
    if (std::abs(vxxxY) >= 2.0 * latched * latched) return -sign(vxxxY) * latched;
    return -p.beta_kappa2 * latched;
}

/// Left side minus right side of each design inequality; nonpositive when the
/// inequality holds.
inline double design1_excess(double u, double wxxx0, double V1, const ControllerParams& p) {
    return u * u * u / 3.0 + p.A_w() * u * u + u * wxxx0 + (p.alpha1 + 2.0 * p.delta1) * V1;
}

inline double design2_excess(double u, double vxxxL, double V2, const ControllerParams& p) {
    return -u * u * u / 3.0 + p.A_v() * u * u - u * vxxxL + (p.alpha2 + 2.0 * p.delta1) * V2;
}

inline double design2bis_excess(double u, double vxxxY, double latched, const ControllerParams& p) {
    return u * u * u / 3.0 + p.B * u * u + u * vxxxY + latched * latched * latched;
}

/// Magnitude of the terms in each inequality, for relative tolerances.
inline double design1_scale(double u, double wxxx0, double V1, const ControllerParams& p) {
    return std::abs(u * u * u) / 3.0 + std::abs(p.A_w()) * u * u + std::abs(u * wxxx0) + std::abs((p.alpha1 + 2.0 * p.delta1) * V1);
}

inline double design2_scale(double u, double vxxxL, double V2, const ControllerParams& p) {
    return std::abs(u * u * u) / 3.0 + std::abs(p.A_v()) * u * u + std::abs(u * vxxxL) + std::abs((p.alpha2 + 2.0 * p.delta1) * V2);
}

inline double design2bis_scale(double u, double vxxxY, double latched, const ControllerParams& p) {
    return std::abs(u * u * u) / 3.0 + std::abs(p.B) * u * u + std::abs(u * vxxxY) + latched * latched * latched;
}

enum class Mode { open_loop, controller1, controller2 };

/// Latched alpha2^{1/3} V2(t_{2k}) for the current I2 window.
struct LatchStore {
    long window = 0;
    double latched = 0.0;
};

/// Inputs for the current step. Only the subdomain measured in the current
/// phase is read from the state.
inline pde::ControlInputs controller_step(Mode mode, double t, const pde::DualDomainState& s, const pde::Grid& g,
                                          const PhaseSchedule& sched, const ControllerParams& p, LatchStore& latch) {
    if (mode == Mode::open_loop) return {};
    const PhaseInfo ph = phase_of(t, sched);
    if (ph.phase == Phase::I1) {
        const std::span<const double> w = s.w;
        const double V1 = pde::half_square_integral(w, g.h_w());
        return {kappa1(V1, pde::third_derivative_left(w, g.h_w()), p), 0.0, 0.0};
    }
    const std::span<const double> v = s.v;
    const double V2 = pde::half_square_integral(v, g.h_v());
    if (mode == Mode::controller1) return {0.0, 0.0, kappa3(V2, pde::third_derivative_right(v, g.h_v()), p)};
    if (latch.window != ph.k) {
        latch.window = ph.k;
        latch.latched = std::cbrt(p.alpha2) * V2;
    }
    const double u = kappa2(latch.latched, pde::third_derivative_left(v, g.h_v()), p);
    return {u, u, 0.0};
}

}  // namespace ksic::control
