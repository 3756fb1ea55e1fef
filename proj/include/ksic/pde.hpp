#pragma once

// Method of lines for the two-domain KS system
//   w_t = -w w_x - l1 w_xx - w_xxxx on [0, Y],  v_t = ... on [Y, L]
// with w(0) = u1, w(Y) = v(Y) = u2, v(L) = u3 and zero slopes at 0, Y, L.
// Given the inputs the two subdomains decouple into clamped problems.

#include <cstdio>
#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ksic/errors.hpp"
#include "ksic/numeric/banded.hpp"
#include "ksic/numeric/quadrature.hpp"

namespace ksic::pde {

struct Grid {
    double Y = 1.0;
    double L = 2.0;
    int n_w = 129;  ///< nodes on [0, Y], both ends included
    int n_v = 129;  ///< nodes on [Y, L], both ends included

    double h_w() const { return Y / (n_w - 1); }
    double h_v() const { return (L - Y) / (n_v - 1); }
    double x_w(int i) const { return h_w() * i; }
    double x_v(int i) const { return Y + h_v() * i; }

    void validate() const {
        if (!(L > 0.0) || !(Y > 0.0) || !(Y < L)) throw DomainError("Grid: need 0 < Y < L");
        if (n_w < 9 || n_v < 9) throw DomainError("Grid: need at least 9 nodes per subdomain");
    }
};

struct ControlInputs {
    double u1 = 0.0, u2 = 0.0, u3 = 0.0;
};

struct DualDomainState {
    std::vector<double> w, v;
    double t = 0.0;

    static DualDomainState zero(const Grid& g, double t0 = 0.0) {
        return {std::vector<double>(static_cast<std::size_t>(g.n_w), 0.0), std::vector<double>(static_cast<std::size_t>(g.n_v), 0.0), t0};
    }
};

/// Second-order one-sided third derivative at the first sample.
inline double third_derivative_left(std::span<const double> f, double h) {
    return (-2.5 * f[0] + 9.0 * f[1] - 12.0 * f[2] + 7.0 * f[3] - 1.5 * f[4]) / (h * h * h);
}

inline double third_derivative_right(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    return -(-2.5 * f[n - 1] + 9.0 * f[n - 2] - 12.0 * f[n - 3] + 7.0 * f[n - 4] - 1.5 * f[n - 5]) / (h * h * h);
}

struct BoundaryTraces {
    double wxxx0 = 0.0, wxxxY = 0.0, vxxxY = 0.0, vxxxL = 0.0;
};

inline BoundaryTraces boundary_third_derivatives(const DualDomainState& s, const Grid& g) {
    return {third_derivative_left(s.w, g.h_w()), third_derivative_right(s.w, g.h_w()), third_derivative_left(s.v, g.h_v()),
            third_derivative_right(s.v, g.h_v())};
}

inline double half_square_integral(std::span<const double> f, double h) {
    std::vector<double> sq(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) sq[i] = f[i] * f[i];
    return 0.5 * numeric::simpson(sq, h);
}

struct LyapunovPair {
    double V1 = 0.0, V2 = 0.0;
    double W() const { return V1 + V2; }
};

inline LyapunovPair lyapunov_pair(const DualDomainState& s, const Grid& g) {
    return {half_square_integral(s.w, g.h_w()), half_square_integral(s.v, g.h_v())};
}

/// gamma = int_0^Y w
inline double mass_gamma(const DualDomainState& s, const Grid& g) { return numeric::simpson(s.w, g.h_w()); }

/// Backward Euler for the linear part on one clamped segment; the matrix
/// I + dt (D4 + l1 D2) on interior nodes is factored once.
class ClampedSegment {
public:
    ClampedSegment() = default;
    ClampedSegment(int n, double h, double lambda1, double dt) : n_(n), h_(h), lambda1_(lambda1), dt_(dt) {
        const auto m = static_cast<std::size_t>(n - 2);
        const double h2 = h * h, h4 = h2 * h2;
        numeric::BandMatrix M(m, 2);
        for (std::size_t i = 0; i < m; ++i) {
            // zero-slope ghost u_{-1} = u_1 adds 1/h^4 on the first and last rows
            const bool end = (i == 0 || i + 1 == m);
            M(i, i) = 1.0 + dt * ((end ? 7.0 : 6.0) / h4 - 2.0 * lambda1 / h2);
            if (i + 1 < m) { M(i, i + 1) = dt * (-4.0 / h4 + lambda1 / h2); M(i + 1, i) = M(i, i + 1); }
            if (i + 2 < m) { M(i, i + 2) = dt / h4; M(i + 2, i) = dt / h4; }
        }
        lu_ = numeric::BandLU(std::move(M));
        rhs_.resize(m);
    }

    double h() const { return h_; }

    /// Advances u in place; u.front()/u.back() become the new boundary values.
    void step(std::span<double> u, double left, double right) {
        const std::size_t n = u.size(), m = n - 2;
        const double h2 = h_ * h_, h4 = h2 * h2;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double up = u[i + 1], um = u[i - 1], uc = u[i];
            // skew-symmetric split of u u_x
            const double nl = ((up * up - um * um) + uc * (up - um)) / (6.0 * h_);
            rhs_[i - 1] = uc - dt_ * nl;
        }
        const double c1 = dt_ * (-4.0 / h4 + lambda1_ / h2), c2 = dt_ / h4;
        rhs_[0] -= c1 * left;
        rhs_[1] -= c2 * left;
        rhs_[m - 1] -= c1 * right;
        rhs_[m - 2] -= c2 * right;
        lu_.solve(rhs_);
        u[0] = left;
        u[n - 1] = right;
        std::copy(rhs_.begin(), rhs_.end(), u.begin() + 1);
    }

private:
    int n_ = 0;
    double h_ = 0.0, lambda1_ = 0.0, dt_ = 0.0;
    numeric::BandLU lu_;
    std::vector<double> rhs_;
};

/// One instance per simulation; not safe to share mid-step.
class Solver {
public:
    static constexpr double blowup_threshold = 1e12;

    Solver(const Grid& g, double lambda1, double dt, double cfl_safety = 1.0)
        : grid_(g), lambda1_(lambda1), dt_(dt), cfl_safety_(cfl_safety) {
        g.validate();
        if (!(dt > 0.0)) throw DomainError("Solver: dt must be positive");
        w_ = ClampedSegment(g.n_w, g.h_w(), lambda1, dt);
        v_ = ClampedSegment(g.n_v, g.h_v(), lambda1, dt);
    }

    const Grid& grid() const { return grid_; }
    double dt() const { return dt_; }
    double lambda1() const { return lambda1_; }
    long cfl_warnings() const { return cfl_warnings_; }

    void advance(DualDomainState& s, const ControlInputs& in) {
        if (!std::isfinite(in.u1) || !std::isfinite(in.u2) || !std::isfinite(in.u3))
            throw StepRejected("non-finite control input", s.t);
        check_cfl(s);
        w_.step(s.w, in.u1, in.u2);
        v_.step(s.v, in.u2, in.u3);
        s.t += dt_;
        for (const auto* f : {&s.w, &s.v})
            for (double x : *f)
                if (!std::isfinite(x) || std::abs(x) > blowup_threshold) {
                    char buf[64];
                    std::snprintf(buf, sizeof buf, "%.6g", s.t);
                    throw StepRejected(std::string("state exceeded blow-up threshold at t = ") + buf, s.t);
                }
    }

    DualDomainState step(const DualDomainState& s, const ControlInputs& in) {
        DualDomainState out = s;
        advance(out, in);
        return out;
    }

private:
    void check_cfl(const DualDomainState& s) {
        double umax = 0.0;
        for (double x : s.w) umax = std::max(umax, std::abs(x));
        for (double x : s.v) umax = std::max(umax, std::abs(x));
        if (dt_ * umax > cfl_safety_ * std::min(grid_.h_w(), grid_.h_v())) ++cfl_warnings_;
    }

    Grid grid_;
    double lambda1_, dt_, cfl_safety_;
    ClampedSegment w_, v_;
    long cfl_warnings_ = 0;
};

namespace detail {

// second-order first and second derivatives with one-sided end stencils
inline std::pair<std::vector<double>, std::vector<double>> d1_d2(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    std::vector<double> d1(n), d2(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        d1[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
        d2[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
    }
    d1[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d1[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    d2[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h);
    d2[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / (h * h);
    return {std::move(d1), std::move(d2)};
}

// -int f_xx^2 + l1 int f_x^2 - (b^3 - a^3)/3 - b f_xxx(right) + a f_xxx(left)
inline double energy_rate_rhs(std::span<const double> f, double h, double lambda1) {
    const auto [d1, d2] = d1_d2(f, h);
    std::vector<double> s1(f.size()), s2(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        s1[i] = d1[i] * d1[i];
        s2[i] = d2[i] * d2[i];
    }
    const double a = f.front(), b = f.back();
    return -numeric::simpson(s2, h) + lambda1 * numeric::simpson(s1, h) - (b * b * b - a * a * a) / 3.0 -
           b * third_derivative_right(f, h) + a * third_derivative_left(f, h);
}

inline void require_window(std::span<const DualDomainState> window) {
    if (window.size() < 3) throw DomainError("identity residuals need three consecutive states");
}

}  // namespace detail

/// |w_xxx(0) - w_xxx(Y) - (u2^2 - u1^2)/2 - gamma_t| at the middle state of a
/// three-state window. The applied inputs are read off the strongly imposed
/// boundary values of the middle state.
inline double interface_identity_residual(std::span<const DualDomainState> window, const Grid& g) {
    detail::require_window(window);
    const std::size_t k = window.size() / 2;
    const auto& s = window[k];
    const double gdot = (mass_gamma(window[k + 1], g) - mass_gamma(window[k - 1], g)) / (window[k + 1].t - window[k - 1].t);
    const auto tr = boundary_third_derivatives(s, g);
    const double u1 = s.w.front(), u2 = s.w.back();
    return std::abs(tr.wxxx0 - tr.wxxxY - 0.5 * (u2 * u2 - u1 * u1) - gdot);
}

/// Differences between centered-in-time dV1/dt, dV2/dt and the quadrature
/// right sides of the energy-rate identity, at the middle state.
inline std::pair<double, double> energy_rate_residual(std::span<const DualDomainState> window, const Grid& g, double lambda1) {
    detail::require_window(window);
    const std::size_t k = window.size() / 2;
    const auto& s = window[k];
    const double dtt = window[k + 1].t - window[k - 1].t;
    const auto next = lyapunov_pair(window[k + 1], g), prev = lyapunov_pair(window[k - 1], g);
    const double r1 = (next.V1 - prev.V1) / dtt - detail::energy_rate_rhs(s.w, g.h_w(), lambda1);
    const double r2 = (next.V2 - prev.V2) / dtt - detail::energy_rate_rhs(s.v, g.h_v(), lambda1);
    return {std::abs(r1), std::abs(r2)};
}

}  // namespace ksic::pde
