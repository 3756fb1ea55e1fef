#pragma once

// Smallest eigenvalue delta_o of  z'''' + lambda z'' = delta z  with clamped
// ends z(a) = z(b) = z'(a) = z'(b) = 0.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "ksic/errors.hpp"
#include "ksic/numeric/banded.hpp"
#include "ksic/numeric/det.hpp"
#include "ksic/numeric/roots.hpp"

namespace ksic::spectrum {

struct EigenProblem {
    double lambda = 0.0;
    double a = 0.0;
    double b = 1.0;

    void validate() const {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("EigenProblem: lambda must be >= 0");
        if (!(b > a)) throw DomainError("EigenProblem: need b > a");
    }
};

/// Which family of characteristic roots the minimizing delta belongs to:
/// four imaginary roots (delta in [-lambda^2/4, 0]), a complex quadruple
/// (delta < -lambda^2/4), or a real pair plus an imaginary pair (delta > 0).
enum class Regime { oscillatory, complex_pair, mixed };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::oscillatory: return "oscillatory";
        case Regime::complex_pair: return "complex_pair";
        case Regime::mixed: return "mixed";
    }
    return "?";
}

struct EigenResult {
    double delta_o = 0.0;
    Regime regime = Regime::oscillatory;
    numeric::Bracket bracket{0.0, 0.0};
    double residual = 0.0;  ///< |normalized characteristic| at delta_o on the unit domain
};

struct Rescaled {
    EigenProblem unit;
    double scale = 1.0;  ///< delta(original) = delta(unit) * scale
};

inline Rescaled rescale_to_unit(const EigenProblem& p) {
    p.validate();
    const double len = p.b - p.a;
    return {EigenProblem{p.lambda * len * len, 0.0, 1.0}, 1.0 / (len * len * len * len)};
}

namespace detail {

inline double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }
inline double sinhc(double x) { return std::abs(x) < 1e-8 ? 1.0 + x * x / 6.0 : std::sinh(x) / x; }

// frequencies on [-lambda^2/4, 0]; omega1^2 written without cancellation
inline std::pair<double, double> imaginary_pair(double delta, double lambda) {
    const double disc = std::sqrt(std::max(0.0, lambda * lambda + 4.0 * delta));
    const double s = lambda + disc;
    const double w1sq = s > 0.0 ? std::max(0.0, -2.0 * delta / s) : 0.0;
    return {std::sqrt(w1sq), std::sqrt(0.5 * s)};
}

// delta > 0: real rate mu and frequency omega
inline std::pair<double, double> mixed_pair(double delta, double lambda) {
    const double s = lambda + std::sqrt(lambda * lambda + 4.0 * delta);
    return {std::sqrt(2.0 * delta / s), std::sqrt(0.5 * s)};
}

// delta < -lambda^2/4: roots +-(p +- i q)
inline std::pair<double, double> complex_pair(double delta, double lambda) {
    const double s = std::sqrt(-delta);
    return {std::sqrt(std::max(0.0, 0.5 * (s - 0.5 * lambda))), std::sqrt(0.5 * (s + 0.5 * lambda))};
}

inline void check_a1_domain(double delta, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("det_a1: lambda must be >= 0");
    if (!(delta <= 0.0 && delta >= -0.25 * lambda * lambda)) throw DomainError("det_a1: delta outside [-lambda^2/4, 0]");
}

}  // namespace detail

/// Boundary matrix for the basis sin(w1 x), cos(w1 x), sin(w2 x), cos(w2 x);
/// rows are z(0), z(1), z'(0), z'(1).
inline numeric::Mat4 matrix_a1(double delta, double lambda) {
    detail::check_a1_domain(delta, lambda);
    const auto [w1, w2] = detail::imaginary_pair(delta, lambda);
    return {{{0.0, 1.0, 0.0, 1.0},
             {std::sin(w1), std::cos(w1), std::sin(w2), std::cos(w2)},
             {w1, 0.0, w2, 0.0},
             {w1 * std::cos(w1), -w1 * std::sin(w1), w2 * std::cos(w2), -w2 * std::sin(w2)}}};
}

inline double det_a1(double delta, double lambda) { return numeric::det4(matrix_a1(delta, lambda)); }

/// Boundary matrix for the basis e^{px} sin(qx), e^{px} cos(qx),
/// e^{-px} sin(qx), e^{-px} cos(qx), with p the decay rate and q the
/// frequency of the characteristic roots.
inline numeric::Mat4 matrix_a2(double delta, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("det_a2: lambda must be >= 0");
    if (!(delta < -0.25 * lambda * lambda)) throw DomainError("det_a2: delta must be < -lambda^2/4");
    const auto [p, q] = detail::complex_pair(delta, lambda);
    const double ep = std::exp(p), em = std::exp(-p), sq = std::sin(q), cq = std::cos(q);
    return {{{0.0, 1.0, 0.0, 1.0},
             {ep * sq, ep * cq, em * sq, em * cq},
             {q, p, q, -p},
             {p * ep * sq + q * ep * cq, p * ep * cq - q * ep * sq, -p * em * sq + q * em * cq, -p * em * cq - q * em * sq}}};
}

/// Same determinant with e^{p} factored out of the two rows evaluated at
/// x = 1 before any entry is formed, so large |delta| cannot overflow.
inline numeric::ScaledDet det_a2_scaled(double delta, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("det_a2: lambda must be >= 0");
    if (!(delta < -0.25 * lambda * lambda)) throw DomainError("det_a2: delta must be < -lambda^2/4");
    const auto [p, q] = detail::complex_pair(delta, lambda);
    const double e2 = std::exp(-2.0 * p), sq = std::sin(q), cq = std::cos(q);
    const numeric::Mat4 m{{{0.0, 1.0, 0.0, 1.0},
                           {sq, cq, e2 * sq, e2 * cq},
                           {q, p, q, -p},
                           {p * sq + q * cq, p * cq - q * sq, e2 * (-p * sq + q * cq), e2 * (-p * cq - q * sq)}}};
    auto d = numeric::det4_row_scaled(m);
    d.log_scale += 2.0 * p;
    return d;
}

inline double det_a2(double delta, double lambda) { return det_a2_scaled(delta, lambda).value(); }

/// delta > 0 counterpart with basis sinh(mu x), cosh(mu x), sin(w x), cos(w x).
inline numeric::Mat4 matrix_mixed(double delta, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("det_mixed: lambda must be >= 0");
    if (!(delta > 0.0)) throw DomainError("det_mixed: delta must be > 0");
    const auto [mu, w] = detail::mixed_pair(delta, lambda);
    return {{{0.0, 1.0, 0.0, 1.0},
             {std::sinh(mu), std::cosh(mu), std::sin(w), std::cos(w)},
             {mu, 0.0, w, 0.0},
             {mu * std::cosh(mu), mu * std::sinh(mu), w * std::cos(w), -w * std::sin(w)}}};
}

inline double det_mixed(double delta, double lambda) { return numeric::det4_row_scaled(matrix_mixed(delta, lambda)).value(); }

/// Expanded determinant divided by the rate that vanishes at delta = 0, so
/// the function is continuous on (-lambda^2/4, inf) and its zeros are exactly
/// the eigenvalues there. Uses the expansions
///   det A1 = (w1^2 + w2^2) sin w1 sin w2 - 2 w1 w2 (1 - cos w1 cos w2)
///   det M  = (w^2 - mu^2) sinh mu sin w - 2 mu w (1 - cosh mu cos w)
inline double characteristic(double delta, double lambda) {
    if (delta <= 0.0) {
        detail::check_a1_domain(delta, lambda);
        const auto [w1, w2] = detail::imaginary_pair(delta, lambda);
        return (w1 * w1 + w2 * w2) * detail::sinc(w1) * std::sin(w2) - 2.0 * w2 * (1.0 - std::cos(w1) * std::cos(w2));
    }
    const auto [mu, w] = detail::mixed_pair(delta, lambda);
    if (mu > 700.0) return std::numeric_limits<double>::infinity();
    return (w * w - mu * mu) * detail::sinhc(mu) * std::sin(w) - 2.0 * w * (1.0 - std::cosh(mu) * std::cos(w));
}

/// Threshold beyond which
///   -e^{2x} x^2 + 12 ln2 e^{2x} x + 80 ln2 x + 56 x^2 + 12 (ln2)^2 <= 0.
inline double threshold_x0() {
    const double l2 = std::numbers::ln2;
    auto P = [l2](double x) {
        const double e = std::exp(2.0 * x);
        return -e * x * x + 12.0 * l2 * e * x + 80.0 * l2 * x + 56.0 * x * x + 12.0 * l2 * l2;
    };
    const double step = 1e-3;
    double last = -1.0;
    double prev_x = step, prev = P(prev_x);
    for (int i = 2; i <= 50000; ++i) {
        const double x = step * i;
        const double v = P(x);
        if (prev > 0.0 && v <= 0.0) last = prev_x;
        prev_x = x;
        prev = v;
    }
    if (last < 0.0) throw NoRootFound("threshold_x0: no sign change on (0, 50]");
    return numeric::bisect(P, last, last + step, 1e-14).mid();
}

inline double lower_bound_delta_o2(double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("lower_bound_delta_o2: lambda must be >= 0");
    const double x0 = threshold_x0();
    const double t = lambda / (2.0 * std::log(13.0 / 12.0));
    const double inner = t * t + lambda + 4.0 * x0 * x0;
    return -0.25 * inner * inner;
}

struct SolveOptions {
    double tol = 1e-8;             ///< on delta, unit domain
    int samples = 2000;            ///< per branch
    double positive_limit = 520.0; ///< unit-domain clamped beam value is ~500.56
};

namespace detail {

struct Sample {
    double delta;
    double value;
};

inline EigenResult finish(const EigenProblem& unit, double scale, numeric::Bracket br, double tol) {
    const double lam = unit.lambda;
    auto chi = [lam](double d) { return characteristic(d, lam); };
    br = numeric::bisect(chi, br.lo, br.hi, tol);
    EigenResult r;
    const double d = br.mid();
    r.delta_o = d * scale;
    r.bracket = {br.lo * scale, br.hi * scale};
    r.regime = d > 0.0 ? Regime::mixed : Regime::oscillatory;
    r.residual = std::abs(chi(d));
    return r;
}

}  // namespace detail

/// Scans det A2 on [delta*_o2, -lambda^2/4), then the continuous
/// characteristic on (-lambda^2/4, 0] and (0, positive_limit], and bisects the
/// first sign change in increasing delta.
inline EigenResult solve_delta_o(const EigenProblem& problem, const SolveOptions& opt = {}) {
    const auto [unit, scale] = rescale_to_unit(problem);
    const double lam = unit.lambda;
    const double edge = -0.25 * lam * lam;
    const int n = opt.samples;

    {
        // complex branch, sampled uniformly in (-delta)^{1/4}
        const double lo = std::pow(-lower_bound_delta_o2(lam), 0.25);
        const double hi = std::pow(-edge, 0.25);
        int prev_sign = 0;
        double prev_delta = 0.0;
        for (int i = 0; i < n; ++i) {
            const double s = lo + (hi - lo) * static_cast<double>(i) / n;
            const double d = -s * s * s * s;
            if (!(d < edge)) break;
            const int sg = det_a2_scaled(d, lam).sign();
            if (sg == 0) {
                EigenResult r;
                r.delta_o = d * scale;
                r.bracket = {r.delta_o, r.delta_o};
                r.regime = Regime::complex_pair;
                return r;
            }
            if (prev_sign != 0 && sg != prev_sign) {
                auto f = [lam](double x) { return static_cast<double>(det_a2_scaled(x, lam).sign()); };
                auto br = numeric::bisect(f, prev_delta, d, opt.tol);
                EigenResult r;
                r.delta_o = br.mid() * scale;
                r.bracket = {br.lo * scale, br.hi * scale};
                r.regime = Regime::complex_pair;
                r.residual = std::abs(det_a2_scaled(br.mid(), lam).mantissa);
                return r;
            }
            prev_sign = sg;
            prev_delta = d;
        }
    }

    std::vector<detail::Sample> samples;
    samples.reserve(2 * static_cast<std::size_t>(n) + 1);
    if (lam > 0.0) {
        // uniform in sqrt(lambda^2 + 4 delta) so the branch point is resolved
        for (int i = 1; i <= n; ++i) {
            const double s = lam * static_cast<double>(i) / n;
            const double d = i == n ? 0.0 : 0.25 * (s * s - lam * lam);
            samples.push_back({d, characteristic(d, lam)});
        }
    }
    for (int i = 1; i <= n; ++i) {
        const double d = opt.positive_limit * static_cast<double>(i) / n;
        samples.push_back({d, characteristic(d, lam)});
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].value == 0.0) return detail::finish(unit, scale, {samples[i].delta, samples[i].delta}, opt.tol);
        if (i > 0 && numeric::sign_of(samples[i].value) != numeric::sign_of(samples[i - 1].value))
            return detail::finish(unit, scale, {samples[i - 1].delta, samples[i].delta}, opt.tol);
    }
    throw NoRootFound("solve_delta_o: no sign change for lambda = " + std::to_string(problem.lambda));
}

/// Smallest eigenvalue of the clamped difference operator D4 + lambda D2 on
/// n interior nodes, by inverse iteration shifted below -lambda^2/4. The
/// stencil's condition number grows like n^4, so the solve runs in long
/// double to keep roundoff below the O(h^2) discretization error.
struct EigenPair {
    double value = 0.0;
    std::vector<double> vector;  ///< interior nodes a + (i+1)h, unit 2-norm
};

inline EigenPair fd_eigen_pair(const EigenProblem& problem, int n, int max_iter = 100000) {
    using R = long double;
    problem.validate();
    if (n < 50) throw DomainError("fd_eigen_oracle: need n >= 50");
    const R h = (static_cast<R>(problem.b) - problem.a) / (n + 1);
    const R h2 = h * h, h4 = h2 * h2;
    const R lam = problem.lambda;
    const R sigma = -0.25L * lam * lam - 1.0L;
    const auto N = static_cast<std::size_t>(n);
    numeric::BandMatrixT<R> A(N, 2);
    for (std::size_t i = 0; i < N; ++i) {
        // reflected ghost values z_{-1} = z_1 give the corner entry 7
        const bool end = (i == 0 || i + 1 == N);
        A(i, i) = (end ? 7.0L : 6.0L) / h4 - 2.0L * lam / h2 - sigma;
        if (i + 1 < N) { A(i, i + 1) = -4.0L / h4 + lam / h2; A(i + 1, i) = A(i, i + 1); }
        if (i + 2 < N) { A(i, i + 2) = 1.0L / h4; A(i + 2, i) = 1.0L / h4; }
    }
    const numeric::BandLUT<R> lu(A);
    std::vector<R> x(N), y(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double s = (static_cast<double>(i) + 1.0) / (n + 1);
        x[i] = std::sin(std::numbers::pi * s) * (1.0 + 0.25 * std::cos(7.3 * s));
    }
    R rho = 0.0L, prev = std::numeric_limits<R>::infinity();
    int settled = 0;
    for (int it = 0; it < max_iter; ++it) {
        R xx = 0.0L;
        for (R v : x) xx += v * v;
        y = x;
        lu.solve(y);
        R xy = 0.0L, yy = 0.0L;
        for (std::size_t i = 0; i < N; ++i) { xy += x[i] * y[i]; yy += y[i] * y[i]; }
        rho = sigma + xx / xy;
        const R inv = 1.0L / std::sqrt(yy);
        for (std::size_t i = 0; i < N; ++i) x[i] = y[i] * inv;
        if (std::abs(rho - prev) <= 1e-12L * std::max(1.0L, std::abs(rho))) {
            if (++settled >= 3) {
                EigenPair out{static_cast<double>(rho), std::vector<double>(N)};
                for (std::size_t i = 0; i < N; ++i) out.vector[i] = static_cast<double>(x[i]);
                return out;
            }
        } else {
            settled = 0;
        }
        prev = rho;
    }
    throw ConvergenceFailure("fd_eigen_oracle: inverse iteration did not settle");
}

inline double fd_eigen_oracle(const EigenProblem& problem, int n, int max_iter = 100000) {
    return fd_eigen_pair(problem, n, max_iter).value;
}

}  // namespace ksic::spectrum
