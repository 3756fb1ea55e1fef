#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "ksic/control.hpp"
#include "ksic/spectrum.hpp"
#include "oracles.hpp"

using namespace ksic;
using namespace ksic::control;
using Catch::Approx;

namespace {

ControllerParams make_params(double lambda1 = 5.0, double alpha1 = 1.0, double alpha2 = 1.0) {
    const double Y = 1.0, L = 2.0;
    // delta at the admissible maximum; delta > 0 makes alpha + 2 delta1 negative here
    const double d0 = std::min(spectrum::solve_delta_o({3.0 * lambda1, 0.0, Y}).delta_o,
                               spectrum::solve_delta_o({3.0 * lambda1, Y, L}).delta_o);
    return ControllerParams::design(lambda1, alpha1, alpha2, d0, Y, L);
}

// 2 int k''^2, int k^2, 2 int k'^2 for the bridge from (1 at a) to (0 at b)
struct BridgeIntegrals {
    double c1, c2, c3;
};

BridgeIntegrals bridge_integrals(double a, double b, bool left) {
    const double l = b - a;
    auto t = [&](double x) { return (x - a) / l; };
    auto k = [&](double x) { const double s = t(x); return left ? 1 - 3 * s * s + 2 * s * s * s : 3 * s * s - 2 * s * s * s; };
    auto k1 = [&](double x) { const double s = t(x); return (left ? -1.0 : 1.0) * (6 * s - 6 * s * s) / l; };
    auto k2 = [&](double x) { const double s = t(x); return (left ? -1.0 : 1.0) * (6 - 12 * s) / (l * l); };
    return {2 * oracle::gauss64([&](double x) { return k2(x) * k2(x); }, a, b),
            oracle::gauss64([&](double x) { return k(x) * k(x); }, a, b),
            2 * oracle::gauss64([&](double x) { return k1(x) * k1(x); }, a, b)};
}

bool within(double excess, double scale) { return excess <= 1e-9 * std::max(1.0, scale); }

/// delta = 0 keeps alpha + 2 delta1 > 0 so both branches are reachable.
ControllerParams zero_delta_params(double lambda1 = 5.0) { return ControllerParams::design(lambda1, 1.0, 1.0, 0.0, 1.0, 2.0); }

}  // namespace

TEST_CASE("phase_of follows the half-open schedule", "[control]") {
    const PhaseSchedule s{0.3, 0.2};
    auto p0 = phase_of(0.0, s);
    CHECK(p0.phase == Phase::I1);
    CHECK(p0.k == 1);
    CHECK(p0.latch_instant == Approx(0.3));
    auto p1 = phase_of(0.3, s);
    CHECK(p1.phase == Phase::I2);
    CHECK(p1.window_start == Approx(0.3));
    auto p2 = phase_of(0.5 + 0.15, s);
    CHECK(p2.phase == Phase::I1);
    CHECK(p2.k == 2);
    CHECK(phase_of(0.5, s).phase == Phase::I1);
    CHECK(phase_of(0.4999, s).phase == Phase::I2);
    // t = n dt with accumulated rounding still lands after the switch
    double t = 0.0;
    for (int i = 0; i < 3000; ++i) t += 1e-4;
    CHECK(phase_of(t, s).phase == Phase::I2);
    CHECK(phase_of(t, s).k == 1);
    CHECK_THROWS_AS(phase_of(-1.0, s), DomainError);
    CHECK_THROWS_AS((PhaseSchedule{0.0, 1.0}.validate()), DomainError);
}

TEST_CASE("kappa2 slope is the positive root of b^3 - 6b - 3", "[control]") {
    const double b = kappa2_beta();
    CHECK(std::abs(b * b * b - 6 * b - 3) <= 1e-9);
    CHECK(b == Approx(2.6691).margin(1e-4));
    CHECK(-b * b * b + 6 * b + 3 <= 1e-9);
    const auto p = make_params();
    CHECK(p.P == Approx(b + 1.0));
}

TEST_CASE("B and C match the quadrature of the bridge integrals", "[control]") {
    for (double lambda1 : {0.0, 5.0, 30.0}) {
        const auto p = make_params(lambda1);
        const auto v = bridge_integrals(1.0, 2.0, true);
        CHECK(p.B == Approx(v.c1 + p.delta2 * v.c2 + lambda1 * v.c3).epsilon(1e-12));
        CHECK(B_as_displayed(p) == Approx(v.c2 + p.delta2 * v.c2 + lambda1 * v.c3).epsilon(1e-12));
        // u(0) = u(Y) = 1 makes the bridge constant, so only the L2 term survives
        CHECK(p.C == Approx(p.delta2 * 1.0).margin(1e-12));
        CHECK(p.B >= 0.0);
        CHECK(p.C >= 0.0);
        // far end of [Y, L] carries the b coefficients
        const auto r = bridge_integrals(1.0, 2.0, false);
        CHECK(p.A_v() == Approx(r.c1 + p.delta2 * r.c2 + lambda1 * r.c3).epsilon(1e-12));
        const auto w = bridge_integrals(0.0, 1.0, true);
        CHECK(p.A_w() == Approx(w.c1 + p.delta2 * w.c2 + lambda1 * w.c3).epsilon(1e-12));
    }
}

TEST_CASE("switching thresholds", "[control]") {
    auto p = make_params();
    CHECK(l1(0.0, p) == Approx(p.alpha1 + 2 * p.delta1));
    CHECK(l3(0.0, p) == Approx(p.alpha2 + 2 * p.delta1));
    CHECK(l1(2.0, p) - l1_as_stated(2.0, p) == Approx(p.lambda1 * p.tables_w[3].a * 2.0));

    // V1 = 3 with a_w1 + delta2 a_w2 = 2 and alpha1 + 2 delta1 = 1
    ControllerParams q = p;
    q.lambda1 = 0.0;
    q.delta2 = 0.0;
    q.delta1 = 0.0;
    q.alpha1 = 1.0;
    q.tables_w.C[0].a = 2.0;
    CHECK(l1_as_stated(3.0, q) == Approx(10.0));
    CHECK(l1(3.0, q) == Approx(10.0));

    double prev = l1(0.0, p);
    for (double V = 0.1; V < 50; V += 0.1) {
        CHECK(l1(V, p) >= prev);
        prev = l1(V, p);
    }
}

TEST_CASE("near-branch root satisfies the cubic with equality", "[control]") {
    const auto p = make_params();
    for (double V : {0.0, 1e-6, 0.3, 4.0, 100.0}) {
        const double k = k1(V, p);
        CHECK(k <= 0.0);
        const double A = p.A_w() + 1.0, l = l1(V, p), c = p.alpha1 + 2 * p.delta1;
        const double lhs = k * k * k + 3 * A * k * k + 3 * l * l;
        CHECK(std::abs(lhs + 3 * c * V) <= 1e-9 * std::max({1.0, std::abs(k * k * k), 3 * A * k * k}));
        // leftmost: the cubic is negative everywhere to the left
        for (double d : {1e-3, 1.0, 100.0}) {
            const double x = k - d * std::max(1.0, std::abs(k));
            CHECK(x * x * x + 3 * A * x * x + 3 * l * l + 3 * c * V < 0.0);
        }
    }
    CHECK(near_branch_root(-5.0, 0.0, 0.0, 0.0) == Approx(0.0).margin(1e-12));
}

TEST_CASE("kappa1 and kappa3 examples", "[control]") {
    const auto p = zero_delta_params();
    REQUIRE(l1(0.7, p) > 0.0);
    CHECK(kappa1(0.0, 1e3, p) == 0.0);
    CHECK(kappa1(0.0, 0.0, p) == 0.0);
    CHECK(kappa3(0.0, -1e3, p) == 0.0);
    const double V = 0.7;
    CHECK(kappa1(V, 2 * l1(V, p), p) == Approx(-V));
    CHECK(kappa1(V, -2 * l1(V, p), p) == Approx(V));
    CHECK(kappa1(V, 0.0, p) == Approx(k1(V, p)));
    CHECK(kappa3(V, 2 * l3(V, p), p) == Approx(V));
    CHECK(kappa3(V, -2 * l3(V, p), p) == Approx(-V));
    CHECK(kappa3(V, 0.0, p) == Approx(-k3(V, p)));
}

TEST_CASE("kappa1 and kappa3 satisfy the design inequalities", "[control][property]") {
    std::mt19937_64 rng(7);
    for (double lambda1 : {0.0, 5.0, 30.0}) {
        for (const auto& p : {make_params(lambda1, 0.5, 2.0), ControllerParams::design(lambda1, 0.5, 2.0, 0.0, 1.0, 2.0)}) {
            std::uniform_real_distribution<double> Vd(0.0, 100.0), wd(-1e6, 1e6), frac(-1.0, 1.0);
            for (int i = 0; i < 1000; ++i) {
                const double V = Vd(rng);
                // half far-field draws, half inside the near band
                const double w = (i % 2) ? wd(rng) : frac(rng) * l1(V, p);
                const double u1 = kappa1(V, w, p);
                CHECK(within(design1_excess(u1, w, V, p), design1_scale(u1, w, V, p)));
                CHECK(std::abs(u1) <= std::max(V, std::abs(k1(V, p))) * (1 + 1e-12));
                const double z = (i % 2) ? wd(rng) : frac(rng) * l3(V, p);
                const double u3 = kappa3(V, z, p);
                CHECK(within(design2_excess(u3, z, V, p), design2_scale(u3, z, V, p)));
                CHECK(std::abs(u3) <= std::max(V, std::abs(k3(V, p))) * (1 + 1e-12));
            }
        }
    }
}

TEST_CASE("threshold without the lambda1 term admits violations", "[control]") {
    const auto p = zero_delta_params(5.0);
    const double V = 1.0;
    // on the stated threshold the far branch leaves lambda1 a_w3 V^2 - 2 V^3 / 3
    const double w = l1_as_stated(V, p);
    REQUIRE(w > 0.0);
    REQUIRE(w < l1(V, p));
    const double u = -sign(w) * V;
    CHECK(design1_excess(u, w, V, p) == Approx(p.lambda1 * p.tables_w[3].a * V * V - 2.0 * V * V * V / 3.0));
    CHECK(design1_excess(u, w, V, p) > 0.0);
    const double z = l3_as_stated(V, p);
    CHECK(design2_excess(sign(z) * V, z, V, p) > 0.0);
}

TEST_CASE("far branch of kappa3 with the opposite sign fails", "[control]") {
    const auto p = zero_delta_params();
    for (double V : {0.1, 1.0, 10.0}) {
        const double z = 2 * l3(V, p);
        CHECK(design2_excess(sign(z) * V, z, V, p) <= 0.0);
        CHECK(design2_excess(-sign(z) * V, z, V, p) > 0.0);
    }
}

TEST_CASE("kappa2 law and its bounds", "[control]") {
    const auto p = make_params();
    const double b = p.beta_kappa2;
    CHECK(kappa2(0.0, 5.0, p) == 0.0);
    CHECK(kappa2(0.0, 0.0, p) == 0.0);
    CHECK(kappa2(1.5, 2 * 2.25, p) == Approx(-1.5));
    CHECK(kappa2(1.5, -10.0, p) == Approx(1.5));
    CHECK(kappa2(1.5, 1.0, p) == Approx(-b * 1.5));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ad(0.0, 20.0), zd(-1e6, 1e6), frac(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = ad(rng);
        const double z = (i % 2) ? zd(rng) : 2 * a * a * frac(rng);
        const double u = kappa2(a, z, p);
        CHECK(std::abs(u) <= p.P * a * (1 + 1e-12));
        // the cubic part alone: u^3 + 3 u z <= -3 a^3
        const double ex = u * u * u + 3 * u * z + 3 * a * a * a;
        CHECK(ex <= 1e-9 * std::max(1.0, std::abs(u * u * u) + std::abs(3 * u * z) + 3 * a * a * a));
        // magnitude ladder
        const bool on_ladder = std::abs(std::abs(u) - a) <= 1e-12 * a || std::abs(std::abs(u) - b * a) <= 1e-12 * a;
        CHECK(on_ladder);
    }
}

TEST_CASE("B u^2 term cannot be absorbed by the kappa2 slope", "[control]") {
    const auto p = make_params();
    REQUIRE(p.B > 0.0);
    // near branch at v_xxx(Y) -> -2 a^2 leaves exactly B beta^2 a^2
    for (double a : {1e-3, 1.0, 1e3}) {
        const double z = -2 * a * a * (1 - 1e-15);
        const double u = kappa2(a, z, p);
        const double ex = design2bis_excess(u, z, a, p);
        CHECK(ex == Approx(p.B * p.beta_kappa2 * p.beta_kappa2 * a * a).epsilon(1e-6));
        CHECK(ex > 1e-9 * design2bis_scale(u, z, a, p));
    }
}

TEST_CASE("controller_step respects the sensing restriction", "[control]") {
    const pde::Grid g;
    const auto p = make_params();
    const PhaseSchedule s{0.05, 0.05};
    auto zero = pde::DualDomainState::zero(g);
    for (auto mode : {Mode::controller1, Mode::controller2}) {
        for (double t : {0.0, 0.02, 0.05, 0.07, 0.13}) {
            LatchStore latch;
            auto in = controller_step(mode, t, zero, g, s, p, latch);
            CHECK(in.u1 == 0.0);
            CHECK(in.u2 == 0.0);
            CHECK(in.u3 == 0.0);
        }
    }

    auto st = pde::DualDomainState::zero(g);
    for (int i = 0; i < g.n_w; ++i) st.w[i] = 0.3 * std::pow(std::sin(M_PI * g.x_w(i)), 2);
    for (int i = 0; i < g.n_v; ++i) st.v[i] = -0.4 * std::pow(std::sin(M_PI * (g.x_v(i) - 1.0)), 2) * (1 + g.x_v(i));
    auto w_only = st;
    std::fill(w_only.v.begin(), w_only.v.end(), 0.0);
    auto v_only = st;
    std::fill(v_only.w.begin(), v_only.w.end(), 0.0);

    for (auto mode : {Mode::controller1, Mode::controller2}) {
        LatchStore l1s, l2s;
        auto a = controller_step(mode, 0.01, st, g, s, p, l1s);
        auto b = controller_step(mode, 0.01, w_only, g, s, p, l2s);
        CHECK(a.u1 == b.u1);
        CHECK(a.u1 != 0.0);
        CHECK(a.u2 == 0.0);
        CHECK(a.u3 == 0.0);
        LatchStore l3s, l4s;
        auto c = controller_step(mode, 0.06, st, g, s, p, l3s);
        auto d = controller_step(mode, 0.06, v_only, g, s, p, l4s);
        CHECK(c.u1 == d.u1);
        CHECK(c.u2 == d.u2);
        CHECK(c.u3 == d.u3);
        if (mode == Mode::controller1) {
            CHECK(c.u1 == 0.0);
            CHECK(c.u2 == 0.0);
            CHECK(c.u3 != 0.0);
        } else {
            CHECK(c.u1 == c.u2);
            CHECK(c.u2 != 0.0);
            CHECK(c.u3 == 0.0);
        }
    }
}

TEST_CASE("latched value is frozen within an I2 window", "[control]") {
    const pde::Grid g;
    const auto p = make_params();
    const PhaseSchedule s{0.05, 0.05};
    auto st = pde::DualDomainState::zero(g);
    for (int i = 0; i < g.n_v; ++i) st.v[i] = 0.5 * std::pow(std::sin(M_PI * (g.x_v(i) - 1.0)), 2);
    LatchStore latch;
    controller_step(Mode::controller2, 0.05, st, g, s, p, latch);
    const double first = latch.latched;
    CHECK(first == Approx(std::cbrt(p.alpha2) * pde::half_square_integral(st.v, g.h_v())));
    for (auto& x : st.v) x *= 3.0;
    auto in = controller_step(Mode::controller2, 0.08, st, g, s, p, latch);
    CHECK(latch.latched == first);
    CHECK((std::abs(in.u2) == Approx(first) || std::abs(in.u2) == Approx(p.beta_kappa2 * first)));
    controller_step(Mode::controller2, 0.15, st, g, s, p, latch);
    CHECK(latch.window == 2);
    CHECK(latch.latched == Approx(9.0 * first));
    auto none = controller_step(Mode::open_loop, 0.15, st, g, s, p, latch);
    CHECK(none.u1 == 0.0);
}
