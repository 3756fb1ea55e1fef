#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "ksic/switched.hpp"

using namespace ksic;
using namespace ksic::switched;
using Catch::Approx;

TEST_CASE("dwell-time conditions are strict", "[switched]") {
    CHECK(check_conditions(1e-9, 1e-9, 0.0, 0.3, 0.7));
    const double d2 = 4.0, T1 = 0.3, T2 = 0.7;
    CHECK_FALSE(check_conditions(2 * d2 * T2 / T1, 100.0, d2, T1, T2));
    CHECK_FALSE(check_conditions(100.0, 2 * d2 * T1 / T2, d2, T1, T2));
    CHECK(check_conditions(2 * d2 * T2 / T1 + 1, 2 * d2 * T1 / T2 + 1, d2, T1, T2));
    CHECK_THROWS_AS(check_conditions(1, 1, 0, 0.0, 1), DomainError);
}

TEST_CASE("theorem 1 rate and overshoot", "[switched]") {
    const control::PhaseSchedule s{0.5, 0.5};
    const double a = 10.0, d2 = 2.0;
    auto r = theorem1_certificate({a, a, 1.0, d2}, s);
    CHECK(r.rate_beta == Approx((a - 2 * d2) / 2));
    CHECK(r.overshoot_kappa == Approx(std::exp((2.0 + r.rate_beta) * 1.0)));
    auto z = theorem1_certificate({3.0, 5.0, 0.0, 0.0}, s);
    CHECK(z.overshoot_kappa == Approx(std::exp(z.rate_beta * 1.0)));
    CHECK(z.rate_beta > 0.0);
    CHECK_THROWS_AS(theorem1_certificate({0.1, 5.0, 1.0, 2.0}, s), ConditionsViolated);
    // delta1 < 0: the displayed overshoot drops below 1 and cannot bound W(0)
    auto n = theorem1_certificate({50.0, 50.0, -20.0 / 3.0, 40.0 / 3.0}, s);
    CHECK(n.overshoot_kappa_displayed < 1.0);
    CHECK(n.overshoot_kappa >= 1.0);
}

TEST_CASE("sigma3 exact propagation", "[switched]") {
    const control::PhaseSchedule s{1.0, 1.0};
    auto tr = simulate_sigma3(1.0, 1.0, 1.0, 1.0, 0.0, s, 1);
    CHECK(tr.back().t == Approx(2.0));
    CHECK(tr.back().V1 == Approx(std::exp(-1.0)));
    CHECK(tr.back().V2 == Approx(std::exp(-1.0)));
    auto z = simulate_sigma3(1.0, 0.0, 3.0, 2.0, 5.0, s, 5);
    for (auto& x : z) CHECK(x.V2 == 0.0);
}

TEST_CASE("theorem 1 envelope holds pointwise", "[switched][property]") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double delta = (U(rng) - 0.5) * 40.0;
        const double d1 = (std::abs(delta) - 2 * delta) / 3, d2 = (4 * std::abs(delta) - 2 * delta) / 3;
        const control::PhaseSchedule s{0.01 + U(rng), 0.01 + U(rng)};
        const double a1 = 2 * d2 * s.tbar2 / s.tbar1 + 0.1 + 10 * U(rng);
        const double a2 = 2 * d2 * s.tbar1 / s.tbar2 + 0.1 + 10 * U(rng);
        const SwitchedParams p{a1, a2, d1, d2};
        auto r = theorem1_certificate(p, s);
        const double V10 = U(rng), V20 = U(rng);
        auto tr = simulate_sigma3(V10, V20, p, s, 20);
        const double W0 = V10 + V20;
        for (auto& x : tr) {
            const double env = r.overshoot_kappa * std::exp(-r.rate_beta * x.t) * W0;
            CHECK(x.W() <= env * (1 + 8 * std::numeric_limits<double>::epsilon()));
        }
        for (std::size_t k = 100; k < tr.size(); k += 100)
            CHECK(tr[k].W() <= std::exp(-r.rate_beta * s.period()) * tr[k - 100].W() * (1 + 1e-14));
    }
}

TEST_CASE("violated conditions give a growing trajectory", "[switched]") {
    // proof dynamics with delta1 = delta2 and alpha1 under the threshold
    const control::PhaseSchedule s{0.5, 0.5};
    const double d2 = 3.0;
    const double a1 = 0.5 * 2 * d2 * s.tbar2 / s.tbar1, a2 = 20.0;
    REQUIRE_FALSE(check_conditions(a1, a2, d2, s.tbar1, s.tbar2));
    auto tr = simulate_sigma3(1.0, 0.0, a1, a2, 2 * d2, s, 5);
    for (std::size_t k = 100; k < tr.size(); k += 100) CHECK(tr[k].W() > tr[k - 100].W());
}

TEST_CASE("lemma 11 offset", "[switched]") {
    CHECK(lemma11_bo(-10.0, 1.0) == 0.0);
    CHECK(lemma11_bo(1.0, 1.0) == Approx(2.0));
    CHECK(lemma11_bo(8.0, 512.0) == Approx(2.0));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-5.0, 20.0), la(-1.0, 4.0);
    for (int i = 0; i < 20; ++i) {
        const double d1 = d(rng), a2 = std::pow(10.0, la(rng));
        const double b0 = lemma11_bo(d1, a2);
        CHECK(b0 >= 0.0);
        const double k = 2 * d1 / std::cbrt(a2);
        double worst = 1e300;
        for (int j = 0; j <= 1000000; j += 7) {
            const double x = 100.0 * j / 1e6;
            worst = std::min(worst, x * x * x - k * x - x + b0);
        }
        CHECK(worst >= -1e-9);
        // tight: slightly smaller b0 fails when b0 > 0
        if (b0 > 1e-6) {
            const double pi = std::sqrt((k + 1) / 3);
            CHECK(pi * pi * pi - k * pi - pi + 0.999 * b0 < 0.0);
        }
    }
}

TEST_CASE("theorem 2 constants", "[switched]") {
    const control::PhaseSchedule s{0.1, 0.1};
    SwitchedParams p{40.0, 1e6, 1.0, 2.0};
    auto r = theorem2_certificate(p, s);
    CHECK(r.margin <= -2.0);
    CHECK(r.q > 0.0);
    CHECK(r.q < 1.0);
    CHECK(r.p >= 0.0);
    CHECK(r.q == Approx(std::exp(-2.0) + std::exp(-2.0)));
    CHECK(r.M == Approx(std::exp(0.2) / (1 - 2 * std::exp(-2.0))));
    CHECK(r.residual_bound == Approx(r.M * r.b0 / 100.0));
    CHECK_THROWS_AS(theorem2_certificate({40.0, 1.0, 1.0, 2.0}, s), ConditionsViolated);

    // recursion and its geometric closed form
    auto rows = recursion(5.0, 2 * std::exp(-2.0), 0.3, 50);
    for (auto& row : rows) CHECK(row.iterate == Approx(row.closed_form).epsilon(1e-13));
    CHECK(rows.back().iterate == Approx(0.3 / (1 - 2 * std::exp(-2.0))).epsilon(1e-10));

    // residual bound decreases in alpha2 when delta1 >= 0
    double prev = 1e300;
    for (double a2 = 1e6; a2 < 1e9; a2 *= 1.5) {
        const double rb = theorem2_certificate({40.0, a2, 1.0, 2.0}, s).residual_bound;
        CHECK(rb < prev);
        prev = rb;
    }
}

TEST_CASE("sigma4 envelope", "[switched]") {
    const control::PhaseSchedule s{0.1, 0.1};
    const gronwall::EnvelopeParams env{0.0, 0.0, 1.0, 3.67};
    // b0 = 0 only for c <= 0, i.e. delta1 <= -alpha2^{1/3} / 2
    SwitchedParams p{40.0, 1e6, -60.0, 120.0};
    auto res = simulate_sigma4(0.0, 1.0, p, s, 3, env);
    CHECK(res.report.b0 == 0.0);
    const double a = 100.0;
    for (auto& x : res.trajectory) {
        const double ph = std::fmod(x.t, 0.2);
        if (ph > 0.1 + 1e-12) {
            const double t2 = x.t - ph + 0.1;
            const auto entry = std::find_if(res.trajectory.begin(), res.trajectory.end(), [&](const Sample& y) { return std::abs(y.t - t2) < 1e-12; });
            REQUIRE(entry != res.trajectory.end());
            CHECK(x.V2 == Approx(std::exp(-a * (x.t - t2)) * entry->V2).epsilon(1e-12));
        }
    }
    // alpha1 has to grow with the initial bound: from W = 1 the envelope reaches e^{200}
    SwitchedParams big{200.0, 1e6, 1.0, 2.0};
    auto blown = simulate_sigma4(0.5, 0.5, big, s, 2, gronwall::EnvelopeParams{1.0, 2.0, 1.0, 3.67});
    CHECK_FALSE(blown.recursion_holds[0]);
    auto r2 = simulate_sigma4(1e-4, 1e-4, big, s, 30, gronwall::EnvelopeParams{1.0, 2.0, 1.0, 3.67});
    CHECK(r2.recursion_holds.size() == 29);
    for (bool ok : r2.recursion_holds) CHECK(ok);
    CHECK(r2.W_at_I2_entry.back() <= r2.report.p / (1 - r2.report.q) * 1.5 + 1e-12);
}
