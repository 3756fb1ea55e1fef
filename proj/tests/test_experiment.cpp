#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ksic/experiment.hpp"

using namespace ksic;
using namespace ksic::experiment;

namespace {

ExperimentConfig small(const std::string& mode) {
    ExperimentConfig c;
    c.grid = {1.0, 2.0, 33, 33};
    c.controller.mode = mode;
    c.solver.dt = 1e-5;
    c.solver.T_end = 0.02;
    c.outputs.stride = 10;
    default_gains(c);
    return c;
}

std::string csv_of(const ExperimentConfig& c) {
    std::ostringstream sum, traj;
    run_closed_loop(c, {&sum, &traj});
    return sum.str() + traj.str();
}

}  // namespace

TEST_CASE("same config and seed give bit-identical CSV", "[experiment]") {
    auto c = small("open");
    c.initial.seed = 42;
    c.outputs.trajectory_stride = 500;
    const auto a = csv_of(c), b = csv_of(c);
    CHECK(a == b);
    c.initial.seed = 43;
    CHECK(csv_of(c) != a);
    CHECK(a.rfind("# ksic 0.1.0", 0) == 0);
    CHECK(a.find("# config_hash fnv1a64:" + hash_hex(config_hash(small("open")))) == std::string::npos);
    c.initial.seed = 42;
    CHECK(a.find("# config_hash fnv1a64:" + hash_hex(config_hash(c))) != std::string::npos);
}

TEST_CASE("zero initial data gives zero outputs", "[experiment]") {
    for (const char* mode : {"open", "1", "2"}) {
        auto c = small(mode);
        c.initial.preset = "sampled";
        c.initial.w.assign(33, 0.0);
        c.initial.v.assign(33, 0.0);
        const auto r = run_closed_loop(c);
        REQUIRE_FALSE(r.blew_up);
        for (const auto& row : r.rows) {
            CHECK(row.V1 == 0.0);
            CHECK(row.V2 == 0.0);
            CHECK(row.u1 == 0.0);
            CHECK(row.u2 == 0.0);
            CHECK(row.u3 == 0.0);
        }
    }
}

TEST_CASE("config JSON round trip and hash", "[experiment]") {
    auto c = small("2");
    c.controller.alpha2 = 123.5;
    c.controller.delta = -7.0;
    c.initial.seed = 9;
    c.outputs.summary = "s.csv";
    nlohmann::json j = c;
    const auto back = j.get<ExperimentConfig>();
    CHECK(nlohmann::json(back) == j);
    CHECK(config_hash(back) == config_hash(c));
    auto d = c;
    d.controller.alpha2 = 124.0;
    CHECK(config_hash(d) != config_hash(c));

    nlohmann::json m = {{"controller", {{"mode", 1}}}};
    CHECK(m.get<ExperimentConfig>().controller.mode == "1");
    m["controller"]["mode"] = "open";
    CHECK(m.get<ExperimentConfig>().mode() == control::Mode::open_loop);
}

TEST_CASE("config files: JSON loads, TOML and bad values are rejected", "[experiment]") {
    const std::string path = "ksic_test_config.json";
    {
        std::ofstream f(path);
        f << R"({"physics": {"lambda1": 12.5}, "schedule": {"Tbar1": 0.1, "Tbar2": 0.2}})";
    }
    const auto c = load_config(path);
    CHECK(c.lambda1 == 12.5);
    CHECK(c.schedule.tbar2 == 0.2);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_config("x.toml"), DomainError);

    auto bad = small("1");
    bad.controller.mode = "3";
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = small("1");
    bad.solver.T_end = 0.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = small("1");
    bad.initial.preset = "sampled";
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("presets satisfy the boundary conditions", "[experiment]") {
    for (const char* preset : {"sine_bump", "random_smooth"}) {
        auto c = small("open");
        c.initial.preset = preset;
        c.initial.amplitude = 0.3;
        const auto s = initial_state(c);
        CHECK(s.w.front() == 0.0);
        CHECK(s.w.back() == 0.0);
        CHECK(s.v.front() == 0.0);
        CHECK(s.v.back() == 0.0);
        double m = 0.0;
        for (double x : s.w) m = std::max(m, std::abs(x));
        for (double x : s.v) m = std::max(m, std::abs(x));
        CHECK(m == Catch::Approx(0.3));
        // zero end slopes: first differences vanish to O(h^2)
        const double h = c.grid.h_w();
        CHECK(std::abs(s.w[1] - s.w[0]) / h < 10 * h);
        CHECK(std::abs(s.v[32] - s.v[31]) / h < 10 * h);
    }
}

TEST_CASE("controller 1 refuses gains outside the dwell-time conditions", "[experiment]") {
    auto c = small("1");
    c.controller.alpha1 = c.controller.alpha2 = 1.0;
    CHECK_THROWS_AS(run_closed_loop(c), ConditionsViolated);
    c.controller.force = true;
    CHECK_NOTHROW(run_closed_loop(c));
}

TEST_CASE("sweep keeps input order", "[experiment]") {
    std::vector<ExperimentConfig> cs;
    for (double a2 : {10.0, 1e3, 100.0}) {
        auto c = small("open");
        c.controller.alpha2 = a2;
        c.solver.T_end = 0.002;
        cs.push_back(c);
    }
    const auto res = sweep(cs);
    REQUIRE(res.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(res[i].config.controller.alpha2 == cs[i].controller.alpha2);
        CHECK(res[i].error.empty());
        CHECK(res[i].result.rows.back().W() == run_closed_loop(cs[i]).rows.back().W());
    }
}

TEST_CASE("controller 2 from an I2 entry: envelope dominates at lambda1 = 10", "[experiment]") {
    auto c = small("2");
    c.lambda1 = 10.0;
    c.controller.delta = default_delta(10.0, 1.0, 2.0);
    c.controller.alpha1 = c.controller.alpha2 = 0.0;
    default_gains(c);
    const auto ds = coeffs::delta_split(*c.controller.delta);
    REQUIRE(ds.delta1 < 0.0);
    c.controller.alpha2 = std::max(c.controller.alpha2, std::pow(1.01 * (2 * ds.delta1 * 0.05 + 2) / 0.05, 3));
    c.solver.t_start = 0.05;
    c.solver.T_end = 0.1;
    c.solver.dt = 1e-5;
    const auto r = run_closed_loop(c);
    REQUIRE(r.windows.size() == 1);
    const auto& w = r.windows.front();
    CHECK(w.complete);
    CHECK(std::isfinite(w.envelope));
    CHECK(w.latched == Catch::Approx(std::cbrt(c.controller.alpha2) * w.V2_entry));
    CHECK(w.dominated());
    CHECK(w.V1_max > 0.0);
    const auto rep = run_report(c, r);
    CHECK(rep.at("I2_windows").size() == 1);
    CHECK(rep.at("certificate").contains("b0"));
}
