// ksic: command-line driver for the toolkit.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "ksic/coeffs.hpp"
#include "ksic/experiment.hpp"
#include "ksic/gronwall.hpp"
#include "ksic/spectrum.hpp"
#include "ksic/switched.hpp"
#include "ksic/verification.hpp"

using nlohmann::json;
namespace ex = ksic::experiment;

namespace {

constexpr int kOk = 0, kInvariant = 2, kBlowUp = 3;

json quad(const ksic::coeffs::QuadForm& q) { return {{"a", q.a}, {"b", q.b}, {"c", q.c}}; }

// overrides shared by certify / simulate / sweep
struct Overrides {
    std::string config;
    std::string controller;
    std::optional<double> alpha1, alpha2, tbar1, tbar2, lambda1, T_end, dt;
    std::optional<std::uint64_t> seed;
    bool force = false;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "JSON experiment config");
        app->add_option("--controller", controller, "open | 1 | 2")->check(CLI::IsMember({"open", "1", "2"}));
        app->add_option("--alpha1", alpha1);
        app->add_option("--alpha2", alpha2);
        app->add_option("--tbar1", tbar1);
        app->add_option("--tbar2", tbar2);
        app->add_option("--lambda1", lambda1);
        app->add_option("--T-end", T_end, "end time");
        app->add_option("--dt", dt);
        app->add_option("--seed", seed);
        app->add_flag("--force", force, "run controller 1 even if the dwell-time conditions fail");
    }

    ex::ExperimentConfig build() const {
        ex::ExperimentConfig c = config.empty() ? ex::ExperimentConfig{} : ex::load_config(config);
        if (!controller.empty()) c.controller.mode = controller;
        if (alpha1) c.controller.alpha1 = *alpha1;
        if (alpha2) c.controller.alpha2 = *alpha2;
        if (tbar1) c.schedule.tbar1 = *tbar1;
        if (tbar2) c.schedule.tbar2 = *tbar2;
        if (lambda1) c.lambda1 = *lambda1;
        if (T_end) c.solver.T_end = *T_end;
        if (dt) c.solver.dt = *dt;
        if (seed) c.initial.seed = *seed;
        if (force) c.controller.force = true;
        ex::default_gains(c);
        c.validate();
        return c;
    }
};

void write_trajectory(const std::vector<ksic::switched::Sample>& tr) {
    std::cout << "t,V1,V2\n";
    for (const auto& s : tr) std::cout << ex::fmt(s.t) << ',' << ex::fmt(s.V1) << ',' << ex::fmt(s.V2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kuramoto-Sivashinsky boundary control with intermittent sensing"};
    app.set_version_flag("--version", ex::version);
    app.require_subcommand(1);

    // eigen
    double lam = 0.0, a = 0.0, b = 1.0;
    bool oracle = false;
    int oracle_n = 2000;
    auto* eigen = app.add_subcommand("eigen", "smallest clamped eigenvalue delta_o");
    eigen->add_option("--lambda", lam)->required();
    eigen->add_option("--a", a);
    eigen->add_option("--b", b);
    eigen->add_flag("--oracle", oracle, "also run the finite-difference oracle");
    eigen->add_option("--n", oracle_n, "oracle grid size");

    // coeffs
    auto* coeffs = app.add_subcommand("coeffs", "boundary coefficient table on [a,b]");
    coeffs->add_option("--a", a);
    coeffs->add_option("--b", b);

    Overrides ov;
    auto* certify = app.add_subcommand("certify", "certificate constants for a config");
    ov.attach(certify);

    // sigma3 / sigma4
    double V10 = 1.0, V20 = 1.0, growth = std::nan("");
    int periods = 20, per_phase = 50;
    auto* sigma3 = app.add_subcommand("sigma3", "scalar switched comparison system under controller 1");
    auto* sigma4 = app.add_subcommand("sigma4", "scalar switched comparison system under controller 2");
    for (auto* s : {sigma3, sigma4}) {
        ov.attach(s);
        s->add_option("--v1", V10, "V1(0)");
        s->add_option("--v2", V20, "V2(0)");
        s->add_option("--periods", periods);
        s->add_option("--per-phase", per_phase, "samples per phase");
    }
    sigma3->add_option("--growth", growth, "unmeasured-side rate (default 2 delta1)");

    // envelope
    double T = 0.05, v1 = 1.0, latched = 1.0;
    auto* envelope = app.add_subcommand("envelope", "Gronwall envelope for V1 over an I2 window");
    ov.attach(envelope);
    envelope->add_option("--T", T, "window length")->required();
    envelope->add_option("--v1", v1, "V1 at window entry")->required();
    envelope->add_option("--latched", latched, "latched alpha2^{1/3} V2")->required();

    auto* simulate = app.add_subcommand("simulate", "closed-loop PDE run; writes CSV/JSON outputs");
    ov.attach(simulate);
    std::string summary, trajectory, report;
    simulate->add_option("--summary", summary, "summary CSV path");
    simulate->add_option("--trajectory", trajectory, "profile CSV path");
    simulate->add_option("--report", report, "report JSON path (default: stdout)");

    auto* sweep = app.add_subcommand("sweep", "alpha2 sweep of closed-loop runs (KSIC_THREADS caps workers)");
    ov.attach(sweep);
    std::vector<double> alpha2s{10.0, 100.0, 1000.0};
    sweep->add_option("--alpha2-list", alpha2s, "alpha2 values")->delimiter(',');

    std::string level = "fast";
    bool canary = false;
    auto* verify = app.add_subcommand("verify", "acceptance suite");
    verify->add_option("level", level)->check(CLI::IsMember({"fast", "full"}));
    verify->add_flag("--canary", canary, "corrupt delta_o by +10% in the Lemma-4 check");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*eigen) {
            const ksic::spectrum::EigenProblem p{lam, a, b};
            const auto r = ksic::spectrum::solve_delta_o(p);
            json j{{"lambda", lam}, {"a", a}, {"b", b}, {"delta_o", r.delta_o}, {"regime", ksic::spectrum::to_string(r.regime)}, {"residual", r.residual}};
            if (oracle) j["oracle"] = ksic::spectrum::fd_eigen_oracle(p, oracle_n);
            std::cout << j.dump(2) << '\n';
            return kOk;
        }
        if (*coeffs) {
            const auto t = ksic::coeffs::czi_table(a, b);
            std::cout << json{{"a", a}, {"b", b}, {"C_z1", quad(t[1])}, {"C_z2", quad(t[2])}, {"C_z3", quad(t[3])}}.dump(2) << '\n';
            return kOk;
        }
        if (*certify) {
            const auto c = ov.build();
            if (c.mode() == ksic::control::Mode::open_loop) throw ksic::DomainError("certify needs --controller 1 or 2");
            const auto j = ex::certificate_json(c, ex::design(c));
            std::cout << j.dump(2) << '\n';
            return j.value("conditions_ok", false) || c.mode() == ksic::control::Mode::controller2 ? kOk : kInvariant;
        }
        if (*sigma3 || *sigma4) {
            const auto c = ov.build();
            const auto p = ex::design(c);
            const ksic::switched::SwitchedParams sp{c.controller.alpha1, c.controller.alpha2, p.delta1, p.delta2};
            if (*sigma3) {
                const double g = std::isnan(growth) ? 2.0 * p.delta1 : growth;
                write_trajectory(ksic::switched::simulate_sigma3(V10, V20, sp.alpha1, sp.alpha2, g, c.schedule, periods, per_phase));
                return kOk;
            }
            const ksic::gronwall::EnvelopeParams env{p.delta1, p.delta2, p.C, p.P};
            const auto r = ksic::switched::simulate_sigma4(V10, V20, sp, c.schedule, periods, env, per_phase);
            write_trajectory(r.trajectory);
            const bool holds = std::all_of(r.recursion_holds.begin(), r.recursion_holds.end(), [](bool x) { return x; });
            if (!holds) std::cerr << "warning: W(t_2k) recursion violated\n";
            return holds ? kOk : kInvariant;
        }
        if (*envelope) {
            const auto c = ov.build();
            const auto p = ex::design(c);
            const auto e = ksic::gronwall::lemma13_envelope(T, v1, latched, {p.delta1, p.delta2, p.C, p.P});
            std::cout << json{{"T", T},
                              {"V1_entry", v1},
                              {"latched", latched},
                              {"envelope", e.value},
                              {"alpha_bar", e.alpha_bar},
                              {"beta1", e.beta1},
                              {"G1", e.G1},
                              {"M1", e.M1},
                              {"M2", e.M2},
                              {"sup_g2", e.sup_g2},
                              {"sup_g3", e.sup_g3},
                              {"M1_at_zero", e.M1_at_zero},
                              {"M1_limit_remark", e.M1_limit_remark}}
                             .dump(2)
                      << '\n';
            return kOk;
        }
        if (*simulate) {
            auto c = ov.build();
            if (!summary.empty()) c.outputs.summary = summary;
            if (!trajectory.empty()) c.outputs.trajectory = trajectory;
            if (!report.empty()) c.outputs.report = report;
            const auto r = ex::run_with_outputs(c);
            if (c.outputs.report.empty()) std::cout << ex::run_report(c, r).dump(2) << '\n';
            if (r.blew_up) {
                std::cerr << "blow-up: " << r.message << '\n';
                return kBlowUp;
            }
            for (const auto& w : r.windows)
                if (!w.dominated()) return kInvariant;
            return kOk;
        }
        if (*sweep) {
            const auto base = ov.build();
            std::vector<ex::ExperimentConfig> cs;
            for (double x : alpha2s) {
                auto c = base;
                c.controller.alpha2 = x;
                c.validate();
                cs.push_back(c);
            }
            const auto res = ex::sweep(cs);
            std::cout << "# ksic " << ex::version << "\nalpha2,config_hash,blew_up,blowup_t,W0,W_final,late_sup_W,error\n";
            bool blown = false;
            for (const auto& e : res) {
                const auto& r = e.result;
                blown = blown || r.blew_up || !e.error.empty();
                std::cout << ex::fmt(e.config.controller.alpha2) << ",fnv1a64:" << ex::hash_hex(ex::config_hash(e.config)) << ','
                          << (r.blew_up ? 1 : 0) << ',' << ex::fmt(r.blowup_t) << ',' << ex::fmt(r.W0) << ','
                          << ex::fmt(r.rows.empty() ? 0.0 : r.rows.back().W()) << ',' << ex::fmt(r.late_sup_W()) << ",\"" << e.error << "\"\n";
            }
            return blown ? kBlowUp : kOk;
        }
        if (*verify) {
            ksic::verification::Options o;
            o.level = level == "full" ? ksic::verification::Level::full : ksic::verification::Level::fast;
            o.canary = canary;
            o.on_check = [](const ksic::verification::Check& c) { std::cout << ksic::verification::format_line(c) << std::endl; };
            int failed = 0;
            const auto all = ksic::verification::run_all(o);
            for (const auto& c : all) failed += !c.pass;
            std::cout << (all.size() - static_cast<std::size_t>(failed)) << "/" << all.size() << " passed\n";
            return failed ? kInvariant : kOk;
        }
    } catch (const ksic::ConditionsViolated& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvariant;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kOk;
}
