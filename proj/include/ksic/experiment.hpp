#pragma once

// Configuration, closed-loop runs, output files and sweeps.

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ksic/control.hpp"
#include "ksic/errors.hpp"
#include "ksic/gronwall.hpp"
#include "ksic/pde.hpp"
#include "ksic/spectrum.hpp"
#include "ksic/switched.hpp"

namespace ksic::experiment {

inline constexpr const char* version = "0.1.0";

struct InitialCfg {
    std::string preset = "random_smooth";  ///< sine_bump | random_smooth | sampled
    double amplitude = 0.01;               ///< max |u| of the preset
    int modes = 6;
    std::uint64_t seed = 1;
    std::vector<double> w, v;              ///< for "sampled"
};

struct ControllerCfg {
    std::string mode = "1";  ///< open | 1 | 2
    double alpha1 = 0.0, alpha2 = 0.0;
    std::optional<double> delta;  ///< defaults to the smaller delta_o(3 lambda1) of the two subdomains
    bool force = false;
};

struct SolverCfg {
    double dt = 1e-6;
    double T_end = 0.5;
    double t_start = 0.0;
};

struct OutputCfg {
    std::string summary, trajectory, report;
    int stride = 100;
    int trajectory_stride = 10000;
};

struct ExperimentConfig {
    pde::Grid grid;
    double lambda1 = 50.0;
    control::PhaseSchedule schedule{0.05, 0.05};
    ControllerCfg controller;
    SolverCfg solver;
    InitialCfg initial;
    OutputCfg outputs;

    control::Mode mode() const {
        if (controller.mode == "open") return control::Mode::open_loop;
        if (controller.mode == "1") return control::Mode::controller1;
        if (controller.mode == "2") return control::Mode::controller2;
        throw DomainError("controller.mode must be open, 1 or 2");
    }

    void validate() const {
        grid.validate();
        schedule.validate();
        (void)mode();
        if (!(lambda1 >= 0.0)) throw DomainError("lambda1 must be >= 0");
        if (!(solver.dt > 0.0) || !(solver.T_end > solver.t_start) || !(solver.t_start >= 0.0))
            throw DomainError("solver: need dt > 0 and 0 <= t_start < T_end");
        if (mode() != control::Mode::open_loop && (!(controller.alpha1 > 0.0) || !(controller.alpha2 > 0.0)))
            throw DomainError("controller: alpha1 and alpha2 must be positive");
        if (outputs.stride < 1 || outputs.trajectory_stride < 1) throw DomainError("outputs: strides must be >= 1");
        if (initial.preset == "sampled") {
            if (static_cast<int>(initial.w.size()) != grid.n_w || static_cast<int>(initial.v.size()) != grid.n_v)
                throw DomainError("initial: sampled arrays must match n_w and n_v");
        } else if (initial.preset != "sine_bump" && initial.preset != "random_smooth") {
            throw DomainError("initial.preset must be sine_bump, random_smooth or sampled");
        }
    }
};

// ---- JSON ----------------------------------------------------------------

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    j = nlohmann::json{
        {"grid", {{"n_w", c.grid.n_w}, {"n_v", c.grid.n_v}, {"Y", c.grid.Y}, {"L", c.grid.L}}},
        {"physics", {{"lambda1", c.lambda1}}},
        {"schedule", {{"Tbar1", c.schedule.tbar1}, {"Tbar2", c.schedule.tbar2}}},
        {"controller", {{"mode", c.controller.mode}, {"alpha1", c.controller.alpha1}, {"alpha2", c.controller.alpha2}, {"force", c.controller.force}}},
        {"solver", {{"dt", c.solver.dt}, {"T_end", c.solver.T_end}, {"t_start", c.solver.t_start}}},
        {"initial", {{"preset", c.initial.preset}, {"amplitude", c.initial.amplitude}, {"modes", c.initial.modes}, {"seed", c.initial.seed}}},
        {"outputs", {{"summary", c.outputs.summary}, {"trajectory", c.outputs.trajectory}, {"report", c.outputs.report},
                     {"stride", c.outputs.stride}, {"trajectory_stride", c.outputs.trajectory_stride}}},
    };
    if (c.controller.delta) j["controller"]["delta"] = *c.controller.delta;
    if (c.initial.preset == "sampled") {
        j["initial"]["w"] = c.initial.w;
        j["initial"]["v"] = c.initial.v;
    }
}

inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
    auto get = [](const nlohmann::json& o, const char* k, auto& dst) {
        if (o.contains(k)) o.at(k).get_to(dst);
    };
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        get(g, "n_w", c.grid.n_w);
        get(g, "n_v", c.grid.n_v);
        get(g, "Y", c.grid.Y);
        get(g, "L", c.grid.L);
    }
    if (j.contains("physics")) get(j.at("physics"), "lambda1", c.lambda1);
    if (j.contains("schedule")) {
        get(j.at("schedule"), "Tbar1", c.schedule.tbar1);
        get(j.at("schedule"), "Tbar2", c.schedule.tbar2);
    }
    if (j.contains("controller")) {
        const auto& k = j.at("controller");
        if (k.contains("mode")) {
            const auto& m = k.at("mode");
            c.controller.mode = m.is_number() ? std::to_string(m.get<int>()) : m.get<std::string>();
        }
        get(k, "alpha1", c.controller.alpha1);
        get(k, "alpha2", c.controller.alpha2);
        get(k, "force", c.controller.force);
        if (k.contains("delta") && !k.at("delta").is_null()) c.controller.delta = k.at("delta").get<double>();
    }
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        get(s, "dt", c.solver.dt);
        get(s, "T_end", c.solver.T_end);
        get(s, "t_start", c.solver.t_start);
    }
    if (j.contains("initial")) {
        const auto& i = j.at("initial");
        get(i, "preset", c.initial.preset);
        get(i, "amplitude", c.initial.amplitude);
        get(i, "modes", c.initial.modes);
        get(i, "seed", c.initial.seed);
        get(i, "w", c.initial.w);
        get(i, "v", c.initial.v);
    }
    if (j.contains("outputs")) {
        const auto& o = j.at("outputs");
        get(o, "summary", c.outputs.summary);
        get(o, "trajectory", c.outputs.trajectory);
        get(o, "report", c.outputs.report);
        get(o, "stride", c.outputs.stride);
        get(o, "trajectory_stride", c.outputs.trajectory_stride);
    }
}

/// Parses a JSON config. Not validated here: unset gains are filled later
/// by default_gains, and run_closed_loop validates.
inline ExperimentConfig load_config(const std::string& path) {
    if (path.size() > 5 && path.substr(path.size() - 5) == ".toml")
        throw DomainError("TOML configs are not supported; use JSON");
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("config parse error: ") + e.what());
    }
    return j.get<ExperimentConfig>();
}

/// FNV-1a 64 over the canonical JSON dump.
inline std::uint64_t config_hash(const ExperimentConfig& c) {
    const std::string s = nlohmann::json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

inline void write_header(std::ostream& os, const ExperimentConfig& c, const std::string& columns) {
    os << "# ksic " << version << "\n# config_hash fnv1a64:" << hash_hex(config_hash(c)) << "\n" << columns << "\n";
}

inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ---- design constants -----------------------------------------------------

inline double default_delta(double lambda1, double Y, double L) {
    return std::min(spectrum::solve_delta_o({3.0 * lambda1, 0.0, Y}).delta_o, spectrum::solve_delta_o({3.0 * lambda1, Y, L}).delta_o);
}

inline control::ControllerParams design(const ExperimentConfig& c) {
    const double delta = c.controller.delta ? *c.controller.delta : default_delta(c.lambda1, c.grid.Y, c.grid.L);
    return control::ControllerParams::design(c.lambda1, c.controller.alpha1, c.controller.alpha2, delta, c.grid.Y, c.grid.L);
}

// ---- initial data --------------------------------------------------------

/// Fills unset (non-positive) gains with 1.5x the dwell-time thresholds.
inline void default_gains(ExperimentConfig& c) {
    const double delta = c.controller.delta ? *c.controller.delta : default_delta(c.lambda1, c.grid.Y, c.grid.L);
    const auto ds = coeffs::delta_split(delta);
    const auto& s = c.schedule;
    if (!(c.controller.alpha1 > 0.0)) c.controller.alpha1 = std::max(1.5 * 2.0 * ds.delta2 * s.tbar2 / s.tbar1, 1.0);
    if (!(c.controller.alpha2 > 0.0)) c.controller.alpha2 = std::max(1.5 * 2.0 * ds.delta2 * s.tbar1 / s.tbar2, 1.0);
}

namespace detail {

inline double bump(double s) {
    const double b = std::sin(std::numbers::pi * s);
    return b * b;
}

inline void normalize(std::vector<double>& w, std::vector<double>& v, double amplitude) {
    double m = 0.0;
    for (double x : w) m = std::max(m, std::abs(x));
    for (double x : v) m = std::max(m, std::abs(x));
    if (m == 0.0) return;
    for (double& x : w) x *= amplitude / m;
    for (double& x : v) x *= amplitude / m;
}

}  // namespace detail

/// Initial state; presets vanish with zero slope at 0, Y and L.
inline pde::DualDomainState initial_state(const ExperimentConfig& c) {
    const auto& g = c.grid;
    auto s = pde::DualDomainState::zero(g, c.solver.t_start);
    if (c.initial.preset == "sampled") {
        s.w = c.initial.w;
        s.v = c.initial.v;
        return s;
    }
    if (c.initial.preset == "sine_bump") {
        for (int i = 0; i < g.n_w; ++i) s.w[i] = detail::bump(static_cast<double>(i) / (g.n_w - 1));
        for (int i = 0; i < g.n_v; ++i) s.v[i] = -0.5 * detail::bump(static_cast<double>(i) / (g.n_v - 1));
    } else {
        std::mt19937_64 rng(c.initial.seed);
        std::normal_distribution<double> N(0.0, 1.0);
        auto fill = [&](std::vector<double>& f) {
            std::vector<double> a(static_cast<std::size_t>(c.initial.modes)), b(a.size());
            for (std::size_t k = 0; k < a.size(); ++k) {
                a[k] = N(rng);
                b[k] = N(rng);
            }
            const int n = static_cast<int>(f.size());
            for (int i = 0; i < n; ++i) {
                const double x = static_cast<double>(i) / (n - 1);
                double sum = 0.0;
                for (std::size_t k = 0; k < a.size(); ++k) {
                    const double kk = static_cast<double>(k + 1);
                    sum += (a[k] * std::sin(2.0 * std::numbers::pi * kk * x) + b[k] * std::cos(2.0 * std::numbers::pi * kk * x)) / (kk * kk);
                }
                f[static_cast<std::size_t>(i)] = detail::bump(x) * sum;
            }
        };
        fill(s.w);
        fill(s.v);
    }
    detail::normalize(s.w, s.v, c.initial.amplitude);
    s.w.front() = s.w.back() = s.v.front() = s.v.back() = 0.0;
    return s;
}

// ---- runs ------------------------------------------------------------------

struct SummaryRow {
    double t = 0.0, V1 = 0.0, V2 = 0.0, u1 = 0.0, u2 = 0.0, u3 = 0.0;
    double wxxx0 = 0.0, wxxxY = 0.0, vxxxY = 0.0, vxxxL = 0.0, gamma = 0.0;
    double W() const { return V1 + V2; }
};

/// One I2 window of a controller-2 run and its Gronwall envelope.
struct WindowRecord {
    long k = 0;
    double t_entry = 0.0;
    double V1_entry = 0.0, V2_entry = 0.0, latched = 0.0;
    double V1_max = 0.0;
    double envelope = 0.0;
    bool complete = false;
    bool dominated() const { return V1_max <= envelope; }
};

struct RunResult {
    std::vector<SummaryRow> rows;       ///< every `stride` steps plus the last state
    std::vector<double> W_period_start; ///< W at t = k (Tbar1 + Tbar2) within the run
    std::vector<WindowRecord> windows;
    double W0 = 0.0;
    double norm0 = 0.0, norm_max = 0.0;  ///< L2 norm of u
    bool blew_up = false;
    double blowup_t = 0.0;
    std::string message;
    long steps = 0;
    long cfl_warnings = 0;
    control::ControllerParams params;
    pde::DualDomainState final_state;

    /// sup of W over the second half of the simulated interval
    double late_sup_W() const {
        if (rows.empty()) return 0.0;
        const double mid = 0.5 * (rows.front().t + rows.back().t);
        double m = 0.0;
        for (const auto& r : rows)
            if (r.t >= mid) m = std::max(m, r.W());
        return m;
    }
};

struct RunSinks {
    std::ostream* summary = nullptr;
    std::ostream* trajectory = nullptr;
};

inline SummaryRow summarize(const pde::DualDomainState& s, const pde::Grid& g, const pde::ControlInputs& in) {
    const auto lp = pde::lyapunov_pair(s, g);
    const auto tr = pde::boundary_third_derivatives(s, g);
    return {s.t, lp.V1, lp.V2, in.u1, in.u2, in.u3, tr.wxxx0, tr.wxxxY, tr.vxxxY, tr.vxxxL, pde::mass_gamma(s, g)};
}

inline void write_row(std::ostream& os, const SummaryRow& r) {
    os << fmt(r.t) << ',' << fmt(r.V1) << ',' << fmt(r.V2) << ',' << fmt(r.u1) << ',' << fmt(r.u2) << ',' << fmt(r.u3) << ','
       << fmt(r.wxxx0) << ',' << fmt(r.wxxxY) << ',' << fmt(r.vxxxY) << ',' << fmt(r.vxxxL) << ',' << fmt(r.gamma) << '\n';
}

inline void write_profile(std::ostream& os, const pde::DualDomainState& s, const pde::Grid& g) {
    for (int i = 0; i < g.n_w; ++i) os << fmt(s.t) << ',' << fmt(g.x_w(i)) << ',' << fmt(s.w[i]) << '\n';
    for (int i = 1; i < g.n_v; ++i) os << fmt(s.t) << ',' << fmt(g.x_v(i)) << ',' << fmt(s.v[i]) << '\n';
}

inline constexpr const char* summary_columns = "t,V1,V2,u1,u2,u3,wxxx0,wxxxY,vxxxY,vxxxL,gamma";

/// Sensing-restricted closed loop from the configured initial data. Blow-up
/// ends the run early with blew_up set; other errors propagate.
inline RunResult run_closed_loop(const ExperimentConfig& c, RunSinks sinks = {}) {
    c.validate();
    const auto mode = c.mode();
    RunResult res;
    if (mode != control::Mode::open_loop) res.params = design(c);
    if (mode == control::Mode::controller1 && !c.controller.force &&
        !switched::check_conditions(c.controller.alpha1, c.controller.alpha2, res.params.delta2, c.schedule.tbar1, c.schedule.tbar2))
        throw ConditionsViolated("controller 1 gains violate the dwell-time conditions (use force to override)");

    const auto& g = c.grid;
    pde::Solver solver(g, c.lambda1, c.solver.dt);
    pde::DualDomainState s = initial_state(c);
    control::LatchStore latch;
    const gronwall::EnvelopeParams env{res.params.delta1, res.params.delta2, res.params.C, res.params.P};

    if (sinks.summary) write_header(*sinks.summary, c, summary_columns);
    if (sinks.trajectory) write_header(*sinks.trajectory, c, "t,x,u");

    auto norm = [&](const pde::DualDomainState& st) { return std::sqrt(2.0 * pde::lyapunov_pair(st, g).W()); };
    res.W0 = pde::lyapunov_pair(s, g).W();
    res.norm0 = res.norm_max = norm(s);

    const double period = c.schedule.period();
    const long n_steps = std::lround((c.solver.T_end - c.solver.t_start) / c.solver.dt);
    long next_period = static_cast<long>(std::ceil(c.solver.t_start / period - 1e-9));
    WindowRecord* open = nullptr;

    auto record = [&](const SummaryRow& row) {
        res.rows.push_back(row);
        if (sinks.summary) write_row(*sinks.summary, row);
    };

    pde::ControlInputs in{};
    for (long n = 0; n <= n_steps; ++n) {
        const double t = c.solver.t_start + static_cast<double>(n) * c.solver.dt;
        s.t = t;
        const auto lp = pde::lyapunov_pair(s, g);
        if (std::abs(t - next_period * period) <= 0.5 * c.solver.dt) {
            res.W_period_start.push_back(lp.W());
            ++next_period;
        }
        in = (n < n_steps) ? control::controller_step(mode, t, s, g, c.schedule, res.params, latch) : in;

        if (mode == control::Mode::controller2) {
            const auto ph = control::phase_of(t, c.schedule);
            if (ph.phase == control::Phase::I2) {
                if (!open || open->k != ph.k) {
                    if (open) open->complete = true;
                    WindowRecord w;
                    w.k = ph.k;
                    w.t_entry = t;
                    w.V1_entry = lp.V1;
                    w.V2_entry = lp.V2;
                    w.latched = latch.latched;
                    w.envelope = gronwall::lemma13_envelope(c.schedule.tbar2, lp.V1, latch.latched, env).value;
                    res.windows.push_back(w);
                    open = &res.windows.back();
                }
                open->V1_max = std::max(open->V1_max, lp.V1);
            } else if (open) {
                // the window's closing instant belongs to the next I1 window
                open->V1_max = std::max(open->V1_max, lp.V1);
                open->complete = true;
                open = nullptr;
            }
        }

        if (n % c.outputs.stride == 0 || n == n_steps) record(summarize(s, g, in));
        if (sinks.trajectory && (n % c.outputs.trajectory_stride == 0 || n == n_steps)) write_profile(*sinks.trajectory, s, g);
        if (n == n_steps) break;

        try {
            solver.advance(s, in);
        } catch (const StepRejected& e) {
            res.blew_up = true;
            res.blowup_t = e.t;
            res.message = e.what();
            break;
        }
        ++res.steps;
        res.norm_max = std::max(res.norm_max, norm(s));
    }
    res.cfl_warnings = solver.cfl_warnings();
    res.final_state = s;
    return res;
}

inline nlohmann::json certificate_json(const ExperimentConfig& c, const control::ControllerParams& p) {
    nlohmann::json j;
    j["delta"] = p.delta;
    j["delta1"] = p.delta1;
    j["delta2"] = p.delta2;
    j["A_w"] = p.A_w();
    j["A_v"] = p.A_v();
    j["B"] = p.B;
    j["B_as_displayed"] = control::B_as_displayed(p);
    j["C"] = p.C;
    j["beta_kappa2"] = p.beta_kappa2;
    j["P"] = p.P;
    const switched::SwitchedParams sp{c.controller.alpha1, c.controller.alpha2, p.delta1, p.delta2};
    const bool ok = switched::check_conditions(sp.alpha1, sp.alpha2, sp.delta2, c.schedule.tbar1, c.schedule.tbar2);
    j["conditions_ok"] = ok;
    if (c.mode() == control::Mode::controller1) {
        if (ok) {
            const auto r = switched::theorem1_certificate(sp, c.schedule);
            j["rate_beta"] = r.rate_beta;
            j["overshoot_kappa"] = r.overshoot_kappa;
            j["overshoot_kappa_displayed"] = r.overshoot_kappa_displayed;
        }
    } else {
        j["b0"] = switched::lemma11_bo(p.delta1, sp.alpha2);
        try {
            const auto r = switched::theorem2_certificate(sp, c.schedule);
            j["margin_ok"] = true;
            j["q"] = r.q;
            j["p"] = r.p;
            j["q_simplified"] = r.q_simplified;
            j["p_simplified"] = r.p_simplified;
            j["M"] = r.M;
            j["residual_bound"] = r.residual_bound;
        } catch (const ConditionsViolated&) {
            j["margin_ok"] = false;
            j["margin"] = 2.0 * p.delta1 * c.schedule.tbar1 - std::cbrt(sp.alpha2) * c.schedule.tbar2;
        }
    }
    return j;
}

inline nlohmann::json run_report(const ExperimentConfig& c, const RunResult& r) {
    nlohmann::json j;
    j["version"] = version;
    j["config_hash"] = "fnv1a64:" + hash_hex(config_hash(c));
    j["steps"] = r.steps;
    j["blew_up"] = r.blew_up;
    if (r.blew_up) {
        j["blowup_t"] = r.blowup_t;
        j["message"] = r.message;
    }
    j["cfl_warnings"] = r.cfl_warnings;
    j["W0"] = r.W0;
    j["W_final"] = r.rows.empty() ? 0.0 : r.rows.back().W();
    j["late_sup_W"] = r.late_sup_W();
    j["norm_ratio_max"] = r.norm0 > 0.0 ? r.norm_max / r.norm0 : 0.0;
    j["W_period_start"] = r.W_period_start;
    if (c.mode() != control::Mode::open_loop) j["certificate"] = certificate_json(c, r.params);
    if (!r.windows.empty()) {
        auto& arr = j["I2_windows"] = nlohmann::json::array();
        for (const auto& w : r.windows)
            arr.push_back({{"k", w.k}, {"t_entry", w.t_entry}, {"V1_entry", w.V1_entry}, {"latched", w.latched},
                           {"V1_max", w.V1_max}, {"envelope", w.envelope}, {"dominated", w.dominated()}, {"complete", w.complete}});
    }
    return j;
}

/// Runs with files from c.outputs (empty paths are skipped).
inline RunResult run_with_outputs(const ExperimentConfig& c) {
    std::ofstream sum, traj;
    RunSinks sinks;
    if (!c.outputs.summary.empty()) {
        sum.open(c.outputs.summary);
        if (!sum) throw DomainError("cannot write " + c.outputs.summary);
        sinks.summary = &sum;
    }
    if (!c.outputs.trajectory.empty()) {
        traj.open(c.outputs.trajectory);
        if (!traj) throw DomainError("cannot write " + c.outputs.trajectory);
        sinks.trajectory = &traj;
    }
    RunResult r = run_closed_loop(c, sinks);
    if (!c.outputs.report.empty()) {
        std::ofstream rep(c.outputs.report);
        if (!rep) throw DomainError("cannot write " + c.outputs.report);
        rep << run_report(c, r).dump(2) << '\n';
    }
    return r;
}

// ---- sweeps ----------------------------------------------------------------

/// Worker count: hardware concurrency capped by KSIC_THREADS.
inline unsigned worker_count(std::size_t jobs) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("KSIC_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

struct SweepEntry {
    ExperimentConfig config;
    RunResult result;
    std::string error;
};

/// One run per config, fanned out over worker threads; results keep the
/// input order.
inline std::vector<SweepEntry> sweep(const std::vector<ExperimentConfig>& configs) {
    std::vector<SweepEntry> out(configs.size());
    const unsigned workers = worker_count(configs.size());
    auto job = [&](unsigned id) {
        for (std::size_t i = id; i < configs.size(); i += workers) {
            out[i].config = configs[i];
            try {
                out[i].result = run_closed_loop(configs[i]);
            } catch (const std::exception& e) {
                out[i].error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned id = 1; id < workers; ++id) pool.emplace_back(job, id);
    job(0);
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace ksic::experiment
