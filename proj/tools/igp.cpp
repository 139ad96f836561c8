#include "igp/acceptance.hpp"
#include "igp/config.hpp"
#include "igp/experiments.hpp"
#include "igp/io.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace igp;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_solver = 1;
constexpr int exit_config = 2;

struct Context {
    RunConfig cfg;
    ConfigEcho echo;
    fs::path out;
    std::string command;

    std::string path(const std::string& name) const { return (out / name).string(); }
};

GridPtr grid_of(const Context& c) { return make_grid(c.cfg.model.dim, c.cfg.h, c.cfg.rmax); }

int cmd_groundstate(const Context& c, const ModelParams& m)
{
    const RunConfig& k = c.cfg;
    GroundStateResult r;
    switch (k.method) {
    case GroundStateMethod::Q: r = shoot_Q(m, make_grid(m.dim, k.h, k.profile_rmax), k.tol); break;
    case GroundStateMethod::phi: r = shoot_phi(m, grid_of(c), k.tol); break;
    case GroundStateMethod::flow: {
        FlowOptions fo;
        fo.ball_radius = k.ball_radius;
        fo.tol = k.tol;
        fo.max_iter = k.max_iter;
        r = normalized_gradient_flow(k.q, m, grid_of(c), fo);
        break;
    }
    }
    auto prof = open_output(c.path("profile.txt"));
    write_profile(prof, r.profile, c.echo);
    auto js = open_output(c.path("groundstate.json"));
    write_json(js, groundstate_json(r, c.echo));
    std::cout << "omega=" << fmt17(r.omega) << " mass=" << fmt17(r.mass) << " residual_sup=" << fmt17(r.residual_sup) << '\n';
    return exit_ok;
}

RadialField initial_datum(const Context& c, const ModelParams& m)
{
    const RunConfig& k = c.cfg;
    const GridPtr g = grid_of(c);
    switch (k.initial) {
    case InitialData::gaussian: {
        const double a = k.amplitude, w2 = 2.0 * k.width * k.width;
        return RadialField::sample(g, [=](double r) { return a * std::exp(-r * r / w2); });
    }
    case InitialData::ground_state: return shoot_phi(m, g, k.tol).profile.scaled(k.amplitude);
    case InitialData::threshold: return threshold_datum(m, k.amplitude, k.lambda, g);
    }
    throw ParamError("unknown initial datum");
}

int cmd_evolve(const Context& c, const ModelParams& m)
{
    const RunConfig& k = c.cfg;
    EvolveConfig ec;
    ec.dt = k.dt;
    ec.t_end = k.t_end;
    ec.free_equation = k.free_equation;
    ec.blowup_gradient_factor = k.blowup_gradient_factor;
    ec.record_every = k.record_every;
    const EvolveResult r = evolve(initial_datum(c, m), m, ec);
    auto os = open_output(c.path("series.csv"));
    write_series_csv(os, r.series, c.echo);
    std::cout << "t_final=" << fmt17(r.t_final);
    if (r.blowup_time) std::cout << " blowup_time=" << fmt17(*r.blowup_time);
    if (r.aborted_nan) std::cout << " aborted_non_finite";
    std::cout << '\n';
    return exit_ok;
}

int cmd_sweep(const Context& c, const ModelParams& m)
{
    const RunConfig& k = c.cfg;
    SweepConfig sc;
    sc.h = k.h;
    sc.rmax = k.rmax;
    sc.dt = k.dt;
    sc.horizon = k.horizon;
    sc.blowup_gradient_factor = k.blowup_gradient_factor;
    sc.workers = k.workers;
    const SweepResult r = threshold_sweep(m, k.c_values, k.lambda_values, sc);
    auto csv = open_output(c.path("sweep.csv"));
    write_sweep_csv(csv, r, c.echo);
    auto js = open_output(c.path("sweep.json"));
    write_json(js, sweep_json(r, c.echo));
    bool failed = false;
    for (const auto& row : r.rows) {
        std::cout << "c=" << row.c << " lambda=" << row.lambda << ' ' << (row.error.empty() ? to_string(row.outcome) : "error");
        if (row.t_blow) std::cout << " t_blow=" << *row.t_blow;
        if (row.t_pred) std::cout << " t_pred=" << *row.t_pred;
        if (!row.error.empty()) std::cout << " (" << row.error << ")";
        std::cout << '\n';
        failed = failed || !row.error.empty();
    }
    if (failed) throw SolverError("sweep rows failed", "see the error field of the sweep output");
    return exit_ok;
}

int cmd_levels(const Context& c, const ModelParams& m)
{
    const RunConfig& k = c.cfg;
    LevelOptions lo;
    lo.h = k.h;
    lo.rmax = k.rmax;
    lo.random_trials = k.random_trials;
    lo.seeded_trials = k.seeded_trials;
    lo.perturbation = k.perturbation;
    lo.seed = k.seed;
    lo.workers = k.workers;
    const LevelEstimates L = estimate_levels(m, lo, k.dn_trials);
    auto js = open_output(c.path("levels.json"));
    write_json(js, levels_json(L, c.echo));
    auto csv = open_output(c.path("levels.csv"));
    write_levels_csv(csv, L, c.echo);
    std::cout << "d_omega=" << fmt17(L.d_omega) << " d_n_upper=" << fmt17(L.d_n_upper) << " d=" << fmt17(L.d) << '\n';
    return exit_ok;
}

int cmd_lens(const Context& c, const ModelParams& m)
{
    const RunConfig& k = c.cfg;
    LensConfig lc;
    lc.h = k.h;
    lc.rmax = k.rmax;
    lc.free_rmax = k.free_rmax;
    lc.dt = k.dt;
    lc.samples = k.lens_samples;
    lc.amplitude = k.lens_amplitude;
    const LensReport rep = lens_equivalence(m, lc);
    nlohmann::ordered_json j;
    j["config"] = config_json(c.echo);
    j["t"] = rep.t;
    j["s"] = rep.s;
    j["rel_l2"] = rep.rel_l2;
    j["mass_lens"] = rep.mass_lens;
    j["mass_direct"] = rep.mass_direct;
    j["worst"] = rep.worst;
    auto js = open_output(c.path("lens.json"));
    write_json(js, j);
    for (std::size_t i = 0; i < rep.t.size(); ++i) std::cout << "t=" << rep.t[i] << " rel_l2=" << rep.rel_l2[i] << '\n';
    std::cout << "worst=" << rep.worst << '\n';
    return exit_ok;
}

int cmd_uniqueness(const Context& c, const ModelParams& m)
{
    std::vector<double> radii;
    for (int i = 1; i <= 16; ++i) radii.push_back(0.25 * i);
    const UniquenessReport u = uniqueness_monitor(m.dim, m.b, m.p, m.omega.value_or(0.0), radii);
    auto js = open_output(c.path("uniqueness.json"));
    write_json(js, uniqueness_json(u, c.echo));
    std::cout << "A=" << fmt17(u.A) << " C=" << fmt17(u.C) << " sign_changes=" << u.sign_changes
              << " conditions_hold=" << (u.conditions_hold ? "true" : "false") << '\n';
    return exit_ok;
}

int cmd_verify(const Context& c, const std::vector<int>& only)
{
    acceptance::Setup s;
    s.dim = c.cfg.model.dim;
    s.b = c.cfg.model.b;
    s.gamma = c.cfg.model.gamma;
    s.h = c.cfg.h;
    s.rmax = c.cfg.rmax;
    s.seed = c.cfg.seed;
    s.workers = c.cfg.workers;
    const auto results = acceptance::run(s, std::cout, only);
    int failed = 0;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        failed += r.pass ? 0 : 1;
        rows.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    }
    nlohmann::ordered_json j;
    j["config"] = config_json(c.echo);
    j["criteria"] = std::move(rows);
    auto js = open_output(c.path("verify.json"));
    write_json(js, j);
    std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed\n";
    if (failed) throw SolverError("acceptance failure", std::to_string(failed) + " criteria failed");
    return exit_ok;
}

void mark_failed(const Context& c, const std::string& what)
{
    std::error_code ec;
    if (c.out.empty() || !fs::is_directory(c.out, ec)) return;
    std::ofstream os(c.path(c.command + ".failed"));
    os << what << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Inhomogeneous Gross-Pitaevskii numerical laboratory"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_dir = ".";
    std::vector<int> only;
    app.add_option("-c,--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("-o,--out", out_dir, "output directory");
    const std::vector<std::pair<const char*, const char*>> subs = {
        {"groundstate", "shoot Q or phi_omega, or run the normalized gradient flow"},
        {"evolve", "evolve initial data and write the diagnostic series"},
        {"sweep", "threshold sweep over amplitudes and dilations"},
        {"levels", "estimate the variational levels d_omega, d_n and d"},
        {"lens", "compare the lens image of a free run with a trapped run"},
        {"verify", "run the acceptance suite"},
        {"uniqueness", "coefficients of the uniqueness criterion"},
    };
    for (const auto& [name, help] : subs) {
        CLI::App* sub = app.add_subcommand(name, help);
        if (std::string(name) == "verify") sub->add_option("--only", only, "criterion numbers to run");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_config;
    }

    Context c;
    c.command = app.get_subcommands().front()->get_name();
    c.out = out_dir;
    ModelParams m;
    try {
        if (!config_path.empty()) c.cfg = load_config(config_path);
        c.echo = config_echo(c.cfg);
        m = validate_params(c.cfg.model);
        fs::create_directories(c.out);
        fs::remove(c.path(c.command + ".failed"));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const ParamError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "output directory error: " << e.what() << '\n';
        return exit_config;
    }

    try {
        if (c.command == "groundstate") return cmd_groundstate(c, m);
        if (c.command == "evolve") return cmd_evolve(c, m);
        if (c.command == "sweep") return cmd_sweep(c, m);
        if (c.command == "levels") return cmd_levels(c, m);
        if (c.command == "lens") return cmd_lens(c, m);
        if (c.command == "uniqueness") return cmd_uniqueness(c, m);
        return cmd_verify(c, only);
    } catch (const ParamError& e) {
        std::cerr << "error: " << e.what() << '\n';
        mark_failed(c, e.what());
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        mark_failed(c, e.what());
        return exit_solver;
    }
}
