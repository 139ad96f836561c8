#pragma once

#include "core.hpp"
#include "evolve.hpp"
#include "experiments.hpp"
#include "groundstate.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace igp {

/// Resolved configuration as ordered "section.key" / value pairs, echoed into every output.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

/// Decimal with 17 significant digits, enough to round-trip any double.
inline std::string fmt17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_comment_header(std::ostream& os, const ConfigEcho& cfg)
{
    for (const auto& [k, v] : cfg) os << "# " << k << " = " << v << '\n';
}

inline nlohmann::ordered_json config_json(const ConfigEcho& cfg)
{
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : cfg) j[k] = v;
    return j;
}

inline nlohmann::ordered_json optional_json(const std::optional<double>& x)
{
    return x ? nlohmann::ordered_json(*x) : nlohmann::ordered_json(nullptr);
}

/// Two columns r, u(r); an imaginary column is added when the field is complex.
inline void write_profile(std::ostream& os, const RadialField& u, const ConfigEcho& cfg)
{
    write_comment_header(os, cfg);
    bool complex_valued = false;
    for (std::size_t i = 0; i < u.size() && !complex_valued; ++i) complex_valued = u[i].imag() != 0.0;
    os << (complex_valued ? "# r re im\n" : "# r u\n");
    for (std::size_t i = 0; i < u.size(); ++i) {
        os << fmt17(u.grid().r(i)) << ' ' << fmt17(u[i].real());
        if (complex_valued) os << ' ' << fmt17(u[i].imag());
        os << '\n';
    }
}

inline void write_series_csv(std::ostream& os, const DiagnosticSeries& s, const ConfigEcho& cfg)
{
    write_comment_header(os, cfg);
    os << "t,mass,energy,grad_sq,f,f_prime\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        os << fmt17(s.t[i]) << ',' << fmt17(s.mass[i]) << ',' << fmt17(s.energy[i]) << ',' << fmt17(s.grad_sq[i]) << ','
           << fmt17(s.f[i]) << ',' << fmt17(s.f_prime[i]) << '\n';
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r, const ConfigEcho& cfg)
{
    write_comment_header(os, cfg);
    os << "c,lambda,outcome,t_blow,t_pred,max_grad_ratio\n";
    auto opt = [](const std::optional<double>& x) { return x ? fmt17(*x) : std::string(); };
    for (const auto& row : r.rows)
        os << fmt17(row.c) << ',' << fmt17(row.lambda) << ',' << (row.error.empty() ? to_string(row.outcome) : "error") << ','
           << opt(row.t_blow) << ',' << opt(row.t_pred) << ',' << fmt17(row.max_grad_ratio) << '\n';
}

inline nlohmann::ordered_json sweep_json(const SweepResult& r, const ConfigEcho& cfg)
{
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
        nlohmann::ordered_json j;
        j["c"] = row.c;
        j["lambda"] = row.lambda;
        j["outcome"] = to_string(row.outcome);
        j["t_blow"] = optional_json(row.t_blow);
        j["t_pred"] = optional_json(row.t_pred);
        j["max_grad_ratio"] = row.max_grad_ratio;
        if (!row.error.empty()) j["error"] = row.error;
        rows.push_back(std::move(j));
    }
    nlohmann::ordered_json out;
    out["config"] = config_json(cfg);
    out["rows"] = std::move(rows);
    return out;
}

inline void write_levels_csv(std::ostream& os, const LevelEstimates& L, const ConfigEcho& cfg)
{
    write_comment_header(os, cfg);
    os << "d_omega,d_n_upper,d,trial_count\n";
    os << fmt17(L.d_omega) << ',' << fmt17(L.d_n_upper) << ',' << fmt17(L.d) << ',' << L.trial_count << '\n';
}

inline nlohmann::ordered_json levels_json(const LevelEstimates& L, const ConfigEcho& cfg)
{
    nlohmann::ordered_json out;
    out["config"] = config_json(cfg);
    out["d_omega"] = L.d_omega;
    out["d_n_upper"] = L.d_n_upper;
    out["d"] = L.d;
    out["trial_count"] = L.trial_count;
    return out;
}

inline nlohmann::ordered_json groundstate_json(const GroundStateResult& r, const ConfigEcho& cfg)
{
    nlohmann::ordered_json out;
    out["config"] = config_json(cfg);
    out["omega"] = r.omega;
    out["residual_sup"] = r.residual_sup;
    out["pohozaev_1"] = r.pohozaev_1;
    out["pohozaev_2"] = r.pohozaev_2;
    out["mass"] = r.mass;
    out["energy"] = r.energy;
    out["iterations"] = r.iterations;
    if (r.shoot_amplitude != 0.0) out["shoot_amplitude"] = r.shoot_amplitude;
    return out;
}

inline nlohmann::ordered_json uniqueness_json(const UniquenessReport& u, const ConfigEcho& cfg)
{
    nlohmann::ordered_json out;
    out["config"] = config_json(cfg);
    out["A"] = u.A;
    out["B"] = u.B;
    out["C"] = u.C;
    out["k"] = u.k;
    out["B_derived"] = u.B_derived;
    out["k_radius"] = u.k_radius;
    out["sign_changes"] = u.sign_changes;
    out["conditions_hold"] = u.conditions_hold;
    out["r"] = u.r;
    out["a_of_r"] = u.a_of_r;
    out["beta_of_r"] = u.beta_of_r;
    out["c_of_r"] = u.c_of_r;
    return out;
}

inline void write_json(std::ostream& os, const nlohmann::ordered_json& j) { os << j.dump(2) << '\n'; }

/// Open for writing or throw with the path in the message.
inline std::ofstream open_output(const std::string& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    return os;
}

} // namespace igp
