#pragma once

#include "core.hpp"
#include "io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace igp {

/// Malformed or unknown configuration entry; `key` is "section.name" when known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what) : std::runtime_error(what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

enum class InitialData { gaussian, ground_state, threshold };

enum class GroundStateMethod { Q, phi, flow };

struct RunConfig {
    RawParams model{3, 0.5, 2.0, 1.0, 0.0, 1.0};

    double h = 2e-3;
    double rmax = 8.0;

    double dt = 1e-3;
    double t_end = 1.0;
    bool free_equation = false;
    double blowup_gradient_factor = 1e3;
    int record_every = 10;
    /// gaussian: amplitude * exp(-r^2 / (2 width^2)); ground_state: amplitude * phi_omega;
    /// threshold: amplitude * lambda^{N/2} Q(lambda r).
    InitialData initial = InitialData::gaussian;
    double amplitude = 0.2;
    double width = 1.224744871391589;
    double lambda = 1.0;

    GroundStateMethod method = GroundStateMethod::phi;
    double tol = 1e-8;
    double q = 1.0;
    std::optional<double> ball_radius;
    int max_iter = 20000;
    double profile_rmax = 30.0;

    std::vector<double> c_values{0.8, 0.9, 0.95, 1.0, 1.05, 1.1};
    std::vector<double> lambda_values{2.0};
    std::optional<double> horizon;

    int random_trials = 200;
    int seeded_trials = 20;
    double perturbation = 0.05;
    int dn_trials = 16;

    double free_rmax = 30.0;
    int lens_samples = 10;
    double lens_amplitude = 1.0;

    std::uint64_t seed = 1;
    unsigned workers = 1;
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& s)
{
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key, "config key '" + key + "': expected a number, got '" + s + "'");
    }
    if (pos != s.size()) throw ConfigError(key, "config key '" + key + "': expected a number, got '" + s + "'");
    return v;
}

inline long long parse_int(const std::string& key, const std::string& s)
{
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key, "config key '" + key + "': expected an integer, got '" + s + "'");
    }
    if (pos != s.size()) throw ConfigError(key, "config key '" + key + "': expected an integer, got '" + s + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& s)
{
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(key, "config key '" + key + "': expected true or false, got '" + s + "'");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& s)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        if (a == std::string::npos) throw ConfigError(key, "config key '" + key + "': empty list entry");
        out.push_back(parse_double(key, item.substr(a, b - a + 1)));
    }
    if (out.empty()) throw ConfigError(key, "config key '" + key + "': empty list");
    return out;
}

inline std::string list_string(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt17(v[i]);
    return s;
}

struct ConfigEntry {
    const char* key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

inline const std::vector<ConfigEntry>& config_schema()
{
    using C = RunConfig;
    auto real = [](double C::*f, const char* key) {
        return ConfigEntry{key, [f, key](C& c, const std::string& s) { c.*f = parse_double(key, s); },
                           [f](const C& c) { return fmt17(c.*f); }};
    };
    auto opt_real = [](std::optional<double> C::*f, const char* key) {
        return ConfigEntry{key,
                           [f, key](C& c, const std::string& s) {
                               if (s == "none") c.*f = std::nullopt;
                               else c.*f = parse_double(key, s);
                           },
                           [f](const C& c) { return c.*f ? fmt17(*(c.*f)) : std::string("none"); }};
    };
    auto integer = [](int C::*f, const char* key) {
        return ConfigEntry{key, [f, key](C& c, const std::string& s) { c.*f = static_cast<int>(parse_int(key, s)); },
                           [f](const C& c) { return std::to_string(c.*f); }};
    };
    auto list = [](std::vector<double> C::*f, const char* key) {
        return ConfigEntry{key, [f, key](C& c, const std::string& s) { c.*f = parse_list(key, s); },
                           [f](const C& c) { return list_string(c.*f); }};
    };
    static const std::vector<ConfigEntry> schema = {
        {"model.dim", [](C& c, const std::string& s) { c.model.dim = static_cast<int>(parse_int("model.dim", s)); },
         [](const C& c) { return std::to_string(c.model.dim); }},
        {"model.b", [](C& c, const std::string& s) { c.model.b = parse_double("model.b", s); },
         [](const C& c) { return fmt17(c.model.b); }},
        {"model.p", [](C& c, const std::string& s) { c.model.p = parse_double("model.p", s); },
         [](const C& c) { return fmt17(c.model.p); }},
        {"model.gamma", [](C& c, const std::string& s) { c.model.gamma = parse_double("model.gamma", s); },
         [](const C& c) { return fmt17(c.model.gamma); }},
        {"model.omega",
         [](C& c, const std::string& s) {
             if (s == "none") c.model.omega = std::nullopt;
             else c.model.omega = parse_double("model.omega", s);
         },
         [](const C& c) { return c.model.omega ? fmt17(*c.model.omega) : std::string("none"); }},
        {"model.coupling", [](C& c, const std::string& s) { c.model.coupling = parse_double("model.coupling", s); },
         [](const C& c) { return fmt17(c.model.coupling); }},
        real(&C::h, "grid.h"),
        real(&C::rmax, "grid.rmax"),
        real(&C::dt, "evolve.dt"),
        real(&C::t_end, "evolve.t_end"),
        {"evolve.free_equation", [](C& c, const std::string& s) { c.free_equation = parse_bool("evolve.free_equation", s); },
         [](const C& c) { return std::string(c.free_equation ? "true" : "false"); }},
        real(&C::blowup_gradient_factor, "evolve.blowup_gradient_factor"),
        integer(&C::record_every, "evolve.record_every"),
        {"evolve.initial",
         [](C& c, const std::string& s) {
             if (s == "gaussian") c.initial = InitialData::gaussian;
             else if (s == "ground_state") c.initial = InitialData::ground_state;
             else if (s == "threshold") c.initial = InitialData::threshold;
             else throw ConfigError("evolve.initial", "config key 'evolve.initial': expected gaussian, ground_state or threshold, got '" + s + "'");
         },
         [](const C& c) {
             return std::string(c.initial == InitialData::gaussian ? "gaussian"
                                : c.initial == InitialData::ground_state ? "ground_state" : "threshold");
         }},
        real(&C::amplitude, "evolve.amplitude"),
        real(&C::width, "evolve.width"),
        real(&C::lambda, "evolve.lambda"),
        {"groundstate.method",
         [](C& c, const std::string& s) {
             if (s == "Q") c.method = GroundStateMethod::Q;
             else if (s == "phi") c.method = GroundStateMethod::phi;
             else if (s == "flow") c.method = GroundStateMethod::flow;
             else throw ConfigError("groundstate.method", "config key 'groundstate.method': expected Q, phi or flow, got '" + s + "'");
         },
         [](const C& c) {
             return std::string(c.method == GroundStateMethod::Q ? "Q" : c.method == GroundStateMethod::phi ? "phi" : "flow");
         }},
        real(&C::tol, "groundstate.tol"),
        real(&C::q, "groundstate.q"),
        opt_real(&C::ball_radius, "groundstate.ball_radius"),
        integer(&C::max_iter, "groundstate.max_iter"),
        real(&C::profile_rmax, "groundstate.profile_rmax"),
        list(&C::c_values, "sweep.c_values"),
        list(&C::lambda_values, "sweep.lambda_values"),
        opt_real(&C::horizon, "sweep.horizon"),
        integer(&C::random_trials, "levels.random_trials"),
        integer(&C::seeded_trials, "levels.seeded_trials"),
        real(&C::perturbation, "levels.perturbation"),
        integer(&C::dn_trials, "levels.dn_trials"),
        real(&C::free_rmax, "lens.free_rmax"),
        integer(&C::lens_samples, "lens.samples"),
        real(&C::lens_amplitude, "lens.amplitude"),
        {"run.seed",
         [](C& c, const std::string& s) {
             const long long v = parse_int("run.seed", s);
             if (v < 0) throw ConfigError("run.seed", "config key 'run.seed': must be nonnegative");
             c.seed = static_cast<std::uint64_t>(v);
         },
         [](const C& c) { return std::to_string(c.seed); }},
        {"run.workers",
         [](C& c, const std::string& s) {
             const long long v = parse_int("run.workers", s);
             if (v < 1 || v > 1024) throw ConfigError("run.workers", "config key 'run.workers': must lie in [1, 1024]");
             c.workers = static_cast<unsigned>(v);
         },
         [](const C& c) { return std::to_string(c.workers); }},
    };
    return schema;
}

} // namespace detail

/// Every key of the schema with its resolved value, in schema order.
inline ConfigEcho config_echo(const RunConfig& c)
{
    ConfigEcho out;
    for (const auto& e : detail::config_schema()) out.emplace_back(e.key, e.get(c));
    return out;
}

/// Parse INI text; any key outside the schema is rejected by name.
inline RunConfig parse_config(std::istream& in)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("", std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    RunConfig cfg;
    const auto& schema = detail::config_schema();
    for (const auto& [section, body] : tree) {
        const bool known_section = std::any_of(schema.begin(), schema.end(), [&](const detail::ConfigEntry& e) {
            return std::string(e.key).rfind(section + ".", 0) == 0;
        });
        if (!known_section || !body.data().empty())
            throw ConfigError(section, "unknown config key '" + section + "' (keys must sit inside a known [section])");
        for (const auto& [name, value] : body) {
            const std::string key = section + "." + name;
            auto it = std::find_if(schema.begin(), schema.end(), [&](const detail::ConfigEntry& e) { return key == e.key; });
            if (it == schema.end()) throw ConfigError(key, "unknown config key '" + key + "'");
            it->set(cfg, value.get_value<std::string>());
        }
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path);
    return parse_config(in);
}

} // namespace igp
