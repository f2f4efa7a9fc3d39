#include "itosim/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "itosim/error.hpp"

namespace itosim::cli {

namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
    throw ConfigError("config field '" + path + "': " + what);
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> keys) {
    if (!j.is_object()) field_error(path.empty() ? "<root>" : path, "expected an object");
    const std::set<std::string_view> allowed(keys);
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) field_error(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
}

std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

void read(const json& j, const std::string& path, const char* key, double& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_number()) field_error(join(path, key), "expected a number");
    out = v.get<double>();
}

void read(const json& j, const std::string& path, const char* key, std::size_t& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_number_unsigned()) field_error(join(path, key), "expected a non-negative integer");
    out = v.get<std::size_t>();
}

void read(const json& j, const std::string& path, const char* key, std::uint64_t& out, bool) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_number_unsigned()) field_error(join(path, key), "expected a non-negative integer");
    out = v.get<std::uint64_t>();
}

void read(const json& j, const std::string& path, const char* key, std::string& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_string()) field_error(join(path, key), "expected a string");
    out = v.get<std::string>();
}

void read(const json& j, const std::string& path, const char* key, std::vector<std::size_t>& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_array()) field_error(join(path, key), "expected an array of integers");
    out.clear();
    for (const json& e : v) {
        if (!e.is_number_unsigned()) field_error(join(path, key), "expected an array of non-negative integers");
        out.push_back(e.get<std::size_t>());
    }
}

template <class F>
auto translate(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        field_error(path, e.what());
    }
}

ModelConfig parse_model(const json& j) {
    allow_keys(j, "model", {"name", "params"});
    ModelConfig m;
    read(j, "model", "name", m.name);
    const json params = j.contains("params") ? j.at("params") : json::object();
    if (m.name == "black_scholes") {
        allow_keys(params, "model.params", {"r", "sigma", "x0"});
        read(params, "model.params", "r", m.black_scholes.r);
        read(params, "model.params", "sigma", m.black_scholes.sigma);
        read(params, "model.params", "x0", m.black_scholes.x0);
        translate("model.params", [&] { m.black_scholes.validate(); });
    } else if (m.name == "heston") {
        allow_keys(params, "model.params", {"r", "theta", "kappa", "xi", "rho", "eta", "s0", "v0"});
        HestonParams& h = m.heston;
        read(params, "model.params", "r", h.r);
        read(params, "model.params", "theta", h.theta);
        read(params, "model.params", "kappa", h.kappa);
        read(params, "model.params", "xi", h.xi);
        read(params, "model.params", "rho", h.rho);
        read(params, "model.params", "eta", h.eta);
        read(params, "model.params", "s0", h.s0);
        read(params, "model.params", "v0", h.v0);
        translate("model.params", [&] { h.validate(); });
    } else {
        field_error("model.name", "unknown model '" + m.name + "' (black_scholes, heston)");
    }
    return m;
}

MethodConfig parse_method(const json& j, const std::string& path) {
    allow_keys(j, path, {"type", "resolution", "coupling"});
    MethodConfig m;
    std::string type;
    read(j, path, "type", type);
    if (type.empty()) field_error(join(path, "type"), "missing");
    m.kind = translate(join(path, "type"), [&] { return iterint::parse_method(type); });
    std::string coupling = "independent";
    read(j, path, "coupling", coupling);
    if (coupling == "independent") {
        m.coupling = iterint::FourierCoupling::Independent;
    } else if (coupling == "path") {
        m.coupling = iterint::FourierCoupling::Path;
    } else {
        field_error(join(path, "coupling"), "expected 'independent' or 'path'");
    }
    if (j.contains("resolution")) {
        const std::string rpath = join(path, "resolution");
        const json& r = j.at("resolution");
        allow_keys(r, rpath, {"rule", "value"});
        std::string rule = "fixed";
        double value = 1.0;
        read(r, rpath, "rule", rule);
        read(r, rpath, "value", value);
        if (rule == "fixed") {
            if (!(value >= 1.0) || value != std::floor(value)) field_error(join(rpath, "value"), "fixed n_K must be an integer >= 1");
            m.resolution = SubdivisionRule::fixed(static_cast<std::size_t>(value));
        } else if (rule == "per_delta") {
            m.resolution = SubdivisionRule::per_delta(value);
        } else {
            field_error(join(rpath, "rule"), "expected 'fixed' or 'per_delta'");
        }
        translate(rpath, [&] { m.resolution.validate(); });
    }
    return m;
}

std::vector<SchemeConfig> parse_schemes(const json& j, const ModelConfig& model) {
    if (!j.is_array()) field_error("schemes", "expected an array");
    std::vector<SchemeConfig> out;
    std::set<std::string> labels;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string path = "schemes[" + std::to_string(i) + "]";
        allow_keys(j[i], path, {"label", "scheme", "method"});
        SchemeConfig s;
        read(j[i], path, "scheme", s.scheme);
        read(j[i], path, "label", s.label);
        if (s.label.empty()) s.label = s.scheme;
        if (s.label.empty() || s.label.find_first_of("/\\ ") != std::string::npos)
            field_error(join(path, "label"), "must be a non-empty name without spaces or slashes");
        if (!labels.insert(s.label).second) field_error(join(path, "label"), "duplicate label '" + s.label + "'");
        const bool bs = model.name == "black_scholes";
        const std::set<std::string> known = bs ? std::set<std::string>{"euler", "milstein"}
                                               : std::set<std::string>{"euler", "milstein_1d", "milstein_2d", "milstein_md"};
        if (!known.count(s.scheme)) field_error(join(path, "scheme"), "unknown scheme '" + s.scheme + "' for " + model.name);
        if (j[i].contains("method")) s.method = parse_method(j[i].at("method"), join(path, "method"));
        if (!bs && (s.scheme == "milstein_2d" || s.scheme == "milstein_md") && !s.method)
            field_error(join(path, "method"), "required for " + s.scheme);
        out.push_back(s);
    }
    return out;
}

StudySection parse_study(const json& j) {
    allow_keys(j, "study", {"base_delta", "factor", "levels", "replicates", "mode", "metric", "max_divergent_fraction"});
    StudySection s;
    read(j, "study", "base_delta", s.base_delta);
    read(j, "study", "factor", s.factor);
    read(j, "study", "levels", s.levels);
    read(j, "study", "replicates", s.replicates);
    read(j, "study", "max_divergent_fraction", s.max_divergent_fraction);
    std::string text;
    read(j, "study", "mode", text);
    if (!text.empty()) s.mode = translate("study.mode", [&] { return parse_mode(text); });
    text.clear();
    read(j, "study", "metric", text);
    if (!text.empty()) s.metric = translate("study.metric", [&] { return parse_metric(text); });
    if (!(s.max_divergent_fraction >= 0.0 && s.max_divergent_fraction <= 1.0))
        field_error("study.max_divergent_fraction", "must lie in [0, 1]");
    return s;
}

IntegralsSection parse_integrals(const json& j) {
    allow_keys(j, "integrals", {"experiment", "delta", "samples", "intervals", "steps", "max_log2", "oracle_factor",
                                "oracle_steps", "fine_steps", "n_k", "p"});
    IntegralsSection s;
    read(j, "integrals", "experiment", s.experiment);
    read(j, "integrals", "delta", s.delta);
    read(j, "integrals", "samples", s.samples);
    read(j, "integrals", "intervals", s.intervals);
    read(j, "integrals", "steps", s.steps);
    read(j, "integrals", "max_log2", s.max_log2);
    read(j, "integrals", "oracle_factor", s.oracle_factor);
    read(j, "integrals", "oracle_steps", s.oracle_steps);
    read(j, "integrals", "fine_steps", s.fine_steps);
    read(j, "integrals", "n_k", s.n_k);
    read(j, "integrals", "p", s.p);
    const std::set<std::string> known{"pairing", "last_interval", "mse_law", "levy_rate"};
    if (!known.count(s.experiment))
        field_error("integrals.experiment", "unknown experiment '" + s.experiment + "' (pairing, last_interval, mse_law, levy_rate)");
    if (!(s.delta > 0.0)) field_error("integrals.delta", "must be > 0");
    if (s.samples == 0) field_error("integrals.samples", "must be >= 1");
    return s;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }
    allow_keys(j, "", {"model", "t0", "T", "schemes", "study", "functionals", "strike", "simulate", "integrals", "seed",
                       "workers", "output"});
    RunConfig cfg;
    if (j.contains("model")) cfg.model = parse_model(j.at("model"));
    read(j, "", "t0", cfg.t0);
    read(j, "", "T", cfg.t_end);
    if (!(cfg.t_end > cfg.t0)) field_error("T", "must exceed t0");
    if (j.contains("schemes")) cfg.schemes = parse_schemes(j.at("schemes"), cfg.model);
    if (j.contains("study")) cfg.study = parse_study(j.at("study"));
    if (j.contains("functionals")) {
        const json& f = j.at("functionals");
        if (!f.is_array()) field_error("functionals", "expected an array of names");
        const std::set<std::string> known = cfg.model.name == "heston"
                                                ? std::set<std::string>{"asset", "variance", "call", "put"}
                                                : std::set<std::string>{"state", "call", "put"};
        for (const json& e : f) {
            if (!e.is_string() || !known.count(e.get<std::string>()))
                field_error("functionals", "unknown functional " + e.dump() + " for " + cfg.model.name);
            cfg.functionals.push_back(e.get<std::string>());
        }
    }
    if (cfg.functionals.empty()) cfg.functionals = {cfg.model.name == "heston" ? "asset" : "state"};
    read(j, "", "strike", cfg.strike);
    if (!(cfg.strike > 0.0)) field_error("strike", "must be > 0");
    if (j.contains("simulate")) {
        allow_keys(j.at("simulate"), "simulate", {"steps"});
        read(j.at("simulate"), "simulate", "steps", cfg.simulate_steps);
        if (cfg.simulate_steps == 0) field_error("simulate.steps", "must be >= 1");
    }
    if (j.contains("integrals")) cfg.integrals = parse_integrals(j.at("integrals"));
    read(j, "", "seed", cfg.seed, true);
    std::size_t workers = 1;
    read(j, "", "workers", workers);
    if (workers == 0 || workers > 1024) field_error("workers", "must lie in [1, 1024]");
    cfg.workers = static_cast<int>(workers);
    read(j, "", "output", cfg.output);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return parse_config(text.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace itosim::cli
