#include "pfou/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pfou {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    return out;
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
        throw ConfigError("key '" + key + "': expected a finite number, got '" + text + "'");
    return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
    long long v = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'");
    return v;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
    return out;
}

template <class F>
auto wrap(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("key '" + key + "': " + e.what());
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& source) {
    KeyValueConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        std::ostringstream where;
        where << source << ":" << lineno;
        if (eq == std::string::npos) throw ConfigError(where.str() + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(where.str() + ": empty key");
        if (value.empty()) throw ConfigError(where.str() + ": empty value for '" + key + "'");
        if (cfg.values_.count(key)) throw ConfigError(where.str() + ": duplicate key '" + key + "'");
        cfg.values_[key] = value;
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse(in, path.string());
}

void KeyValueConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }

const std::string& KeyValueConfig::require(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::optional<std::string>& fallback) const {
    const std::string v = has(key) || !fallback ? require(key) : *fallback;
    resolved_[key] = v;
    return v;
}

double KeyValueConfig::get_double(const std::string& key, const std::optional<double>& fallback) const {
    const double v = has(key) || !fallback ? parse_double(key, require(key)) : *fallback;
    resolved_[key] = format_double(v);
    return v;
}

int KeyValueConfig::get_int(const std::string& key, const std::optional<int>& fallback) const {
    long long v = has(key) || !fallback ? parse_integer(key, require(key)) : *fallback;
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError("key '" + key + "': value out of range");
    resolved_[key] = std::to_string(v);
    return static_cast<int>(v);
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, const std::optional<std::uint64_t>& fallback) const {
    std::uint64_t v = 0;
    if (has(key) || !fallback) {
        const std::string& text = require(key);
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size())
            throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + text + "'");
    } else {
        v = *fallback;
    }
    resolved_[key] = std::to_string(v);
    return v;
}

bool KeyValueConfig::get_bool(const std::string& key, const std::optional<bool>& fallback) const {
    bool v = false;
    if (has(key) || !fallback) {
        const std::string& t = require(key);
        if (t == "true" || t == "1" || t == "yes" || t == "on") {
            v = true;
        } else if (t == "false" || t == "0" || t == "no" || t == "off") {
            v = false;
        } else {
            throw ConfigError("key '" + key + "': expected true or false, got '" + t + "'");
        }
    } else {
        v = *fallback;
    }
    resolved_[key] = v ? "true" : "false";
    return v;
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
    std::vector<double> out;
    std::vector<std::string> canon;
    for (const auto& item : split_list(require(key))) {
        out.push_back(parse_double(key, item));
        canon.push_back(format_double(out.back()));
    }
    resolved_[key] = join(canon);
    return out;
}

std::vector<int> KeyValueConfig::get_ints(const std::string& key) const {
    std::vector<int> out;
    std::vector<std::string> canon;
    for (const auto& item : split_list(require(key))) {
        const long long v = parse_integer(key, item);
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
            throw ConfigError("key '" + key + "': value out of range");
        out.push_back(static_cast<int>(v));
        canon.push_back(std::to_string(v));
    }
    resolved_[key] = join(canon);
    return out;
}

void KeyValueConfig::require_known(const std::set<std::string>& allowed) const {
    std::vector<std::string> unknown;
    for (const auto& [k, v] : values_)
        if (!allowed.count(k)) unknown.push_back(k);
    if (!unknown.empty()) throw ConfigError("unknown config key(s): " + join(unknown));
}

const std::set<std::string> kModelKeys{"kind", "H", "alpha", "mu", "p", "basis", "basis_files"};

std::set<std::string> simulate_keys() {
    auto k = kModelKeys;
    k.insert({"n", "m", "seed", "noise", "y1_method", "y1_substeps"});
    return k;
}

std::set<std::string> estimate_keys() {
    return {"input", "p", "basis", "basis_files", "integral", "trace_alpha", "kind", "H"};
}

std::set<std::string> asymptotics_keys() {
    auto k = kModelKeys;
    k.insert({"sigma_form", "sigma2", "sigma2_replications", "sigma2_n", "sigma2_m", "seed", "lattice_tol"});
    return k;
}

std::set<std::string> mc_keys() {
    auto k = kModelKeys;
    k.insert({"scaling", "n_list", "m", "replications", "seed", "noise", "y1_method", "y1_substeps", "integral",
              "oracle_trace", "relative_tolerance", "magnitude_filter", "sigma_form", "sigma2_replications",
              "lattice_tol"});
    return k;
}

BasisSpec basis_from_config(const KeyValueConfig& cfg, std::optional<std::size_t> p_hint) {
    const std::string kind = cfg.get_string("basis", std::string("fourier"));
    if (kind == "fourier") {
        std::optional<int> fallback;
        if (p_hint) fallback = static_cast<int>(*p_hint);
        const int p = cfg.get_int("p", fallback);
        if (p < 1) throw ConfigError("key 'p': need at least one basis function");
        if (cfg.has("basis_files")) throw ConfigError("key 'basis_files' requires basis = custom");
        return BasisSpec::fourier(static_cast<std::size_t>(p));
    }
    if (kind == "custom") {
        std::vector<std::filesystem::path> files;
        for (const auto& f : split_list(cfg.get_string("basis_files"))) files.emplace_back(f);
        BasisSpec spec = wrap("basis_files", [&] { return BasisSpec::load_tables(files); });
        if (cfg.has("p") && cfg.get_int("p") != static_cast<int>(spec.size()))
            throw ConfigError("key 'p' does not match the number of basis files");
        cfg.note("p", std::to_string(spec.size()));
        return spec;
    }
    throw ConfigError("key 'basis': expected fourier or custom, got '" + kind + "'");
}

ModelSpec model_from_config(const KeyValueConfig& cfg) {
    const ModelKind kind = wrap("kind", [&] { return parse_model_kind(cfg.get_string("kind")); });
    cfg.note("kind", to_string(kind));
    const double h = cfg.get_double("H");
    const Hurst H = wrap("H", [&] { return Hurst(h); });
    const double alpha = cfg.get_double("alpha");
    const std::vector<double> mu = cfg.get_doubles("mu");
    const BasisSpec basis = basis_from_config(cfg, mu.size());
    if (mu.size() != basis.size())
        throw ConfigError("key 'mu': expected " + std::to_string(basis.size()) + " values (one per basis function)");
    Eigen::VectorXd m(static_cast<Eigen::Index>(mu.size()));
    for (std::size_t i = 0; i < mu.size(); ++i) m(static_cast<Eigen::Index>(i)) = mu[i];
    ModelSpec model{DriftParams{m, alpha, H}, basis, kind};
    wrap("model", [&] {
        model.validate();
        return 0;
    });
    return model;
}

SimulationOptions simulation_from_config(const KeyValueConfig& cfg) {
    SimulationOptions opt;
    const std::string noise = cfg.get_string("noise", std::string("on"));
    if (noise == "on") {
        opt.noise = NoiseMode::on;
    } else if (noise == "off") {
        opt.noise = NoiseMode::off;
    } else {
        throw ConfigError("key 'noise': expected on or off, got '" + noise + "'");
    }
    opt.y1_method = wrap("y1_method", [&] { return parse_y1_method(cfg.get_string("y1_method", std::string("stationary_cov"))); });
    opt.y1_substeps = cfg.get_int("y1_substeps", 4);
    if (opt.y1_substeps < 1) throw ConfigError("key 'y1_substeps': must be at least 1");
    return opt;
}

SimulateRequest simulate_request(const KeyValueConfig& cfg) {
    cfg.require_known(simulate_keys());
    SimulateRequest req{model_from_config(cfg)};
    req.n = cfg.get_int("n");
    req.m = cfg.get_int("m");
    if (req.n < 1) throw ConfigError("key 'n': need at least one period");
    if (req.m < 2) throw ConfigError("key 'm': need at least 2 steps per period");
    req.seed = cfg.get_u64("seed", 1);
    req.simulation = simulation_from_config(cfg);
    return req;
}

EstimateRequest estimate_request(const KeyValueConfig& cfg) {
    cfg.require_known(estimate_keys());
    EstimateRequest req;
    if (cfg.has("input")) req.input = cfg.get_string("input");
    if (cfg.has("p")) {
        const int p = cfg.get_int("p");
        if (p < 1) throw ConfigError("key 'p': need at least one basis function");
        req.p = static_cast<std::size_t>(p);
    }
    req.basis = cfg.get_string("basis", std::string("fourier"));
    if (req.basis != "fourier" && req.basis != "custom")
        throw ConfigError("key 'basis': expected fourier or custom, got '" + req.basis + "'");
    if (cfg.has("basis_files"))
        for (const auto& f : split_list(cfg.get_string("basis_files"))) req.basis_files.emplace_back(f);
    req.integral = wrap("integral", [&] { return parse_stochastic_integral(cfg.get_string("integral", std::string("divergence"))); });
    const std::string ta = cfg.get_string("trace_alpha", std::string("self"));
    if (ta != "self") {
        req.trace_alpha = cfg.get_double("trace_alpha");
        if (!(*req.trace_alpha >= 0.0)) throw ConfigError("key 'trace_alpha': must be non-negative or 'self'");
    }
    if (cfg.has("kind")) req.kind = wrap("kind", [&] { return parse_model_kind(cfg.get_string("kind")); });
    if (cfg.has("H")) {
        req.H = cfg.get_double("H");
        wrap("H", [&] { return Hurst(*req.H); });
    }
    return req;
}

AsymptoticsRequest asymptotics_request(const KeyValueConfig& cfg) {
    cfg.require_known(asymptotics_keys());
    AsymptoticsRequest req{model_from_config(cfg)};
    req.sigma_form = wrap("sigma_form", [&] { return parse_sigma_form(cfg.get_string("sigma_form", std::string("product_of_means"))); });
    if (req.model.kind == ModelKind::second_kind) {
        if (cfg.has("sigma2")) {
            req.sigma2 = cfg.get_double("sigma2");
            if (*req.sigma2 < 0.0) throw ConfigError("key 'sigma2': must be non-negative");
        } else {
            req.sigma2_replications = cfg.get_int("sigma2_replications", 500);
            req.sigma2_n = cfg.get_int("sigma2_n", 400);
            req.sigma2_m = cfg.get_int("sigma2_m", 50);
            req.seed = cfg.get_u64("seed", 1);
            if (req.sigma2_replications < 100) throw ConfigError("key 'sigma2_replications': need at least 100");
            if (req.sigma2_n < 1 || req.sigma2_m < 2) throw ConfigError("keys 'sigma2_n'/'sigma2_m': invalid horizon");
        }
        req.lattice_tol = cfg.get_double("lattice_tol", 1e-10);
        if (!(req.lattice_tol > 0.0)) throw ConfigError("key 'lattice_tol': must be positive");
    } else if (cfg.has("sigma2") || cfg.has("sigma2_replications") || cfg.has("lattice_tol")) {
        throw ConfigError("sigma2 and lattice keys only apply to second-kind models");
    }
    return req;
}

ExperimentPlan plan_from_config(const KeyValueConfig& cfg) {
    cfg.require_known(mc_keys());
    ExperimentPlan plan{model_from_config(cfg)};
    plan.scaling = wrap("scaling", [&] { return parse_scaling(cfg.get_string("scaling")); });
    plan.n_list = cfg.get_ints("n_list");
    plan.m = cfg.get_int("m", 50);
    plan.replications = cfg.get_int("replications");
    plan.base_seed = cfg.get_u64("seed", 1);
    plan.simulation = simulation_from_config(cfg);
    plan.integral = wrap("integral", [&] { return parse_stochastic_integral(cfg.get_string("integral", std::string("divergence"))); });
    plan.oracle_trace = cfg.get_bool("oracle_trace", true);
    plan.relative_tolerance = cfg.get_double("relative_tolerance", 0.25);
    plan.magnitude_filter = cfg.get_double("magnitude_filter", 0.10);
    plan.sigma_form = wrap("sigma_form", [&] { return parse_sigma_form(cfg.get_string("sigma_form", std::string("product_of_means"))); });
    if (plan.scaling == Scaling::clt_second) {
        plan.sigma2_replications = cfg.get_int("sigma2_replications", 500);
        plan.lattice_tol = cfg.get_double("lattice_tol", 1e-10);
    }
    wrap("experiment plan", [&] {
        plan.validate();
        return 0;
    });
    return plan;
}

}  // namespace pfou
